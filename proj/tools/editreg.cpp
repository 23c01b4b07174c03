// editreg command-line tool. Every subcommand prints a JSON report with a
// "deterministic" section (a pure function of inputs, flags and seed) and a
// "timing" section.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json_codec.hpp"

#include "editreg/correspond.hpp"
#include "editreg/error.hpp"
#include "editreg/filter.hpp"
#include "editreg/formats.hpp"
#include "editreg/io.hpp"
#include "editreg/lift.hpp"
#include "editreg/pipeline.hpp"
#include "editreg/register.hpp"
#include "editreg/synth.hpp"

namespace fs = std::filesystem;
using namespace editreg;
using jsonc::json;

namespace {

struct Common {
    std::string report;  // empty = stdout
    std::optional<std::string> config;
    ConfigOverrides over;
};

void add_config_flags(CLI::App* cmd, Common& c, bool filter, bool match, bool reg, bool grasp) {
    cmd->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.over.seed, "seed for K-Means initialization");
    if (filter) {
        cmd->add_option("--k-layers", c.over.k_layers, "K-Means layers per object");
        cmd->add_option("--eps", c.over.eps, "DBSCAN radius, meters");
        cmd->add_option("--min-pts", c.over.min_pts, "DBSCAN core threshold");
        cmd->add_option("--s-min", c.over.s_min, "minimum dominant-cluster size");
        cmd->add_flag("--no-filter", c.over.no_filter, "skip the hierarchical filter");
    }
    if (match) cmd->add_option("--d-thr", c.over.d_thr, "cosine-distance threshold");
    if (reg) cmd->add_flag("--no-scale-align", c.over.no_scale_align, "register objects with independent scales");
    if (grasp) cmd->add_option("--margin", c.over.margin, "grasp collision margin, meters");
}

PipelineConfig config_of(const Common& c) {
    std::optional<fs::path> path;
    if (c.config) path = *c.config;
    return resolve_config(path, c.over);
}

json config_json(const PipelineConfig& cfg) { return json::parse(config_to_json(cfg)); }

class Clock {
public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void emit(const Common& c, const char* command, json det, const Clock& clock) {
    const json out = {{"format", "editreg-report"},
                      {"format_version", 1},
                      {"command", command},
                      {"deterministic", std::move(det)},
                      {"timing", {{"total_ms", clock.ms()}}}};
    const std::string text = jsonc::dump(out);
    if (c.report.empty()) {
        std::cout << text;
    } else {
        formats::write_text(c.report, text);
    }
}

json label_counts(const FeatureCloud& cloud) {
    return {{"points", cloud.size()},
            {"active", cloud.indices_with(Label::Active).size()},
            {"passive", cloud.indices_with(Label::Passive).size()},
            {"background", cloud.indices_with(Label::Background).size()}};
}

std::unique_ptr<DepthSource> edit_source(const SceneBundle& edit, const fs::path& dir, const PipelineConfig& cfg) {
    if (cfg.edit_depth == EditDepthMode::Native) {
        return std::make_unique<FileDepthSource>((dir / "depth_native.bin").string());
    }
    return std::make_unique<ReferenceDepthSource>(edit.depth, cfg.native_width, cfg.native_height);
}

// ---- pairs file ----

json encode_pairs(const CorrespondenceSet& p, const CorrespondenceSet& a) {
    auto list = [](const CorrespondenceSet& s) {
        json l = json::array();
        for (std::size_t i = 0; i < s.size(); ++i) l.push_back({s.pairs[i].obs, s.pairs[i].edit, s.feat_dist[i]});
        return l;
    };
    return {{"format", "editreg-pairs"}, {"format_version", 1}, {"passive", list(p)}, {"active", list(a)}};
}

CorrespondenceSet decode_pair_list(const json& j, const char* key, CorrespondenceKind kind) {
    CorrespondenceSet s;
    s.kind = kind;
    const json& l = jsonc::field(j, key, "pairs");
    if (!l.is_array()) fail(ErrorCode::InvariantViolation, std::string("pairs: field '") + key + "' is not an array");
    for (const auto& e : l) {
        if (!e.is_array() || e.size() != 3 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned() ||
            !e[2].is_number()) {
            fail(ErrorCode::InvariantViolation, std::string("pairs: entries of '") + key + "' must be [obs, edit, dist]");
        }
        s.pairs.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
        s.feat_dist.push_back(e[2].get<double>());
    }
    return s;
}

// ---- plotting ----

struct Canvas {
    ImageFrame img;
    void dot(int row, int col, std::array<std::uint8_t, 3> c, int r = 0) {
        for (int dr = -r; dr <= r; ++dr) {
            for (int dc = -r; dc <= r; ++dc) {
                const int y = row + dr, x = col + dc;
                if (y < 0 || x < 0 || y >= img.height() || x >= img.width()) continue;
                std::copy(c.begin(), c.end(), img.pixel(y, x));
            }
        }
    }
};

ImageFrame overlay(const SceneBundle& scene, const FeatureCloud& lifted, const FeatureCloud& kept) {
    Canvas cv{scene.image};
    for (int r = 0; r < cv.img.height(); ++r) {
        for (int c = 0; c < cv.img.width(); ++c) {
            std::uint8_t* px = cv.img.pixel(r, c);
            for (int k = 0; k < 3; ++k) px[k] = static_cast<std::uint8_t>(px[k] / 3);
        }
    }
    Mask keep = kept.pixel_mask();
    for (std::size_t i = 0; i < lifted.size(); ++i) {
        const auto p = lifted.pixels()[i];
        const Label l = lifted.labels()[i];
        if (l == Label::Background) continue;
        if (!keep.at(p.row, p.col)) {
            cv.dot(p.row, p.col, {255, 220, 0});
        } else {
            cv.dot(p.row, p.col, l == Label::Active ? std::array<std::uint8_t, 3>{230, 60, 60}
                                                    : std::array<std::uint8_t, 3>{70, 120, 240});
        }
    }
    return cv.img;
}

ImageFrame top_down(const std::vector<std::pair<Vec3, std::array<std::uint8_t, 3>>>& pts, int size) {
    Canvas cv{ImageFrame(size, size)};
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c) cv.dot(r, c, {245, 245, 245});
    if (pts.empty()) return cv.img;
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
    for (const auto& [p, col] : pts) {
        x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
    const double span = std::max({x1 - x0, y1 - y0, 1e-6}) * 1.1;
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    for (const auto& [p, col] : pts) {
        const int c = static_cast<int>(std::lround((p.x - cx) / span * size + size / 2.0));
        const int r = static_cast<int>(std::lround(-(p.y - cy) / span * size + size / 2.0));
        cv.dot(r, c, col);
    }
    return cv.img;
}

// ---- subcommands ----

int cmd_synth(const Common& c, const std::string& task, std::uint64_t seed, const synth::NoiseSpec& noise,
              const synth::SceneOptions& opt, int grasps, const std::string& out) {
    Clock clock;
    auto scene = synth::generate(synth::parse_task(task), noise, seed, opt);
    if (grasps > 0) scene.obs.grasps = synth::grasp_candidates(scene, grasps, seed);
    io::save_synthetic(scene, out);
    json det = {{"task", task},
                {"seed", seed},
                {"gt_motion", jsonc::encode(scene.gt_motion)},
                {"scale_center", jsonc::encode(scene.scale_center)},
                {"instruction", scene.obs.instruction},
                {"obs", {{"active_pixels", scene.obs.masks.active.count()},
                         {"passive_pixels", scene.obs.masks.passive.count()},
                         {"flying_pixels", scene.obs_flying.count()}}},
                {"edit", {{"active_pixels", scene.edit.masks.active.count()},
                          {"passive_pixels", scene.edit.masks.passive.count()},
                          {"flying_pixels", scene.edit_flying.count()}}},
                {"grasps", scene.obs.grasps.size()}};
    emit(c, "synth", std::move(det), clock);
    return 0;
}

int cmd_lift(const Common& c, const std::string& scene_dir, const std::string& state, const std::string& out) {
    Clock clock;
    const PipelineConfig cfg = config_of(c);
    const SceneBundle b = io::load_scene(scene_dir);
    FeatureCloud cloud;
    if (state == "obs") {
        cloud = backproject(b.depth, b.intr, b.image, b.features, b.masks);
    } else {
        auto src = edit_source(b, scene_dir, cfg);
        cloud = lift_edited(b.image, b.masks, *src, b.intr, b.features, cfg.crop_margin);
    }
    formats::write_cloud(out, cloud);
    emit(c, "lift", {{"state", state}, {"config", config_json(cfg)}, {"cloud", label_counts(cloud)}}, clock);
    return 0;
}

int cmd_filter(const Common& c, const std::string& in, const std::string& mode, const std::string& out) {
    Clock clock;
    const PipelineConfig cfg = config_of(c);
    const FeatureCloud cloud = formats::read_cloud(in);
    json det = {{"mode", mode}, {"config", config_json(cfg)}, {"input", label_counts(cloud)}};
    FeatureCloud kept;
    if (!cfg.filter_enabled) {
        kept = cloud;
    } else if (mode == "objects") {
        auto r = filter_objects(cloud, cfg.filter);
        det["stats"] = {{"active", jsonc::encode(r.active)}, {"passive", jsonc::encode(r.passive)}};
        kept = std::move(r.kept);
    } else if (mode == "hierarchical") {
        auto r = hierarchical_filter(cloud, cfg.filter);
        det["stats"] = jsonc::encode(r.stats);
        kept = std::move(r.kept);
    } else {
        auto r = spatial_dbscan_filter(cloud, cfg.filter.eps, cfg.filter.min_pts);
        kept = std::move(r.kept);
    }
    formats::write_cloud(out, kept);
    det["output"] = label_counts(kept);
    emit(c, "filter", std::move(det), clock);
    return 0;
}

int cmd_correspond(const Common& c, const std::string& obs_path, const std::string& edit_path, const std::string& out) {
    Clock clock;
    const PipelineConfig cfg = config_of(c);
    const FeatureCloud obs = formats::read_cloud(obs_path), edit = formats::read_cloud(edit_path);
    const auto cp = passive_pairs(obs, edit);
    const auto ca = active_pairs(obs, edit, cfg.match);
    formats::write_text(out, jsonc::dump(encode_pairs(cp, ca)));
    emit(c, "correspond",
         {{"config", config_json(cfg)}, {"passive_pairs", cp.size()}, {"active_pairs", ca.size()}}, clock);
    return 0;
}

int cmd_register(const Common& c, const std::string& obs_path, const std::string& edit_path,
                 const std::string& pairs_path, const std::string& scene_dir, const std::string& out) {
    Clock clock;
    const PipelineConfig cfg = config_of(c);
    const FeatureCloud obs = formats::read_cloud(obs_path), edit = formats::read_cloud(edit_path);
    const json pj = jsonc::parse(formats::read_text(pairs_path), pairs_path);
    jsonc::check_format(pj, "editreg-pairs", 1, pairs_path);
    const auto cp = decode_pair_list(pj, "passive", CorrespondenceKind::PassiveDense);
    const auto ca = decode_pair_list(pj, "active", CorrespondenceKind::ActiveFeature);
    const SceneBundle b = io::load_scene(scene_dir);
    RegistrationOptions opt;
    opt.unify_scale = cfg.unify_scale;
    opt.scale_gap_warning = cfg.scale_gap_warning;
    std::vector<std::string> warnings;
    RegistrationResult r;
    {
        ScopedWarningHandler collect([&](std::string_view m) { warnings.emplace_back(m); });
        r = register_pair(obs, edit, cp, ca, b.o2w, opt);
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    const json reg = jsonc::encode(r);
    formats::write_text(out, jsonc::dump({{"format", "editreg-registration"}, {"format_version", 1},
                                          {"registration", reg}}));
    emit(c, "register", {{"config", config_json(cfg)}, {"registration", reg}, {"warnings", warnings}}, clock);
    return 0;
}

RigidTransform read_world_transform(const std::string& path) {
    const json j = jsonc::parse(formats::read_text(path), path);
    const json* reg = nullptr;
    if (j.contains("registration")) {
        reg = &j["registration"];
    } else if (j.contains("deterministic")) {
        reg = &jsonc::field(j["deterministic"], "registration", path);
    } else {
        fail(ErrorCode::InvariantViolation, path + ": no 'registration' section");
    }
    return jsonc::decode_rigid(jsonc::field(*reg, "T_a_world", path), path + ".T_a_world");
}

int cmd_grasp(const Common& c, const std::string& scene_dir, const std::string& transform_path,
              const std::optional<std::string>& cloud_path, const std::string& out) {
    Clock clock;
    const PipelineConfig cfg = config_of(c);
    const SceneBundle b = io::load_scene(scene_dir);
    if (b.grasps.empty()) fail(ErrorCode::InvalidArgument, scene_dir + " has no grasps.json");
    const RigidTransform t_a = read_world_transform(transform_path);
    const FeatureCloud cloud = cloud_path ? formats::read_cloud(*cloud_path)
                                          : backproject(b.depth, b.intr, b.image, b.features, b.masks);
    std::vector<Vec3> passive;
    for (std::size_t i : cloud.indices_with(Label::Passive)) passive.push_back(b.o2w.apply(cloud.points()[i]));
    const ConvexHull hull = passive_hull(passive);
    const auto keep = grasp_keep_flags(b.grasps, t_a, hull, cfg.grasp_margin);
    std::vector<std::size_t> kept;
    std::vector<GraspCandidate> survivors;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (!keep[i]) continue;
        kept.push_back(i);
        survivors.push_back(b.grasps[i]);
    }
    formats::write_text(out, io::encode_grasps(survivors));
    emit(c, "grasp-filter",
         {{"config", config_json(cfg)},
          {"candidates", b.grasps.size()},
          {"kept", kept},
          {"hull_vertices", hull.vertices.size()},
          {"hull_faces", hull.faces.size()}},
         clock);
    return 0;
}

int cmd_pipeline(const Common& c, const std::string& obs_dir, const std::string& edit_dir) {
    const PipelineConfig cfg = config_of(c);
    const PipelineReport r = run_pipeline(obs_dir, edit_dir, cfg);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    json j = json::parse(report_to_json(r));
    j["command"] = "pipeline";
    const std::string text = jsonc::dump(j);
    if (c.report.empty()) {
        std::cout << text;
    } else {
        formats::write_text(c.report, text);
    }
    return 0;
}

int cmd_plot(const Common& c, const std::string& obs_dir, const std::string& edit_dir, const std::string& out) {
    Clock clock;
    const PipelineConfig cfg = config_of(c);
    const SceneBundle obs = io::load_scene(obs_dir), edit = io::load_scene(edit_dir);
    auto src = edit_source(edit, edit_dir, cfg);
    PipelineArtifacts art;
    const PipelineReport r = run_pipeline(obs, edit, cfg, src.get(), &art);
    fs::create_directories(out);
    formats::write_image(fs::path(out) / "obs_overlay.ppm", overlay(obs, art.obs_lifted, art.obs_filtered));
    formats::write_image(fs::path(out) / "edit_overlay.ppm", overlay(edit, art.edit_lifted, art.edit_filtered));

    // World x-y: passive grey, observed active green, moved active red, edited
    // active (mapped through the passive registration) blue.
    std::vector<std::pair<Vec3, std::array<std::uint8_t, 3>>> pts;
    const auto& reg = r.registration;
    const SimilarityTransform back = reg.passive.inverse();
    for (std::size_t i = 0; i < art.obs_filtered.size(); ++i) {
        const Vec3 w = obs.o2w.apply(art.obs_filtered.points()[i]);
        if (art.obs_filtered.labels()[i] == Label::Passive) {
            pts.push_back({w, {150, 150, 150}});
        } else if (art.obs_filtered.labels()[i] == Label::Active) {
            pts.push_back({w, {40, 170, 60}});
            pts.push_back({reg.world.apply(w), {220, 50, 50}});
        }
    }
    for (std::size_t i : art.edit_filtered.indices_with(Label::Active)) {
        pts.push_back({obs.o2w.apply(back.apply(art.edit_filtered.points()[i])), {50, 80, 220}});
    }
    formats::write_image(fs::path(out) / "world_topdown.ppm", top_down(pts, 512));
    emit(c, "plot",
         {{"config", config_json(cfg)},
          {"files", {"obs_overlay.ppm", "edit_overlay.ppm", "world_topdown.ppm"}},
          {"points", pts.size()}},
         clock);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"editreg: register objects between an observed and an edited scene"};
    app.require_subcommand(1);
    Common common;
    auto report_opt = [&](CLI::App* cmd) {
        cmd->add_option("--report", common.report, "write the JSON report here instead of stdout");
    };

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scene pair with ground truth");
    std::string task = "insertion", synth_out;
    std::uint64_t synth_seed = 0;
    synth::NoiseSpec noise;
    synth::SceneOptions scene_opt;
    int grasp_count = 32;
    synth_cmd->add_option("--task", task, "insertion|covering|stacking|assembly|articulated");
    synth_cmd->add_option("--seed", synth_seed, "scene seed");
    synth_cmd->add_option("--depth-sigma", noise.depth_sigma, "depth noise, meters");
    synth_cmd->add_option("--flying-edge", noise.flying_edge_fraction, "share of silhouette pixels made flying");
    synth_cmd->add_option("--feature-noise", noise.feature_noise, "relative feature noise");
    synth_cmd->add_option("--active-scale", scene_opt.active_scale, "edited active object scale");
    synth_cmd->add_option("--yaw", scene_opt.yaw_deg, "camera azimuth, degrees");
    synth_cmd->add_option("--grasps", grasp_count, "grasp candidates written with the observed scene");
    synth_cmd->add_option("--out", synth_out, "output root directory")->required();
    report_opt(synth_cmd);

    // lift
    auto* lift_cmd = app.add_subcommand("lift", "back-project one scene archive to a point cloud");
    std::string lift_scene, lift_state = "obs", lift_out;
    lift_cmd->add_option("--scene", lift_scene, "scene archive directory")->required()->check(CLI::ExistingDirectory);
    lift_cmd->add_option("--state", lift_state, "obs (sensor depth) or edit (estimated depth)")
        ->check(CLI::IsMember({"obs", "edit"}));
    lift_cmd->add_option("--out", lift_out, "cloud blob")->required();
    lift_cmd->add_option("--config", common.config, "JSON config file")->check(CLI::ExistingFile);
    report_opt(lift_cmd);

    // filter
    auto* filter_cmd = app.add_subcommand("filter", "remove artifacts from a cloud");
    std::string filter_in, filter_out, filter_mode = "objects";
    filter_cmd->add_option("--cloud", filter_in, "input cloud blob")->required()->check(CLI::ExistingFile);
    filter_cmd->add_option("--mode", filter_mode, "objects|hierarchical|spatial")
        ->check(CLI::IsMember({"objects", "hierarchical", "spatial"}));
    filter_cmd->add_option("--out", filter_out, "output cloud blob")->required();
    add_config_flags(filter_cmd, common, true, false, false, false);
    report_opt(filter_cmd);

    // correspond
    auto* corr_cmd = app.add_subcommand("correspond", "passive and active correspondences between two clouds");
    std::string corr_obs, corr_edit, corr_out;
    corr_cmd->add_option("--obs", corr_obs, "observed cloud")->required()->check(CLI::ExistingFile);
    corr_cmd->add_option("--edit", corr_edit, "edited cloud")->required()->check(CLI::ExistingFile);
    corr_cmd->add_option("--out", corr_out, "pairs JSON")->required();
    add_config_flags(corr_cmd, common, false, true, false, false);
    report_opt(corr_cmd);

    // register
    auto* reg_cmd = app.add_subcommand("register", "similarity registration and world-frame transform");
    std::string reg_obs, reg_edit, reg_pairs, reg_scene, reg_out;
    reg_cmd->add_option("--obs", reg_obs, "observed cloud")->required()->check(CLI::ExistingFile);
    reg_cmd->add_option("--edit", reg_edit, "edited cloud")->required()->check(CLI::ExistingFile);
    reg_cmd->add_option("--pairs", reg_pairs, "pairs JSON")->required()->check(CLI::ExistingFile);
    reg_cmd->add_option("--scene", reg_scene, "observed archive (camera pose)")
        ->required()
        ->check(CLI::ExistingDirectory);
    reg_cmd->add_option("--out", reg_out, "registration JSON")->required();
    add_config_flags(reg_cmd, common, false, false, true, false);
    report_opt(reg_cmd);

    // grasp-filter
    auto* grasp_cmd = app.add_subcommand("grasp-filter", "drop grasps that collide after the motion");
    std::string grasp_scene, grasp_transform, grasp_out;
    std::optional<std::string> grasp_cloud;
    grasp_cmd->add_option("--scene", grasp_scene, "observed archive with grasps.json")
        ->required()
        ->check(CLI::ExistingDirectory);
    grasp_cmd->add_option("--transform", grasp_transform, "registration JSON or pipeline report")
        ->required()
        ->check(CLI::ExistingFile);
    grasp_cmd->add_option("--cloud", grasp_cloud, "observed cloud (default: back-project the scene)")
        ->check(CLI::ExistingFile);
    grasp_cmd->add_option("--out", grasp_out, "surviving grasps JSON")->required();
    add_config_flags(grasp_cmd, common, false, false, false, true);
    report_opt(grasp_cmd);

    // pipeline
    auto* pipe_cmd = app.add_subcommand("pipeline", "run every stage on an observed/edited archive pair");
    std::string pipe_obs, pipe_edit;
    pipe_cmd->add_option("--obs", pipe_obs, "observed archive")->required()->check(CLI::ExistingDirectory);
    pipe_cmd->add_option("--edit", pipe_edit, "edited archive")->required()->check(CLI::ExistingDirectory);
    std::optional<std::string> dump;
    pipe_cmd->add_option("--dump", dump, "write per-stage clouds here");
    add_config_flags(pipe_cmd, common, true, true, true, true);
    report_opt(pipe_cmd);

    // plot
    auto* plot_cmd = app.add_subcommand("plot", "static overlay and top-down images of a pipeline run");
    std::string plot_obs, plot_edit, plot_out;
    plot_cmd->add_option("--obs", plot_obs, "observed archive")->required()->check(CLI::ExistingDirectory);
    plot_cmd->add_option("--edit", plot_edit, "edited archive")->required()->check(CLI::ExistingDirectory);
    plot_cmd->add_option("--out", plot_out, "image directory")->required();
    add_config_flags(plot_cmd, common, true, true, true, true);
    report_opt(plot_cmd);

    CLI11_PARSE(app, argc, argv);
    if (dump) common.over.dump_dir = *dump;

    try {
        if (*synth_cmd) return cmd_synth(common, task, synth_seed, noise, scene_opt, grasp_count, synth_out);
        if (*lift_cmd) return cmd_lift(common, lift_scene, lift_state, lift_out);
        if (*filter_cmd) return cmd_filter(common, filter_in, filter_mode, filter_out);
        if (*corr_cmd) return cmd_correspond(common, corr_obs, corr_edit, corr_out);
        if (*reg_cmd) return cmd_register(common, reg_obs, reg_edit, reg_pairs, reg_scene, reg_out);
        if (*grasp_cmd) return cmd_grasp(common, grasp_scene, grasp_transform, grasp_cloud, grasp_out);
        if (*pipe_cmd) return cmd_pipeline(common, pipe_obs, pipe_edit);
        if (*plot_cmd) return cmd_plot(common, plot_obs, plot_edit, plot_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
