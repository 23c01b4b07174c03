#include "editreg/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <set>

#include "editreg/error.hpp"
#include "editreg/formats.hpp"
#include "editreg/io.hpp"
#include "json_codec.hpp"

namespace editreg {

namespace fs = std::filesystem;
using jsonc::json;

namespace {

constexpr const char* kReportFormat = "editreg-report";
constexpr int kReportVersion = 1;

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
    fail(ErrorCode::InvalidArgument, "config: '" + key + "' " + why);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) bad_key(where, "must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
        if (!ok.count(k)) bad_key(where.empty() ? k : where + "." + k, "is not a known key");
    }
}

template <typename T>
void read(const json& j, const char* key, const std::string& where, T& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    const std::string name = where + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) bad_key(name, "must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) bad_key(name, "must be an integer");
        if constexpr (std::is_unsigned_v<T>) {
            if (!v.is_number_unsigned()) bad_key(name, "must be non-negative");
        }
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) bad_key(name, "must be a number");
    } else {
        if (!v.is_string()) bad_key(name, "must be a string");
    }
    out = v.get<T>();
}

const char* depth_mode_name(EditDepthMode m) { return m == EditDepthMode::Native ? "native" : "reference"; }

class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>& out) : out_(out) {}
    template <typename F>
    auto run(const char* stage, F&& body) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(body())>) {
                body();
                record(stage, t0);
            } else {
                auto r = body();
                record(stage, t0);
                return r;
            }
        } catch (const Error& e) {
            if (!e.stage().empty()) throw;
            throw e.with_stage(stage);
        }
    }

private:
    void record(const char* stage, std::chrono::steady_clock::time_point t0) {
        const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
        out_.push_back({stage, dt.count()});
    }
    std::vector<StageTiming>& out_;
};

std::size_t count_label(const FeatureCloud& c, Label l) { return c.indices_with(l).size(); }

}  // namespace

void PipelineConfig::validate() const {
    filter.validate();
    match.validate();
    if (!(scale_gap_warning > 0.0) || !std::isfinite(scale_gap_warning)) {
        fail(ErrorCode::InvalidArgument, "config: 'register.scale_gap_warning' must be positive");
    }
    if (!std::isfinite(grasp_margin)) fail(ErrorCode::InvalidArgument, "config: 'grasp.margin' must be finite");
    if (crop_margin < 0) fail(ErrorCode::InvalidArgument, "config: 'lift.crop_margin' must be non-negative");
    if (native_width <= 0 || native_height <= 0) {
        fail(ErrorCode::InvalidArgument, "config: 'lift.native_width/native_height' must be positive");
    }
}

PipelineConfig parse_config(std::string_view json_text, PipelineConfig cfg) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::InvalidArgument, std::string("config: malformed JSON (") + e.what() + ")");
    }
    only_keys(j, "", {"filter", "match", "register", "grasp", "lift", "dump_dir"});
    if (j.contains("filter")) {
        const json& f = j["filter"];
        only_keys(f, "filter", {"enabled", "k_layers", "eps", "min_pts", "s_min", "seed"});
        read(f, "enabled", "filter", cfg.filter_enabled);
        read(f, "k_layers", "filter", cfg.filter.k_layers);
        read(f, "eps", "filter", cfg.filter.eps);
        read(f, "min_pts", "filter", cfg.filter.min_pts);
        read(f, "s_min", "filter", cfg.filter.s_min);
        read(f, "seed", "filter", cfg.filter.seed);
    }
    if (j.contains("match")) {
        const json& m = j["match"];
        only_keys(m, "match", {"d_thr", "min_pairs", "spatial_gate"});
        read(m, "d_thr", "match", cfg.match.d_thr);
        read(m, "min_pairs", "match", cfg.match.min_pairs);
        if (m.contains("spatial_gate")) {
            if (m["spatial_gate"].is_null()) {
                cfg.match.spatial_gate.reset();
            } else {
                double g = 0.0;
                read(m, "spatial_gate", "match", g);
                cfg.match.spatial_gate = g;
            }
        }
    }
    if (j.contains("register")) {
        const json& r = j["register"];
        only_keys(r, "register", {"unify_scale", "scale_gap_warning"});
        read(r, "unify_scale", "register", cfg.unify_scale);
        read(r, "scale_gap_warning", "register", cfg.scale_gap_warning);
    }
    if (j.contains("grasp")) {
        const json& g = j["grasp"];
        only_keys(g, "grasp", {"margin"});
        read(g, "margin", "grasp", cfg.grasp_margin);
    }
    if (j.contains("lift")) {
        const json& l = j["lift"];
        only_keys(l, "lift", {"crop_margin", "edit_depth", "native_width", "native_height"});
        read(l, "crop_margin", "lift", cfg.crop_margin);
        read(l, "native_width", "lift", cfg.native_width);
        read(l, "native_height", "lift", cfg.native_height);
        if (l.contains("edit_depth")) {
            std::string mode;
            read(l, "edit_depth", "lift", mode);
            if (mode == "reference") {
                cfg.edit_depth = EditDepthMode::Reference;
            } else if (mode == "native") {
                cfg.edit_depth = EditDepthMode::Native;
            } else {
                bad_key("lift.edit_depth", "must be \"reference\" or \"native\"");
            }
        }
    }
    if (j.contains("dump_dir")) {
        if (j["dump_dir"].is_null()) {
            cfg.dump_dir.reset();
        } else {
            std::string d;
            read(j, "dump_dir", "", d);
            cfg.dump_dir = d;
        }
    }
    cfg.validate();
    return cfg;
}

std::string config_to_json(const PipelineConfig& cfg) {
    const json j = {
        {"filter",
         {{"enabled", cfg.filter_enabled},
          {"k_layers", cfg.filter.k_layers},
          {"eps", cfg.filter.eps},
          {"min_pts", cfg.filter.min_pts},
          {"s_min", cfg.filter.s_min},
          {"seed", cfg.filter.seed}}},
        {"match",
         {{"d_thr", cfg.match.d_thr},
          {"min_pairs", cfg.match.min_pairs},
          {"spatial_gate", cfg.match.spatial_gate ? json(*cfg.match.spatial_gate) : json(nullptr)}}},
        {"register", {{"unify_scale", cfg.unify_scale}, {"scale_gap_warning", cfg.scale_gap_warning}}},
        {"grasp", {{"margin", cfg.grasp_margin}}},
        {"lift",
         {{"crop_margin", cfg.crop_margin},
          {"edit_depth", depth_mode_name(cfg.edit_depth)},
          {"native_width", cfg.native_width},
          {"native_height", cfg.native_height}}},
        {"dump_dir", cfg.dump_dir ? json(*cfg.dump_dir) : json(nullptr)},
    };
    return jsonc::dump(j);
}

PipelineConfig resolve_config(const std::optional<fs::path>& config_path, const ConfigOverrides& o) {
    PipelineConfig cfg;
    if (config_path) cfg = parse_config(formats::read_text(*config_path), cfg);
    if (o.seed) cfg.filter.seed = *o.seed;
    if (o.k_layers) cfg.filter.k_layers = *o.k_layers;
    if (o.eps) cfg.filter.eps = *o.eps;
    if (o.min_pts) cfg.filter.min_pts = *o.min_pts;
    if (o.s_min) cfg.filter.s_min = *o.s_min;
    if (o.d_thr) cfg.match.d_thr = *o.d_thr;
    if (o.margin) cfg.grasp_margin = *o.margin;
    if (o.no_filter) cfg.filter_enabled = false;
    if (o.no_scale_align) cfg.unify_scale = false;
    if (o.dump_dir) cfg.dump_dir = *o.dump_dir;
    cfg.validate();
    return cfg;
}

PipelineReport run_pipeline(const SceneBundle& obs, const SceneBundle& edit, const PipelineConfig& cfg,
                            DepthSource* edit_source, PipelineArtifacts* artifacts) {
    cfg.validate();
    PipelineReport report;
    report.config = cfg;
    report.instruction = obs.instruction;
    ScopedWarningHandler collect([&](std::string_view msg) { report.warnings.emplace_back(msg); });
    StageClock clock(report.timing);
    auto& n = report.counts;

    std::unique_ptr<DepthSource> owned;
    if (!edit_source) {
        owned = std::make_unique<ReferenceDepthSource>(edit.depth, cfg.native_width, cfg.native_height);
        edit_source = owned.get();
    }

    FeatureCloud obs_cloud, edit_cloud;
    clock.run("lift", [&] {
        obs.validate();
        edit.validate();
        obs_cloud = backproject(obs.depth, obs.intr, obs.image, obs.features, obs.masks);
        edit_cloud = lift_edited(edit.image, edit.masks, *edit_source, edit.intr, edit.features, cfg.crop_margin);
    });
    n.obs_lifted = obs_cloud.size();
    n.edit_lifted = edit_cloud.size();
    n.obs_active = count_label(obs_cloud, Label::Active);
    n.obs_passive = count_label(obs_cloud, Label::Passive);
    n.edit_active = count_label(edit_cloud, Label::Active);
    n.edit_passive = count_label(edit_cloud, Label::Passive);
    if (artifacts) {
        artifacts->obs_lifted = obs_cloud;
        artifacts->edit_lifted = edit_cloud;
    }
    if (cfg.dump_dir) {
        fs::create_directories(*cfg.dump_dir);
        formats::write_cloud(fs::path(*cfg.dump_dir) / "obs_lifted.bin", obs_cloud);
        formats::write_cloud(fs::path(*cfg.dump_dir) / "edit_lifted.bin", edit_cloud);
    }

    clock.run("filter", [&] {
        if (!cfg.filter_enabled) return;
        auto fo = filter_objects(obs_cloud, cfg.filter);
        auto fe = filter_objects(edit_cloud, cfg.filter);
        obs_cloud = std::move(fo.kept);
        edit_cloud = std::move(fe.kept);
        report.obs_filter = std::move(fo);
        report.edit_filter = std::move(fe);
        report.obs_filter->kept = {};
        report.edit_filter->kept = {};
    });
    n.obs_filtered = obs_cloud.size();
    n.edit_filtered = edit_cloud.size();

    CorrespondenceSet cp, ca;
    clock.run("correspond", [&] {
        cp = passive_pairs(obs_cloud, edit_cloud);
        ca = active_pairs(obs_cloud, edit_cloud, cfg.match);
    });
    n.passive_pairs = cp.size();
    n.active_pairs = ca.size();

    clock.run("register", [&] {
        RegistrationOptions opt;
        opt.unify_scale = cfg.unify_scale;
        opt.scale_gap_warning = cfg.scale_gap_warning;
        report.registration = register_pair(obs_cloud, edit_cloud, cp, ca, obs.o2w, opt);
    });

    n.grasps_in = obs.grasps.size();
    if (!obs.grasps.empty()) {
        clock.run("grasp", [&] {
            std::vector<Vec3> passive_world;
            for (std::size_t i : obs_cloud.indices_with(Label::Passive)) {
                passive_world.push_back(obs.o2w.apply(obs_cloud.points()[i]));
            }
            const ConvexHull hull = passive_hull(passive_world);
            const auto keep = grasp_keep_flags(obs.grasps, report.registration.world, hull, cfg.grasp_margin);
            GraspSummary g;
            for (std::size_t i = 0; i < keep.size(); ++i) {
                if (keep[i]) g.kept.push_back(i);
            }
            g.hull_vertices = hull.vertices.size();
            g.hull_faces = hull.faces.size();
            n.grasps_kept = g.kept.size();
            report.grasps = std::move(g);
        });
    }

    if (cfg.dump_dir) {
        const fs::path dir(*cfg.dump_dir);
        formats::write_cloud(dir / "obs_filtered.bin", obs_cloud);
        formats::write_cloud(dir / "edit_filtered.bin", edit_cloud);
        // Observed cloud in world coordinates with the active object moved.
        FeatureCloud world = apply(obs.o2w, obs_cloud);
        const auto active = world.indices_with(Label::Active);
        std::vector<Vec3> moved(world.points().begin(), world.points().end());
        for (std::size_t i : active) moved[i] = report.registration.world.apply(moved[i]);
        formats::write_cloud(dir / "obs_world.bin", world);
        formats::write_cloud(dir / "obs_world_moved.bin", world.with_points(std::move(moved)));
    }

    if (artifacts) {
        artifacts->obs_filtered = std::move(obs_cloud);
        artifacts->edit_filtered = std::move(edit_cloud);
        artifacts->passive_set = std::move(cp);
        artifacts->active_set = std::move(ca);
    }
    return report;
}

PipelineReport run_pipeline(const fs::path& obs_dir, const fs::path& edit_dir, const PipelineConfig& cfg,
                            PipelineArtifacts* artifacts) {
    std::vector<StageTiming> load_time;
    StageClock clock(load_time);
    SceneBundle obs, edit;
    std::unique_ptr<DepthSource> source;
    clock.run("load", [&] {
        obs = io::load_scene(obs_dir);
        edit = io::load_scene(edit_dir);
        if (cfg.edit_depth == EditDepthMode::Native) {
            source = std::make_unique<FileDepthSource>((edit_dir / "depth_native.bin").string());
        }
    });
    PipelineReport r = run_pipeline(obs, edit, cfg, source.get(), artifacts);
    r.timing.insert(r.timing.begin(), load_time.begin(), load_time.end());
    return r;
}

PipelineReport run_pipeline(const fs::path& obs_dir, const fs::path& edit_dir,
                            const std::optional<fs::path>& config_path) {
    PipelineConfig cfg;
    try {
        cfg = resolve_config(config_path, {});
    } catch (const Error& e) {
        throw e.with_stage("config");
    }
    return run_pipeline(obs_dir, edit_dir, cfg);
}

std::string report_to_json(const PipelineReport& r) {
    const auto& n = r.counts;
    json det = {
        {"config", json::parse(config_to_json(r.config))},
        {"instruction", r.instruction},
        {"counts",
         {{"obs_lifted", n.obs_lifted},
          {"edit_lifted", n.edit_lifted},
          {"obs_active", n.obs_active},
          {"obs_passive", n.obs_passive},
          {"edit_active", n.edit_active},
          {"edit_passive", n.edit_passive},
          {"obs_filtered", n.obs_filtered},
          {"edit_filtered", n.edit_filtered},
          {"passive_pairs", n.passive_pairs},
          {"active_pairs", n.active_pairs},
          {"grasps_in", n.grasps_in},
          {"grasps_kept", n.grasps_kept}}},
        {"registration", jsonc::encode(r.registration)},
        {"warnings", r.warnings},
    };
    if (r.obs_filter && r.edit_filter) {
        det["filter"] = {
            {"obs", {{"active", jsonc::encode(r.obs_filter->active)}, {"passive", jsonc::encode(r.obs_filter->passive)}}},
            {"edit",
             {{"active", jsonc::encode(r.edit_filter->active)}, {"passive", jsonc::encode(r.edit_filter->passive)}}}};
    } else {
        det["filter"] = nullptr;
    }
    if (r.grasps) {
        det["grasps"] = {{"kept", r.grasps->kept},
                         {"hull_vertices", r.grasps->hull_vertices},
                         {"hull_faces", r.grasps->hull_faces}};
    } else {
        det["grasps"] = nullptr;
    }
    json timing = json::object();
    double total = 0.0;
    for (const auto& t : r.timing) {
        timing[t.stage + "_ms"] = t.ms;
        total += t.ms;
    }
    timing["total_ms"] = total;
    return jsonc::dump({{"format", kReportFormat},
                        {"format_version", kReportVersion},
                        {"deterministic", det},
                        {"timing", timing}});
}

}  // namespace editreg
