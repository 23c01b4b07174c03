#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "editreg/error.hpp"
#include "editreg/formats.hpp"
#include "editreg/io.hpp"
#include "editreg/pipeline.hpp"
#include "editreg/synth.hpp"
#include "support.hpp"

using namespace editreg;
using namespace editreg::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("editreg_pipe_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path path;
};

double rotation_error(const PipelineReport& r, const synth::SyntheticScene& sc) {
    return rotation_angle_between(r.registration.world.rotation(), sc.gt_motion.rotation());
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

json deterministic(const PipelineReport& r) { return json::parse(report_to_json(r))["deterministic"]; }

}  // namespace

TEST_CASE("config: parse, round trip and unknown keys") {
    const auto cfg = parse_config(R"({"filter": {"k_layers": 6, "eps": 0.02}, "match": {"d_thr": 0.25},
                                      "grasp": {"margin": 0.01}, "register": {"unify_scale": false}})");
    CHECK(cfg.filter.k_layers == 6);
    CHECK(cfg.filter.eps == 0.02);
    CHECK(cfg.filter.min_pts == FilterConfig{}.min_pts);
    CHECK(cfg.match.d_thr == 0.25);
    CHECK(cfg.grasp_margin == 0.01);
    CHECK_FALSE(cfg.unify_scale);
    CHECK(config_to_json(parse_config(config_to_json(cfg))) == config_to_json(cfg));

    CHECK_THROWS_WITH_AS(parse_config(R"({"filter": {"k_layer": 6}})"), doctest::Contains("filter.k_layer"), Error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"colour": 1})"), doctest::Contains("colour"), Error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"filter": {"eps": "wide"}})"), doctest::Contains("filter.eps"), Error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"lift": {"edit_depth": "guess"}})"), doctest::Contains("InvalidArgument"),
                         Error);
    CHECK_THROWS_AS(parse_config("{not json"), Error);
}

TEST_CASE("config precedence: flag over file over default, per parameter") {
    TempDir tmp("precedence");
    const auto file = tmp.path / "cfg.json";
    formats::write_text(file, R"({"filter": {"seed": 11, "k_layers": 5, "eps": 0.02, "min_pts": 7, "s_min": 30,
                                 "enabled": true}, "match": {"d_thr": 0.2}, "grasp": {"margin": 0.008},
                                 "register": {"unify_scale": true}})");
    const PipelineConfig def;
    const auto from_file = resolve_config(file, {});
    const auto from_default = resolve_config(std::nullopt, {});

    struct Param {
        const char* name;
        void (*set)(ConfigOverrides&);
        double (*get)(const PipelineConfig&);
        double file, flag;
    };
    const Param params[] = {
        {"seed", [](ConfigOverrides& o) { o.seed = 99; }, [](const PipelineConfig& c) { return double(c.filter.seed); },
         11, 99},
        {"k_layers", [](ConfigOverrides& o) { o.k_layers = 3; },
         [](const PipelineConfig& c) { return double(c.filter.k_layers); }, 5, 3},
        {"eps", [](ConfigOverrides& o) { o.eps = 0.03; }, [](const PipelineConfig& c) { return c.filter.eps; }, 0.02,
         0.03},
        {"min_pts", [](ConfigOverrides& o) { o.min_pts = 4; },
         [](const PipelineConfig& c) { return double(c.filter.min_pts); }, 7, 4},
        {"s_min", [](ConfigOverrides& o) { o.s_min = 40; },
         [](const PipelineConfig& c) { return double(c.filter.s_min); }, 30, 40},
        {"d_thr", [](ConfigOverrides& o) { o.d_thr = 0.35; }, [](const PipelineConfig& c) { return c.match.d_thr; },
         0.2, 0.35},
        {"margin", [](ConfigOverrides& o) { o.margin = 0.002; }, [](const PipelineConfig& c) { return c.grasp_margin; },
         0.008, 0.002},
        {"no_filter", [](ConfigOverrides& o) { o.no_filter = true; },
         [](const PipelineConfig& c) { return double(c.filter_enabled); }, 1, 0},
        {"no_scale_align", [](ConfigOverrides& o) { o.no_scale_align = true; },
         [](const PipelineConfig& c) { return double(c.unify_scale); }, 1, 0},
    };
    for (const auto& p : params) {
        CAPTURE(p.name);
        CHECK(p.get(from_default) == p.get(def));
        CHECK(p.get(from_file) == p.file);
        ConfigOverrides o;
        p.set(o);
        CHECK(p.get(resolve_config(file, o)) == p.flag);
        CHECK(p.get(resolve_config(std::nullopt, o)) == p.flag);
        // A flag for one parameter leaves the file's value for the others.
        for (const auto& q : params)
            if (&q != &p) CHECK(p.get(resolve_config(file, [&] {
                                    ConfigOverrides x;
                                    q.set(x);
                                    return x;
                                }())) == p.file);
    }
    CHECK_THROWS_AS(resolve_config(tmp.path / "missing.json", {}), Error);
    CHECK_THROWS_AS(resolve_config(std::nullopt, [] {
                        ConfigOverrides o;
                        o.eps = -1.0;
                        return o;
                    }()),
                    Error);
}

TEST_CASE("the pipeline equals its stages run by hand") {
    const auto sc = synth::generate(synth::TaskType::Assembly, {0.001, 0.05, 0.05}, 4);
    PipelineArtifacts art;
    const auto rep = run_pipeline(sc.obs, sc.edit, PipelineConfig{}, nullptr, &art);

    const auto obs = backproject(sc.obs.depth, sc.obs.intr, sc.obs.image, sc.obs.features, sc.obs.masks);
    ReferenceDepthSource src(sc.edit.depth);
    const auto edit = lift_edited(sc.edit.image, sc.edit.masks, src, sc.edit.intr, sc.edit.features);
    CHECK(art.obs_lifted == obs);
    CHECK(art.edit_lifted == edit);
    const auto fo = filter_objects(obs, FilterConfig{}).kept, fe = filter_objects(edit, FilterConfig{}).kept;
    CHECK(art.obs_filtered == fo);
    CHECK(art.edit_filtered == fe);
    const auto pp = passive_pairs(fo, fe);
    const auto ap = active_pairs(fo, fe, MatchConfig{});
    CHECK(art.passive_set == pp);
    CHECK(art.active_set == ap);
    const auto reg = register_pair(fo, fe, pp, ap, sc.obs.o2w);
    CHECK(rep.registration.world == reg.world);
    CHECK(rep.counts.active_pairs == ap.size());
    CHECK(rep.counts.obs_filtered == fo.size());
    CHECK(rotation_error(rep, sc) < 0.02);
}

TEST_CASE("errors are routed to the failing stage") {
    SUBCASE("disjoint passive masks -> NoOverlap in correspond") {
        auto sc = synth::generate(synth::TaskType::Covering, {}, 1);
        const auto box = bounding_box(sc.obs.masks.passive);
        REQUIRE(box);
        const int shift = box->width() + 8;
        Mask moved(sc.edit.masks.passive.width(), sc.edit.masks.passive.height());
        for (int r = 0; r < moved.height(); ++r)
            for (int c = 0; c + shift < moved.width(); ++c)
                if (sc.obs.masks.passive.at(r, c) && !sc.edit.masks.active.at(r, c + shift)) moved.set(r, c + shift, true);
        REQUIRE(moved.count() > 200);
        sc.edit.masks.passive = moved;
        PipelineConfig cfg;
        cfg.filter_enabled = false;
        try {
            run_pipeline(sc.obs, sc.edit, cfg);
            FAIL("expected NoOverlap");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NoOverlap);
            CHECK(e.stage() == "correspond");
        }
    }
    SUBCASE("missing archive -> load") {
        try {
            run_pipeline(fs::path("/nonexistent/obs"), fs::path("/nonexistent/edit"), PipelineConfig{});
            FAIL("expected MissingFile");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::MissingFile);
            CHECK(e.stage() == "load");
        }
    }
    SUBCASE("bad config file -> config") {
        TempDir tmp("badcfg");
        formats::write_text(tmp.path / "c.json", R"({"filter": {"s_min": -3}})");
        try {
            run_pipeline(tmp.path / "obs", tmp.path / "edit", std::optional<fs::path>(tmp.path / "c.json"));
            FAIL("expected InvalidArgument");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidArgument);
            CHECK(e.stage() == "config");
        }
    }
}

TEST_CASE("skipping the filter is worse on flying-edge scenes") {
    ScopedWarningHandler quiet([](std::string_view) {});
    PipelineConfig no_filter;
    no_filter.filter_enabled = false;
    std::vector<double> with, without;
    for (auto task : {synth::TaskType::Stacking, synth::TaskType::Articulated})
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            const auto sc = synth::generate(task, {0.0, 0.1, 0.0}, seed);
            const double a = rotation_error(run_pipeline(sc.obs, sc.edit, PipelineConfig{}), sc);
            const double b = rotation_error(run_pipeline(sc.obs, sc.edit, no_filter), sc);
            CHECK(b > a);
            with.push_back(a);
            without.push_back(b);
        }
    CHECK(median(without) > 2 * median(with));
}

TEST_CASE("reports are deterministic and embed the config") {
    const auto sc = synth::generate(synth::TaskType::Insertion, {0.002, 0.05, 0.05}, 7);
    auto obs = sc.obs;
    obs.grasps = synth::grasp_candidates(sc, 16, 7);
    PipelineConfig cfg;
    cfg.filter.seed = 5;
    const auto a = deterministic(run_pipeline(obs, sc.edit, cfg));
    const auto b = deterministic(run_pipeline(obs, sc.edit, cfg));
    CHECK(a.dump() == b.dump());
    CHECK(a["config"]["filter"]["seed"] == 5);
    CHECK(a["counts"]["grasps_in"] == 16);
    CHECK(a["grasps"]["kept"].size() == a["counts"]["grasps_kept"].get<std::size_t>());
    CHECK(a["registration"].contains("T_a_world"));
    const auto full = json::parse(report_to_json(run_pipeline(obs, sc.edit, cfg)));
    CHECK(full["format"] == "editreg-report");
    for (const char* s : {"lift_ms", "filter_ms", "correspond_ms", "register_ms", "grasp_ms", "total_ms"})
        CHECK(full["timing"].contains(s));
}

TEST_CASE("archive runs, native depth and stage dumps") {
    TempDir tmp("archive");
    auto sc = synth::generate(synth::TaskType::Stacking, {0.001, 0.0, 0.0}, 2);
    io::save_synthetic(sc, tmp.path / "scene");
    PipelineConfig cfg;
    cfg.dump_dir = (tmp.path / "dump").string();
    PipelineArtifacts art;
    const auto from_disk = run_pipeline(tmp.path / "scene" / "obs", tmp.path / "scene" / "edit", cfg, &art);
    cfg.dump_dir.reset();
    const auto in_memory = run_pipeline(sc.obs, sc.edit, cfg);
    CHECK(from_disk.registration.world == in_memory.registration.world);
    CHECK(from_disk.timing.front().stage == "load");

    // depth_native.bin holds the reference estimate for the default crop.
    cfg.edit_depth = EditDepthMode::Native;
    const auto native = run_pipeline(tmp.path / "scene" / "obs", tmp.path / "scene" / "edit", cfg);
    CHECK(native.registration.world == in_memory.registration.world);

    const auto dump = tmp.path / "dump";
    CHECK(formats::read_cloud(dump / "obs_lifted.bin") == art.obs_lifted);
    CHECK(formats::read_cloud(dump / "edit_filtered.bin") == art.edit_filtered);
    const auto world = formats::read_cloud(dump / "obs_world.bin");
    const auto moved = formats::read_cloud(dump / "obs_world_moved.bin");
    REQUIRE(world.size() == moved.size());
    for (std::size_t i = 0; i < world.size(); ++i) {
        const Vec3 want = world.labels()[i] == Label::Active ? from_disk.registration.world.apply(world.points()[i])
                                                             : world.points()[i];
        REQUIRE(max_abs_diff(moved.points()[i], want) == 0.0);
    }
}
