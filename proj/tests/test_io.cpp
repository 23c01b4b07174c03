#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"

#include "editreg/error.hpp"
#include "editreg/formats.hpp"
#include "editreg/io.hpp"
#include "editreg/synth.hpp"
#include "support.hpp"

using namespace editreg;
using namespace editreg::testing;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    explicit TempDir(const std::string& tag) : path_(fs::temp_directory_path() / ("editreg_io_" + tag)) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

bool same_depth(const DepthMap& a, const DepthMap& b) {
    return a.width() == b.width() && a.height() == b.height() &&
           std::memcmp(a.values().data(), b.values().data(), a.values().size() * sizeof(float)) == 0;
}

bool same_grasps(const std::vector<GraspCandidate>& a, const std::vector<GraspCandidate>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i].pose == b[i].pose) || a[i].score != b[i].score || a[i].gripper_points != b[i].gripper_points)
            return false;
    return true;
}

void check_same(const SceneBundle& a, const SceneBundle& b) {
    CHECK(a.image == b.image);
    CHECK(same_depth(a.depth, b.depth));
    CHECK(a.intr == b.intr);
    CHECK(a.o2w == b.o2w);
    CHECK(a.masks.active == b.masks.active);
    CHECK(a.masks.passive == b.masks.passive);
    CHECK(a.features == b.features);
    CHECK(a.instruction == b.instruction);
    CHECK(same_grasps(a.grasps, b.grasps));
}

std::vector<std::uint8_t> tree_bytes(const fs::path& dir) {
    std::vector<std::uint8_t> all;
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const auto name = fs::relative(f, dir).string();
        all.insert(all.end(), name.begin(), name.end());
        const auto b = formats::read_file(f);
        all.insert(all.end(), b.begin(), b.end());
    }
    return all;
}

template <class F>
std::string error_text(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("depth, feature and cloud blobs round trip") {
    Rng rng(81);
    DepthMap d(7, 5);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 7; ++c) d.set(r, c, (r + c) % 4 ? static_cast<float>(rng.uniform(0.2, 3.0)) : NAN);
    CHECK(same_depth(formats::decode_depth(formats::encode_depth(d)), d));

    FeatureRaster f(6, 4, 9);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 6; ++c)
            for (auto& v : f.at(r, c)) v = static_cast<float>(rng.normal());
    CHECK(formats::decode_features(formats::encode_features(f)) == f);

    const auto cloud = random_cloud(rng, 120, 12, Label::Passive);
    CHECK(formats::decode_cloud(formats::encode_cloud(cloud)) == cloud);

    Mask m(9, 3);
    m.set(1, 4, true);
    m.set(2, 8, true);
    CHECK(formats::decode_pgm(formats::encode_pgm(m)) == m);
}

TEST_CASE("blob headers are read, not assumed") {
    FeatureRaster f(3, 2, 5);
    const auto bytes = formats::encode_features(f);
    REQUIRE(bytes.size() == 16 + 4 + 3 * 4 + 3 * 2 * 5 * 4);
    CHECK(std::memcmp(bytes.data(), formats::kFeatureMagic.data(), 16) == 0);
    std::uint32_t v[4];
    std::memcpy(v, bytes.data() + 16, sizeof v);
    CHECK(v[0] == formats::kBlobVersion);
    CHECK(v[1] == 3);
    CHECK(v[2] == 2);
    CHECK(v[3] == 5);
}

TEST_CASE("truncated feature blob names the array length mismatch") {
    FeatureRaster f(4, 4, 8);
    auto bytes = formats::encode_features(f);
    bytes.resize(bytes.size() - 12);
    const auto msg = error_text([&] { formats::decode_features(bytes); });
    CHECK(msg.find("InvariantViolation") != std::string::npos);
    CHECK(msg.find("length mismatch") != std::string::npos);
    CHECK(msg.find("512") != std::string::npos);  // declared bytes
    CHECK(msg.find("500") != std::string::npos);  // remaining bytes

    auto padded = formats::encode_features(f);
    padded.push_back(0);
    CHECK(error_text([&] { formats::decode_features(padded); }).find("trailing") != std::string::npos);
}

TEST_CASE("magic and version mismatches") {
    auto bytes = formats::encode_depth(DepthMap(2, 2));
    auto wrong_magic = bytes;
    wrong_magic[0] = 'X';
    CHECK_THROWS_WITH_AS(formats::decode_depth(wrong_magic), doctest::Contains("FormatVersionMismatch"), Error);
    auto wrong_version = bytes;
    wrong_version[16] = 7;
    CHECK_THROWS_WITH_AS(formats::decode_depth(wrong_version), doctest::Contains("FormatVersionMismatch"), Error);
    CHECK_THROWS_WITH_AS(formats::decode_features(bytes), doctest::Contains("FormatVersionMismatch"), Error);
}

TEST_CASE("synthetic scene archives round trip field by field and byte for byte") {
    TempDir tmp("roundtrip");
    auto sc = synth::generate(synth::TaskType::Covering, {0.002, 0.05, 0.05}, 5);
    sc.obs.grasps = synth::grasp_candidates(sc, 10, 5);
    io::save_synthetic(sc, tmp.path() / "a");
    const auto obs = io::load_scene(tmp.path() / "a" / "obs");
    const auto edit = io::load_scene(tmp.path() / "a" / "edit");
    check_same(obs, sc.obs);
    check_same(edit, sc.edit);

    io::save_scene(obs, tmp.path() / "b");
    io::save_scene(io::load_scene(tmp.path() / "b"), tmp.path() / "c");
    CHECK(tree_bytes(tmp.path() / "b") == tree_bytes(tmp.path() / "c"));

    const auto gt = io::load_ground_truth(tmp.path() / "a");
    CHECK(gt.task == "covering");
    CHECK(gt.seed == 5);
    CHECK(gt.gt_motion == sc.gt_motion);
    CHECK(gt.noise.depth_sigma == 0.002);
    CHECK(gt.options.yaw_deg == sc.options.yaw_deg);
    CHECK(formats::read_mask(tmp.path() / "a" / "obs" / "artifact.pgm") == sc.obs_flying);
}

TEST_CASE("a 384-dimensional archive loads with D from the header") {
    TempDir tmp("d384");
    auto sc = synth::generate(synth::TaskType::Insertion, {}, 2);
    SceneBundle b = sc.obs;
    Rng rng(82);
    FeatureRaster f(b.image.width(), b.image.height(), 384);
    for (int r = 0; r < f.height(); ++r)
        for (int c = 0; c < f.width(); ++c)
            for (auto& v : f.at(r, c)) v = static_cast<float>(rng.normal());
    b.features = f;
    io::save_scene(b, tmp.path());
    const auto back = io::load_scene(tmp.path());
    CHECK(back.features.dim() == 384);
    CHECK(back.features == f);
}

TEST_CASE("archive field errors") {
    TempDir tmp("errors");
    const auto sc = synth::generate(synth::TaskType::Insertion, {}, 3);
    const auto dir = tmp.path() / "s";

    SUBCASE("missing file") {
        io::save_scene(sc.obs, dir);
        fs::remove(dir / "mask_passive.pgm");
        CHECK_THROWS_WITH_AS(io::load_scene(dir), doctest::Contains("MissingFile"), Error);
        CHECK_THROWS_WITH_AS(io::load_scene(tmp.path() / "nowhere"), doctest::Contains("MissingFile"), Error);
    }
    SUBCASE("archive version") {
        io::save_scene(sc.obs, dir);
        auto meta = formats::read_text(dir / "meta.json");
        const auto at = meta.find("\"format_version\": 1");
        REQUIRE(at != std::string::npos);
        meta.replace(at, 19, "\"format_version\": 2");
        formats::write_text(dir / "meta.json", meta);
        CHECK_THROWS_WITH_AS(io::load_scene(dir), doctest::Contains("FormatVersionMismatch"), Error);
    }
    SUBCASE("feature dimension disagrees with meta") {
        io::save_scene(sc.obs, dir);
        formats::write_features(dir / "features.bin",
                                FeatureRaster(sc.obs.image.width(), sc.obs.image.height(), 7));
        const auto msg = error_text([&] { io::load_scene(dir); });
        CHECK(msg.find("InvariantViolation") != std::string::npos);
        CHECK(msg.find("features") != std::string::npos);
    }
    SUBCASE("mask size disagrees with the image") {
        io::save_scene(sc.obs, dir);
        formats::write_mask(dir / "mask_active.pgm", Mask(10, 10));
        const auto msg = error_text([&] { io::load_scene(dir); });
        CHECK(msg.find("InvariantViolation") != std::string::npos);
        CHECK(msg.find("active") != std::string::npos);
    }
    SUBCASE("truncated depth on disk") {
        io::save_scene(sc.obs, dir);
        auto bytes = formats::read_file(dir / "depth.bin");
        bytes.resize(bytes.size() / 2);
        formats::write_file(dir / "depth.bin", bytes);
        CHECK_THROWS_WITH_AS(io::load_scene(dir), doctest::Contains("length mismatch"), Error);
    }
    SUBCASE("non-binary PGM") {
        io::save_scene(sc.obs, dir);
        formats::write_text(dir / "mask_active.pgm", "P2\n1 1\n255\n0\n");
        CHECK_THROWS_WITH_AS(io::load_scene(dir), doctest::Contains("FormatVersionMismatch"), Error);
    }
}

TEST_CASE("grasp files: shared and per-grasp gripper points") {
    Rng rng(83);
    std::vector<GraspCandidate> g;
    for (int i = 0; i < 4; ++i) g.push_back({random_rigid(rng, 0.2), 1.0 - 0.1 * i, parallel_jaw_points()});
    const auto shared = io::encode_grasps(g);
    CHECK(shared.find("\"gripper_points\"") == shared.rfind("\"gripper_points\""));
    CHECK(same_grasps(io::decode_grasps(shared), g));

    g[2].gripper_points = {{0, 0, 0}, {0.01, 0, 0}};
    const auto per = io::encode_grasps(g);
    CHECK(same_grasps(io::decode_grasps(per), g));

    CHECK_THROWS_WITH_AS(io::decode_grasps(R"({"format": "editreg-grasps", "format_version": 1, "grasps": [{"pose": )"
                                           R"({"rotation": [1,0,0,0,1,0,0,0,1], "translation": [0,0,0]}, "score": 1}]})"),
                         doctest::Contains("no gripper points"), Error);
    CHECK_THROWS_WITH_AS(io::decode_grasps(R"({"format": "editreg-grasps", "format_version": 1})"),
                         doctest::Contains("grasps"), Error);
}
