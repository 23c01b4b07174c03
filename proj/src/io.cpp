#include "editreg/io.hpp"

#include <string>

#include "editreg/error.hpp"
#include "editreg/formats.hpp"
#include "editreg/lift.hpp"
#include "json_codec.hpp"

namespace editreg::io {

namespace fs = std::filesystem;
namespace {

using namespace jsonc;

constexpr const char* kSceneFormat = "editreg-scene";
constexpr const char* kGraspFormat = "editreg-grasps";
constexpr const char* kTruthFormat = "editreg-ground-truth";

json meta_json(const SceneBundle& b) {
    return {{"format", kSceneFormat},
            {"format_version", kArchiveVersion},
            {"width", b.image.width()},
            {"height", b.image.height()},
            {"feature_dim", b.features.dim()},
            {"intrinsics", {{"fx", b.intr.fx()}, {"fy", b.intr.fy()}, {"cx", b.intr.cx()}, {"cy", b.intr.cy()}}},
            {"o2w", encode(b.o2w)},
            {"instruction", b.instruction}};
}

void write_state_extras(const synth::SyntheticScene& scene, bool edited, const fs::path& dir) {
    const Mask& flying = edited ? scene.edit_flying : scene.obs_flying;
    formats::write_mask(dir / "artifact.pgm", flying);
}

}  // namespace

std::string encode_grasps(std::span<const GraspCandidate> grasps) {
    bool shared = !grasps.empty();
    for (const auto& g : grasps) shared = shared && g.gripper_points == grasps.front().gripper_points;
    json list = json::array();
    for (const auto& g : grasps) {
        json e = {{"pose", encode(g.pose)}, {"score", g.score}};
        if (!shared) e["gripper_points"] = encode_points(g.gripper_points);
        list.push_back(std::move(e));
    }
    json j = {{"format", kGraspFormat}, {"format_version", kArchiveVersion}, {"grasps", list}};
    if (shared) j["gripper_points"] = encode_points(grasps.front().gripper_points);
    return dump(j);
}

std::vector<GraspCandidate> decode_grasps(std::string_view body) {
    const std::string where = "grasps.json";
    const json j = parse(body, where);
    check_format(j, kGraspFormat, kArchiveVersion, where);
    std::vector<Vec3> shared;
    if (j.contains("gripper_points")) shared = decode_points(j, "gripper_points", where);
    const json& list = field(j, "grasps", where);
    if (!list.is_array()) fail(ErrorCode::InvariantViolation, where + ": field 'grasps' is not an array");
    std::vector<GraspCandidate> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string at = where + ": grasps[" + std::to_string(i) + "]";
        GraspCandidate g;
        g.pose = decode_rigid(field(list[i], "pose", at), at + ".pose");
        g.score = number(list[i], "score", at);
        if (list[i].contains("gripper_points")) {
            g.gripper_points = decode_points(list[i], "gripper_points", at);
        } else if (!shared.empty()) {
            g.gripper_points = shared;
        } else {
            fail(ErrorCode::InvariantViolation, at + ": no gripper points");
        }
        out.push_back(std::move(g));
    }
    return out;
}

void save_scene(const SceneBundle& bundle, const fs::path& dir) {
    bundle.validate();
    fs::create_directories(dir);
    formats::write_text(dir / "meta.json", dump(meta_json(bundle)));
    formats::write_image(dir / "image.ppm", bundle.image);
    formats::write_depth(dir / "depth.bin", bundle.depth);
    formats::write_features(dir / "features.bin", bundle.features);
    formats::write_mask(dir / "mask_active.pgm", bundle.masks.active);
    formats::write_mask(dir / "mask_passive.pgm", bundle.masks.passive);
    if (!bundle.grasps.empty()) {
        formats::write_text(dir / "grasps.json", encode_grasps(bundle.grasps));
    } else {
        fs::remove(dir / "grasps.json");
    }
}

SceneBundle load_scene(const fs::path& dir) {
    const std::string where = (dir / "meta.json").string();
    const json meta = parse(formats::read_text(dir / "meta.json"), where);
    check_format(meta, kSceneFormat, kArchiveVersion, where);
    const int w = integer(meta, "width", where), h = integer(meta, "height", where);
    const int dim = integer(meta, "feature_dim", where);
    const json& in = field(meta, "intrinsics", where);

    SceneBundle b;
    try {
        b.intr = CameraIntrinsics(number(in, "fx", where + ".intrinsics"), number(in, "fy", where + ".intrinsics"),
                                  number(in, "cx", where + ".intrinsics"), number(in, "cy", where + ".intrinsics"), w, h);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InvariantViolation) throw;
        fail(ErrorCode::InvariantViolation, where + ": field 'intrinsics' " + e.detail());
    }
    b.o2w = decode_rigid(field(meta, "o2w", where), where + ".o2w");
    b.instruction = text(meta, "instruction", where);
    b.image = formats::read_image(dir / "image.ppm");
    b.depth = formats::read_depth(dir / "depth.bin");
    b.features = formats::read_features(dir / "features.bin");
    b.masks.active = formats::read_mask(dir / "mask_active.pgm");
    b.masks.passive = formats::read_mask(dir / "mask_passive.pgm");
    if (fs::exists(dir / "grasps.json")) b.grasps = decode_grasps(formats::read_text(dir / "grasps.json"));
    if (b.image.width() != w || b.image.height() != h) {
        fail(ErrorCode::InvariantViolation, where + ": field 'image' does not match width/height");
    }
    if (b.features.dim() != dim) {
        fail(ErrorCode::InvariantViolation, where + ": field 'features' has dimension " +
                                                std::to_string(b.features.dim()) + ", meta says " + std::to_string(dim));
    }
    b.validate();
    return b;
}

std::string encode_ground_truth(const GroundTruth& gt) {
    const json j = {
        {"format", kTruthFormat},
        {"format_version", kArchiveVersion},
        {"task", gt.task},
        {"seed", gt.seed},
        {"noise",
         {{"depth_sigma", gt.noise.depth_sigma},
          {"flying_edge_fraction", gt.noise.flying_edge_fraction},
          {"feature_noise", gt.noise.feature_noise},
          {"flying_edge_spread", gt.noise.flying_edge_spread}}},
        {"options",
         {{"width", gt.options.width},
          {"height", gt.options.height},
          {"focal", gt.options.focal},
          {"distance", gt.options.distance},
          {"elevation_deg", gt.options.elevation_deg},
          {"yaw_deg", gt.options.yaw_deg},
          {"active_scale", gt.options.active_scale}}},
        {"gt_motion", encode(gt.gt_motion)},
        {"scale_center", encode(gt.scale_center)},
    };
    return dump(j);
}

void save_synthetic(const synth::SyntheticScene& scene, const fs::path& root) {
    save_scene(scene.obs, root / "obs");
    save_scene(scene.edit, root / "edit");
    write_state_extras(scene, false, root / "obs");
    write_state_extras(scene, true, root / "edit");

    // Estimator output for the default crop, for file-backed lifting.
    ReferenceDepthSource reference(scene.edit.depth);
    const Mask joint = scene.edit.masks.active.unite(scene.edit.masks.passive);
    const CropPlan plan = plan_crop(joint, kDefaultNativeResolution, kDefaultNativeResolution);
    formats::write_depth(root / "edit" / "depth_native.bin",
                         reference.estimate(crop_image(scene.edit.image, plan), plan));

    GroundTruth gt{std::string(synth::task_name(scene.task)), scene.seed, scene.noise, scene.options,
                   scene.gt_motion, scene.scale_center};
    formats::write_text(root / "gt.json", encode_ground_truth(gt));
}

GroundTruth load_ground_truth(const fs::path& root) {
    const std::string where = (root / "gt.json").string();
    const json j = parse(formats::read_text(root / "gt.json"), where);
    check_format(j, kTruthFormat, kArchiveVersion, where);
    GroundTruth gt;
    gt.task = text(j, "task", where);
    const json& seed = field(j, "seed", where);
    if (!seed.is_number_unsigned()) fail(ErrorCode::InvariantViolation, where + ": field 'seed' is not unsigned");
    gt.seed = seed.get<std::uint64_t>();
    const json& n = field(j, "noise", where);
    gt.noise.depth_sigma = number(n, "depth_sigma", where);
    gt.noise.flying_edge_fraction = number(n, "flying_edge_fraction", where);
    gt.noise.feature_noise = number(n, "feature_noise", where);
    gt.noise.flying_edge_spread = number(n, "flying_edge_spread", where);
    const json& o = field(j, "options", where);
    gt.options.width = integer(o, "width", where);
    gt.options.height = integer(o, "height", where);
    gt.options.focal = number(o, "focal", where);
    gt.options.distance = number(o, "distance", where);
    gt.options.elevation_deg = number(o, "elevation_deg", where);
    gt.options.yaw_deg = number(o, "yaw_deg", where);
    gt.options.active_scale = number(o, "active_scale", where);
    gt.gt_motion = decode_rigid(field(j, "gt_motion", where), where + ".gt_motion");
    gt.scale_center = decode_vec(j, "scale_center", where);
    return gt;
}

}  // namespace editreg::io
