#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "editreg/scene.hpp"
#include "editreg/synth.hpp"

// Scene archives: one directory per captured or edited state.
//
//   meta.json          format, format_version, width, height, feature_dim,
//                      intrinsics, o2w, instruction
//   image.ppm          P6, 8-bit RGB
//   depth.bin          depth blob (meters, NaN = invalid)
//   features.bin       feature blob (D read from the header)
//   mask_active.pgm    P5, nonzero = set
//   mask_passive.pgm
//   grasps.json        optional grasp candidates
//   depth_native.bin   optional estimator output for the edited crop
//
// Synthetic scenes add obs/ and edit/ archives under one root, gt.json and
// artifact.pgm (flying-edge pixels) in each state directory. Layouts are
// documented in docs/FORMATS.md.
namespace editreg::io {

inline constexpr int kArchiveVersion = 1;

// Writes the archive canonically; saving a loaded canonical archive
// reproduces it byte for byte.
void save_scene(const SceneBundle& bundle, const std::filesystem::path& dir);

// Throws MissingFile, FormatVersionMismatch or InvariantViolation with the
// offending field named.
SceneBundle load_scene(const std::filesystem::path& dir);

std::string encode_grasps(std::span<const GraspCandidate> grasps);
std::vector<GraspCandidate> decode_grasps(std::string_view text);

struct GroundTruth {
    std::string task;
    std::uint64_t seed = 0;
    synth::NoiseSpec noise;
    synth::SceneOptions options;
    RigidTransform gt_motion;
    Vec3 scale_center;
};

// root/obs, root/edit (with artifact.pgm each) and root/gt.json.
void save_synthetic(const synth::SyntheticScene& scene, const std::filesystem::path& root);
GroundTruth load_ground_truth(const std::filesystem::path& root);
std::string encode_ground_truth(const GroundTruth& gt);

}  // namespace editreg::io
