#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "editreg/cloud.hpp"
#include "editreg/scene.hpp"

namespace editreg::synth {

enum class TaskType { Insertion, Covering, Stacking, Assembly, Articulated };

inline constexpr std::array<TaskType, 5> kAllTasks{TaskType::Insertion, TaskType::Covering, TaskType::Stacking,
                                                   TaskType::Assembly, TaskType::Articulated};

std::string_view task_name(TaskType t);
// Throws InvalidArgument for an unknown name.
TaskType parse_task(std::string_view name);

struct NoiseSpec {
    double depth_sigma = 0.0;           // meters, Gaussian per valid pixel
    double flying_edge_fraction = 0.0;  // share of silhouette-band pixels
    double feature_noise = 0.0;         // noise norm relative to the unit feature
    double flying_edge_spread = 0.015;  // max displacement toward the background, meters

    // Throws InvalidNoiseSpec unless all fields are finite, non-negative and
    // the fraction is at most 1.
    void validate() const;
};

struct SceneOptions {
    int width = 256;
    int height = 256;
    double focal = 280.0;        // pixels, fx = fy
    double distance = 0.6;       // camera to orbit target, meters
    double elevation_deg = 40.0;
    double yaw_deg = 0.0;        // camera azimuth about the world vertical
    double active_scale = 1.0;   // edited active object grown about its goal center
};

// Solid primitives in an object's body frame, all axis-aligned with body z.
struct Primitive {
    enum class Kind { Box, Cylinder, Tube };
    Kind kind = Kind::Box;
    Vec3 center;  // body-frame offset
    // Box: half extents. Cylinder: (radius, unused, half height).
    // Tube: (outer radius, inner radius, half height).
    Vec3 size;
};

struct SceneObject {
    Label role = Label::Background;
    int feature_id = 0;
    std::vector<Primitive> parts;
    SimilarityTransform obs_pose;   // body -> world
    SimilarityTransform edit_pose;
    std::array<std::uint8_t, 3> color{200, 200, 200};
};

struct SyntheticScene {
    TaskType task = TaskType::Insertion;
    NoiseSpec noise;
    SceneOptions options;
    std::uint64_t seed = 0;
    std::vector<SceneObject> objects;  // [0] active, [1] passive

    SceneBundle obs;
    SceneBundle edit;
    RigidTransform gt_motion;   // world-frame rigid motion of the active object
    Vec3 scale_center;          // world point the edited active object was scaled about
    // Passive pixels visible in both states; the passive object is
    // pixel-static, so each pair maps a pixel onto itself.
    std::vector<std::pair<PixelIndex, PixelIndex>> gt_pixel_map;
    Mask obs_band, edit_band;      // silhouette-band pixels
    Mask obs_flying, edit_flying;  // band pixels turned into flying edges
};

// Deterministic in (task, noise, seed, options). Throws InvalidNoiseSpec.
SyntheticScene generate(TaskType task, const NoiseSpec& noise, std::uint64_t seed, const SceneOptions& options = {});

// Re-renders both states with the camera rotated by `yaw_deg` about the
// world vertical through the orbit target. Throws InvalidArgument for
// |yaw| > 180.
SyntheticScene camera_orbit(const SyntheticScene& scene, double yaw_deg);

// The ground-truth motion expressed in the observation camera frame.
RigidTransform camera_motion(const SyntheticScene& scene);

// Per point: true when the point's pixel is a flying edge.
std::vector<bool> artifact_labels(const FeatureCloud& cloud, const Mask& flying);

// Applies `motion` to the active points only; features and pixels carry
// over unchanged. Builds exact correspondence-preserving edited clouds.
FeatureCloud move_active(const FeatureCloud& cloud, const RigidTransform& motion);

// Parallel-jaw candidates on the observed active object, closing across its
// body z axis at heights spread along it, sorted by descending score.
// `body_height` returns each candidate's body-z grasp height when given.
std::vector<GraspCandidate> grasp_candidates(const SyntheticScene& scene, int count, std::uint64_t seed,
                                             std::vector<double>* body_height = nullptr);

// Exact world-frame surface points of the active object, one per pixel it
// covers in the given state, from a noise-free double-precision render.
std::vector<std::pair<PixelIndex, Vec3>> active_surface_points(const SyntheticScene& scene, bool edited);

// Body-frame surface test for an object: distance of a body point to the
// nearest primitive surface.
double surface_distance(const SceneObject& object, const Vec3& body_point);

// Flying-edge benchmark case: a stamp lying on its side (box head plus a
// horizontal cylindrical handle), sampled densely on its upper surfaces,
// with short flying-edge strips hugging its silhouette. Strip points sit a
// few millimetres off the surface toward the table and carry table
// features, so they are spatially within eps of valid points yet far from
// them in feature space.
struct StampCaseOptions {
    double spacing = 0.004;         // surface sampling step, meters
    int strips = 6;                 // strips alternate between handle and head edges
    int strip_points = 15;
    double strip_step = 0.002;      // meters between consecutive strip points
    double min_offset = 0.003;      // strip distance from the surface, meters
    double max_offset = 0.012;
    double feature_noise = 0.0;
};

struct StampCase {
    FeatureCloud cloud;          // all points labeled Active
    std::vector<bool> artifact;  // per point
};

// Deterministic in (seed, options). The stamp is placed with a random yaw
// and offset on the table. Throws InvalidArgument for non-positive sizes.
StampCase stamp_flying_edge_case(std::uint64_t seed, const StampCaseOptions& options = {});

}  // namespace editreg::synth
