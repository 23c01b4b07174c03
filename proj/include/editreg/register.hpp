#pragma once

#include <functional>
#include <span>
#include <vector>

#include "editreg/cloud.hpp"
#include "editreg/correspond.hpp"
#include "editreg/geometry.hpp"

namespace editreg {

// Least-squares similarity (s, R, t) minimizing Σ‖s·R·p_i + t − q_i‖²,
// with the reflection case resolved by flipping the smallest singular
// direction. Throws TooFewPoints (< 3 or unequal lengths) and
// DegenerateGeometry (centered covariance of rank < 2).
SimilarityTransform umeyama(std::span<const Vec3> obs, std::span<const Vec3> edit);

struct RigidPart {
    Mat3 rotation = Mat3::identity();
    Vec3 translation{};
};

// Rotation of the centered clouds (independent of any uniform scale) with
// t = q̄ − s·R·p̄ for the given scale.
RigidPart fixed_scale_align(std::span<const Vec3> obs, std::span<const Vec3> edit, double scale);

// Scale-free pose of the active object relative to the passive one in the
// observation frame:  R = R_p⁻¹·R_a,  t = R_p⁻¹·(t_a/s_a − t_p/s_p).
// Throws ScaleMismatch unless both transforms share the same scale.
RigidTransform relative_transform(const SimilarityTransform& passive, const SimilarityTransform& active);

// Same formula without the shared-scale precondition; used to reproduce the
// decoupled-scale ablation.
RigidTransform relative_transform_decoupled(const SimilarityTransform& passive, const SimilarityTransform& active);

// Conjugates a camera-frame motion into the world frame:
//   R_w = R_o2w·R·R_o2wᵀ,   t_w = R_o2w·t + t_o2w − R_w·t_o2w
RigidTransform to_world(const RigidTransform& rel, const RigidTransform& o2w);

// Optional correspondence pruning applied before each solve; returns a
// keep-flag per pair. Not set by default.
using OutlierRejection = std::function<std::vector<bool>(std::span<const Vec3> obs, std::span<const Vec3> edit)>;

struct RegistrationOptions {
    bool unify_scale = true;
    double scale_gap_warning = 0.5;
    OutlierRejection outlier_rejection;
};

struct RegistrationResidual {
    double passive = 0.0;  // RMS, meters, edited frame
    double active = 0.0;
};

struct RegistrationResult {
    SimilarityTransform passive;
    SimilarityTransform active_raw;
    SimilarityTransform active_unified;  // scale forced to passive.scale()
    RigidTransform rel_obs;
    RigidTransform world;  // T_a
    RegistrationResidual residuals;
    double scale_gap = 0.0;  // |s_a_raw / s_p − 1|
    bool scale_warning = false;
    bool scale_unified = true;
};

RegistrationResult register_pair(const FeatureCloud& obs, const FeatureCloud& edit, const CorrespondenceSet& passive_set,
                                 const CorrespondenceSet& active_set, const RigidTransform& o2w,
                                 const RegistrationOptions& options = {});

// Root-mean-square of ‖t(p_i) − q_i‖.
double rms_residual(const SimilarityTransform& t, std::span<const Vec3> obs, std::span<const Vec3> edit);

}  // namespace editreg
