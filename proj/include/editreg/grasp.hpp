#pragma once

#include <array>
#include <span>
#include <vector>

#include "editreg/geometry.hpp"

namespace editreg {

struct GraspCandidate {
    RigidTransform pose;              // gripper frame -> world
    double score = 0.0;
    std::vector<Vec3> gripper_points;  // gripper frame, meters
};

// Triangulated convex polytope. Faces are counter-clockwise seen from
// outside; normals[i]·x = offsets[i] is the plane of face i.
struct ConvexHull {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<Vec3> normals;
    std::vector<double> offsets;

    // max_i (n_i·p − d_i): positive outside, negative strictly inside.
    double signed_distance(const Vec3& p) const;
    double volume() const;
    Vec3 centroid() const;
    // Every directed edge appears once and its reverse appears once.
    bool is_watertight() const;
};

// 3-D quickhull. Visibility is decided by an exact orientation predicate,
// so the result is watertight and contains every input point. Coplanar
// faces are left triangulated. Throws DegenerateInput when fewer than 4
// points or all points coplanar.
ConvexHull convex_hull(std::span<const Vec3> points);

// Hull of the PCA-aligned bounding box of `points`, grown by `inflate` on
// every side. Fallback for flat or thin passive clouds.
ConvexHull inflated_box_hull(std::span<const Vec3> points, double inflate);

// convex_hull, falling back to inflated_box_hull(points, 0.005) when the
// points are degenerate.
ConvexHull passive_hull(std::span<const Vec3> points);

// True iff some point has signed distance < margin.
bool collides(const ConvexHull& hull, std::span<const Vec3> pts, double margin);

inline constexpr double kDefaultGraspMargin = 0.005;

// Moves each candidate's gripper points to the goal state with T_a ∘ pose
// and keeps the non-colliding ones in input order.
std::vector<GraspCandidate> filter_grasps(std::span<const GraspCandidate> cands, const RigidTransform& t_a,
                                          const ConvexHull& hull, double margin = kDefaultGraspMargin);

// Same decision as filter_grasps, as a keep-flag per candidate.
std::vector<bool> grasp_keep_flags(std::span<const GraspCandidate> cands, const RigidTransform& t_a,
                                   const ConvexHull& hull, double margin = kDefaultGraspMargin);

// Point sample of a parallel-jaw gripper in its own frame: approach along
// +z, fingertips at z = 0, jaws at x = ±opening/2, palm at z = −finger_len.
std::vector<Vec3> parallel_jaw_points(double opening = 0.08, double finger_len = 0.05, double spacing = 0.004);

}  // namespace editreg
