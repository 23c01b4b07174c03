#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "editreg/cloud.hpp"

namespace editreg {

// Dense row-major matrix of per-point feature vectors.
struct FeatureMatrix {
    std::size_t rows = 0;
    int dim = 0;
    std::vector<double> data;

    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    std::span<double> row(std::size_t i) {
        return {data.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    static FeatureMatrix from_cloud(const FeatureCloud& cloud);
};

struct FilterConfig {
    int k_layers = 5;
    double eps = 0.02;  // meters
    int min_pts = 10;
    int s_min = 30;
    std::uint64_t seed = 0;

    // Throws InvalidArgument unless k ≥ 1, eps > 0, min_pts ≥ 1, s_min ≥ min_pts.
    void validate() const;
};

struct FilterStageStats {
    std::size_t input = 0;
    std::size_t layers = 0;            // K-Means layers actually formed
    std::size_t layers_too_small = 0;  // skipped: fewer than MinPts points
    std::size_t layers_rejected = 0;   // no cluster, or dominant cluster below S_min
    std::size_t after_intra = 0;
    std::size_t after_inter = 0;
};

struct FilterResult {
    FeatureCloud kept;
    Mask kept_mask;
    std::vector<int> cluster_labels;  // per input point; −1 = rejected
    std::vector<std::size_t> kept_indices;
    FilterStageStats stats;
};

// Per-dimension zero mean, unit (population) variance. Dimensions with
// variance below 1e-12 are only centered. Throws TooFewPoints for < 2 rows.
FeatureMatrix standardize_features(const FeatureMatrix& features);

// k-means++ seeding from `seed`, then Lloyd iterations until the assignment
// stops changing or 100 iterations. Empty clusters are re-seeded from the
// point farthest from its center. With fewer distinct rows than k only that
// many clusters are formed. Throws TooFewPoints when rows < k.
std::vector<int> kmeans(const FeatureMatrix& features, int k, std::uint64_t seed);


// DBSCAN over a uniform voxel grid of cell size eps. Neighborhoods are
// closed balls and include the query point. Labels: −1 noise, else cluster
// ids numbered in discovery order (by point index).
std::vector<int> dbscan(std::span<const Vec3> points, double eps, int min_pts);

// Largest cluster id in `labels` (ties to the lowest id); −1 when none.
int dominant_cluster(std::span<const int> labels);

// Feature-layered hierarchical filter: standardize, K-Means layering,
// per-layer DBSCAN keeping each layer's dominant cluster when it reaches
// S_min, then DBSCAN over all survivors keeping the dominant cluster.
// Layers smaller than MinPts are dropped outright.
// Throws EmptyCloud or AllPointsRejected.
FilterResult hierarchical_filter(const FeatureCloud& cloud, const FilterConfig& cfg);

// Baseline: plain spatial DBSCAN keeping the dominant cluster.
FilterResult spatial_dbscan_filter(const FeatureCloud& cloud, double eps, int min_pts);

// Runs hierarchical_filter separately on the active and passive points and
// merges the survivors; background points are dropped.
struct ObjectFilterResult {
    FeatureCloud kept;
    FilterStageStats active;
    FilterStageStats passive;
};
ObjectFilterResult filter_objects(const FeatureCloud& cloud, const FilterConfig& cfg);

}  // namespace editreg
