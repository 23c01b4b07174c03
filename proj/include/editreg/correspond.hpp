#pragma once

#include <optional>
#include <vector>

#include "editreg/cloud.hpp"

namespace editreg {

enum class CorrespondenceKind { PassiveDense, ActiveFeature };

struct Correspondence {
    std::size_t obs = 0;   // index into the observed cloud
    std::size_t edit = 0;  // index into the edited cloud
    friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

struct CorrespondenceSet {
    CorrespondenceKind kind = CorrespondenceKind::PassiveDense;
    std::vector<Correspondence> pairs;
    std::vector<double> feat_dist;  // cosine distance per pair

    std::size_t size() const noexcept { return pairs.size(); }
    friend bool operator==(const CorrespondenceSet&, const CorrespondenceSet&) = default;
};

struct MatchConfig {
    double d_thr = 0.3;  // cosine-distance threshold
    int min_pairs = 10;
    // Optional literal reading of the matching rule: additionally require
    // ‖p_obs − p_edit‖ < spatial_gate (meters). Off by default.
    std::optional<double> spatial_gate;

    // Throws InvalidArgument unless 0 < d_thr ≤ 2 and min_pairs ≥ 3.
    void validate() const;
};

// Cosine distance between unit vectors, accumulated in double in index order.
double cosine_distance(std::span<const float> a, std::span<const float> b);

// Pairs every pixel labeled passive in both clouds, in observed-index order.
// Throws DimensionMismatch (different image grids) or NoOverlap.
CorrespondenceSet passive_pairs(const FeatureCloud& obs, const FeatureCloud& edit);

// For each edited active point, the observed active point of minimal cosine
// distance (ties to the lowest observed index); kept when the distance is
// below d_thr. Exact search in cache-sized blocks. Throws TooFewMatches.
CorrespondenceSet active_pairs(const FeatureCloud& obs, const FeatureCloud& edit, const MatchConfig& cfg);

}  // namespace editreg
