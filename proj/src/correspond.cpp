#include "editreg/correspond.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "editreg/error.hpp"

namespace editreg {

void MatchConfig::validate() const {
    if (!(d_thr > 0.0 && d_thr <= 2.0)) fail(ErrorCode::InvalidArgument, "MatchConfig: d_thr must be in (0, 2]");
    if (min_pairs < 3) fail(ErrorCode::InvalidArgument, "MatchConfig: min_pairs must be >= 3");
    if (spatial_gate && !(*spatial_gate > 0.0)) fail(ErrorCode::InvalidArgument, "MatchConfig: spatial gate must be > 0");
}

double cosine_distance(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += static_cast<double>(a[k]) * static_cast<double>(b[k]);
    return 1.0 - acc;
}

CorrespondenceSet passive_pairs(const FeatureCloud& obs, const FeatureCloud& edit) {
    if (obs.image_width() != edit.image_width() || obs.image_height() != edit.image_height()) {
        fail(ErrorCode::DimensionMismatch, "passive_pairs: clouds index different image grids");
    }
    if (obs.feature_dim() != edit.feature_dim()) {
        fail(ErrorCode::DimensionMismatch, "passive_pairs: feature dimensions differ");
    }
    const int w = edit.image_width();
    std::vector<std::ptrdiff_t> at_pixel(static_cast<std::size_t>(w) * edit.image_height(), -1);
    for (std::size_t j = 0; j < edit.size(); ++j) {
        if (edit.labels()[j] != Label::Passive) continue;
        const PixelIndex& px = edit.pixels()[j];
        at_pixel[static_cast<std::size_t>(px.row) * w + px.col] = static_cast<std::ptrdiff_t>(j);
    }
    CorrespondenceSet out;
    out.kind = CorrespondenceKind::PassiveDense;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (obs.labels()[i] != Label::Passive) continue;
        const PixelIndex& px = obs.pixels()[i];
        const std::ptrdiff_t j = at_pixel[static_cast<std::size_t>(px.row) * w + px.col];
        if (j < 0) continue;
        out.pairs.push_back({i, static_cast<std::size_t>(j)});
        out.feat_dist.push_back(cosine_distance(obs.feature(i), edit.feature(static_cast<std::size_t>(j))));
    }
    if (out.pairs.empty()) {
        fail(ErrorCode::NoOverlap, "passive_pairs: observed and edited passive masks do not intersect");
    }
    return out;
}

CorrespondenceSet active_pairs(const FeatureCloud& obs, const FeatureCloud& edit, const MatchConfig& cfg) {
    cfg.validate();
    if (obs.feature_dim() != edit.feature_dim()) {
        fail(ErrorCode::DimensionMismatch, "active_pairs: feature dimensions differ");
    }
    const auto dim = static_cast<std::size_t>(obs.feature_dim());
    const std::vector<std::size_t> src = obs.indices_with(Label::Active);
    const std::vector<std::size_t> dst = edit.indices_with(Label::Active);

    CorrespondenceSet out;
    out.kind = CorrespondenceKind::ActiveFeature;
    std::vector<double> best_dist(dst.size(), std::numeric_limits<double>::infinity());
    std::vector<std::size_t> best_obs(dst.size(), 0);

    // Observed features are transposed per block to dimension-major order so
    // the inner loop runs across candidates; each pair's dot product still
    // accumulates over dimensions in index order.
    constexpr std::size_t kBlock = 256;
    std::vector<double> block(kBlock * dim);
    std::vector<double> acc(kBlock);
    for (std::size_t b0 = 0; b0 < src.size(); b0 += kBlock) {
        const std::size_t bn = std::min(kBlock, src.size() - b0);
        for (std::size_t o = 0; o < bn; ++o) {
            const auto f = obs.feature(src[b0 + o]);
            for (std::size_t k = 0; k < dim; ++k) block[k * kBlock + o] = f[k];
        }
        for (std::size_t e = 0; e < dst.size(); ++e) {
            const auto fe = edit.feature(dst[e]);
            std::fill_n(acc.begin(), bn, 0.0);
            for (std::size_t k = 0; k < dim; ++k) {
                const double fk = fe[k];
                const double* row = block.data() + k * kBlock;
                for (std::size_t o = 0; o < bn; ++o) acc[o] += row[o] * fk;
            }
            for (std::size_t o = 0; o < bn; ++o) {
                // Compare distances, not dots: 1 − a and 1 − b can round equal
                // while a ≠ b, and ties must resolve to the lowest index.
                const double dist = 1.0 - acc[o];
                if (dist < best_dist[e]) {
                    best_dist[e] = dist;
                    best_obs[e] = src[b0 + o];
                }
            }
        }
    }

    for (std::size_t e = 0; e < dst.size(); ++e) {
        if (src.empty()) break;
        const double dist = best_dist[e];
        if (!(dist < cfg.d_thr)) continue;
        if (cfg.spatial_gate && !(norm(obs.points()[best_obs[e]] - edit.points()[dst[e]]) < *cfg.spatial_gate)) continue;
        out.pairs.push_back({best_obs[e], dst[e]});
        out.feat_dist.push_back(dist);
    }
    if (out.pairs.size() < static_cast<std::size_t>(cfg.min_pairs)) {
        fail(ErrorCode::TooFewMatches, "active_pairs: " + std::to_string(out.pairs.size()) +
                                           " pairs under the feature threshold, need " + std::to_string(cfg.min_pairs));
    }
    return out;
}

}  // namespace editreg
