#include "editreg/filter.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

#include "editreg/error.hpp"
#include "editreg/random.hpp"

namespace editreg {

FeatureMatrix FeatureMatrix::from_cloud(const FeatureCloud& cloud) {
    FeatureMatrix m;
    m.rows = cloud.size();
    m.dim = cloud.feature_dim();
    m.data.assign(cloud.features().begin(), cloud.features().end());
    return m;
}

void FilterConfig::validate() const {
    if (k_layers < 1) fail(ErrorCode::InvalidArgument, "FilterConfig: k_layers must be >= 1");
    if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "FilterConfig: eps must be > 0");
    if (min_pts < 1) fail(ErrorCode::InvalidArgument, "FilterConfig: min_pts must be >= 1");
    if (s_min < min_pts) fail(ErrorCode::InvalidArgument, "FilterConfig: s_min must be >= min_pts");
}

FeatureMatrix standardize_features(const FeatureMatrix& in) {
    if (in.rows < 2) fail(ErrorCode::TooFewPoints, "standardize_features: need at least 2 points");
    FeatureMatrix out = in;
    const auto n = static_cast<double>(in.rows);
    for (int d = 0; d < in.dim; ++d) {
        double mean = 0.0;
        for (std::size_t i = 0; i < in.rows; ++i) mean += in.row(i)[d];
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < in.rows; ++i) {
            const double c = in.row(i)[d] - mean;
            var += c * c;
        }
        var /= n;
        const double divisor = var < 1e-12 ? 1.0 : std::sqrt(var);
        for (std::size_t i = 0; i < in.rows; ++i) out.row(i)[d] = (in.row(i)[d] - mean) / divisor;
    }
    return out;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

std::vector<int> kmeans(const FeatureMatrix& x, int k, std::uint64_t seed) {
    if (k < 1) fail(ErrorCode::InvalidArgument, "kmeans: k must be >= 1");
    if (x.rows < static_cast<std::size_t>(k)) fail(ErrorCode::TooFewPoints, "kmeans: fewer points than clusters");
    const std::size_t n = x.rows;
    const auto dim = static_cast<std::size_t>(x.dim);
    Rng rng(seed);

    // k-means++ seeding.
    std::vector<double> centers;
    centers.reserve(static_cast<std::size_t>(k) * dim);
    auto center = [&](int c) { return std::span<const double>(centers.data() + static_cast<std::size_t>(c) * dim, dim); };
    const std::size_t first = static_cast<std::size_t>(rng.below(n));
    centers.insert(centers.end(), x.row(first).begin(), x.row(first).end());
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(x.row(i), center(0));
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        // Every point already coincides with a center: fewer distinct rows
        // than k, so the remaining clusters are never formed.
        if (!(total > 0.0)) {
            k = c;
            break;
        }
        const double target = rng.uniform() * total;
        double acc = 0.0;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            acc += d2[i];
            if (acc > target && d2[i] > 0.0) {
                pick = i;
                break;
            }
        }
        centers.insert(centers.end(), x.row(pick).begin(), x.row(pick).end());
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(x.row(i), center(c)));
    }

    std::vector<int> assign(n, -1);
    std::vector<double> dist(n);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = squared_distance(x.row(i), center(0));
            for (int c = 1; c < k; ++c) {
                const double d = squared_distance(x.row(i), center(c));
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            // Ties keep the current cluster so the assignment can settle.
            if (assign[i] >= 0 && squared_distance(x.row(i), center(assign[i])) == best_d) best = assign[i];
            dist[i] = best_d;
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed) break;

        std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(assign[i]);
            ++counts[c];
            for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] += x.row(i)[d];
        }
        for (int c = 0; c < k; ++c) {
            const auto cu = static_cast<std::size_t>(c);
            if (counts[cu] > 0) {
                for (std::size_t d = 0; d < dim; ++d) centers[cu * dim + d] = sums[cu * dim + d] / counts[cu];
                continue;
            }
            // Empty: move the center onto the point farthest from its own
            // center. When every point sits on its center there is nothing
            // to split and the cluster stays empty.
            std::size_t far = 0;
            double far_d = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(assign[i])] > 1 && dist[i] > far_d) {
                    far_d = dist[i];
                    far = i;
                }
            }
            if (far_d == 0.0) continue;  // every point sits on its center
            --counts[static_cast<std::size_t>(assign[far])];
            assign[far] = c;
            counts[cu] = 1;
            dist[far] = 0.0;
            std::copy(x.row(far).begin(), x.row(far).end(), centers.begin() + static_cast<std::ptrdiff_t>(cu * dim));
        }
    }
    return assign;
}

namespace {

class VoxelGrid {
public:
    VoxelGrid(std::span<const Vec3> pts, double cell) : pts_(pts), cell_(cell) {
        keys_.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto key = cell_of(pts[i]);
            keys_.push_back(key);
            cells_[pack(key)].push_back(i);
        }
    }

    // Indices within distance ≤ eps of point i (including i), ascending.
    void neighbors(std::size_t i, double eps, std::vector<std::size_t>& out) const {
        out.clear();
        const auto [cx, cy, cz] = keys_[i];
        const double eps2 = eps * eps;
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy)
                for (long dz = -1; dz <= 1; ++dz) {
                    const auto it = cells_.find(pack({cx + dx, cy + dy, cz + dz}));
                    if (it == cells_.end()) continue;
                    for (std::size_t j : it->second) {
                        const Vec3 d = pts_[j] - pts_[i];
                        if (dot(d, d) <= eps2) out.push_back(j);
                    }
                }
        std::sort(out.begin(), out.end());
    }

private:
    using Key = std::array<long, 3>;
    Key cell_of(const Vec3& p) const {
        return {static_cast<long>(std::floor(p.x / cell_)), static_cast<long>(std::floor(p.y / cell_)),
                static_cast<long>(std::floor(p.z / cell_))};
    }
    static std::uint64_t pack(const Key& k) {
        constexpr long kOffset = 1L << 20;
        auto part = [](long v) { return static_cast<std::uint64_t>(v + kOffset) & ((1ULL << 21) - 1); };
        return part(k[0]) | (part(k[1]) << 21) | (part(k[2]) << 42);
    }

    std::span<const Vec3> pts_;
    double cell_;
    std::vector<Key> keys_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace

std::vector<int> dbscan(std::span<const Vec3> points, double eps, int min_pts) {
    if (!(eps > 0.0) || min_pts < 1) fail(ErrorCode::InvalidArgument, "dbscan: eps must be > 0 and min_pts >= 1");
    constexpr int kUnvisited = -2;
    std::vector<int> labels(points.size(), kUnvisited);
    if (points.empty()) return labels;
    const VoxelGrid grid(points, eps);
    const auto need = static_cast<std::size_t>(min_pts);
    std::vector<std::size_t> nb, nb2;
    int next = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (labels[i] != kUnvisited) continue;
        grid.neighbors(i, eps, nb);
        if (nb.size() < need) {
            labels[i] = -1;
            continue;
        }
        const int cluster = next++;
        labels[i] = cluster;
        std::deque<std::size_t> queue(nb.begin(), nb.end());
        while (!queue.empty()) {
            const std::size_t j = queue.front();
            queue.pop_front();
            if (labels[j] == -1) labels[j] = cluster;  // border point
            if (labels[j] != kUnvisited) continue;
            labels[j] = cluster;
            grid.neighbors(j, eps, nb2);
            if (nb2.size() >= need) {
                for (std::size_t k : nb2)
                    if (labels[k] == kUnvisited || labels[k] == -1) queue.push_back(k);
            }
        }
    }
    return labels;
}

int dominant_cluster(std::span<const int> labels) {
    int max_id = -1;
    for (int l : labels) max_id = std::max(max_id, l);
    if (max_id < 0) return -1;
    std::vector<std::size_t> sizes(static_cast<std::size_t>(max_id) + 1, 0);
    for (int l : labels)
        if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
    int best = 0;
    for (int c = 1; c <= max_id; ++c)
        if (sizes[static_cast<std::size_t>(c)] > sizes[static_cast<std::size_t>(best)]) best = c;
    return sizes[static_cast<std::size_t>(best)] > 0 ? best : -1;
}

namespace {

FilterResult assemble(const FeatureCloud& cloud, std::vector<int> labels, FilterStageStats stats) {
    FilterResult out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] >= 0) out.kept_indices.push_back(i);
    out.kept = cloud.subset(out.kept_indices);
    out.kept_mask = out.kept.pixel_mask();
    out.cluster_labels = std::move(labels);
    stats.after_inter = out.kept_indices.size();
    out.stats = stats;
    return out;
}

std::vector<Vec3> gather(std::span<const Vec3> pts, std::span<const std::size_t> idx) {
    std::vector<Vec3> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(pts[i]);
    return out;
}

}  // namespace

FilterResult hierarchical_filter(const FeatureCloud& cloud, const FilterConfig& cfg) {
    cfg.validate();
    if (cloud.empty()) fail(ErrorCode::EmptyCloud, "hierarchical_filter: empty cloud");
    const std::size_t n = cloud.size();
    FilterStageStats stats;
    stats.input = n;
    if (n < static_cast<std::size_t>(cfg.min_pts) || n < 2) {
        fail(ErrorCode::AllPointsRejected, "hierarchical_filter: cloud smaller than MinPts");
    }

    // Stage 1: feature scaling.
    const FeatureMatrix scaled = standardize_features(FeatureMatrix::from_cloud(cloud));

    // Stage 2: feature layering, then intra-layer DBSCAN.
    const int k = std::min<int>(cfg.k_layers, static_cast<int>(n));
    const std::vector<int> layer = kmeans(scaled, k, cfg.seed);

    std::vector<int> global(n, -1);
    int gid = 0;
    for (int l = 0; l < k; ++l) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (layer[i] == l) members.push_back(i);
        if (members.empty()) continue;
        ++stats.layers;
        if (members.size() < static_cast<std::size_t>(cfg.min_pts)) {
            ++stats.layers_too_small;
            continue;
        }
        const std::vector<Vec3> pts = gather(cloud.points(), members);
        const std::vector<int> local = dbscan(pts, cfg.eps, cfg.min_pts);
        const int best = dominant_cluster(local);
        if (best < 0) {
            ++stats.layers_rejected;
            continue;
        }
        const auto size = static_cast<std::size_t>(std::count(local.begin(), local.end(), best));
        if (size < static_cast<std::size_t>(cfg.s_min)) {
            ++stats.layers_rejected;
            continue;
        }
        for (std::size_t j = 0; j < members.size(); ++j)
            if (local[j] == best) global[members[j]] = gid;
        ++gid;
    }

    std::vector<std::size_t> intra;
    for (std::size_t i = 0; i < n; ++i)
        if (global[i] >= 0) intra.push_back(i);
    stats.after_intra = intra.size();
    if (intra.empty()) fail(ErrorCode::AllPointsRejected, "hierarchical_filter: every feature layer was rejected");

    // Stage 3: inter-layer DBSCAN over the survivors.
    const std::vector<int> inter = dbscan(gather(cloud.points(), intra), cfg.eps, cfg.min_pts);
    const int best = dominant_cluster(inter);
    if (best < 0) fail(ErrorCode::AllPointsRejected, "hierarchical_filter: survivors form no dense cluster");
    std::vector<int> labels(n, -1);
    for (std::size_t j = 0; j < intra.size(); ++j)
        if (inter[j] == best) labels[intra[j]] = global[intra[j]];
    return assemble(cloud, std::move(labels), stats);
}

FilterResult spatial_dbscan_filter(const FeatureCloud& cloud, double eps, int min_pts) {
    if (cloud.empty()) fail(ErrorCode::EmptyCloud, "spatial_dbscan_filter: empty cloud");
    FilterStageStats stats;
    stats.input = cloud.size();
    std::vector<int> labels = dbscan(cloud.points(), eps, min_pts);
    const int best = dominant_cluster(labels);
    for (int& l : labels) l = (l == best && best >= 0) ? 0 : -1;
    stats.after_intra = cloud.size();
    return assemble(cloud, std::move(labels), stats);
}

ObjectFilterResult filter_objects(const FeatureCloud& cloud, const FilterConfig& cfg) {
    ObjectFilterResult out;
    std::vector<std::size_t> kept;
    for (Label label : {Label::Active, Label::Passive}) {
        const auto idx = cloud.indices_with(label);
        const char* name = label == Label::Active ? "active" : "passive";
        if (idx.empty()) fail(ErrorCode::EmptyCloud, std::string("filter: no ") + name + " points");
        FilterResult r;
        try {
            r = hierarchical_filter(cloud.subset(idx), cfg);
        } catch (const Error& e) {
            fail(e.code(), std::string(name) + " object: " + e.detail());
        }
        for (std::size_t j : r.kept_indices) kept.push_back(idx[j]);
        (label == Label::Active ? out.active : out.passive) = r.stats;
    }
    std::sort(kept.begin(), kept.end());
    out.kept = cloud.subset(kept);
    return out;
}

}  // namespace editreg
