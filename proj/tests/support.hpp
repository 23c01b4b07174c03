#pragma once

// Independent oracles and fixtures shared by the unit and acceptance suites.
// Nothing here calls the code it is used to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "editreg/cloud.hpp"
#include "editreg/correspond.hpp"
#include "editreg/geometry.hpp"
#include "editreg/random.hpp"

namespace editreg::testing {

inline Mat3 random_rotation(Rng& rng) {
    // Uniform unit quaternion.
    const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
    const double a = std::sqrt(1 - u1), b = std::sqrt(u1);
    const double w = a * std::sin(2 * std::numbers::pi * u2), x = a * std::cos(2 * std::numbers::pi * u2);
    const double y = b * std::sin(2 * std::numbers::pi * u3), z = b * std::cos(2 * std::numbers::pi * u3);
    return Mat3{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),  //
                 2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),  //
                 2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}};
}

inline Vec3 random_vec(Rng& rng, double lo, double hi) {
    return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

inline RigidTransform random_rigid(Rng& rng, double span = 1.0) {
    return RigidTransform(random_rotation(rng), random_vec(rng, -span, span));
}

inline double max_abs_diff(const Mat3& a, const Mat3& b) {
    double m = 0;
    for (std::size_t i = 0; i < 9; ++i) m = std::max(m, std::abs(a.m[i] - b.m[i]));
    return m;
}

inline double max_abs_diff(const Vec3& a, const Vec3& b) {
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

// Random labeled cloud on a w×h grid with unit features; pixels are distinct.
inline FeatureCloud random_cloud(Rng& rng, std::size_t n, int dim, Label label, int w = 64, int h = 64) {
    std::vector<int> cells(static_cast<std::size_t>(w * h));
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = static_cast<int>(i);
    rng.shuffle(cells);
    std::vector<Vec3> pts;
    std::vector<float> feats;
    std::vector<PixelIndex> px;
    std::vector<Label> labels(n, label);
    for (std::size_t i = 0; i < n; ++i) {
        pts.push_back(random_vec(rng, -0.2, 0.2) + Vec3{0, 0, 1});
        for (int d = 0; d < dim; ++d) feats.push_back(static_cast<float>(rng.normal()));
        px.push_back({cells[i] / w, cells[i] % w});
    }
    return FeatureCloud(w, h, dim, std::move(pts), std::move(feats), std::move(px), std::move(labels));
}

// ---- exhaustive nearest-neighbour matching ----

// The reference loop: every edited active point against every observed
// active point, distance = 1 − dot accumulated in double in index order.
inline CorrespondenceSet brute_force_active_pairs(const FeatureCloud& obs, const FeatureCloud& edit,
                                                  const MatchConfig& cfg) {
    CorrespondenceSet out;
    out.kind = CorrespondenceKind::ActiveFeature;
    const auto oa = obs.indices_with(Label::Active);
    for (std::size_t j : edit.indices_with(Label::Active)) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t i : oa) {
            double dot = 0.0;
            const auto fa = obs.feature(i), fb = edit.feature(j);
            for (std::size_t d = 0; d < fa.size(); ++d) dot += static_cast<double>(fa[d]) * fb[d];
            const double dist = 1.0 - dot;
            if (dist < best) {
                best = dist;
                arg = i;
            }
        }
        if (oa.empty() || !(best < cfg.d_thr)) continue;
        if (cfg.spatial_gate && !(norm(obs.points()[arg] - edit.points()[j]) < *cfg.spatial_gate)) continue;
        out.pairs.push_back({arg, j});
        out.feat_dist.push_back(best);
    }
    return out;
}

// ---- point-in-hull by LP feasibility ----

// Is q a convex combination of pts? Phase-1 simplex on
//   Σ λ_i p_i = q, Σ λ_i = 1, λ ≥ 0
// with one artificial per row and Bland's rule. Dense tableau.
inline bool lp_in_hull(const std::vector<Vec3>& pts, const Vec3& q, double tol = 1e-10) {
    const std::size_t n = pts.size(), m = 4, cols = n + m + 1;
    std::vector<double> t(m * cols);
    auto at = [&](std::size_t r, std::size_t c) -> double& { return t[r * cols + c]; };
    const double rhs[4] = {q.x, q.y, q.z, 1.0};
    for (std::size_t r = 0; r < m; ++r) {
        const double sign = rhs[r] < 0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) at(r, i) = sign * (r < 3 ? pts[i][static_cast<int>(r)] : 1.0);
        at(r, n + r) = 1.0;
        at(r, cols - 1) = sign * rhs[r];
    }
    std::vector<std::size_t> basis = {n, n + 1, n + 2, n + 3};
    std::vector<double> cost(cols, 0.0);  // reduced costs of minimizing Σ artificials
    for (std::size_t c = 0; c < cols; ++c) {
        if (c >= n && c < n + m) continue;
        for (std::size_t r = 0; r < m; ++r) cost[c] -= at(r, c);
    }
    for (int iter = 0; iter < 10000; ++iter) {
        std::size_t enter = cols;
        for (std::size_t c = 0; c + 1 < cols; ++c) {
            if (cost[c] < -1e-12) {
                enter = c;
                break;
            }
        }
        if (enter == cols) break;
        std::size_t leave = m;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < m; ++r) {
            if (at(r, enter) > 1e-12) {
                const double ratio = at(r, cols - 1) / at(r, enter);
                if (ratio < best - 1e-15 || (leave < m && std::abs(ratio - best) <= 1e-15 && basis[r] < basis[leave])) {
                    best = ratio;
                    leave = r;
                }
            }
        }
        if (leave == m) break;  // unbounded cannot happen in phase 1
        const double piv = at(leave, enter);
        for (std::size_t c = 0; c < cols; ++c) at(leave, c) /= piv;
        for (std::size_t r = 0; r < m; ++r) {
            if (r == leave) continue;
            const double f = at(r, enter);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < cols; ++c) at(r, c) -= f * at(leave, c);
        }
        const double f = cost[enter];
        for (std::size_t c = 0; c < cols; ++c) cost[c] -= f * at(leave, c);
        basis[leave] = enter;
    }
    double infeas = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        if (basis[r] >= n) infeas += at(r, cols - 1);
    }
    return infeas < tol;
}

// ---- hull facets by enumeration ----

struct Plane {
    Vec3 n;
    double d;
};

// Every plane through three input points with all points on or behind it.
inline std::vector<Plane> enumerate_facets(const std::vector<Vec3>& pts, double tol = 1e-12) {
    std::vector<Plane> out;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                Vec3 nn = cross(pts[j] - pts[i], pts[k] - pts[i]);
                const double len = norm(nn);
                if (len < 1e-12) continue;
                nn = nn / len;
                const double d = dot(nn, pts[i]);
                bool pos = false, neg = false;
                for (const auto& p : pts) {
                    const double s = dot(nn, p) - d;
                    pos = pos || s > tol;
                    neg = neg || s < -tol;
                    if (pos && neg) break;
                }
                if (pos && neg) continue;
                if (pos) out.push_back({-nn, -d});
                else out.push_back({nn, d});
            }
        }
    }
    return out;
}

inline double facet_distance(const std::vector<Plane>& planes, const Vec3& p) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& pl : planes) m = std::max(m, dot(pl.n, p) - pl.d);
    return m;
}

// ---- closed-form similarity for the trimmed least-squares oracle ----

// Iteratively refit on the best `keep` share of pairs. The fit itself uses a
// closed-form quaternion solution (Horn), independent of the SVD path.
inline SimilarityTransform horn_similarity(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    const std::size_t n = a.size();
    Vec3 ma, mb;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma = ma / static_cast<double>(n);
    mb = mb / static_cast<double>(n);
    double s[3][3] = {};
    double va = 0, vb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 x = a[i] - ma, y = b[i] - mb;
        va += dot(x, x);
        vb += dot(y, y);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) s[r][c] += x[r] * y[c];
    }
    const double sxx = s[0][0], sxy = s[0][1], sxz = s[0][2], syx = s[1][0], syy = s[1][1], syz = s[1][2],
                 szx = s[2][0], szy = s[2][1], szz = s[2][2];
    const double nmat[4][4] = {{sxx + syy + szz, syz - szy, szx - sxz, sxy - syx},
                               {syz - szy, sxx - syy - szz, sxy + syx, szx + sxz},
                               {szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy},
                               {sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz}};
    // Largest eigenvector by power iteration on a shifted matrix.
    double shift = 0;
    for (int r = 0; r < 4; ++r) {
        double row = 0;
        for (int c = 0; c < 4; ++c) row += std::abs(nmat[r][c]);
        shift = std::max(shift, row);
    }
    double q[4] = {1, 0.1, 0.01, 0.001};
    for (int it = 0; it < 20000; ++it) {
        double nq[4] = {};
        for (int r = 0; r < 4; ++r) {
            nq[r] = shift * q[r];
            for (int c = 0; c < 4; ++c) nq[r] += nmat[r][c] * q[c];
        }
        const double l = std::sqrt(nq[0] * nq[0] + nq[1] * nq[1] + nq[2] * nq[2] + nq[3] * nq[3]);
        double delta = 0;
        for (int r = 0; r < 4; ++r) {
            delta += std::abs(nq[r] / l - q[r]);
            q[r] = nq[r] / l;
        }
        if (delta < 1e-15) break;
    }
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    const Mat3 rot{{w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y),  //
                    2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x),  //
                    2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z}};
    double tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += dot(b[i] - mb, rot * (a[i] - ma));
    const double scale = tr / va;
    return SimilarityTransform(scale, rot, mb - scale * (rot * ma));
}

inline SimilarityTransform trimmed_similarity(const std::vector<Vec3>& a, const std::vector<Vec3>& b,
                                              double keep = 0.8, int rounds = 10) {
    SimilarityTransform t = horn_similarity(a, b);
    std::vector<std::size_t> order(a.size());
    for (int r = 0; r < rounds; ++r) {
        std::vector<double> res(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            res[i] = norm(t.apply(a[i]) - b[i]);
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return res[x] < res[y]; });
        const std::size_t k = std::max<std::size_t>(3, static_cast<std::size_t>(keep * a.size()));
        std::vector<Vec3> sa, sb;
        for (std::size_t i = 0; i < k; ++i) {
            sa.push_back(a[order[i]]);
            sb.push_back(b[order[i]]);
        }
        t = horn_similarity(sa, sb);
    }
    return t;
}

}  // namespace editreg::testing
