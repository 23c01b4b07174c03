#include "editreg/grasp.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <unordered_map>

#include "editreg/error.hpp"

namespace editreg {

namespace {

// Sign of (b−a)×(c−a)·(p−a): positive when p is on the side the normal of
// the counter-clockwise triangle (a, b, c) points to. Floating-point filter
// with the classic orient3d error bound, rational arithmetic otherwise.
int orient(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p) {
    const double ux = b.x - a.x, uy = b.y - a.y, uz = b.z - a.z;
    const double vx = c.x - a.x, vy = c.y - a.y, vz = c.z - a.z;
    const double wx = p.x - a.x, wy = p.y - a.y, wz = p.z - a.z;
    const double det = wx * (uy * vz - uz * vy) + wy * (uz * vx - ux * vz) + wz * (ux * vy - uy * vx);
    const double perm = std::abs(wx) * (std::abs(uy * vz) + std::abs(uz * vy)) +
                        std::abs(wy) * (std::abs(uz * vx) + std::abs(ux * vz)) +
                        std::abs(wz) * (std::abs(ux * vy) + std::abs(uy * vx));
    constexpr double eps = std::numeric_limits<double>::epsilon() / 2.0;
    constexpr double bound = (7.0 + 56.0 * eps) * eps;
    if (det > bound * perm) return 1;
    if (-det > bound * perm) return -1;

    const mpq_class ax(a.x), ay(a.y), az(a.z);
    const mpq_class eux = mpq_class(b.x) - ax, euy = mpq_class(b.y) - ay, euz = mpq_class(b.z) - az;
    const mpq_class evx = mpq_class(c.x) - ax, evy = mpq_class(c.y) - ay, evz = mpq_class(c.z) - az;
    const mpq_class ewx = mpq_class(p.x) - ax, ewy = mpq_class(p.y) - ay, ewz = mpq_class(p.z) - az;
    const mpq_class exact = ewx * (euy * evz - euz * evy) + ewy * (euz * evx - eux * evz) + ewz * (eux * evy - euy * evx);
    return sgn(exact);
}

double plane_value(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p) {
    return dot(cross(b - a, c - a), p - a);
}

std::uint64_t edge_key(int u, int v) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) | static_cast<std::uint32_t>(v);
}

class QuickHull {
public:
    explicit QuickHull(std::span<const Vec3> pts) : pts_(pts) {}

    ConvexHull run() {
        if (pts_.size() < 4) fail(ErrorCode::DegenerateInput, "convex_hull: need at least 4 points");
        for (const Vec3& p : pts_) {
            if (!is_finite(p)) fail(ErrorCode::InvalidArgument, "convex_hull: non-finite point");
        }
        seed();
        std::vector<int> stack;
        for (int f = 0; f < static_cast<int>(faces_.size()); ++f) stack.push_back(f);
        while (!stack.empty()) {
            const int f = stack.back();
            stack.pop_back();
            if (!faces_[f].alive || faces_[f].conflict.empty()) continue;
            const int apex = farthest(f);
            for (int nf : add_point(f, apex)) stack.push_back(nf);
        }
        return emit();
    }

private:
    struct Face {
        std::array<int, 3> v{};
        bool alive = true;
        std::vector<int> conflict;
    };

    const Vec3& P(int i) const { return pts_[static_cast<std::size_t>(i)]; }

    int orient_face(const Face& f, int p) const { return orient(P(f.v[0]), P(f.v[1]), P(f.v[2]), P(p)); }

    void seed() {
        const int n = static_cast<int>(pts_.size());
        std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (int i = 1; i < n; ++i) {
            for (int k = 0; k < 3; ++k) {
                if (P(i)[k] < P(lo[k])[k]) lo[k] = i;
                if (P(i)[k] > P(hi[k])[k]) hi[k] = i;
            }
        }
        int axis = 0;
        for (int k = 1; k < 3; ++k) {
            if (P(hi[k])[k] - P(lo[k])[k] > P(hi[axis])[axis] - P(lo[axis])[axis]) axis = k;
        }
        const int i0 = lo[axis], i1 = hi[axis];
        if (!(P(i1)[axis] > P(i0)[axis])) fail(ErrorCode::DegenerateInput, "convex_hull: all points coincide");

        int i2 = -1;
        double best = 0.0;
        for (int i = 0; i < n; ++i) {
            const Vec3 c = cross(P(i1) - P(i0), P(i) - P(i0));
            const double a = dot(c, c);
            if (a > best) best = a, i2 = i;
        }
        if (i2 < 0) fail(ErrorCode::DegenerateInput, "convex_hull: points are collinear");

        int i3 = -1;
        best = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = std::abs(plane_value(P(i0), P(i1), P(i2), P(i)));
            if (d > best) best = d, i3 = i;
        }
        if (i3 < 0 || orient(P(i0), P(i1), P(i2), P(i3)) == 0) {
            fail(ErrorCode::DegenerateInput, "convex_hull: points are coplanar");
        }

        const std::array<int, 4> tet{i0, i1, i2, i3};
        for (int skip = 0; skip < 4; ++skip) {
            std::array<int, 3> v{};
            int k = 0;
            for (int j = 0; j < 4; ++j) {
                if (j != skip) v[static_cast<std::size_t>(k++)] = tet[static_cast<std::size_t>(j)];
            }
            if (orient(P(v[0]), P(v[1]), P(v[2]), P(tet[static_cast<std::size_t>(skip)])) > 0) std::swap(v[1], v[2]);
            make_face(v);
        }
        for (int i = 0; i < n; ++i) {
            if (i == i0 || i == i1 || i == i2 || i == i3) continue;
            assign(i, 0, static_cast<int>(faces_.size()));
        }
    }

    int make_face(const std::array<int, 3>& v) {
        const int id = static_cast<int>(faces_.size());
        faces_.push_back(Face{v, true, {}});
        for (int k = 0; k < 3; ++k) edges_[edge_key(v[k], v[(k + 1) % 3])] = id;
        return id;
    }

    // Puts p on the conflict list of the first face in [from, to) that sees it.
    void assign(int p, int from, int to) {
        for (int f = from; f < to; ++f) {
            if (faces_[f].alive && orient_face(faces_[f], p) > 0) {
                faces_[f].conflict.push_back(p);
                return;
            }
        }
    }

    int farthest(int f) const {
        const Face& face = faces_[f];
        int best = face.conflict.front();
        double best_d = -1.0;
        for (int p : face.conflict) {
            const double d = plane_value(P(face.v[0]), P(face.v[1]), P(face.v[2]), P(p));
            if (d > best_d) best_d = d, best = p;
        }
        return best;
    }

    std::vector<int> add_point(int start, int apex) {
        std::vector<int> visible{start};
        std::vector<char> seen(faces_.size(), 0);
        seen[start] = 1;
        std::vector<std::pair<int, int>> horizon;
        for (std::size_t i = 0; i < visible.size(); ++i) {
            const Face& face = faces_[visible[i]];
            for (int k = 0; k < 3; ++k) {
                const int u = face.v[k], v = face.v[(k + 1) % 3];
                const int nb = edges_.at(edge_key(v, u));
                if (seen[nb] == 1) continue;
                if (seen[nb] == 2) {
                    horizon.emplace_back(u, v);
                    continue;
                }
                if (orient_face(faces_[nb], apex) > 0) {
                    seen[nb] = 1;
                    visible.push_back(nb);
                } else {
                    seen[nb] = 2;
                    horizon.emplace_back(u, v);
                }
            }
        }
        // Each (visible face, edge) pair is visited once, so every horizon
        // edge is recorded exactly once even when a hidden face borders the
        // visible region along several edges.

        std::vector<int> orphans;
        for (int f : visible) {
            Face& face = faces_[f];
            face.alive = false;
            for (int k = 0; k < 3; ++k) edges_.erase(edge_key(face.v[k], face.v[(k + 1) % 3]));
            for (int p : face.conflict) {
                if (p != apex) orphans.push_back(p);
            }
            face.conflict.clear();
            face.conflict.shrink_to_fit();
        }
        const int first = static_cast<int>(faces_.size());
        std::vector<int> created;
        for (const auto& [u, v] : horizon) created.push_back(make_face({u, v, apex}));
        const int last = static_cast<int>(faces_.size());
        for (int p : orphans) assign(p, first, last);
        return created;
    }

    ConvexHull emit() const {
        ConvexHull hull;
        std::vector<int> remap(pts_.size(), -1);
        for (const Face& f : faces_) {
            if (!f.alive) continue;
            std::array<int, 3> out{};
            for (int k = 0; k < 3; ++k) {
                int& r = remap[static_cast<std::size_t>(f.v[k])];
                if (r < 0) {
                    r = static_cast<int>(hull.vertices.size());
                    hull.vertices.push_back(P(f.v[k]));
                }
                out[k] = r;
            }
            hull.faces.push_back(out);
        }
        for (const auto& f : hull.faces) {
            const Vec3& a = hull.vertices[f[0]];
            const Vec3& b = hull.vertices[f[1]];
            const Vec3& c = hull.vertices[f[2]];
            const Vec3 n = normalized(cross(b - a, c - a));
            hull.normals.push_back(n);
            hull.offsets.push_back((dot(n, a) + dot(n, b) + dot(n, c)) / 3.0);
        }
        return hull;
    }

    std::span<const Vec3> pts_;
    std::vector<Face> faces_;
    std::unordered_map<std::uint64_t, int> edges_;
};

}  // namespace

double ConvexHull::signed_distance(const Vec3& p) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < normals.size(); ++i) best = std::max(best, dot(normals[i], p) - offsets[i]);
    return best;
}

double ConvexHull::volume() const {
    const Vec3 o = centroid();
    double v = 0.0;
    for (const auto& f : faces) v += dot(vertices[f[0]] - o, cross(vertices[f[1]] - o, vertices[f[2]] - o));
    return v / 6.0;
}

Vec3 ConvexHull::centroid() const {
    Vec3 c;
    for (const Vec3& v : vertices) c += v;
    return vertices.empty() ? c : c / static_cast<double>(vertices.size());
}

bool ConvexHull::is_watertight() const {
    std::unordered_map<std::uint64_t, int> count;
    for (const auto& f : faces) {
        for (int k = 0; k < 3; ++k) ++count[edge_key(f[k], f[(k + 1) % 3])];
    }
    for (const auto& [key, c] : count) {
        const auto u = static_cast<int>(key >> 32), v = static_cast<int>(key & 0xffffffffu);
        const auto it = count.find(edge_key(v, u));
        if (c != 1 || it == count.end() || it->second != 1) return false;
    }
    return !faces.empty();
}

ConvexHull convex_hull(std::span<const Vec3> points) { return QuickHull(points).run(); }

ConvexHull inflated_box_hull(std::span<const Vec3> points, double inflate) {
    if (points.empty()) fail(ErrorCode::DegenerateInput, "inflated_box_hull: no points");
    if (!(inflate >= 0.0)) fail(ErrorCode::InvalidArgument, "inflated_box_hull: inflate must be >= 0");
    Vec3 mean;
    for (const Vec3& p : points) mean += p;
    mean = mean / static_cast<double>(points.size());
    Mat3 scatter;
    for (const Vec3& p : points) scatter = scatter + outer(p - mean, p - mean);
    const Mat3 axes = svd3(scatter).u;

    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi = -lo;
    for (const Vec3& p : points) {
        for (int k = 0; k < 3; ++k) {
            const double s = dot(axes.col(k), p - mean);
            lo[k] = std::min(lo[k], s);
            hi[k] = std::max(hi[k], s);
        }
    }
    std::vector<Vec3> corners;
    for (int m = 0; m < 8; ++m) {
        Vec3 c = mean;
        for (int k = 0; k < 3; ++k) c += ((m >> k) & 1 ? hi[k] + inflate : lo[k] - inflate) * axes.col(k);
        corners.push_back(c);
    }
    return convex_hull(corners);
}

ConvexHull passive_hull(std::span<const Vec3> points) {
    try {
        return convex_hull(points);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateInput || points.empty()) throw;
        warn("passive cloud is flat; using an inflated bounding box as its collision hull");
        return inflated_box_hull(points, 0.005);
    }
}

bool collides(const ConvexHull& hull, std::span<const Vec3> pts, double margin) {
    for (const Vec3& p : pts) {
        bool clear = false;
        for (std::size_t i = 0; i < hull.normals.size(); ++i) {
            if (dot(hull.normals[i], p) - hull.offsets[i] >= margin) {
                clear = true;
                break;
            }
        }
        if (!clear) return true;
    }
    return false;
}

std::vector<bool> grasp_keep_flags(std::span<const GraspCandidate> cands, const RigidTransform& t_a,
                                   const ConvexHull& hull, double margin) {
    for (const auto& c : cands) {
        if (c.gripper_points.empty()) fail(ErrorCode::InvalidArgument, "grasp candidate has no gripper points");
    }
    std::vector<char> keep(cands.size(), 0);
    auto work = [&](std::size_t begin, std::size_t end) {
        std::vector<Vec3> goal;
        for (std::size_t i = begin; i < end; ++i) {
            const RigidTransform pose = compose(t_a, cands[i].pose);
            goal.clear();
            for (const Vec3& g : cands[i].gripper_points) goal.push_back(pose.apply(g));
            keep[i] = collides(hull, goal, margin) ? 0 : 1;
        }
    };
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t nthreads = std::min(hw, cands.size() / 16 + 1);
    if (nthreads <= 1) {
        work(0, cands.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (cands.size() + nthreads - 1) / nthreads;
        for (std::size_t b = 0; b < cands.size(); b += chunk) pool.emplace_back(work, b, std::min(cands.size(), b + chunk));
        for (auto& t : pool) t.join();
    }
    return {keep.begin(), keep.end()};
}

std::vector<GraspCandidate> filter_grasps(std::span<const GraspCandidate> cands, const RigidTransform& t_a,
                                          const ConvexHull& hull, double margin) {
    const std::vector<bool> keep = grasp_keep_flags(cands, t_a, hull, margin);
    std::vector<GraspCandidate> out;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (keep[i]) out.push_back(cands[i]);
    }
    return out;
}

namespace {

void sample_box(const Vec3& lo, const Vec3& hi, double spacing, std::vector<Vec3>& out) {
    std::array<int, 3> n{};
    for (int k = 0; k < 3; ++k) n[k] = static_cast<int>(std::ceil((hi[k] - lo[k]) / spacing - 1e-9)) + 1;
    for (int i = 0; i < n[0]; ++i) {
        for (int j = 0; j < n[1]; ++j) {
            for (int k = 0; k < n[2]; ++k) {
                const auto at = [&](int axis, int idx) {
                    return n[axis] == 1 ? lo[axis] : lo[axis] + (hi[axis] - lo[axis]) * idx / (n[axis] - 1);
                };
                out.push_back({at(0, i), at(1, j), at(2, k)});
            }
        }
    }
}

}  // namespace

std::vector<Vec3> parallel_jaw_points(double opening, double finger_len, double spacing) {
    if (!(opening > 0.0 && finger_len > 0.0 && spacing > 0.0)) {
        fail(ErrorCode::InvalidArgument, "parallel_jaw_points: dimensions must be positive");
    }
    constexpr double kThick = 0.01;
    constexpr double kHalfWidth = 0.01;
    const double h = opening / 2.0;
    std::vector<Vec3> pts;
    sample_box({h, -kHalfWidth, -finger_len}, {h + kThick, kHalfWidth, 0.0}, spacing, pts);
    sample_box({-h - kThick, -kHalfWidth, -finger_len}, {-h, kHalfWidth, 0.0}, spacing, pts);
    sample_box({-h - kThick, -kHalfWidth, -finger_len - kThick}, {h + kThick, kHalfWidth, -finger_len}, spacing, pts);
    return pts;
}

}  // namespace editreg
