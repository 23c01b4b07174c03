#include "editreg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "editreg/error.hpp"
#include "editreg/random.hpp"

namespace editreg::synth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

constexpr int kFeatureDim = 32;
constexpr int kIdDims = 8;
constexpr int kHarmonics = 12;
constexpr double kHarmonicWeight2 = 0.045;  // b²; within-object distance ≤ 2b²
constexpr double kObjectScale = 0.2;        // meters
constexpr int kTableId = 7;
constexpr double kTableHalf = 0.6;
const Vec3 kOrbitTarget{0.0, 0.0, 0.04};

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------- features

struct HarmonicBasis {
    std::array<Vec3, kHarmonics> k;
};

HarmonicBasis harmonic_basis(double length) {
    const double w1 = kPi / length, w2 = 2.0 * kPi / length, w3 = 1.5 * kPi / length;
    const double r = std::sqrt(0.5);
    return {{Vec3{w1, 0, 0}, Vec3{0, w1, 0}, Vec3{0, 0, w1}, Vec3{w2, 0, 0}, Vec3{0, w2, 0}, Vec3{0, 0, w2},
             w3 * Vec3{r, r, 0}, w3 * Vec3{r, -r, 0}, w3 * Vec3{r, 0, r}, w3 * Vec3{r, 0, -r}, w3 * Vec3{0, r, r},
             w3 * Vec3{0, r, -r}}};
}

// In-place orthonormal Walsh-Hadamard transform (length a power of two).
void hadamard(std::span<double> v) {
    for (std::size_t len = 1; len < v.size(); len <<= 1)
        for (std::size_t i = 0; i < v.size(); i += 2 * len)
            for (std::size_t j = i; j < i + len; ++j) {
                const double x = v[j], y = v[j + len];
                v[j] = x + y;
                v[j + len] = x - y;
            }
    const double norm = 1.0 / std::sqrt(static_cast<double>(v.size()));
    for (double& x : v) x *= norm;
}

// H·(a·e_id + b·h(x)) with ‖h‖ = 1, so the result has unit norm. The fixed
// rotation H spreads identity and appearance over every dimension, as in
// dense learned descriptors; cosine geometry is unaffected.
void embed(int id, const Vec3& x, const HarmonicBasis& basis, std::span<float> out) {
    const double b = std::sqrt(kHarmonicWeight2);
    const double a = std::sqrt(1.0 - kHarmonicWeight2);
    const double hn = b / std::sqrt(static_cast<double>(kHarmonics));
    std::array<double, kFeatureDim> f{};
    f[static_cast<std::size_t>(id)] = a;
    for (int j = 0; j < kHarmonics; ++j) {
        const double ph = dot(basis.k[static_cast<std::size_t>(j)], x);
        f[static_cast<std::size_t>(kIdDims + 2 * j)] = hn * std::sin(ph);
        f[static_cast<std::size_t>(kIdDims + 2 * j + 1)] = hn * std::cos(ph);
    }
    hadamard(f);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = static_cast<float>(f[i]);
}

// ---------------------------------------------------------------- ray casting

struct Interval {
    double lo = -kInf, hi = kInf;
    bool empty() const { return !(lo <= hi); }
};

Interval slab(double o, double d, double lo, double hi) {
    if (d == 0.0) return (o >= lo && o <= hi) ? Interval{} : Interval{1.0, -1.0};
    double a = (lo - o) / d, b = (hi - o) / d;
    if (a > b) std::swap(a, b);
    return {a, b};
}

// Parameter range inside the infinite cylinder x² + y² ≤ r².
Interval disk(const Vec3& o, const Vec3& d, double r) {
    const double A = d.x * d.x + d.y * d.y;
    const double B = 2.0 * (o.x * d.x + o.y * d.y);
    const double C = o.x * o.x + o.y * o.y - r * r;
    if (A == 0.0) return C <= 0.0 ? Interval{} : Interval{1.0, -1.0};
    const double disc = B * B - 4.0 * A * C;
    if (disc < 0.0) return {1.0, -1.0};
    const double s = std::sqrt(disc);
    const double q = -0.5 * (B + (B >= 0.0 ? s : -s));
    double t0 = q / A, t1 = q != 0.0 ? C / q : -t0;
    if (t0 > t1) std::swap(t0, t1);
    return {t0, t1};
}

Interval meet(Interval a, Interval b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

struct Entry {
    double t = kInf;
    Vec3 normal;  // body frame, outward
};

Vec3 radial(const Vec3& p, double sign) {
    const double r = std::hypot(p.x, p.y);
    return r > 0.0 ? Vec3{sign * p.x / r, sign * p.y / r, 0.0} : Vec3{0, 0, 1};
}

Entry hit_primitive(const Primitive& prim, const Vec3& origin, const Vec3& d) {
    const Vec3 o = origin - prim.center;
    Entry e;
    switch (prim.kind) {
        case Primitive::Kind::Box: {
            Interval in{};
            int axis = 0;
            for (int k = 0; k < 3; ++k) {
                const Interval s = slab(o[k], d[k], -prim.size[k], prim.size[k]);
                if (s.lo > in.lo) axis = k;
                in = meet(in, s);
            }
            if (in.empty() || in.lo <= 0.0) return e;
            e.t = in.lo;
            e.normal[axis] = d[axis] > 0.0 ? -1.0 : 1.0;
            return e;
        }
        case Primitive::Kind::Cylinder: {
            const Interval z = slab(o.z, d.z, -prim.size.z, prim.size.z);
            const Interval r = disk(o, d, prim.size.x);
            const Interval in = meet(z, r);
            if (in.empty() || in.lo <= 0.0) return e;
            e.t = in.lo;
            e.normal = z.lo >= r.lo ? Vec3{0, 0, d.z > 0.0 ? -1.0 : 1.0} : radial(o + in.lo * d, 1.0);
            return e;
        }
        case Primitive::Kind::Tube: {
            const Interval z = slab(o.z, d.z, -prim.size.z, prim.size.z);
            const Interval outer = disk(o, d, prim.size.x);
            const Interval inner = disk(o, d, prim.size.y);
            const Interval in = meet(z, outer);
            if (in.empty()) return e;
            double t;
            bool from_inner = false;
            if (inner.empty() || in.lo <= inner.lo || in.lo >= inner.hi) {
                t = in.lo;
            } else if (inner.hi <= in.hi) {
                t = inner.hi;
                from_inner = true;
            } else {
                return e;
            }
            if (t <= 0.0) return e;
            e.t = t;
            if (from_inner) {
                e.normal = radial(o + t * d, -1.0);
            } else {
                e.normal = z.lo >= outer.lo ? Vec3{0, 0, d.z > 0.0 ? -1.0 : 1.0} : radial(o + t * d, 1.0);
            }
            return e;
        }
    }
    return e;
}

struct Camera {
    CameraIntrinsics intr;
    RigidTransform o2w;
};

Camera make_camera(const SceneOptions& opt) {
    const double yaw = opt.yaw_deg * kDeg, el = opt.elevation_deg * kDeg;
    const Vec3 eye = kOrbitTarget + opt.distance * Vec3{-std::cos(el) * std::cos(yaw), -std::cos(el) * std::sin(yaw),
                                                        std::sin(el)};
    const Vec3 zc = normalized(kOrbitTarget - eye);
    const Vec3 xc = normalized(cross(zc, Vec3{0, 0, 1}));
    const Vec3 yc = cross(zc, xc);
    Mat3 r = Mat3::from_cols(xc, yc, zc);
    if (orthonormality_error(r) > 1e-12) r = nearest_rotation(r);
    return {CameraIntrinsics(opt.focal, opt.focal, (opt.width - 1) / 2.0, (opt.height - 1) / 2.0, opt.width, opt.height),
            RigidTransform(r, eye)};
}

struct PixelHit {
    double t = kInf;  // camera-frame depth
    int object = -1;  // index into objects; objects.size() = table; -1 = none
    Vec3 body;        // body point (world point for the table)
    Vec3 normal;      // world frame
};

std::vector<PixelHit> render(const std::vector<SceneObject>& objects, bool edited, const Camera& cam) {
    const int w = cam.intr.width(), h = cam.intr.height();
    const Mat3& rw = cam.o2w.rotation();
    const Vec3& eye = cam.o2w.translation();
    struct Local {
        Vec3 o;
        Mat3 rt;
        double inv_s;
    };
    std::vector<Local> local;
    for (const auto& obj : objects) {
        const SimilarityTransform& pose = edited ? obj.edit_pose : obj.obs_pose;
        const Mat3 rt = pose.rotation().transpose();
        local.push_back({(1.0 / pose.scale()) * (rt * (eye - pose.translation())), rt, 1.0 / pose.scale()});
    }
    std::vector<PixelHit> hits(static_cast<std::size_t>(w) * h);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const Vec3 dc{(u - cam.intr.cx()) / cam.intr.fx(), (v - cam.intr.cy()) / cam.intr.fy(), 1.0};
            const Vec3 dw = rw * dc;
            PixelHit& best = hits[static_cast<std::size_t>(v) * w + u];
            for (std::size_t i = 0; i < objects.size(); ++i) {
                const Vec3 db = local[i].inv_s * (local[i].rt * dw);
                for (const Primitive& prim : objects[i].parts) {
                    const Entry e = hit_primitive(prim, local[i].o, db);
                    if (e.t < best.t) {
                        best.t = e.t;
                        best.object = static_cast<int>(i);
                        best.body = local[i].o + e.t * db;
                        best.normal = (edited ? objects[i].edit_pose : objects[i].obs_pose).rotation() * e.normal;
                    }
                }
            }
            if (dw.z < 0.0) {
                const double t = -eye.z / dw.z;
                const Vec3 p = eye + t * dw;
                if (t < best.t && std::abs(p.x) <= kTableHalf && std::abs(p.y) <= kTableHalf) {
                    best = {t, static_cast<int>(objects.size()), p, Vec3{0, 0, 1}};
                }
            }
        }
    }
    return hits;
}

// ---------------------------------------------------------------- states

struct StateRender {
    SceneBundle bundle;
    Mask band;
    Mask flying;
};

StateRender build_state(const std::vector<SceneObject>& objects, bool edited, const Camera& cam, const NoiseSpec& noise,
                        std::uint64_t seed) {
    const int w = cam.intr.width(), h = cam.intr.height();
    const auto npx = static_cast<std::size_t>(w) * h;
    const std::vector<PixelHit> hits = render(objects, edited, cam);
    const HarmonicBasis body_basis = harmonic_basis(kObjectScale);
    const HarmonicBasis table_basis = harmonic_basis(3.0 * kObjectScale);
    const int table = static_cast<int>(objects.size());

    std::vector<float> depth(npx, std::numeric_limits<float>::quiet_NaN());
    std::vector<float> feats(npx * kFeatureDim, 0.0f);
    std::vector<std::uint8_t> rgb(npx * 3, 0);
    Mask active(w, h), passive(w, h);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const std::size_t i = static_cast<std::size_t>(v) * w + u;
            const PixelHit& hit = hits[i];
            if (hit.object < 0) continue;
            depth[i] = static_cast<float>(hit.t);
            std::span<float> f(feats.data() + i * kFeatureDim, kFeatureDim);
            std::array<std::uint8_t, 3> color{};
            if (hit.object == table) {
                embed(kTableId, hit.body, table_basis, f);
                const bool dark = (static_cast<int>(std::floor(hit.body.x / 0.05)) +
                                   static_cast<int>(std::floor(hit.body.y / 0.05))) % 2 != 0;
                color = dark ? std::array<std::uint8_t, 3>{110, 110, 105} : std::array<std::uint8_t, 3>{150, 150, 145};
            } else {
                const SceneObject& obj = objects[static_cast<std::size_t>(hit.object)];
                embed(obj.feature_id, hit.body, body_basis, f);
                color = obj.color;
                if (obj.role == Label::Active) active.set(v, u, true);
                if (obj.role == Label::Passive) passive.set(v, u, true);
            }
            const Vec3 dw = normalized(cam.o2w.rotation() * Vec3{(u - cam.intr.cx()) / cam.intr.fx(),
                                                                 (v - cam.intr.cy()) / cam.intr.fy(), 1.0});
            const double shade = 0.35 + 0.65 * std::max(0.0, -dot(hit.normal, dw));
            for (int c = 0; c < 3; ++c) rgb[3 * i + c] = static_cast<std::uint8_t>(std::lround(color[c] * shade));
        }
    }

    // Silhouette band: object pixels with a farther 4-neighbor that belongs
    // to something else. The farthest such neighbor is the background.
    Mask band(w, h), flying(w, h);
    std::vector<std::pair<std::size_t, std::size_t>> band_px;  // (pixel, background pixel)
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const std::size_t i = static_cast<std::size_t>(v) * w + u;
            const int obj = hits[i].object;
            if (obj < 0 || obj == table) continue;
            const Label role = objects[static_cast<std::size_t>(obj)].role;
            if (role != Label::Active && role != Label::Passive) continue;
            std::ptrdiff_t bg = -1;
            const int du[4] = {0, 0, -1, 1}, dv[4] = {-1, 1, 0, 0};
            for (int k = 0; k < 4; ++k) {
                const int uu = u + du[k], vv = v + dv[k];
                if (uu < 0 || vv < 0 || uu >= w || vv >= h) continue;
                const std::size_t j = static_cast<std::size_t>(vv) * w + uu;
                if (hits[j].object < 0 || hits[j].object == obj || !(hits[j].t > hits[i].t)) continue;
                if (bg < 0 || hits[j].t > hits[static_cast<std::size_t>(bg)].t) bg = static_cast<std::ptrdiff_t>(j);
            }
            if (bg < 0) continue;
            band.set(v, u, true);
            band_px.emplace_back(i, static_cast<std::size_t>(bg));
        }
    }

    Rng rng(seed);
    const auto n_flying = static_cast<std::size_t>(std::llround(noise.flying_edge_fraction * band_px.size()));
    std::vector<std::size_t> order(band_px.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    rng.shuffle(order);
    std::vector<float> clean = feats;
    for (std::size_t k = 0; k < n_flying; ++k) {
        const auto [i, bg] = band_px[order[k]];
        const double gap = hits[bg].t - hits[i].t;
        const double alpha = rng.uniform();
        depth[i] = static_cast<float>(hits[i].t + alpha * std::min(gap, noise.flying_edge_spread));
        std::copy_n(clean.begin() + static_cast<std::ptrdiff_t>(bg * kFeatureDim), kFeatureDim,
                    feats.begin() + static_cast<std::ptrdiff_t>(i * kFeatureDim));
        flying.set(static_cast<int>(i / w), static_cast<int>(i % w), true);
    }

    if (noise.depth_sigma > 0.0) {
        for (std::size_t i = 0; i < npx; ++i) {
            if (!std::isfinite(depth[i])) continue;
            const double d = depth[i] + rng.normal(0.0, noise.depth_sigma);
            depth[i] = d > 0.0 ? static_cast<float>(d) : std::numeric_limits<float>::quiet_NaN();
        }
    }
    if (noise.feature_noise > 0.0) {
        const double sigma = noise.feature_noise / std::sqrt(static_cast<double>(kFeatureDim));
        for (std::size_t i = 0; i < npx; ++i) {
            if (hits[i].object < 0) continue;
            std::span<float> f(feats.data() + i * kFeatureDim, kFeatureDim);
            double n2 = 0.0;
            std::array<double, kFeatureDim> g{};
            for (int k = 0; k < kFeatureDim; ++k) {
                g[k] = f[k] + rng.normal(0.0, sigma);
                n2 += g[k] * g[k];
            }
            const double inv = 1.0 / std::sqrt(n2);
            for (int k = 0; k < kFeatureDim; ++k) f[k] = static_cast<float>(g[k] * inv);
        }
    }

    StateRender out;
    out.bundle.image = ImageFrame(w, h, std::move(rgb));
    out.bundle.depth = DepthMap(w, h, std::move(depth));
    out.bundle.intr = cam.intr;
    out.bundle.o2w = cam.o2w;
    out.bundle.masks = {std::move(active), std::move(passive)};
    out.bundle.features = FeatureRaster(w, h, kFeatureDim, std::move(feats));
    out.band = std::move(band);
    out.flying = std::move(flying);
    return out;
}

// ---------------------------------------------------------------- layouts

SimilarityTransform pose(const Mat3& r, const Vec3& t) { return SimilarityTransform(1.0, r, t); }

Primitive box(const Vec3& center, const Vec3& half) { return {Primitive::Kind::Box, center, half}; }
Primitive cylinder(const Vec3& center, double radius, double half_height) {
    return {Primitive::Kind::Cylinder, center, {radius, 0.0, half_height}};
}
Primitive tube(const Vec3& center, double outer, double inner, double half_height) {
    return {Primitive::Kind::Tube, center, {outer, inner, half_height}};
}

struct Layout {
    SceneObject active;
    SceneObject passive;
    Mat3 goal_rotation;
    Vec3 goal_translation;
    std::string instruction;
};

Layout layout_for(TaskType task, Rng& rng) {
    auto j = [&](double a) { return rng.uniform(-a, a); };
    Layout L;
    L.active.role = Label::Active;
    L.active.feature_id = 0;
    L.active.color = {200, 70, 60};
    L.passive.role = Label::Passive;
    L.passive.feature_id = 1;
    L.passive.color = {60, 100, 200};
    const Vec3 passive_at{0.06 + j(0.015), 0.06 + j(0.015), 0.0};
    const Vec3 active_at{-0.10 + j(0.015), -0.09 + j(0.015), 0.0};

    switch (task) {
        case TaskType::Insertion: {
            L.passive.parts = {tube({0, 0, 0.045}, 0.045, 0.038, 0.045), cylinder({0, 0, 0.004}, 0.045, 0.004)};
            L.passive.obs_pose = pose(rotation_z(j(kPi)), passive_at);
            // Standing marker lifted into the cup with a small turn, so the
            // side seen now is still the side facing the camera afterwards.
            L.active.parts = {cylinder({0, 0, 0}, 0.02, 0.1)};
            const double spin = j(kPi);
            L.active.obs_pose = pose(rotation_z(spin), active_at + Vec3{0, 0, 0.1});
            L.goal_rotation = rotation_z(spin + j(0.3));
            L.goal_translation = passive_at + Vec3{0, 0, 0.008 + 0.002 + 0.1};
            L.instruction = "insert the marker into the cup";
            break;
        }
        case TaskType::Covering: {
            L.passive.parts = {cylinder({0, 0, 0.05}, 0.05, 0.05)};
            L.passive.obs_pose = pose(rotation_z(j(kPi)), passive_at);
            L.active.parts = {cylinder({0, 0, 0}, 0.056, 0.01), cylinder({0, 0, 0.0175}, 0.012, 0.0075)};
            const double a = j(kPi);
            L.active.obs_pose = pose(rotation_z(a), active_at + Vec3{0, 0, 0.01});
            L.goal_rotation = rotation_z(a + j(0.3));
            L.goal_translation = passive_at + Vec3{0, 0, 0.11};
            L.instruction = "put the lid on the jar";
            break;
        }
        case TaskType::Stacking: {
            L.passive.parts = {box({0, 0, 0.01}, {0.06, 0.06, 0.01}), cylinder({0, 0, 0.09}, 0.015, 0.07)};
            L.passive.obs_pose = pose(rotation_z(j(kPi)), passive_at);
            L.active.parts = {tube({0, 0, 0}, 0.045, 0.028, 0.01)};
            // Standing upright with its axis pointing at the yaw-0 camera. The
            // goal spin turns the arc seen from above toward the yaw-0 camera.
            const double psi = j(kPi);
            const Mat3 upright = rotation_z(kPi + j(0.15)) * rotation_y(kPi / 2) * rotation_z(psi);
            L.active.obs_pose = pose(upright, active_at + Vec3{0, 0, 0.045});
            const Vec3 top = upright.transpose() * Vec3{0, 0, 1};
            L.goal_rotation = rotation_z(kPi - std::atan2(top.y, top.x) + j(0.2));
            L.goal_translation = passive_at + Vec3{0, 0, 0.03};
            L.instruction = "stack the ring onto the post";
            break;
        }
        case TaskType::Assembly: {
            const double pa = j(0.35);
            L.passive.parts = {box({0, 0, 0.035}, {0.07, 0.05, 0.035})};
            L.passive.obs_pose = pose(rotation_z(pa), passive_at);
            L.active.parts = {box({0, 0, 0}, {0.04, 0.04, 0.03})};
            L.active.obs_pose = pose(rotation_z(pa + j(0.35)), active_at + Vec3{0, 0, 0.03});
            L.goal_rotation = rotation_z(pa);
            L.goal_translation = passive_at + rotation_z(pa) * Vec3{-0.07 - 0.04 - 0.002, 0.0, 0.03};
            L.instruction = "place the block against the side of the box";
            break;
        }
        case TaskType::Articulated: {
            // Housing body +x is the pull direction and faces the camera arc.
            const Mat3 hr = rotation_z(5 * kPi / 4 + j(0.17));
            L.passive.parts = {box({0, 0, 0.06}, {0.1, 0.09, 0.06})};
            L.passive.obs_pose = pose(hr, passive_at);
            L.active.parts = {box({0, 0, 0}, {0.09, 0.075, 0.035})};
            const double closed = 0.1 + 0.012 - 0.09;
            const double open = closed + 0.06 + j(0.01);
            L.active.obs_pose = pose(hr, passive_at + hr * Vec3{open, 0, 0.06});
            L.goal_rotation = hr;
            L.goal_translation = passive_at + hr * Vec3{closed, 0, 0.06};
            L.instruction = "close the drawer";
            break;
        }
    }
    L.passive.edit_pose = L.passive.obs_pose;
    return L;
}

void render_states(SyntheticScene& s) {
    const Camera cam = make_camera(s.options);
    StateRender obs = build_state(s.objects, false, cam, s.noise, stream_seed(s.seed, 1));
    StateRender edit = build_state(s.objects, true, cam, s.noise, stream_seed(s.seed, 2));
    obs.bundle.instruction = edit.bundle.instruction = s.obs.instruction;
    s.obs = std::move(obs.bundle);
    s.edit = std::move(edit.bundle);
    s.obs_band = std::move(obs.band);
    s.obs_flying = std::move(obs.flying);
    s.edit_band = std::move(edit.band);
    s.edit_flying = std::move(edit.flying);
    s.gt_pixel_map.clear();
    for (int v = 0; v < s.obs.masks.passive.height(); ++v) {
        for (int u = 0; u < s.obs.masks.passive.width(); ++u) {
            if (s.obs.masks.passive.at(v, u) && s.edit.masks.passive.at(v, u)) s.gt_pixel_map.push_back({{v, u}, {v, u}});
        }
    }
}

double primitive_distance(const Primitive& p, const Vec3& x) {
    const Vec3 q = x - p.center;
    auto combine = [](double a, double b) {
        const double inside = std::min(std::max(a, b), 0.0);
        const double outside = std::hypot(std::max(a, 0.0), std::max(b, 0.0));
        return inside + outside;
    };
    switch (p.kind) {
        case Primitive::Kind::Box: {
            const Vec3 d{std::abs(q.x) - p.size.x, std::abs(q.y) - p.size.y, std::abs(q.z) - p.size.z};
            const double outside = norm(Vec3{std::max(d.x, 0.0), std::max(d.y, 0.0), std::max(d.z, 0.0)});
            return std::abs(outside + std::min(std::max({d.x, d.y, d.z}), 0.0));
        }
        case Primitive::Kind::Cylinder:
            return std::abs(combine(std::hypot(q.x, q.y) - p.size.x, std::abs(q.z) - p.size.z));
        case Primitive::Kind::Tube: {
            const double r = std::hypot(q.x, q.y);
            return std::abs(combine(std::max(r - p.size.x, p.size.y - r), std::abs(q.z) - p.size.z));
        }
    }
    return kInf;
}

}  // namespace

std::string_view task_name(TaskType t) {
    switch (t) {
        case TaskType::Insertion: return "insertion";
        case TaskType::Covering: return "covering";
        case TaskType::Stacking: return "stacking";
        case TaskType::Assembly: return "assembly";
        case TaskType::Articulated: return "articulated";
    }
    return "unknown";
}

TaskType parse_task(std::string_view name) {
    for (TaskType t : kAllTasks) {
        if (task_name(t) == name) return t;
    }
    fail(ErrorCode::InvalidArgument, "unknown task '" + std::string(name) +
                                         "' (expected insertion, covering, stacking, assembly or articulated)");
}

void NoiseSpec::validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!ok(depth_sigma)) fail(ErrorCode::InvalidNoiseSpec, "depth_sigma must be finite and >= 0");
    if (!ok(feature_noise)) fail(ErrorCode::InvalidNoiseSpec, "feature_noise must be finite and >= 0");
    if (!ok(flying_edge_spread)) fail(ErrorCode::InvalidNoiseSpec, "flying_edge_spread must be finite and >= 0");
    if (!ok(flying_edge_fraction) || flying_edge_fraction > 1.0) {
        fail(ErrorCode::InvalidNoiseSpec, "flying_edge_fraction must be in [0, 1]");
    }
}

SyntheticScene generate(TaskType task, const NoiseSpec& noise, std::uint64_t seed, const SceneOptions& options) {
    noise.validate();
    if (options.width < 8 || options.height < 8 || !(options.focal > 0.0) || !(options.distance > 0.0)) {
        fail(ErrorCode::InvalidArgument, "generate: invalid camera options");
    }
    if (!(options.active_scale > 0.0) || !std::isfinite(options.active_scale)) {
        fail(ErrorCode::InvalidArgument, "generate: active_scale must be positive");
    }
    Rng rng(stream_seed(seed, 0));
    Layout L = layout_for(task, rng);

    SyntheticScene s;
    s.task = task;
    s.noise = noise;
    s.options = options;
    s.seed = seed;
    L.active.edit_pose = SimilarityTransform(options.active_scale, L.goal_rotation, L.goal_translation);
    const RigidTransform obs_rigid(L.active.obs_pose.rotation(), L.active.obs_pose.translation());
    const RigidTransform goal_rigid(L.goal_rotation, L.goal_translation);
    s.gt_motion = compose(goal_rigid, obs_rigid.inverse());
    s.scale_center = L.goal_translation;
    s.objects = {L.active, L.passive};
    s.obs.instruction = L.instruction;
    render_states(s);
    return s;
}

SyntheticScene camera_orbit(const SyntheticScene& scene, double yaw_deg) {
    if (!(std::abs(yaw_deg) <= 180.0)) fail(ErrorCode::InvalidArgument, "camera_orbit: |yaw| must be <= 180 degrees");
    SyntheticScene s = scene;
    s.options.yaw_deg += yaw_deg;
    render_states(s);
    return s;
}

RigidTransform camera_motion(const SyntheticScene& scene) {
    const RigidTransform& o2w = scene.obs.o2w;
    return compose(o2w.inverse(), compose(scene.gt_motion, o2w));
}

std::vector<bool> artifact_labels(const FeatureCloud& cloud, const Mask& flying) {
    std::vector<bool> out(cloud.size(), false);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const PixelIndex& px = cloud.pixels()[i];
        out[i] = flying.at(px.row, px.col);
    }
    return out;
}

FeatureCloud move_active(const FeatureCloud& cloud, const RigidTransform& motion) {
    std::vector<Vec3> pts(cloud.points().begin(), cloud.points().end());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (cloud.labels()[i] == Label::Active) pts[i] = motion.apply(pts[i]);
    }
    return cloud.with_points(std::move(pts));
}

std::vector<GraspCandidate> grasp_candidates(const SyntheticScene& scene, int count, std::uint64_t seed,
                                             std::vector<double>* body_height) {
    if (count < 0) fail(ErrorCode::InvalidArgument, "grasp_candidates: count must be >= 0");
    const SceneObject& active = scene.objects.at(0);
    double zlo = kInf, zhi = -kInf;
    for (const Primitive& p : active.parts) {
        zlo = std::min(zlo, p.center.z - p.size.z);
        zhi = std::max(zhi, p.center.z + p.size.z);
    }
    const RigidTransform body(active.obs_pose.rotation(), active.obs_pose.translation());
    const std::vector<Vec3> jaw = parallel_jaw_points();
    Rng rng(stream_seed(seed, 7));
    struct Scored {
        GraspCandidate cand;
        double height;
    };
    std::vector<Scored> out;
    for (int i = 0; i < count; ++i) {
        const double hgt = rng.uniform(zlo + 0.005, zhi - 0.005);
        const double beta = rng.uniform(0.0, 2.0 * kPi);
        const Vec3 gx{std::cos(beta), std::sin(beta), 0.0};
        const Vec3 gz{-std::sin(beta), std::cos(beta), 0.0};
        const Mat3 local = Mat3::from_cols(gx, cross(gz, gx), gz);
        GraspCandidate c;
        c.pose = compose(body, RigidTransform(local, Vec3{0.0, 0.0, hgt}));
        c.score = rng.uniform();
        c.gripper_points = jaw;
        out.push_back({std::move(c), hgt});
    }
    std::stable_sort(out.begin(), out.end(), [](const Scored& a, const Scored& b) { return a.cand.score > b.cand.score; });
    std::vector<GraspCandidate> cands;
    if (body_height) body_height->clear();
    for (auto& s : out) {
        cands.push_back(std::move(s.cand));
        if (body_height) body_height->push_back(s.height);
    }
    return cands;
}

std::vector<std::pair<PixelIndex, Vec3>> active_surface_points(const SyntheticScene& scene, bool edited) {
    const Camera cam{scene.obs.intr, scene.obs.o2w};
    const std::vector<PixelHit> hits = render(scene.objects, edited, cam);
    const int w = cam.intr.width();
    std::vector<std::pair<PixelIndex, Vec3>> out;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        if (hits[i].object != 0) continue;
        const PixelIndex px{static_cast<int>(i / w), static_cast<int>(i % w)};
        const SimilarityTransform& pose = edited ? scene.objects[0].edit_pose : scene.objects[0].obs_pose;
        out.emplace_back(px, pose.apply(hits[i].body));
    }
    return out;
}

double surface_distance(const SceneObject& object, const Vec3& body_point) {
    double best = kInf;
    for (const Primitive& p : object.parts) best = std::min(best, primitive_distance(p, body_point));
    return best;
}

// ---------------------------------------------------------------- stamp case

StampCase stamp_flying_edge_case(std::uint64_t seed, const StampCaseOptions& o) {
    if (!(o.spacing > 0.0) || o.strips < 0 || o.strip_points < 1 || !(o.strip_step > 0.0) ||
        !(o.min_offset >= 0.0) || !(o.max_offset >= o.min_offset) || !(o.feature_noise >= 0.0)) {
        fail(ErrorCode::InvalidArgument, "stamp_flying_edge_case: invalid options");
    }
    Rng rng(stream_seed(seed, 11));
    // Body frame: handle along +x, table at z = 0.
    constexpr double hx = 0.03, hy = 0.025, hz = 0.02;  // head half extents, head spans x in [-2hx, 0]
    constexpr double r = 0.012, len = 0.1;              // handle radius and length, axis at z = r
    const double h = o.spacing;

    struct Sample {
        Vec3 body;
        bool flying;
    };
    std::vector<Sample> samples;
    auto steps = [&](double extent) { return std::max(1, static_cast<int>(std::round(extent / h))); };

    // Head: top face and the four side faces; the handle face skips the
    // disk where the handle joins.
    const Vec3 head_c{-hx, 0.0, hz};
    {
        const int nx = steps(2 * hx), ny = steps(2 * hy), nz = steps(2 * hz);
        for (int i = 0; i <= nx; ++i)
            for (int j = 0; j <= ny; ++j)
                samples.push_back({{head_c.x - hx + 2 * hx * i / nx, -hy + 2 * hy * j / ny, 2 * hz}, false});
        for (int k = 0; k < nz; ++k) {
            const double z = 2 * hz * k / nz;
            for (int i = 0; i <= nx; ++i) {
                const double x = head_c.x - hx + 2 * hx * i / nx;
                samples.push_back({{x, -hy, z}, false});
                samples.push_back({{x, hy, z}, false});
            }
            for (int j = 1; j < ny; ++j) {
                const double y = -hy + 2 * hy * j / ny;
                samples.push_back({{-2 * hx, y, z}, false});
                if (y * y + (z - r) * (z - r) > r * r) samples.push_back({{0.0, y, z}, false});
            }
        }
    }
    // Handle: upper half of the lateral surface plus the end cap.
    {
        const int nx = steps(len), na = steps(kPi * r);
        for (int i = 0; i <= nx; ++i) {
            const double x = len * i / nx;
            for (int a = 0; a <= na; ++a) {
                const double t = kPi * a / na;
                samples.push_back({{x, r * std::cos(t), r + r * std::sin(t)}, false});
            }
        }
        const int nr = steps(r);
        for (int k = 1; k <= nr; ++k) {
            const double rho = r * k / nr;
            const int nt = std::max(6, static_cast<int>(std::round(2 * kPi * rho / h)));
            for (int t = 0; t < nt; ++t)
                samples.push_back({{len, rho * std::cos(2 * kPi * t / nt), r + rho * std::sin(2 * kPi * t / nt)}, false});
        }
        samples.push_back({{len, 0.0, r}, false});
    }

    // Strips follow the silhouette edges seen from above: the handle's
    // sides at y = ±r and the head's long top edges at y = ±hy. Each strip
    // leans outward and down toward the table.
    const double strip_len = o.strip_step * (o.strip_points - 1);
    for (int s = 0; s < o.strips; ++s) {
        const bool on_handle = (s % 4) < 2;
        const double side = (s % 2 == 0) ? 1.0 : -1.0;
        const int slot = s / 4;  // successive strips along the same edge
        double x0;
        Vec3 edge, out;
        if (on_handle) {
            x0 = 0.01 + slot * (strip_len + 0.025);
            if (x0 + strip_len > len) fail(ErrorCode::InvalidArgument, "stamp_flying_edge_case: too many strips");
            edge = {0.0, side * r, r};
            out = {0.0, side, 0.0};
        } else {
            x0 = -2 * hx + 0.008 + slot * (strip_len + 0.025);
            if (x0 + strip_len > -0.005) fail(ErrorCode::InvalidArgument, "stamp_flying_edge_case: too many strips");
            edge = {0.0, side * hy, 2 * hz};
            out = {0.0, side * std::sqrt(0.5), -std::sqrt(0.5)};
        }
        for (int k = 0; k < o.strip_points; ++k) {
            const double off = rng.uniform(o.min_offset, o.max_offset);
            samples.push_back({Vec3{x0 + o.strip_step * k, edge.y, edge.z} + off * out + Vec3{0, 0, -0.5 * off}, true});
        }
    }

    const SimilarityTransform pose(1.0, rotation_z(rng.uniform(-kPi, kPi)),
                                   {rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 0.0});
    const HarmonicBasis body_basis = harmonic_basis(kObjectScale);
    const HarmonicBasis table_basis = harmonic_basis(3.0 * kObjectScale);
    const double sigma = o.feature_noise / std::sqrt(static_cast<double>(kFeatureDim));

    const std::size_t n = samples.size();
    const int w = 1024;
    const int rows = static_cast<int>((n + w - 1) / w);
    std::vector<Vec3> pts;
    std::vector<float> feats(n * kFeatureDim);
    std::vector<PixelIndex> pixels;
    StampCase out;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 world = pose.apply(samples[i].body);
        pts.push_back(world);
        std::span<float> f(feats.data() + i * kFeatureDim, kFeatureDim);
        if (samples[i].flying) {
            embed(kTableId, world, table_basis, f);
        } else {
            embed(0, samples[i].body, body_basis, f);
        }
        if (sigma > 0.0)
            for (float& v : f) v += static_cast<float>(sigma * rng.normal());
        pixels.push_back({static_cast<int>(i / w), static_cast<int>(i % w)});
        out.artifact.push_back(samples[i].flying);
    }
    out.cloud = FeatureCloud(w, rows, kFeatureDim, std::move(pts), std::move(feats), std::move(pixels),
                             std::vector<Label>(n, Label::Active));
    return out;
}

}  // namespace editreg::synth
