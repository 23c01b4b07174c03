#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"

#include "editreg/correspond.hpp"
#include "editreg/error.hpp"
#include "editreg/lift.hpp"
#include "editreg/register.hpp"
#include "editreg/synth.hpp"
#include "support.hpp"

using namespace editreg;
using namespace editreg::testing;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<Vec3> random_points(Rng& rng, std::size_t n, double span = 0.5) {
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(random_vec(rng, -span, span));
    return out;
}

std::vector<Vec3> mapped(const SimilarityTransform& t, const std::vector<Vec3>& pts) {
    std::vector<Vec3> out;
    for (const auto& p : pts) out.push_back(t.apply(p));
    return out;
}

double sse(const SimilarityTransform& t, const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Vec3 d = t.apply(a[i]) - b[i];
        s += dot(d, d);
    }
    return s;
}

SimilarityTransform sim(const RigidTransform& r) { return {1.0, r.rotation(), r.translation()}; }

// a∘b for similarities.
SimilarityTransform then(const SimilarityTransform& a, const SimilarityTransform& b) {
    return {a.scale() * b.scale(), a.rotation() * b.rotation(), a.scale() * (a.rotation() * b.translation()) + a.translation()};
}

Vec3 centroid(const std::vector<Vec3>& pts) {
    Vec3 c{};
    for (const auto& p : pts) c = c + p;
    return c / static_cast<double>(pts.size());
}

// Exact observed/edited cloud pair: the observed scene lifted without noise,
// the edited one is the observed cloud with the true motion applied to its
// active points, then the whole edited frame mapped by `frame`.
struct ExactPair {
    synth::SyntheticScene scene;
    FeatureCloud obs, edit;
};

ExactPair exact_pair(synth::TaskType task, std::uint64_t seed, const SimilarityTransform& frame = {}) {
    ExactPair p{synth::generate(task, {}, seed), {}, {}};
    const auto& b = p.scene.obs;
    p.obs = backproject(b.depth, b.intr, b.image, b.features, b.masks);
    p.edit = apply(frame, synth::move_active(p.obs, synth::camera_motion(p.scene)));
    return p;
}

}  // namespace

TEST_CASE("umeyama: identity") {
    Rng rng(51);
    const auto p = random_points(rng, 50);
    const auto t = umeyama(p, p);
    CHECK(std::abs(t.scale() - 1.0) < 1e-12);
    CHECK(max_abs_diff(t.rotation(), Mat3::identity()) < 1e-12);
    CHECK(max_abs_diff(t.translation(), Vec3{}) < 1e-12);
}

TEST_CASE("umeyama: recovers s = 1.3, Rz(30°), t = (0.1, -0.2, 0.05)") {
    Rng rng(52);
    const auto p = random_points(rng, 100);
    const SimilarityTransform truth(1.3, rotation_z(30 * kDeg), {0.1, -0.2, 0.05});
    const auto t = umeyama(p, mapped(truth, p));
    CHECK(std::abs(t.scale() - 1.3) < 1e-9);
    CHECK(max_abs_diff(t.rotation(), truth.rotation()) < 1e-9);
    CHECK(max_abs_diff(t.translation(), truth.translation()) < 1e-9);
}

TEST_CASE("umeyama agrees with the quaternion closed form on noisy data") {
    Rng rng(53);
    for (int i = 0; i < 50; ++i) {
        const auto p = random_points(rng, 80);
        const SimilarityTransform truth(rng.uniform(0.3, 3.0), random_rotation(rng), random_vec(rng, -1, 1));
        auto q = mapped(truth, p);
        for (auto& v : q) v = v + 0.01 * Vec3{rng.normal(), rng.normal(), rng.normal()};
        const auto a = umeyama(p, q), b = horn_similarity(p, q);
        CHECK(std::abs(a.scale() - b.scale()) < 1e-9);
        CHECK(max_abs_diff(a.rotation(), b.rotation()) < 1e-9);
        CHECK(max_abs_diff(a.translation(), b.translation()) < 1e-9);
    }
}

TEST_CASE("umeyama: reflections are corrected to a proper rotation") {
    Rng rng(54);
    const auto p = random_points(rng, 40);
    std::vector<Vec3> q;
    for (const auto& v : p) q.push_back({v.x, v.y, -v.z});
    const auto t = umeyama(p, q);
    CHECK(orthonormality_error(t.rotation()) < 1e-12);
    CHECK(t.rotation().determinant() == doctest::Approx(1.0));
}

TEST_CASE("umeyama errors") {
    const std::vector<Vec3> line{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
    CHECK_THROWS_WITH_AS(umeyama(line, line), doctest::Contains("DegenerateGeometry"), Error);
    const std::vector<Vec3> two{{0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_WITH_AS(umeyama(two, two), doctest::Contains("TooFewPoints"), Error);
    const std::vector<Vec3> tri{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    CHECK_THROWS_WITH_AS(umeyama(tri, line), doctest::Contains("TooFewPoints"), Error);
    CHECK_NOTHROW(umeyama(tri, tri));  // planar rank 2 is fine
}

TEST_CASE("umeyama residual is locally optimal") {
    Rng rng(55);
    const auto p = random_points(rng, 60);
    auto q = mapped(SimilarityTransform(0.8, random_rotation(rng), {0.3, 0.1, -0.2}), p);
    for (auto& v : q) v = v + 0.02 * Vec3{rng.normal(), rng.normal(), rng.normal()};
    const auto t = umeyama(p, q);
    const double best = sse(t, p, q);
    for (int i = 0; i < 100; ++i) {
        const double h = 1e-4;
        const SimilarityTransform moved(t.scale() * (1 + h * rng.normal()),
                                        axis_angle(random_vec(rng, -1, 1), h * rng.normal()) * t.rotation(),
                                        t.translation() + h * Vec3{rng.normal(), rng.normal(), rng.normal()});
        CHECK(sse(moved, p, q) >= best);
    }
}

TEST_CASE("fixed-scale alignment") {
    Rng rng(56);
    const auto p = random_points(rng, 70);
    SUBCASE("at the optimal scale it reproduces umeyama") {
        auto q = mapped(SimilarityTransform(1.7, random_rotation(rng), {1, 2, 3}), p);
        for (auto& v : q) v = v + 0.01 * Vec3{rng.normal(), rng.normal(), rng.normal()};
        const auto u = umeyama(p, q);
        const auto f = fixed_scale_align(p, q, u.scale());
        CHECK(max_abs_diff(f.rotation, u.rotation()) < 1e-12);
        CHECK(max_abs_diff(f.translation, u.translation()) < 1e-12);
    }
    SUBCASE("pure translation at unit scale") {
        const Vec3 d{0.4, -0.1, 0.25};
        const auto f = fixed_scale_align(p, mapped(SimilarityTransform(1.0, Mat3::identity(), d), p), 1.0);
        CHECK(max_abs_diff(f.rotation, Mat3::identity()) < 1e-12);
        CHECK(max_abs_diff(f.translation, d) < 1e-12);
    }
    SUBCASE("twice the true scale keeps R and shifts t analytically") {
        const RigidTransform truth(random_rotation(rng), {0.2, 0.3, -0.4});
        const auto q = mapped(sim(truth), p);
        const double s = 2.0;
        const auto f = fixed_scale_align(p, q, s);
        CHECK(max_abs_diff(f.rotation, truth.rotation()) < 1e-12);
        const Vec3 want = truth.translation() + (1.0 - s) * (truth.rotation() * centroid(p));
        CHECK(max_abs_diff(f.translation, want) < 1e-12);
        // The translation minimizes the residual for that (s, R): no grid
        // step around it does better.
        const double base = sse(SimilarityTransform(s, f.rotation, f.translation), p, q);
        for (int dx = -2; dx <= 2; ++dx)
            for (int dy = -2; dy <= 2; ++dy)
                for (int dz = -2; dz <= 2; ++dz) {
                    const Vec3 t = f.translation + 1e-3 * Vec3{double(dx), double(dy), double(dz)};
                    CHECK(sse(SimilarityTransform(s, f.rotation, t), p, q) >= base);
                }
    }
}

TEST_CASE("relative transform examples") {
    Rng rng(57);
    const SimilarityTransform a(0.9, random_rotation(rng), random_vec(rng, -1, 1));
    const auto same = relative_transform(a, a);
    CHECK(max_abs_diff(same.rotation(), Mat3::identity()) < 1e-12);
    CHECK(max_abs_diff(same.translation(), Vec3{}) < 1e-12);

    const SimilarityTransform p(1.0, Mat3::identity(), {0.1, 0.2, 0.3});
    const SimilarityTransform act(1.0, rotation_z(0.7), {1.0, -1.0, 0.5});
    const auto rel = relative_transform(p, act);
    CHECK(max_abs_diff(rel.rotation(), act.rotation()) < 1e-15);
    CHECK(max_abs_diff(rel.translation(), Vec3{0.9, -1.2, 0.2}) < 1e-15);

    CHECK_THROWS_WITH_AS(relative_transform(p, SimilarityTransform(1.1, Mat3::identity(), {})),
                         doctest::Contains("ScaleMismatch"), Error);
    CHECK_NOTHROW(relative_transform_decoupled(p, SimilarityTransform(1.1, Mat3::identity(), {})));
}

TEST_CASE("world conjugation") {
    Rng rng(58);
    const auto rel = random_rigid(rng), o2w = random_rigid(rng);
    CHECK(max_abs_diff(to_world(rel, RigidTransform::identity()).rotation(), rel.rotation()) < 1e-15);
    CHECK(max_abs_diff(to_world(rel, RigidTransform::identity()).translation(), rel.translation()) < 1e-15);
    const auto id = to_world(RigidTransform::identity(), o2w);
    CHECK(max_abs_diff(id.rotation(), Mat3::identity()) < 1e-12);
    CHECK(max_abs_diff(id.translation(), Vec3{}) < 1e-12);
    for (int i = 0; i < 50; ++i) {
        const auto r = random_rigid(rng), c = random_rigid(rng);
        const auto w = to_world(r, c);
        for (int k = 0; k < 10; ++k) {
            const Vec3 p = random_vec(rng, -1, 1);
            CHECK(max_abs_diff(w.apply(c.apply(p)), c.apply(r.apply(p))) < 1e-9);
        }
    }
}

TEST_CASE("exact clouds: T_a equals the true motion") {
    Rng rng(59);
    for (auto task : synth::kAllTasks) {
        CAPTURE(synth::task_name(task));
        // The edited frame differs from the observed one by an arbitrary
        // similarity, as with a generated image lifted by a depth estimator.
        const SimilarityTransform frame(rng.uniform(0.5, 2.0), random_rotation(rng), random_vec(rng, -1, 1));
        const auto p = exact_pair(task, 3, frame);
        const auto pp = passive_pairs(p.obs, p.edit);
        const auto ap = active_pairs(p.obs, p.edit, {});
        const auto r = register_pair(p.obs, p.edit, pp, ap, p.scene.obs.o2w);
        CHECK(rotation_angle_between(r.world.rotation(), p.scene.gt_motion.rotation()) < 1e-9);
        CHECK(max_abs_diff(r.world.translation(), p.scene.gt_motion.translation()) < 1e-9);
        const auto cam = synth::camera_motion(p.scene);
        CHECK(max_abs_diff(r.rel_obs.rotation(), cam.rotation()) < 1e-9);
        CHECK(max_abs_diff(r.rel_obs.translation(), cam.translation()) < 1e-9);
        CHECK(r.active_unified.scale() == r.passive.scale());
        CHECK(std::abs(r.passive.scale() - frame.scale()) < 1e-9);
        CHECK(r.residuals.passive < 1e-9);
        CHECK(r.residuals.active < 1e-9);
        CHECK(!r.scale_warning);
    }
}

TEST_CASE("a 1.6x active scale gap warns and still completes") {
    const auto base = exact_pair(synth::TaskType::Covering, 5);
    // Grow the edited active points 1.6x about their centroid.
    std::vector<Vec3> pts(base.edit.points().begin(), base.edit.points().end());
    const auto act = base.edit.indices_with(Label::Active);
    Vec3 c{};
    for (auto i : act) c = c + pts[i];
    c = c / static_cast<double>(act.size());
    for (auto i : act) pts[i] = c + 1.6 * (pts[i] - c);
    const auto edit = base.edit.with_points(pts);
    std::vector<std::string> warnings;
    ScopedWarningHandler h([&](std::string_view m) { warnings.emplace_back(m); });
    const auto r = register_pair(base.obs, edit, passive_pairs(base.obs, edit), active_pairs(base.obs, edit, {}),
                                 base.scene.obs.o2w);
    CHECK(r.scale_gap == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(r.scale_warning);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("scale") != std::string::npos);
    CHECK(r.active_unified.scale() == r.passive.scale());
}

TEST_CASE("viewpoint change conjugates every transform and leaves T_a unchanged") {
    Rng rng(60);
    const auto p = exact_pair(synth::TaskType::Assembly, 7, SimilarityTransform(1.2, rotation_x(0.3), {0.1, 0, 0}));
    auto noisy_edit = p.edit.with_points([&] {
        std::vector<Vec3> pts(p.edit.points().begin(), p.edit.points().end());
        for (auto& v : pts) v = v + 0.002 * Vec3{rng.normal(), rng.normal(), rng.normal()};
        return pts;
    }());
    const auto pp = passive_pairs(p.obs, noisy_edit);
    const auto ap = active_pairs(p.obs, noisy_edit, {});
    const auto r = register_pair(p.obs, noisy_edit, pp, ap, p.scene.obs.o2w);
    for (int i = 0; i < 10; ++i) {
        const auto cam = random_rigid(rng);
        const auto obs2 = apply(sim(cam), p.obs);
        const auto edit2 = apply(sim(cam), noisy_edit);
        const auto o2w2 = compose(p.scene.obs.o2w, cam.inverse());
        const auto r2 = register_pair(obs2, edit2, pp, ap, o2w2);
        const auto want_p = then(then(sim(cam), r.passive), sim(cam.inverse()));
        CHECK(std::abs(r2.passive.scale() - want_p.scale()) < 1e-9);
        CHECK(max_abs_diff(r2.passive.rotation(), want_p.rotation()) < 1e-9);
        CHECK(max_abs_diff(r2.passive.translation(), want_p.translation()) < 1e-9);
        const auto want_rel = compose(compose(cam, r.rel_obs), cam.inverse());
        CHECK(max_abs_diff(r2.rel_obs.rotation(), want_rel.rotation()) < 1e-9);
        CHECK(max_abs_diff(r2.rel_obs.translation(), want_rel.translation()) < 1e-9);
        CHECK(max_abs_diff(r2.world.rotation(), r.world.rotation()) < 1e-9);
        CHECK(max_abs_diff(r2.world.translation(), r.world.translation()) < 1e-9);
        CHECK(r2.active_unified.scale() == r2.passive.scale());
    }
}

TEST_CASE("decoupled scales misplace the active object by the analytic offset") {
    // Passive at scale s_p, active at s_a = 1.2·s_p, identical rigid parts.
    Rng rng(61);
    const double sp = 0.8, sa = 1.2 * sp;
    const Mat3 rot = random_rotation(rng);
    const Vec3 t{0.3, -0.1, 0.2};
    const SimilarityTransform passive(sp, rot, t), active(sa, rot, t);
    const auto unified = relative_transform(passive, SimilarityTransform(sp, rot, t));
    const auto decoupled = relative_transform_decoupled(passive, active);
    CHECK(max_abs_diff(unified.translation(), Vec3{}) < 1e-12);
    const double want = std::abs(1.0 / sa - 1.0 / sp) * norm(t);
    CHECK(norm(decoupled.translation()) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("register_pair guards") {
    const auto p = exact_pair(synth::TaskType::Insertion, 2);
    SUBCASE("a collapsed passive scale is rejected") {
        std::vector<Vec3> pts(p.edit.points().begin(), p.edit.points().end());
        for (auto i : p.edit.indices_with(Label::Passive)) pts[i] = 1e-7 * pts[i];
        const auto edit = p.edit.with_points(pts);
        CHECK_THROWS_WITH_AS(register_pair(p.obs, edit, passive_pairs(p.obs, edit), active_pairs(p.obs, edit, {}),
                                           p.scene.obs.o2w),
                             doctest::Contains("UnifiedScaleNonPositive"), Error);
    }
    SUBCASE("the outlier hook sees every pair and can prune") {
        RegistrationOptions opt;
        std::size_t calls = 0;
        opt.outlier_rejection = [&](std::span<const Vec3> a, std::span<const Vec3>) {
            ++calls;
            std::vector<bool> keep(a.size(), true);
            keep[0] = false;
            return keep;
        };
        const auto r = register_pair(p.obs, p.edit, passive_pairs(p.obs, p.edit), active_pairs(p.obs, p.edit, {}),
                                     p.scene.obs.o2w, opt);
        CHECK(calls >= 2);
        CHECK(rotation_angle_between(r.world.rotation(), p.scene.gt_motion.rotation()) < 1e-9);
    }
    SUBCASE("without unification the raw active scale is used") {
        RegistrationOptions opt;
        opt.unify_scale = false;
        const auto r = register_pair(p.obs, p.edit, passive_pairs(p.obs, p.edit), active_pairs(p.obs, p.edit, {}),
                                     p.scene.obs.o2w, opt);
        CHECK(!r.scale_unified);
        CHECK(r.residuals.passive >= 0.0);
    }
}
