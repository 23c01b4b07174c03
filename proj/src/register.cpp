#include "editreg/register.hpp"

#include <cmath>
#include <sstream>

#include "editreg/error.hpp"

namespace editreg {

namespace {

struct Moments {
    Vec3 mean_obs;
    Vec3 mean_edit;
    double var_obs = 0.0;  // mean squared distance to the centroid
    Mat3 cross;            // (1/n) Σ (q − q̄)(p − p̄)ᵀ
};

Moments moments(std::span<const Vec3> obs, std::span<const Vec3> edit) {
    if (obs.size() != edit.size()) fail(ErrorCode::TooFewPoints, "point arrays differ in length");
    if (obs.size() < 3) fail(ErrorCode::TooFewPoints, "need at least 3 corresponding points");
    const auto n = static_cast<double>(obs.size());
    Moments m;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        m.mean_obs += obs[i];
        m.mean_edit += edit[i];
    }
    m.mean_obs = m.mean_obs / n;
    m.mean_edit = m.mean_edit / n;
    Mat3 scatter;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const Vec3 p = obs[i] - m.mean_obs;
        const Vec3 q = edit[i] - m.mean_edit;
        m.var_obs += dot(p, p);
        m.cross = m.cross + outer(q, p);
        scatter = scatter + outer(p, p);
    }
    m.var_obs /= n;
    m.cross = (1.0 / n) * m.cross;

    const Svd3 s = svd3(scatter);
    if (!(s.sigma[0] > 0.0) || s.sigma[1] <= 1e-12 * s.sigma[0]) {
        fail(ErrorCode::DegenerateGeometry, "observed points are collinear or coincident");
    }
    return m;
}

struct RotationSolve {
    Mat3 rotation;
    double trace_ds = 0.0;  // tr(D·S)
};

RotationSolve solve_rotation(const Mat3& cross) {
    const Svd3 d = svd3(cross);
    if (!(d.sigma[0] > 0.0) || d.sigma[1] <= 1e-12 * d.sigma[0]) {
        fail(ErrorCode::DegenerateGeometry, "cross-covariance has rank < 2");
    }
    const double sign = (d.u.determinant() * d.v.determinant() < 0.0) ? -1.0 : 1.0;
    RotationSolve r;
    r.rotation = d.u * Mat3::diagonal(1.0, 1.0, sign) * d.v.transpose();
    r.trace_ds = d.sigma[0] + d.sigma[1] + sign * d.sigma[2];
    return r;
}

}  // namespace

SimilarityTransform umeyama(std::span<const Vec3> obs, std::span<const Vec3> edit) {
    const Moments m = moments(obs, edit);
    const RotationSolve r = solve_rotation(m.cross);
    const double scale = r.trace_ds / m.var_obs;
    if (!(scale > 0.0)) fail(ErrorCode::DegenerateGeometry, "non-positive similarity scale");
    return SimilarityTransform(scale, r.rotation, m.mean_edit - scale * (r.rotation * m.mean_obs));
}

RigidPart fixed_scale_align(std::span<const Vec3> obs, std::span<const Vec3> edit, double scale) {
    if (!(scale > 0.0)) fail(ErrorCode::InvalidArgument, "fixed_scale_align: scale must be positive");
    const Moments m = moments(obs, edit);
    const RotationSolve r = solve_rotation(m.cross);
    return {r.rotation, m.mean_edit - scale * (r.rotation * m.mean_obs)};
}

RigidTransform relative_transform_decoupled(const SimilarityTransform& passive, const SimilarityTransform& active) {
    const Mat3 rp_inv = passive.rotation().transpose();
    Mat3 r = rp_inv * active.rotation();
    if (orthonormality_error(r) > 1e-12) r = nearest_rotation(r);
    const Vec3 t = rp_inv * (active.translation() / active.scale() - passive.translation() / passive.scale());
    return RigidTransform(r, t);
}

RigidTransform relative_transform(const SimilarityTransform& passive, const SimilarityTransform& active) {
    if (active.scale() != passive.scale()) {
        std::ostringstream os;
        os.precision(17);
        os << "relative_transform: active scale " << active.scale() << " differs from passive scale "
           << passive.scale();
        fail(ErrorCode::ScaleMismatch, os.str());
    }
    return relative_transform_decoupled(passive, active);
}

RigidTransform to_world(const RigidTransform& rel, const RigidTransform& o2w) {
    const Mat3& ro = o2w.rotation();
    Mat3 rw = ro * rel.rotation() * ro.transpose();
    if (orthonormality_error(rw) > 1e-12) rw = nearest_rotation(rw);
    const Vec3 tw = ro * rel.translation() + o2w.translation() - rw * o2w.translation();
    return RigidTransform(rw, tw);
}

double rms_residual(const SimilarityTransform& t, std::span<const Vec3> obs, std::span<const Vec3> edit) {
    if (obs.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const Vec3 d = t.apply(obs[i]) - edit[i];
        acc += dot(d, d);
    }
    return std::sqrt(acc / static_cast<double>(obs.size()));
}

namespace {

struct PairPoints {
    std::vector<Vec3> obs;
    std::vector<Vec3> edit;
};

PairPoints gather_pairs(const FeatureCloud& obs, const FeatureCloud& edit, const CorrespondenceSet& set,
                        const OutlierRejection& reject, const char* what) {
    PairPoints out;
    out.obs.reserve(set.size());
    out.edit.reserve(set.size());
    for (const auto& c : set.pairs) {
        if (c.obs >= obs.size() || c.edit >= edit.size()) {
            fail(ErrorCode::InvalidArgument, std::string(what) + " correspondence index out of range");
        }
        out.obs.push_back(obs.points()[c.obs]);
        out.edit.push_back(edit.points()[c.edit]);
    }
    if (reject) {
        const std::vector<bool> keep = reject(out.obs, out.edit);
        if (keep.size() != out.obs.size()) fail(ErrorCode::InvalidArgument, "outlier rejection returned wrong length");
        PairPoints kept;
        for (std::size_t i = 0; i < keep.size(); ++i) {
            if (!keep[i]) continue;
            kept.obs.push_back(out.obs[i]);
            kept.edit.push_back(out.edit[i]);
        }
        out = std::move(kept);
    }
    if (out.obs.size() < 3) fail(ErrorCode::TooFewPoints, std::string(what) + " correspondences: fewer than 3 pairs");
    return out;
}

}  // namespace

RegistrationResult register_pair(const FeatureCloud& obs, const FeatureCloud& edit, const CorrespondenceSet& passive_set,
                                 const CorrespondenceSet& active_set, const RigidTransform& o2w,
                                 const RegistrationOptions& options) {
    const PairPoints pp = gather_pairs(obs, edit, passive_set, options.outlier_rejection, "passive");
    const PairPoints ap = gather_pairs(obs, edit, active_set, options.outlier_rejection, "active");

    RegistrationResult res;
    res.passive = umeyama(pp.obs, pp.edit);
    res.active_raw = umeyama(ap.obs, ap.edit);

    const double sp = res.passive.scale();
    if (sp < 1e-6) fail(ErrorCode::UnifiedScaleNonPositive, "passive scale is below 1e-6; cannot unify scales");
    const RigidPart unified = fixed_scale_align(ap.obs, ap.edit, sp);
    res.active_unified = SimilarityTransform(sp, unified.rotation, unified.translation);

    res.scale_gap = std::abs(res.active_raw.scale() / sp - 1.0);
    if (res.scale_gap >= options.scale_gap_warning) {
        res.scale_warning = true;
        std::ostringstream os;
        os << "register_pair: active/passive scale gap " << res.scale_gap << " exceeds " << options.scale_gap_warning;
        warn(os.str());
    }

    res.scale_unified = options.unify_scale;
    const SimilarityTransform& active = options.unify_scale ? res.active_unified : res.active_raw;
    res.rel_obs = options.unify_scale ? relative_transform(res.passive, active)
                                      : relative_transform_decoupled(res.passive, active);
    res.world = to_world(res.rel_obs, o2w);
    res.residuals.passive = rms_residual(res.passive, pp.obs, pp.edit);
    res.residuals.active = rms_residual(active, ap.obs, ap.edit);
    return res;
}

}  // namespace editreg
