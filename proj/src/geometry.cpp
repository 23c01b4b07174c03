#include "editreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "editreg/error.hpp"

namespace editreg {

double frobenius_norm(const Mat3& a) {
    double s = 0.0;
    for (double v : a.m) s += v * v;
    return std::sqrt(s);
}

bool is_finite(const Mat3& a) {
    return std::all_of(a.m.begin(), a.m.end(), [](double v) { return std::isfinite(v); });
}

double orthonormality_error(const Mat3& r) {
    return frobenius_norm(r.transpose() * r - Mat3::identity()) + std::abs(r.determinant() - 1.0);
}

Mat3 rotation_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return Mat3{{1, 0, 0, 0, c, -s, 0, s, c}};
}

Mat3 rotation_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return Mat3{{c, 0, s, 0, 1, 0, -s, 0, c}};
}

Mat3 rotation_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return Mat3{{c, -s, 0, s, c, 0, 0, 0, 1}};
}

Mat3 axis_angle(const Vec3& axis, double a) {
    const Vec3 k = normalized(axis);
    const Mat3 kx{{0, -k.z, k.y, k.z, 0, -k.x, -k.y, k.x, 0}};
    return Mat3::identity() + std::sin(a) * kx + (1.0 - std::cos(a)) * (kx * kx);
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
    // atan2 form stays accurate near zero where acos((tr−1)/2) loses digits.
    const Mat3 d = a.transpose() * b;
    const Vec3 w{d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)};
    return std::atan2(0.5 * norm(w), 0.5 * (d.trace() - 1.0));
}

namespace {

Vec3 any_orthogonal(const Vec3& a) {
    const Vec3 trial = std::abs(a.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    return normalized(cross(a, trial));
}

}  // namespace

Svd3 svd3(const Mat3& a) {
    // Columns of `work` are orthogonalized by plane rotations applied from the
    // right; the same rotations accumulate into V, so a·V = work.
    std::array<Vec3, 3> cols{a.col(0), a.col(1), a.col(2)};
    std::array<Vec3, 3> vcols{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        double total = 0.0;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                const double alpha = dot(cols[p], cols[p]);
                const double beta = dot(cols[q], cols[q]);
                const double gamma = dot(cols[p], cols[q]);
                total += alpha * beta;
                if (gamma == 0.0) continue;
                off += gamma * gamma;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                const Vec3 cp = cols[p], cq = cols[q];
                cols[p] = c * cp - s * cq;
                cols[q] = s * cp + c * cq;
                const Vec3 vp = vcols[p], vq = vcols[q];
                vcols[p] = c * vp - s * vq;
                vcols[q] = s * vp + c * vq;
            }
        }
        if (off <= 1e-28 * total || total == 0.0) break;
    }

    std::array<int, 3> order{0, 1, 2};
    std::array<double, 3> sig{norm(cols[0]), norm(cols[1]), norm(cols[2])};
    std::sort(order.begin(), order.end(), [&](int i, int j) { return sig[i] > sig[j]; });

    Svd3 out;
    std::array<Vec3, 3> ucols;
    const double smax = sig[order[0]];
    const double tiny = smax * 1e-13;
    int rank = 0;
    for (int k = 0; k < 3; ++k) {
        const int i = order[k];
        out.sigma[k] = sig[i];
        if (sig[i] > tiny && sig[i] > 0.0) {
            ucols[k] = cols[i] / sig[i];
            ++rank;
        }
    }
    if (rank == 0) {
        ucols = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    } else if (rank == 1) {
        ucols[1] = any_orthogonal(ucols[0]);
        ucols[2] = cross(ucols[0], ucols[1]);
    } else if (rank == 2) {
        ucols[2] = cross(ucols[0], ucols[1]);
    }
    out.u = Mat3::from_cols(ucols[0], ucols[1], ucols[2]);
    out.v = Mat3::from_cols(vcols[order[0]], vcols[order[1]], vcols[order[2]]);
    return out;
}

Mat3 nearest_rotation(const Mat3& a) {
    const Svd3 d = svd3(a);
    Mat3 r = d.u * d.v.transpose();
    if (r.determinant() < 0.0) r = d.u * Mat3::diagonal(1, 1, -1) * d.v.transpose();
    return r;
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
    if (!is_finite(rotation) || !is_finite(translation)) {
        fail(ErrorCode::InvariantViolation, "RigidTransform: non-finite component");
    }
    const double err = orthonormality_error(rotation);
    if (err > 1e-9) {
        std::ostringstream os;
        os << "RigidTransform: rotation is not orthonormal with det +1 (error " << err << ")";
        fail(ErrorCode::InvariantViolation, os.str());
    }
}

RigidTransform RigidTransform::inverse() const {
    const Mat3 rt = rotation_.transpose();
    return RigidTransform(rt, -(rt * translation_));
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    Mat3 r = a.rotation() * b.rotation();
    if (orthonormality_error(r) > 1e-12) r = nearest_rotation(r);
    return RigidTransform(r, a.rotation() * b.translation() + a.translation());
}

SimilarityTransform::SimilarityTransform(double scale, const Mat3& rotation, const Vec3& translation)
    : scale_(scale), rotation_(rotation), translation_(translation) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        fail(ErrorCode::InvariantViolation, "SimilarityTransform: scale must be positive and finite");
    }
    if (!is_finite(rotation) || !is_finite(translation)) {
        fail(ErrorCode::InvariantViolation, "SimilarityTransform: non-finite component");
    }
    if (orthonormality_error(rotation) > 1e-9) {
        fail(ErrorCode::InvariantViolation, "SimilarityTransform: rotation is not orthonormal with det +1");
    }
}

SimilarityTransform SimilarityTransform::inverse() const {
    const Mat3 rt = rotation_.transpose();
    return SimilarityTransform(1.0 / scale_, rt, -(1.0 / scale_) * (rt * translation_));
}

}  // namespace editreg
