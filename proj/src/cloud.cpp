#include "editreg/cloud.hpp"

#include <cmath>
#include <string>

#include "editreg/error.hpp"

namespace editreg {

FeatureCloud::FeatureCloud(int image_width, int image_height, int feature_dim, std::vector<Vec3> points,
                           std::vector<float> features, std::vector<PixelIndex> pixels, std::vector<Label> labels)
    : width_(image_width),
      height_(image_height),
      dim_(feature_dim),
      points_(std::move(points)),
      features_(std::move(features)),
      pixels_(std::move(pixels)),
      labels_(std::move(labels)) {
    if (image_width <= 0 || image_height <= 0) fail(ErrorCode::InvariantViolation, "FeatureCloud: bad image size");
    if (feature_dim <= 0) fail(ErrorCode::InvariantViolation, "FeatureCloud: feature dimension must be positive");
    const std::size_t n = points_.size();
    if (pixels_.size() != n || labels_.size() != n || features_.size() != n * static_cast<std::size_t>(dim_)) {
        fail(ErrorCode::InvariantViolation,
             "FeatureCloud: array lengths differ (points " + std::to_string(n) + ", features " +
                 std::to_string(features_.size()) + "/" + std::to_string(dim_) + ", pixels " +
                 std::to_string(pixels_.size()) + ", labels " + std::to_string(labels_.size()) + ")");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_finite(points_[i])) fail(ErrorCode::InvariantViolation, "FeatureCloud: non-finite point");
        const PixelIndex& px = pixels_[i];
        if (px.row < 0 || px.row >= height_ || px.col < 0 || px.col >= width_) {
            fail(ErrorCode::InvariantViolation, "FeatureCloud: pixel index outside the source image");
        }
        if (static_cast<std::uint8_t>(labels_[i]) > 2) fail(ErrorCode::InvariantViolation, "FeatureCloud: bad label");
        float* f = features_.data() + i * static_cast<std::size_t>(dim_);
        double sq = 0.0;
        for (int k = 0; k < dim_; ++k) sq += static_cast<double>(f[k]) * f[k];
        const double len = std::sqrt(sq);
        if (!(len > 0.0) || !std::isfinite(len)) {
            fail(ErrorCode::InvariantViolation, "FeatureCloud: zero or non-finite feature vector");
        }
        if (std::abs(len - 1.0) > 1e-7) {
            for (int k = 0; k < dim_; ++k) f[k] = static_cast<float>(f[k] / len);
        }
    }
}

std::vector<std::size_t> FeatureCloud::indices_with(Label label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) out.push_back(i);
    return out;
}

FeatureCloud FeatureCloud::subset(std::span<const std::size_t> indices) const {
    FeatureCloud out;
    out.width_ = width_;
    out.height_ = height_;
    out.dim_ = dim_;
    out.points_.reserve(indices.size());
    out.pixels_.reserve(indices.size());
    out.labels_.reserve(indices.size());
    out.features_.reserve(indices.size() * static_cast<std::size_t>(dim_));
    for (std::size_t i : indices) {
        if (i >= size()) fail(ErrorCode::InvalidArgument, "FeatureCloud::subset: index out of range");
        out.points_.push_back(points_[i]);
        out.pixels_.push_back(pixels_[i]);
        out.labels_.push_back(labels_[i]);
        const auto f = feature(i);
        out.features_.insert(out.features_.end(), f.begin(), f.end());
    }
    return out;
}

FeatureCloud FeatureCloud::with_points(std::vector<Vec3> points) const {
    if (points.size() != points_.size()) fail(ErrorCode::InvalidArgument, "FeatureCloud::with_points: size");
    FeatureCloud out = *this;
    out.points_ = std::move(points);
    return out;
}

Mask FeatureCloud::pixel_mask() const {
    Mask m(width_, height_);
    for (const auto& px : pixels_) m.set(px.row, px.col, true);
    return m;
}

Mask FeatureCloud::pixel_mask(Label label) const {
    Mask m(width_, height_);
    for (std::size_t i = 0; i < pixels_.size(); ++i)
        if (labels_[i] == label) m.set(pixels_[i].row, pixels_[i].col, true);
    return m;
}

FeatureCloud apply(const SimilarityTransform& t, const FeatureCloud& cloud) {
    std::vector<Vec3> pts;
    pts.reserve(cloud.size());
    for (const Vec3& p : cloud.points()) pts.push_back(t.apply(p));
    return cloud.with_points(std::move(pts));
}

FeatureCloud apply(const RigidTransform& t, const FeatureCloud& cloud) {
    std::vector<Vec3> pts;
    pts.reserve(cloud.size());
    for (const Vec3& p : cloud.points()) pts.push_back(t.apply(p));
    return cloud.with_points(std::move(pts));
}

FeatureCloud concatenate(const FeatureCloud& a, const FeatureCloud& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    if (a.image_width() != b.image_width() || a.image_height() != b.image_height() ||
        a.feature_dim() != b.feature_dim()) {
        fail(ErrorCode::DimensionMismatch, "concatenate: clouds are on different grids");
    }
    std::vector<Vec3> pts(a.points().begin(), a.points().end());
    pts.insert(pts.end(), b.points().begin(), b.points().end());
    std::vector<float> feats(a.features().begin(), a.features().end());
    feats.insert(feats.end(), b.features().begin(), b.features().end());
    std::vector<PixelIndex> px(a.pixels().begin(), a.pixels().end());
    px.insert(px.end(), b.pixels().begin(), b.pixels().end());
    std::vector<Label> lb(a.labels().begin(), a.labels().end());
    lb.insert(lb.end(), b.labels().begin(), b.labels().end());
    return FeatureCloud(a.image_width(), a.image_height(), a.feature_dim(), std::move(pts), std::move(feats),
                        std::move(px), std::move(lb));
}

}  // namespace editreg
