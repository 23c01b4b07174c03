#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "editreg/geometry.hpp"
#include "editreg/raster.hpp"

namespace editreg {

enum class Label : std::uint8_t { Background = 0, Active = 1, Passive = 2 };

// Pixel-aligned points with per-point unit-norm features. Points are in
// meters in the camera frame of the image the pixels index into.
class FeatureCloud {
public:
    FeatureCloud() = default;

    // Validates equal lengths and pixel bounds; normalizes every feature to
    // unit L2 norm. Zero-norm features are rejected.
    FeatureCloud(int image_width, int image_height, int feature_dim, std::vector<Vec3> points,
                 std::vector<float> features, std::vector<PixelIndex> pixels, std::vector<Label> labels);

    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    int feature_dim() const noexcept { return dim_; }
    int image_width() const noexcept { return width_; }
    int image_height() const noexcept { return height_; }

    std::span<const Vec3> points() const noexcept { return points_; }
    std::span<const float> features() const noexcept { return features_; }
    std::span<const float> feature(std::size_t i) const {
        return {features_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    std::span<const PixelIndex> pixels() const noexcept { return pixels_; }
    std::span<const Label> labels() const noexcept { return labels_; }

    // Points whose label matches, in original order.
    std::vector<std::size_t> indices_with(Label label) const;
    FeatureCloud subset(std::span<const std::size_t> indices) const;
    FeatureCloud with_points(std::vector<Vec3> points) const;

    // Pixel mask of the points (optionally restricted to one label).
    Mask pixel_mask() const;
    Mask pixel_mask(Label label) const;

    friend bool operator==(const FeatureCloud&, const FeatureCloud&) = default;

private:
    int width_ = 0, height_ = 0, dim_ = 0;
    std::vector<Vec3> points_;
    std::vector<float> features_;
    std::vector<PixelIndex> pixels_;
    std::vector<Label> labels_;
};

// Maps each point p to s·R·p + t; features, pixels, labels preserved.
FeatureCloud apply(const SimilarityTransform& t, const FeatureCloud& cloud);
FeatureCloud apply(const RigidTransform& t, const FeatureCloud& cloud);

// Merges clouds defined over the same image grid and feature dimension.
FeatureCloud concatenate(const FeatureCloud& a, const FeatureCloud& b);

}  // namespace editreg
