#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "editreg/geometry.hpp"

namespace editreg {

struct PixelIndex {
    int row = 0;
    int col = 0;
    friend constexpr bool operator==(const PixelIndex&, const PixelIndex&) = default;
    friend constexpr auto operator<=>(const PixelIndex&, const PixelIndex&) = default;
};

class CameraIntrinsics {
public:
    CameraIntrinsics() = default;
    // Throws InvariantViolation unless fx, fy > 0, 0 ≤ cx < width, 0 ≤ cy < height.
    CameraIntrinsics(double fx, double fy, double cx, double cy, int width, int height);

    double fx() const noexcept { return fx_; }
    double fy() const noexcept { return fy_; }
    double cx() const noexcept { return cx_; }
    double cy() const noexcept { return cy_; }
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    // Pixel (col=u, row=v) at depth d maps to d·((u−cx)/fx, (v−cy)/fy, 1).
    Vec3 unproject(double u, double v, double depth) const {
        return {depth * (u - cx_) / fx_, depth * (v - cy_) / fy_, depth};
    }
    // Returns (u, v) as (x, y) components.
    std::pair<double, double> project(const Vec3& p) const {
        return {fx_ * p.x / p.z + cx_, fy_ * p.y / p.z + cy_};
    }

    friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;

private:
    double fx_ = 1.0, fy_ = 1.0, cx_ = 0.0, cy_ = 0.0;
    int width_ = 1, height_ = 1;
};

class Mask {
public:
    Mask() = default;
    Mask(int width, int height);
    // Throws InvariantViolation when bits.size() != width·height.
    Mask(int width, int height, std::vector<std::uint8_t> bits);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool at(int row, int col) const { return bits_[index(row, col)] != 0; }
    void set(int row, int col, bool value) { bits_[index(row, col)] = value ? 1 : 0; }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }

    Mask unite(const Mask& other) const;
    Mask intersect(const Mask& other) const;

    friend bool operator==(const Mask&, const Mask&) = default;

private:
    std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * width_ + col; }
    int width_ = 0, height_ = 0;
    std::vector<std::uint8_t> bits_;
};

// Tight bounding box of set bits, inclusive-exclusive: [x0, x1) × [y0, y1).
struct PixelBox {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    friend bool operator==(const PixelBox&, const PixelBox&) = default;
};
std::optional<PixelBox> bounding_box(const Mask& mask);

class ImageFrame {
public:
    ImageFrame() = default;
    ImageFrame(int width, int height);
    ImageFrame(int width, int height, std::vector<std::uint8_t> rgb);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::span<const std::uint8_t> rgb() const noexcept { return rgb_; }
    std::uint8_t* pixel(int row, int col) { return &rgb_[3 * (static_cast<std::size_t>(row) * width_ + col)]; }
    const std::uint8_t* pixel(int row, int col) const {
        return &rgb_[3 * (static_cast<std::size_t>(row) * width_ + col)];
    }

    friend bool operator==(const ImageFrame&, const ImageFrame&) = default;

private:
    int width_ = 0, height_ = 0;
    std::vector<std::uint8_t> rgb_;
};

// Metric depth per pixel. Non-positive or NaN entries are invalid.
class DepthMap {
public:
    DepthMap() = default;
    DepthMap(int width, int height);  // all invalid
    DepthMap(int width, int height, std::vector<float> depth);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    float at(int row, int col) const { return depth_[static_cast<std::size_t>(row) * width_ + col]; }
    void set(int row, int col, float d) { depth_[static_cast<std::size_t>(row) * width_ + col] = d; }
    bool valid(int row, int col) const {
        const float d = at(row, col);
        return d > 0.0f && std::isfinite(d);
    }
    std::span<const float> values() const noexcept { return depth_; }

    // Bit-level equality so NaN entries compare equal.
    bool identical(const DepthMap& other) const;

private:
    int width_ = 0, height_ = 0;
    std::vector<float> depth_;
};

// Per-pixel D-dimensional features, row-major, pixel-major.
class FeatureRaster {
public:
    FeatureRaster() = default;
    FeatureRaster(int width, int height, int dim);
    FeatureRaster(int width, int height, int dim, std::vector<float> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int dim() const noexcept { return dim_; }
    std::span<const float> at(int row, int col) const {
        return {data_.data() + offset(row, col), static_cast<std::size_t>(dim_)};
    }
    std::span<float> at(int row, int col) { return {data_.data() + offset(row, col), static_cast<std::size_t>(dim_)}; }
    std::span<const float> data() const noexcept { return data_; }

    friend bool operator==(const FeatureRaster&, const FeatureRaster&) = default;

private:
    std::size_t offset(int row, int col) const {
        return (static_cast<std::size_t>(row) * width_ + col) * static_cast<std::size_t>(dim_);
    }
    int width_ = 0, height_ = 0, dim_ = 0;
    std::vector<float> data_;
};

}  // namespace editreg
