#include "editreg/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "editreg/error.hpp"

namespace editreg {

namespace {

void require_dims(int width, int height, const char* what) {
    if (width <= 0 || height <= 0) {
        fail(ErrorCode::InvariantViolation, std::string(what) + ": dimensions must be positive");
    }
}

void require_length(std::size_t actual, std::size_t expected, const char* what) {
    if (actual != expected) {
        fail(ErrorCode::InvariantViolation, std::string(what) + ": raster length " + std::to_string(actual) +
                                                " does not match declared dimensions (expected " +
                                                std::to_string(expected) + ")");
    }
}

}  // namespace

CameraIntrinsics::CameraIntrinsics(double fx, double fy, double cx, double cy, int width, int height)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), width_(width), height_(height) {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
        fail(ErrorCode::InvariantViolation, "CameraIntrinsics: focal lengths must be positive");
    }
    require_dims(width, height, "CameraIntrinsics");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
        fail(ErrorCode::InvariantViolation, "CameraIntrinsics: principal point outside the image");
    }
}

Mask::Mask(int width, int height) : width_(width), height_(height) {
    require_dims(width, height, "Mask");
    bits_.assign(static_cast<std::size_t>(width) * height, 0);
}

Mask::Mask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
    require_dims(width, height, "Mask");
    require_length(bits_.size(), static_cast<std::size_t>(width) * height, "Mask");
    for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t Mask::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Mask Mask::unite(const Mask& other) const {
    if (other.width_ != width_ || other.height_ != height_) fail(ErrorCode::DimensionMismatch, "Mask::unite");
    Mask out(width_, height_);
    for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] | other.bits_[i];
    return out;
}

Mask Mask::intersect(const Mask& other) const {
    if (other.width_ != width_ || other.height_ != height_) fail(ErrorCode::DimensionMismatch, "Mask::intersect");
    Mask out(width_, height_);
    for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] & other.bits_[i];
    return out;
}

std::optional<PixelBox> bounding_box(const Mask& mask) {
    PixelBox box{mask.width(), mask.height(), -1, -1};
    bool any = false;
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            if (!mask.at(r, c)) continue;
            any = true;
            box.x0 = std::min(box.x0, c);
            box.y0 = std::min(box.y0, r);
            box.x1 = std::max(box.x1, c + 1);
            box.y1 = std::max(box.y1, r + 1);
        }
    }
    if (!any) return std::nullopt;
    return box;
}

ImageFrame::ImageFrame(int width, int height) : width_(width), height_(height) {
    require_dims(width, height, "ImageFrame");
    rgb_.assign(static_cast<std::size_t>(width) * height * 3, 0);
}

ImageFrame::ImageFrame(int width, int height, std::vector<std::uint8_t> rgb)
    : width_(width), height_(height), rgb_(std::move(rgb)) {
    require_dims(width, height, "ImageFrame");
    require_length(rgb_.size(), static_cast<std::size_t>(width) * height * 3, "ImageFrame");
}

DepthMap::DepthMap(int width, int height) : width_(width), height_(height) {
    require_dims(width, height, "DepthMap");
    depth_.assign(static_cast<std::size_t>(width) * height, std::nanf(""));
}

DepthMap::DepthMap(int width, int height, std::vector<float> depth)
    : width_(width), height_(height), depth_(std::move(depth)) {
    require_dims(width, height, "DepthMap");
    require_length(depth_.size(), static_cast<std::size_t>(width) * height, "DepthMap");
    for (float d : depth_) {
        if (std::isinf(d)) fail(ErrorCode::InvariantViolation, "DepthMap: infinite depth value");
    }
}

bool DepthMap::identical(const DepthMap& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           std::memcmp(depth_.data(), other.depth_.data(), depth_.size() * sizeof(float)) == 0;
}

FeatureRaster::FeatureRaster(int width, int height, int dim) : width_(width), height_(height), dim_(dim) {
    require_dims(width, height, "FeatureRaster");
    if (dim <= 0) fail(ErrorCode::InvariantViolation, "FeatureRaster: feature dimension must be positive");
    data_.assign(static_cast<std::size_t>(width) * height * dim, 0.0f);
}

FeatureRaster::FeatureRaster(int width, int height, int dim, std::vector<float> data)
    : width_(width), height_(height), dim_(dim), data_(std::move(data)) {
    require_dims(width, height, "FeatureRaster");
    if (dim <= 0) fail(ErrorCode::InvariantViolation, "FeatureRaster: feature dimension must be positive");
    require_length(data_.size(), static_cast<std::size_t>(width) * height * dim, "FeatureRaster");
}

}  // namespace editreg
