#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "editreg/cloud.hpp"
#include "editreg/raster.hpp"

namespace editreg {

struct ObjectMasks {
    Mask active;
    Mask passive;
};

enum class CropMode { Pad, Resize };

// How the estimator input is cut out of the edited image. Target pixel
// (x, y) samples source coordinate
//     origin + ((x, y) + 0.5) / scale − 0.5
// so pad mode (scale 1) is an integer shift and resize mode is an
// aspect-preserving zoom with letterboxing.
struct CropPlan {
    PixelBox source_box;  // tight box of the union mask plus margin, clamped
    CropMode mode = CropMode::Pad;
    int target_width = 0;
    int target_height = 0;
    double scale_x = 1.0;
    double scale_y = 1.0;
    double origin_x = 0.0;
    double origin_y = 0.0;

    std::pair<double, double> target_to_source(double x, double y) const {
        return {origin_x + (x + 0.5) / scale_x - 0.5, origin_y + (y + 0.5) / scale_y - 0.5};
    }
    std::pair<double, double> source_to_target(double u, double v) const {
        return {(u - origin_x + 0.5) * scale_x - 0.5, (v - origin_y + 0.5) * scale_y - 0.5};
    }
};

inline constexpr int kDefaultCropMargin = 8;
inline constexpr int kDefaultNativeResolution = 518;
inline constexpr double kDepthDiscontinuity = 0.05;  // meters

// Throws EmptyMask for an empty union mask.
CropPlan plan_crop(const Mask& union_mask, int native_width, int native_height, int margin = kDefaultCropMargin);

// The estimator input image for a plan (zero outside the source image and
// in letterbox bands).
ImageFrame crop_image(const ImageFrame& image, const CropPlan& plan);

// Bilinear sample at continuous pixel (x, y). Returns NaN when a contributing
// neighbor is invalid or outside the map, or when the contributing depths
// span more than `max_jump` meters.
float sample_depth_edge_aware(const DepthMap& depth, double x, double y, double max_jump = kDepthDiscontinuity);

// Monocular depth estimator contract: one input image at the reported native
// resolution in, one depth map at that resolution out. The crop plan is passed
// along so file-backed and mock sources can locate the request; real
// estimators may ignore it.
class DepthSource {
public:
    virtual ~DepthSource() = default;
    virtual std::pair<int, int> native_resolution() const = 0;
    virtual DepthMap estimate(const ImageFrame& input, const CropPlan& plan) = 0;
};

// Mock estimator backed by a full-resolution reference depth of the edited
// image. Output = scale · reference resampled through the crop plan, plus
// optional seeded Gaussian noise (the same for every call).
class ReferenceDepthSource final : public DepthSource {
public:
    explicit ReferenceDepthSource(DepthMap reference, int native_width = kDefaultNativeResolution,
                                  int native_height = kDefaultNativeResolution, double scale = 1.0,
                                  double noise_sigma = 0.0, std::uint64_t seed = 0);

    std::pair<int, int> native_resolution() const override { return {native_w_, native_h_}; }
    DepthMap estimate(const ImageFrame& input, const CropPlan& plan) override;

private:
    DepthMap reference_;
    int native_w_, native_h_;
    double scale_, sigma_;
    std::uint64_t seed_;
};

// Reads a precomputed native-resolution depth blob (see docs/FORMATS.md).
class FileDepthSource final : public DepthSource {
public:
    explicit FileDepthSource(std::string path);

    std::pair<int, int> native_resolution() const override { return {depth_.width(), depth_.height()}; }
    DepthMap estimate(const ImageFrame& input, const CropPlan& plan) override;

private:
    std::string path_;
    DepthMap depth_;
};

// Lifts every valid-depth pixel. Labels come from the masks; a pixel in both
// masks becomes Active and a single warning reports the conflict count.
// Throws DimensionMismatch or AllDepthInvalid.
FeatureCloud backproject(const DepthMap& depth, const CameraIntrinsics& intr, const ImageFrame& rgb,
                         const FeatureRaster& features, const ObjectMasks& masks);

// Crops the union of the masks, runs the estimator, maps its depth back onto
// the original edited-image grid and backprojects the masked pixels only.
FeatureCloud lift_edited(const ImageFrame& edit, const ObjectMasks& masks, DepthSource& source,
                         const CameraIntrinsics& intr, const FeatureRaster& features,
                         int margin = kDefaultCropMargin);

// The depth lift_edited backprojects: estimator output re-expressed on the
// edited-image grid, invalid outside the union mask.
DepthMap edited_depth_on_grid(const ImageFrame& edit, const Mask& union_mask, DepthSource& source,
                              int margin = kDefaultCropMargin);

}  // namespace editreg
