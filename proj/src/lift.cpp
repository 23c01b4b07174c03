#include "editreg/lift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "editreg/error.hpp"
#include "editreg/formats.hpp"
#include "editreg/random.hpp"

namespace editreg {

namespace {

constexpr float kInvalid = std::numeric_limits<float>::quiet_NaN();

bool in_content(const CropPlan& plan, double u, double v) {
    const PixelBox& b = plan.source_box;
    return u >= b.x0 - 0.5 && u <= b.x1 - 0.5 && v >= b.y0 - 0.5 && v <= b.y1 - 0.5;
}

int window_origin(int box_lo, int box_len, int image_len, int native_len) {
    if (image_len <= native_len) return -((native_len - image_len) / 2);
    const int centered = box_lo + box_len / 2 - native_len / 2;
    return std::clamp(centered, 0, image_len - native_len);
}

}  // namespace

CropPlan plan_crop(const Mask& union_mask, int native_width, int native_height, int margin) {
    if (native_width <= 0 || native_height <= 0 || margin < 0) {
        fail(ErrorCode::InvalidArgument, "plan_crop: native resolution must be positive and margin non-negative");
    }
    const auto tight = bounding_box(union_mask);
    if (!tight) fail(ErrorCode::EmptyMask, "plan_crop: union of active and passive masks is empty");

    CropPlan plan;
    plan.source_box = {std::max(0, tight->x0 - margin), std::max(0, tight->y0 - margin),
                       std::min(union_mask.width(), tight->x1 + margin),
                       std::min(union_mask.height(), tight->y1 + margin)};
    plan.target_width = native_width;
    plan.target_height = native_height;
    const PixelBox& box = plan.source_box;

    if (box.width() <= native_width && box.height() <= native_height) {
        plan.mode = CropMode::Pad;
        plan.origin_x = window_origin(box.x0, box.width(), union_mask.width(), native_width);
        plan.origin_y = window_origin(box.y0, box.height(), union_mask.height(), native_height);
        return plan;
    }

    plan.mode = CropMode::Resize;
    const double s = std::min(static_cast<double>(native_width) / box.width(),
                              static_cast<double>(native_height) / box.height());
    plan.scale_x = plan.scale_y = s;
    const int content_w = static_cast<int>(std::lround(box.width() * s));
    const int content_h = static_cast<int>(std::lround(box.height() * s));
    const int off_x = (native_width - content_w) / 2;
    const int off_y = (native_height - content_h) / 2;
    plan.origin_x = box.x0 - off_x / s;
    plan.origin_y = box.y0 - off_y / s;
    return plan;
}

ImageFrame crop_image(const ImageFrame& image, const CropPlan& plan) {
    ImageFrame out(plan.target_width, plan.target_height);
    for (int y = 0; y < plan.target_height; ++y) {
        for (int x = 0; x < plan.target_width; ++x) {
            const auto [u, v] = plan.target_to_source(x, y);
            std::uint8_t* dst = out.pixel(y, x);
            if (plan.mode == CropMode::Pad) {
                const int su = static_cast<int>(std::lround(u));
                const int sv = static_cast<int>(std::lround(v));
                if (su < 0 || sv < 0 || su >= image.width() || sv >= image.height()) continue;
                std::copy_n(image.pixel(sv, su), 3, dst);
                continue;
            }
            if (!in_content(plan, u, v)) continue;
            const double cu = std::clamp(u, 0.0, image.width() - 1.0);
            const double cv = std::clamp(v, 0.0, image.height() - 1.0);
            const int u0 = std::min(static_cast<int>(cu), image.width() - 1);
            const int v0 = std::min(static_cast<int>(cv), image.height() - 1);
            const int u1 = std::min(u0 + 1, image.width() - 1);
            const int v1 = std::min(v0 + 1, image.height() - 1);
            const double a = cu - u0, b = cv - v0;
            for (int ch = 0; ch < 3; ++ch) {
                const double val = (1 - a) * (1 - b) * image.pixel(v0, u0)[ch] + a * (1 - b) * image.pixel(v0, u1)[ch] +
                                   (1 - a) * b * image.pixel(v1, u0)[ch] + a * b * image.pixel(v1, u1)[ch];
                dst[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(val), 0L, 255L));
            }
        }
    }
    return out;
}

float sample_depth_edge_aware(const DepthMap& depth, double x, double y, double max_jump) {
    const double fx0 = std::floor(x), fy0 = std::floor(y);
    const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
    const double a = x - fx0, b = y - fy0;
    const double w[4] = {(1 - a) * (1 - b), a * (1 - b), (1 - a) * b, a * b};
    const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
    const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
    double acc = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int k = 0; k < 4; ++k) {
        if (w[k] == 0.0) continue;
        if (xs[k] < 0 || ys[k] < 0 || xs[k] >= depth.width() || ys[k] >= depth.height()) return kInvalid;
        if (!depth.valid(ys[k], xs[k])) return kInvalid;
        const double d = depth.at(ys[k], xs[k]);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        acc += w[k] * d;
    }
    if (hi - lo > max_jump) return kInvalid;
    return static_cast<float>(acc);
}

ReferenceDepthSource::ReferenceDepthSource(DepthMap reference, int native_width, int native_height, double scale,
                                           double noise_sigma, std::uint64_t seed)
    : reference_(std::move(reference)),
      native_w_(native_width),
      native_h_(native_height),
      scale_(scale),
      sigma_(noise_sigma),
      seed_(seed) {
    if (native_width <= 0 || native_height <= 0 || !(scale > 0.0) || noise_sigma < 0.0) {
        fail(ErrorCode::InvalidArgument, "ReferenceDepthSource: bad configuration");
    }
}

DepthMap ReferenceDepthSource::estimate(const ImageFrame& input, const CropPlan& plan) {
    if (input.width() != native_w_ || input.height() != native_h_) {
        fail(ErrorCode::DepthSourceFailure, "ReferenceDepthSource: input is not at native resolution");
    }
    DepthMap out(native_w_, native_h_);
    Rng rng(seed_);
    for (int y = 0; y < native_h_; ++y) {
        for (int x = 0; x < native_w_; ++x) {
            const auto [u, v] = plan.target_to_source(x, y);
            float d = kInvalid;
            if (plan.mode == CropMode::Pad) {
                const int su = static_cast<int>(std::lround(u));
                const int sv = static_cast<int>(std::lround(v));
                if (su >= 0 && sv >= 0 && su < reference_.width() && sv < reference_.height() &&
                    reference_.valid(sv, su)) {
                    d = reference_.at(sv, su);
                }
            } else if (in_content(plan, u, v)) {
                d = sample_depth_edge_aware(reference_, u, v);
            }
            if (std::isnan(d)) continue;
            double value = scale_ * d;
            if (sigma_ > 0.0) value += rng.normal(0.0, sigma_);
            out.set(y, x, static_cast<float>(value));
        }
    }
    return out;
}

FileDepthSource::FileDepthSource(std::string path) : path_(std::move(path)), depth_(formats::read_depth(path_)) {}

DepthMap FileDepthSource::estimate(const ImageFrame& input, const CropPlan&) {
    if (input.width() != depth_.width() || input.height() != depth_.height()) {
        fail(ErrorCode::DepthSourceFailure, "FileDepthSource: " + path_ + " does not match the requested resolution");
    }
    return depth_;
}

FeatureCloud backproject(const DepthMap& depth, const CameraIntrinsics& intr, const ImageFrame& rgb,
                         const FeatureRaster& features, const ObjectMasks& masks) {
    const int w = depth.width(), h = depth.height();
    auto same = [&](int ow, int oh) { return ow == w && oh == h; };
    if (!same(intr.width(), intr.height()) || !same(rgb.width(), rgb.height()) ||
        !same(features.width(), features.height()) || !same(masks.active.width(), masks.active.height()) ||
        !same(masks.passive.width(), masks.passive.height())) {
        fail(ErrorCode::DimensionMismatch, "backproject: depth, intrinsics, image, features and masks must share dimensions");
    }

    std::vector<Vec3> pts;
    std::vector<float> feats;
    std::vector<PixelIndex> px;
    std::vector<Label> labels;
    std::size_t conflicts = 0;
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            if (!depth.valid(v, u)) continue;
            pts.push_back(intr.unproject(u, v, depth.at(v, u)));
            const auto f = features.at(v, u);
            feats.insert(feats.end(), f.begin(), f.end());
            px.push_back({v, u});
            const bool a = masks.active.at(v, u), p = masks.passive.at(v, u);
            if (a && p) ++conflicts;
            labels.push_back(a ? Label::Active : (p ? Label::Passive : Label::Background));
        }
    }
    if (pts.empty()) fail(ErrorCode::AllDepthInvalid, "backproject: no pixel has valid depth");
    if (conflicts > 0) {
        warn("backproject: " + std::to_string(conflicts) + " pixels are in both masks; labeled active");
    }
    return FeatureCloud(w, h, features.dim(), std::move(pts), std::move(feats), std::move(px), std::move(labels));
}

DepthMap edited_depth_on_grid(const ImageFrame& edit, const Mask& union_mask, DepthSource& source, int margin) {
    const auto [nw, nh] = source.native_resolution();
    const CropPlan plan = plan_crop(union_mask, nw, nh, margin);
    const ImageFrame input = crop_image(edit, plan);

    DepthMap native;
    try {
        native = source.estimate(input, plan);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::DepthSourceFailure) throw;
        fail(ErrorCode::DepthSourceFailure, std::string("depth source failed: ") + e.what());
    } catch (const std::exception& e) {
        fail(ErrorCode::DepthSourceFailure, std::string("depth source failed: ") + e.what());
    }
    if (native.width() != nw || native.height() != nh) {
        fail(ErrorCode::DepthSourceFailure, "depth source returned a map that is not at its native resolution");
    }

    DepthMap grid(edit.width(), edit.height());
    for (int v = 0; v < edit.height(); ++v) {
        for (int u = 0; u < edit.width(); ++u) {
            if (!union_mask.at(v, u)) continue;
            const auto [tx, ty] = plan.source_to_target(u, v);
            if (plan.mode == CropMode::Pad) {
                const int x = static_cast<int>(std::lround(tx));
                const int y = static_cast<int>(std::lround(ty));
                if (x >= 0 && y >= 0 && x < nw && y < nh && native.valid(y, x)) grid.set(v, u, native.at(y, x));
            } else {
                grid.set(v, u, sample_depth_edge_aware(native, tx, ty));
            }
        }
    }
    return grid;
}

FeatureCloud lift_edited(const ImageFrame& edit, const ObjectMasks& masks, DepthSource& source,
                         const CameraIntrinsics& intr, const FeatureRaster& features, int margin) {
    if (masks.active.width() != edit.width() || masks.active.height() != edit.height() ||
        masks.passive.width() != edit.width() || masks.passive.height() != edit.height()) {
        fail(ErrorCode::DimensionMismatch, "lift_edited: masks do not match the edited image");
    }
    const Mask united = masks.active.unite(masks.passive);
    const DepthMap grid = edited_depth_on_grid(edit, united, source, margin);
    return backproject(grid, intr, edit, features, masks);
}

}  // namespace editreg
