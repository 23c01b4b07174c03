#include "editreg/scene.hpp"

#include <string>

#include "editreg/error.hpp"

namespace editreg {

namespace {

void check(bool ok, const std::string& field, int w, int h, int ew, int eh) {
    if (ok) return;
    fail(ErrorCode::InvariantViolation, "scene field '" + field + "' is " + std::to_string(w) + "x" + std::to_string(h) +
                                            ", image is " + std::to_string(ew) + "x" + std::to_string(eh));
}

}  // namespace

void SceneBundle::validate() const {
    const int w = image.width(), h = image.height();
    if (w <= 0 || h <= 0) fail(ErrorCode::InvariantViolation, "scene field 'image' is empty");
    check(depth.width() == w && depth.height() == h, "depth", depth.width(), depth.height(), w, h);
    check(intr.width() == w && intr.height() == h, "intrinsics", intr.width(), intr.height(), w, h);
    check(features.width() == w && features.height() == h, "features", features.width(), features.height(), w, h);
    check(masks.active.width() == w && masks.active.height() == h, "mask_active", masks.active.width(),
          masks.active.height(), w, h);
    check(masks.passive.width() == w && masks.passive.height() == h, "mask_passive", masks.passive.width(),
          masks.passive.height(), w, h);
    if (features.dim() <= 0) fail(ErrorCode::InvariantViolation, "scene field 'features' has no channels");
    for (std::size_t i = 0; i < grasps.size(); ++i) {
        if (grasps[i].gripper_points.empty()) {
            fail(ErrorCode::InvariantViolation, "scene field 'grasps[" + std::to_string(i) + "]' has no gripper points");
        }
    }
}

}  // namespace editreg
