#pragma once

#include <string>
#include <vector>

#include "editreg/geometry.hpp"
#include "editreg/grasp.hpp"
#include "editreg/lift.hpp"
#include "editreg/raster.hpp"

namespace editreg {

// One captured (or edited) state: everything the pipeline reads for it.
struct SceneBundle {
    ImageFrame image;
    DepthMap depth;  // sensor depth (observed) or reference depth (edited)
    CameraIntrinsics intr;
    RigidTransform o2w;  // camera -> world
    ObjectMasks masks;
    FeatureRaster features;
    std::string instruction;
    std::vector<GraspCandidate> grasps;  // optional

    // Throws InvariantViolation naming the first raster whose size differs
    // from the image.
    void validate() const;
};

}  // namespace editreg
