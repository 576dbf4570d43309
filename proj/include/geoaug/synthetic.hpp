#pragma once

// Procedural KITTI-style frames: flat textured ground, a far wall, and textured cars rendered
// by ray casting, with exact depth, instance masks and labels.

#include <string>

#include "geoaug/augment.hpp"

namespace geoaug {

struct SyntheticConfig {
  int width = 1242;
  int height = 375;
  CameraIntrinsics k{721.5377, 609.5593, 172.854};
  double camera_height = 1.65;
  double wall_depth = 60.0;
  int min_objects = 1;
  int max_objects = 4;
  double min_depth = 8.0;
  double max_depth = 40.0;
};

/// Object boxes are the clipped projected hulls; mask id i + 1 marks label line i.
Sample make_synthetic_frame(const std::string& frame_id, const SyntheticConfig& cfg, Rng& rng);

/// Re-renders image, depth and mask for the given objects (used when a test fixes the layout).
Sample render_scene(const std::string& frame_id, const SyntheticConfig& cfg, std::vector<Object3D> objects);

}  // namespace geoaug
