#pragma once

// Image-level geometry-aware augmentations. Each takes a Sample and returns a new Sample whose
// pixels, intrinsics, ground model and 3D labels agree with each other.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "geoaug/config.hpp"
#include "geoaug/geometry.hpp"
#include "geoaug/image.hpp"
#include "geoaug/kitti_io.hpp"
#include "geoaug/raster.hpp"

namespace geoaug {

using Rng = std::mt19937_64;

struct Sample {
  std::string frame_id;
  ImageBuffer image;
  CalibFile calib;  // P2 always agrees with `k`
  CameraIntrinsics k;
  GroundModel ground;
  std::vector<Object3D> objects;  // DontCare entries included, in label-file order
  std::optional<DepthMap> depth;
  std::optional<InstanceMask> mask;
};

/// Builds a sample around `calib`, taking `k` from its P2.
Sample make_sample(std::string frame_id, ImageBuffer image, CalibFile calib, GroundModel ground,
                   std::vector<Object3D> objects);

/// Sets box2d from the projected corners, clipped to the image, and truncation from the clip.
/// Returns false when the object cannot be projected (a corner at or behind the camera).
bool refresh_box(Object3D& obj, const CameraIntrinsics& k, int image_width, int image_height);

/// Analytic cue residuals of a labelled object against its frame's camera and ground:
/// `size` is |depth_from_size(f, H, proxy height) - Z| / Z, `position` is the pixel gap between
/// the projected contact row and the row the ground model predicts at depth Z.
struct CueResiduals {
  double size = 0.0;
  double position = 0.0;
};
CueResiduals cue_residuals(const Object3D& obj, const CameraIntrinsics& k, const GroundModel& ground);

/// Resizes by 1/s with fixed K and moves every object by scale_transform(., s); the horizon row
/// scales with the image. With cfg.focal_scaling the labels stay put and K scales instead.
Sample augment_scale(const Sample& sample, double s, const AugmentConfig& cfg = {});

double normalized_depth(const Object3D& obj, const CameraIntrinsics& k);
double denormalize(double value, const CameraIntrinsics& k);

/// Crop-then-pad. 3D labels are untouched; c_u moves by -region.x. Objects keeping less than
/// cfg.drop_area_fraction of their box area are dropped.
Sample augment_crop(const Sample& sample, const Region& region, const AugmentConfig& cfg = {});

/// Forward-warps the frame as if every point moved by d along Z. Requires a depth map.
Sample augment_move_camera(const Sample& sample, double d, const AugmentConfig& cfg = {});

Sample flip_horizontal(const Sample& sample);

// Samplers for the random parameters.
double sample_scale(Rng& rng, const AugmentConfig& cfg);
double sample_camera_move(Rng& rng, const AugmentConfig& cfg);
/// Uniform over valid positions; the crop shrinks to the image when the image is smaller.
Region sample_crop_region(Rng& rng, int image_width, int image_height, const AugmentConfig& cfg);

}  // namespace geoaug
