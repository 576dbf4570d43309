#pragma once

#include <string>
#include <string_view>

namespace geoaug {

/// Tunables shared by the augmentations, the instance database and the paste planner.
/// Defaults follow the published augmentation settings; see README for the key list.
struct AugmentConfig {
  // random scale (depth scale s; the image is resized by 1/s)
  double scale_min = 0.8;
  double scale_max = 1.2;
  bool focal_scaling = false;  // resize by changing f instead of moving objects

  // crop-then-pad
  int crop_w = 960;
  int crop_h = 320;
  double drop_area_fraction = 0.25;

  // moving camera
  double cam_move_min = -5.0;
  double cam_move_max = 5.0;

  double min_depth = 0.5;

  // ground model used when a frame carries none
  double camera_height = 1.65;
  double pitch = 0.0;

  // copy-paste
  double paste_depth_min = 0.0;
  double paste_depth_max = 60.0;
  int instances_per_image = 2;
  double tol = 0.1;
  double overlap_iou = 0.3;
  int max_paste_attempts = 20;

  // instance database admission
  double db_max_truncation = 0.1;
  int db_max_occlusion = 0;
  double db_min_height = 24.0;
  double db_horizon_tol = 15.0;
};

/// `key = value` lines, '#' comments. Unknown keys and out-of-range values throw.
AugmentConfig parse_config(std::string_view text, AugmentConfig base = {});
std::string write_config(const AugmentConfig& cfg);
void validate_config(const AugmentConfig& cfg);

}  // namespace geoaug
