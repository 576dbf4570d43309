#pragma once

// KITTI directory layout: image_2/, label_2/, calib/ plus the optional depth/, masks/ and
// ground/ folders, all keyed by frame id.

#include <string>
#include <vector>

#include "geoaug/augment.hpp"
#include "geoaug/fileio.hpp"

namespace geoaug {

/// Sorted label_2 stems. Throws Error when label_2 is missing.
std::vector<std::string> list_frames(const fs::path& root);

/// Frames without a ground/<id>.txt get camera height and pitch from `cfg`.
Sample load_frame(const fs::path& root, const std::string& id, const AugmentConfig& cfg = {});
void save_frame(const fs::path& root, const Sample& sample);

/// "camera_height: <m>" and "horizon_row: <px>" lines.
GroundModel parse_ground(const std::string& text);
std::string write_ground(const GroundModel& ground);

std::vector<LabelRecord> to_records(const std::vector<Object3D>& objects);

}  // namespace geoaug
