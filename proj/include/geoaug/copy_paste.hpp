#pragma once

// Instance database ("what to copy") and geometry-driven pasting ("how to paste").
//
// A patch keeps the source object's label, the source camera and ground model, and its contact
// pixel (projected bottom-center) in patch coordinates. Pasting at a new depth Z' keeps the
// viewing ray (X' = X Z'/Z, so alpha and yaw stay valid), puts the contact on the target's
// ground at Z', and scales the patch so its apparent height is f H / Z'.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "geoaug/augment.hpp"
#include "geoaug/errors.hpp"
#include "geoaug/fileio.hpp"

namespace geoaug {

enum class PasteMode { Consistent, SizeOnly, PosOnly };

std::string to_string(PasteMode mode);
PasteMode parse_paste_mode(const std::string& text);

struct InstancePatch {
  std::string id;
  std::string source_frame;
  ImageBuffer pixels;
  Mask mask;
  Object3D source;
  CameraIntrinsics source_k;
  GroundModel source_ground;
  Pixel contact;  // patch coordinates
};

enum class Rejection { None, Truncation, Occlusion, Height, Horizon, Mask };
std::string to_string(Rejection r);

struct AdmissionStats {
  std::size_t considered = 0;
  std::size_t admitted = 0;
  std::size_t truncation = 0;
  std::size_t occlusion = 0;
  std::size_t height = 0;
  std::size_t horizon = 0;
  std::size_t mask = 0;

  void count(Rejection r);
};

struct InstanceDB {
  std::vector<InstancePatch> patches;
  AdmissionStats stats;
};

/// Implied horizon of an object: its contact row minus f * Y_cam / Z. Equals v_h on flat ground.
double implied_horizon(const Object3D& obj, const CameraIntrinsics& k, const GroundModel& ground);

/// First failing admission filter (truncation, occlusion, box height, horizon flatness).
Rejection admission_check(const Object3D& obj, const CameraIntrinsics& k, const GroundModel& ground,
                          const AugmentConfig& cfg);

/// Cuts object `index` out of a sample. Mask id convention: label line i (0-based, DontCare
/// lines included) is instance id i + 1.
std::optional<InstancePatch> extract_patch(const Sample& sample, std::size_t index);

/// Samples without masks contribute nothing. An empty result is returned, not thrown.
InstanceDB build_instance_db(const std::vector<Sample>& samples, const AugmentConfig& cfg = {});

void save_instance_db(const InstanceDB& db, const fs::path& dir);
InstanceDB load_instance_db(const fs::path& dir);

class PlacementError : public Error {
 public:
  using Error::Error;
};

struct PastePlan {
  Object3D object;  // label of the pasted instance in the target frame
  Pixel anchor;     // where the patch contact pixel lands
  double scale = 1.0;
  PasteMode mode = PasteMode::Consistent;
  double depth = 0.0;         // sampled Z'
  double source_depth = 0.0;  // Z of the source object
  // Depth each cue implies for the pasted pixels; both equal `depth` in Consistent mode.
  double expected_depth_size = 0.0;
  double expected_depth_position = 0.0;
  std::size_t patch_index = 0;
};

/// Throws PlacementError when the depth is outside the configured range, the box cannot be
/// projected, or the anchor falls off the target image.
PastePlan plan_paste(const InstancePatch& patch, const Sample& target, double depth, PasteMode mode,
                     const AugmentConfig& cfg = {});

/// Step-9 test. The placed height is what the source's height-to-ground-offset ratio predicts at
/// the planned contact row; it must match f H / Z' within `tol` (relative).
bool consistency_check(const PastePlan& plan, const InstancePatch& patch, const Sample& target, double tol);

/// Composites far-to-near and appends the planned labels. Throws PlacementError when a plan's
/// box overlaps an existing label by more than cfg.overlap_iou.
Sample apply_paste(const Sample& target, const std::vector<PastePlan>& plans, const std::vector<InstancePatch>& patches,
                   const AugmentConfig& cfg = {});

struct PasteResult {
  Sample sample;
  std::vector<PastePlan> plans;
};

/// Draws cfg.instances_per_image placements (patch and depth resampled on every rejection).
PasteResult paste_instances(const Sample& target, const InstanceDB& db, PasteMode mode, Rng& rng,
                            const AugmentConfig& cfg = {});

}  // namespace geoaug
