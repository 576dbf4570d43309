#pragma once

// Manipulation suites with oracle labels, and evaluation of detector outputs against them.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geoaug/augment.hpp"
#include "geoaug/copy_paste.hpp"

namespace geoaug {

enum class ManipulationKind { Scale, Crop, MoveCamera, Paste };
std::string to_string(ManipulationKind kind);
ManipulationKind parse_manipulation_kind(const std::string& text);

struct ExpectedObject {
  Object3D object;
  double expected_depth = 0.0;
  double depth_size_cue = 0.0;      // depth implied by apparent size
  double depth_position_cue = 0.0;  // depth implied by the contact row
  bool manipulated = true;          // false for untouched objects in a paste frame
};

struct ManipulationRecord {
  std::string frame_id;
  std::string base_frame_id;
  ManipulationKind kind = ManipulationKind::Scale;
  double magnitude = 0.0;  // s, d, crop x offset, or paste depth
  PasteMode mode = PasteMode::Consistent;
  std::vector<ExpectedObject> expected;
};

struct SuiteEntry {
  Sample sample;
  ManipulationRecord record;
};

struct SuiteConfig {
  std::vector<double> scales;
  std::vector<double> moves;
  int crop_positions = 3;
  std::vector<double> paste_depths;
  std::vector<PasteMode> modes{PasteMode::Consistent, PasteMode::SizeOnly, PasteMode::PosOnly};
  unsigned long long seed = 0;

  /// s in 0.8..1.2 step 0.05, d in -5..5 step 1, paste depths 10..50 step 10.
  static SuiteConfig defaults();
};

struct Suite {
  std::vector<SuiteEntry> entries;
  std::vector<std::string> warnings;  // skipped entries
};

/// Throws MissingDepthMap when moves are requested for a frame without depth. Entries whose
/// manipulation leaves nothing to evaluate are skipped with a warning.
Suite generate_suite(const std::vector<Sample>& samples, const SuiteConfig& config, const AugmentConfig& cfg = {},
                     const InstanceDB* db = nullptr);

struct PredictionRecord {
  std::string frame_id;
  Object3D object;
  double score = 0.0;
};

using PredictionMap = std::map<std::string, std::vector<PredictionRecord>>;

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (prediction, truth)
  std::vector<std::size_t> unmatched_predictions;
  std::vector<std::size_t> unmatched_truths;
};

/// Greedy by descending score on 2D IoU >= threshold, same class, one-to-one. DontCare truths
/// never match.
Assignment match(const std::vector<PredictionRecord>& predictions, const std::vector<Object3D>& truths,
                 double iou_threshold = 0.5);

/// Rotated ground-footprint IoU. Throws std::invalid_argument for zero-area footprints.
double bev_iou(const Object3D& a, const Object3D& b);
double iou_3d(const Object3D& a, const Object3D& b);

struct ScoredDetection {
  double score = 0.0;
  bool true_positive = false;
};

/// Mean interpolated precision at recall 1/40, 2/40, ..., 1. Detections with equal scores enter
/// together. Empty when there are no truths.
std::optional<double> ap40(std::vector<ScoredDetection> detections, std::size_t num_truths);

struct Difficulty {
  std::string name = "all";
  double min_height = 0.0;
  int max_occlusion = 3;
  double max_truncation = 1.0;

  static Difficulty easy() { return {"easy", 40.0, 0, 0.15}; }
  static Difficulty moderate() { return {"moderate", 25.0, 1, 0.30}; }
  static Difficulty hard() { return {"hard", 25.0, 2, 0.50}; }
  static Difficulty parse(const std::string& name);
};

enum class IouKind { Box3D, Bev };

struct EvalOptions {
  std::string class_name = "Car";
  Difficulty difficulty = Difficulty::easy();
  IouKind iou_kind = IouKind::Box3D;
  double iou_threshold = 0.5;
};

using TruthMap = std::map<std::string, std::vector<Object3D>>;

/// KITTI-style AP|40 over all frames in `truths`. Truths outside the difficulty bucket are
/// ignored: detections matching them count neither way.
std::optional<double> evaluate_ap(const PredictionMap& predictions, const TruthMap& truths, const EvalOptions& options);

enum class SwapComponent { Base, Depth, Dim, Pos };
std::string to_string(SwapComponent c);

/// Replaces one predicted component in a truth object for every 2D-matched pair:
/// Depth* puts the truth on its own ray at the predicted depth; Dim* takes the predicted
/// dimensions; Pos* puts the truth depth on the predicted ray. Unmatched predictions stay as
/// they are; unmatched truths are misses.
std::optional<double> component_swap_eval(const PredictionMap& predictions, const TruthMap& truths,
                                          SwapComponent component, const EvalOptions& options = {});

struct DeviationRow {
  ManipulationKind kind = ManipulationKind::Scale;
  PasteMode mode = PasteMode::Consistent;
  double magnitude = 0.0;
  std::size_t expected = 0;
  std::size_t matched = 0;
  double mean_expected_depth = 0.0;
  double mean_predicted_depth = 0.0;
  double mean_deviation = 0.0;  // predicted - expected
  double std_deviation = 0.0;   // population
  double mean_deviation_position_cue = 0.0;
  double std_deviation_position_cue = 0.0;
  bool flagged = false;  // no matches at this magnitude
};

struct DiagnosisReport {
  std::vector<DeviationRow> rows;
};

/// Per (kind, mode, magnitude) statistics of predicted minus expected depth over the manipulated
/// objects. Throws MatchError for prediction frames the suite does not contain.
DiagnosisReport depth_deviation_report(const std::vector<ManipulationRecord>& records, const PredictionMap& predictions,
                                       double iou_threshold = 0.5);

std::string deviation_csv(const DiagnosisReport& report);

// Suite persistence: a KITTI layout of the manipulated frames (label_2 holds the oracle labels)
// plus manipulations.csv and expected.csv.
void save_suite(const Suite& suite, const fs::path& dir);
std::vector<ManipulationRecord> load_suite_records(const fs::path& dir);

/// Reads every <frame>.txt in a directory of 16-field result files.
PredictionMap load_predictions(const fs::path& dir);

}  // namespace geoaug
