#pragma once

// Directory-level commands behind the CLI.

#include <optional>
#include <string>
#include <vector>

#include "geoaug/copy_paste.hpp"
#include "geoaug/diagnose.hpp"
#include "geoaug/fileio.hpp"

namespace geoaug {

enum class AugmentKind { Scale, Crop, Move, Paste, Flip };
std::string to_string(AugmentKind kind);
AugmentKind parse_augment_kind(const std::string& text);

struct AugmentRun {
  fs::path input;
  fs::path output;
  AugmentConfig cfg;
  std::vector<AugmentKind> kinds{AugmentKind::Scale};
  PasteMode mode = PasteMode::Consistent;
  unsigned long long seed = 0;
  int jobs = 1;
  std::optional<fs::path> db;  // built from the input masks when absent
};

struct RunSummary {
  std::size_t frames = 0;
  std::size_t written = 0;
  std::vector<std::string> errors;  // one per failed (frame, kind)
};

/// Writes "<frame>_<kind>" frames plus manifest.csv. Frame (i, kind j) draws from a generator
/// seeded with (seed, i, j), so output does not depend on `jobs`.
RunSummary run_augment(const AugmentRun& run);

/// Builds the instance database from every input frame with a mask and saves it.
AdmissionStats run_build_db(const fs::path& input, const fs::path& output, const AugmentConfig& cfg);

struct DiagnoseRun {
  fs::path input;
  fs::path output;
  AugmentConfig cfg;
  SuiteConfig suite = SuiteConfig::defaults();
  std::optional<fs::path> db;
};

Suite run_diagnose(const DiagnoseRun& run);

struct EvalRun {
  fs::path suite;
  fs::path predictions;
  fs::path output;
  Difficulty difficulty = Difficulty::easy();
};

/// Writes ap40.csv, swap.csv and deviation.csv.
DiagnosisReport run_eval(const EvalRun& run);

struct ValidationIssue {
  std::string frame_id;
  int object_index = -1;  // label line, -1 for frame-level issues
  std::string message;
};

/// Label-geometry agreement for one frame: positive dimensions and depth, alpha matching yaw,
/// 2D box matching the projected hull (IoU >= 0.5, relative height gap <= tol), and the contact
/// row agreeing with the ground model (relative depth gap <= tol).
std::vector<ValidationIssue> validate_sample(const Sample& sample, double tol);

std::vector<ValidationIssue> run_validate(const fs::path& input, const AugmentConfig& cfg, double tol);

}  // namespace geoaug
