// geoaug: batch front end for augmentation, instance databases, diagnosis suites and validation.
//
// Exit codes: 0 success, 1 validation failure, 2 input error or failed frames.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "geoaug/dataset.hpp"
#include "geoaug/errors.hpp"
#include "geoaug/pipeline.hpp"
#include "geoaug/synthetic.hpp"

using namespace geoaug;

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kInputError = 2;

std::pair<double, double> parse_range(const std::string& text, const char* name) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw std::invalid_argument(std::string(name) + " expects MIN,MAX");
  return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct CommonOptions {
  std::string config_path;
  std::string scale_range;
  std::string cam_range;
  std::string crop_size;
  std::string depth_range;
  std::optional<double> tol;

  void add(CLI::App* app) {
    app->add_option("--config", config_path, "key = value file overriding defaults")->check(CLI::ExistingFile);
    app->add_option("--scale-range", scale_range, "depth scale range MIN,MAX");
    app->add_option("--cam-range", cam_range, "camera move range in meters MIN,MAX");
    app->add_option("--crop-size", crop_size, "crop size WxH");
    app->add_option("--depth-range", depth_range, "paste depth range in meters MIN,MAX");
    app->add_option("--tol", tol, "relative cue tolerance");
  }

  AugmentConfig build() const {
    AugmentConfig cfg;
    if (!config_path.empty()) cfg = parse_config(read_text(config_path), cfg);
    if (!scale_range.empty()) std::tie(cfg.scale_min, cfg.scale_max) = parse_range(scale_range, "--scale-range");
    if (!cam_range.empty()) std::tie(cfg.cam_move_min, cfg.cam_move_max) = parse_range(cam_range, "--cam-range");
    if (!depth_range.empty())
      std::tie(cfg.paste_depth_min, cfg.paste_depth_max) = parse_range(depth_range, "--depth-range");
    if (!crop_size.empty()) {
      const auto x = crop_size.find('x');
      if (x == std::string::npos) throw std::invalid_argument("--crop-size expects WxH");
      cfg.crop_w = std::stoi(crop_size.substr(0, x));
      cfg.crop_h = std::stoi(crop_size.substr(x + 1));
    }
    if (tol) cfg.tol = *tol;
    validate_config(cfg);
    return cfg;
  }
};

void print_stats(const AdmissionStats& s) {
  std::printf("considered %zu admitted %zu rejected: truncation %zu occlusion %zu height %zu horizon %zu mask %zu\n",
              s.considered, s.admitted, s.truncation, s.occlusion, s.height, s.horizon, s.mask);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometry-consistent augmentation and diagnosis for monocular 3D detection (KITTI layout)"};
  app.require_subcommand(1);

  std::string input, output, db, predictions, kinds = "scale,crop,move,paste,flip", mode = "consistent";
  std::string difficulty = "easy", scales, moves, paste_depths;
  unsigned long long seed = 0;
  int jobs = 1;
  int frames = 5;
  int crop_positions = 3;

  CommonOptions augment_opts;
  auto* augment = app.add_subcommand("augment", "write augmented copies of every frame");
  augment->add_option("--input", input, "KITTI-layout dataset root")->required()->check(CLI::ExistingDirectory);
  augment->add_option("--output", output, "output dataset root")->required();
  augment->add_option("--seed", seed, "random seed")->required();
  augment->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  augment->add_option("--kinds", kinds, "comma list of scale,crop,move,paste,flip");
  augment->add_option("--mode", mode, "paste mode: consistent, size-only or pos-only");
  augment->add_option("--db", db, "instance database (built from input masks if omitted)");
  augment_opts.add(augment);

  CommonOptions db_opts;
  auto* build_db = app.add_subcommand("build-db", "collect the instance database");
  build_db->add_option("--input", input, "KITTI-layout dataset root with masks/")->required()->check(CLI::ExistingDirectory);
  build_db->add_option("--output", output, "database directory")->required();
  db_opts.add(build_db);

  CommonOptions diag_opts;
  auto* diagnose = app.add_subcommand("diagnose", "generate a manipulation suite with oracle labels");
  diagnose->add_option("--input", input, "KITTI-layout dataset root")->required()->check(CLI::ExistingDirectory);
  diagnose->add_option("--output", output, "suite directory")->required();
  diagnose->add_option("--seed", seed, "random seed");
  diagnose->add_option("--db", db, "instance database (built from input masks if omitted)");
  diagnose->add_option("--scales", scales, "comma list of depth scales");
  diagnose->add_option("--moves", moves, "comma list of camera moves in meters");
  diagnose->add_option("--paste-depths", paste_depths, "comma list of paste depths in meters");
  diagnose->add_option("--crop-positions", crop_positions, "horizontal crop positions");
  diag_opts.add(diagnose);

  auto* eval = app.add_subcommand("eval", "score detector outputs on a suite");
  eval->add_option("--input", input, "suite directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--predictions", predictions, "directory of <frame>.txt results")->required();
  eval->add_option("--output", output, "report directory")->required();
  eval->add_option("--difficulty", difficulty, "easy, moderate, hard or all");

  CommonOptions val_opts;
  auto* validate = app.add_subcommand("validate", "check label and cue consistency");
  validate->add_option("--input", input, "KITTI-layout dataset root")->required();
  val_opts.add(validate);

  auto* synth = app.add_subcommand("synth", "write a synthetic KITTI-layout dataset");
  synth->add_option("--output", output, "dataset root")->required();
  synth->add_option("--seed", seed, "random seed");
  synth->add_option("--frames", frames, "number of frames")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*augment) {
      AugmentRun run;
      run.input = input;
      run.output = output;
      run.cfg = augment_opts.build();
      run.kinds.clear();
      for (const auto& k : split(kinds)) run.kinds.push_back(parse_augment_kind(k));
      if (run.kinds.empty()) throw std::invalid_argument("--kinds is empty");
      run.mode = parse_paste_mode(mode);
      run.seed = seed;
      run.jobs = jobs;
      if (!db.empty()) run.db = fs::path(db);
      const RunSummary s = run_augment(run);
      for (const auto& e : s.errors) std::cerr << "error: " << e << '\n';
      std::printf("frames %zu written %zu failed %zu\n", s.frames, s.written, s.errors.size());
      return s.errors.empty() ? kOk : kInputError;
    }
    if (*build_db) {
      const AdmissionStats s = run_build_db(input, output, db_opts.build());
      print_stats(s);
      if (s.admitted == 0) {
        std::cerr << "warning: instance database is empty\n";
        return kInputError;
      }
      return kOk;
    }
    if (*diagnose) {
      DiagnoseRun run;
      run.input = input;
      run.output = output;
      run.cfg = diag_opts.build();
      run.suite.seed = seed;
      run.suite.crop_positions = crop_positions;
      if (!scales.empty()) run.suite.scales = parse_list(scales);
      if (!moves.empty()) run.suite.moves = parse_list(moves);
      if (!paste_depths.empty()) run.suite.paste_depths = parse_list(paste_depths);
      if (!db.empty()) run.db = fs::path(db);
      const Suite suite = run_diagnose(run);
      for (const auto& w : suite.warnings) std::cerr << "warning: " << w << '\n';
      std::printf("suite entries %zu skipped %zu\n", suite.entries.size(), suite.warnings.size());
      return kOk;
    }
    if (*eval) {
      EvalRun run;
      run.suite = input;
      run.predictions = predictions;
      run.output = output;
      run.difficulty = Difficulty::parse(difficulty);
      const DiagnosisReport report = run_eval(run);
      std::size_t flagged = 0;
      for (const auto& r : report.rows) flagged += r.flagged ? 1 : 0;
      std::printf("deviation rows %zu without matches %zu\n", report.rows.size(), flagged);
      return kOk;
    }
    if (*validate) {
      if (!fs::is_directory(input)) throw Error("input directory not found: " + input);
      const AugmentConfig cfg = val_opts.build();
      const auto issues = run_validate(input, cfg, cfg.tol);
      for (const auto& i : issues) {
        std::printf("%s", i.frame_id.c_str());
        if (i.object_index >= 0) std::printf(" object %d", i.object_index);
        std::printf(": %s\n", i.message.c_str());
      }
      std::printf("%s (%zu issues)\n", issues.empty() ? "PASS" : "FAIL", issues.size());
      return issues.empty() ? kOk : kValidationFailure;
    }
    if (*synth) {
      SyntheticConfig cfg;
      for (int i = 0; i < frames; ++i) {
        std::seed_seq seq{seed, static_cast<unsigned long long>(i)};
        Rng rng(seq);
        char id[16];
        std::snprintf(id, sizeof id, "%06d", i);
        save_frame(output, make_synthetic_frame(id, cfg, rng));
      }
      std::printf("wrote %d frames to %s\n", frames, output.c_str());
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}
