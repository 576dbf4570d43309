#include "geoaug/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "geoaug/dataset.hpp"
#include "geoaug/errors.hpp"

namespace geoaug {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Runs body(i) for i in [0, n) on `jobs` threads. Exceptions escape from the lowest index.
template <typename Body>
void parallel_for(std::size_t n, int jobs, Body body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<Sample> load_all(const fs::path& input, const AugmentConfig& cfg, int jobs) {
  const auto ids = list_frames(input);
  std::vector<Sample> samples(ids.size());
  parallel_for(ids.size(), jobs, [&](std::size_t i) { samples[i] = load_frame(input, ids[i], cfg); });
  return samples;
}

std::string region_text(const Region& r) {
  return "x=" + std::to_string(r.x) + ";y=" + std::to_string(r.y) + ";w=" + std::to_string(r.w) +
         ";h=" + std::to_string(r.h);
}

}  // namespace

std::string to_string(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::Scale: return "scale";
    case AugmentKind::Crop: return "crop";
    case AugmentKind::Move: return "move";
    case AugmentKind::Paste: return "paste";
    case AugmentKind::Flip: return "flip";
  }
  return "?";
}

AugmentKind parse_augment_kind(const std::string& text) {
  if (text == "scale") return AugmentKind::Scale;
  if (text == "crop") return AugmentKind::Crop;
  if (text == "move") return AugmentKind::Move;
  if (text == "paste") return AugmentKind::Paste;
  if (text == "flip") return AugmentKind::Flip;
  throw std::invalid_argument("unknown augmentation kind: " + text);
}

RunSummary run_augment(const AugmentRun& run) {
  validate_config(run.cfg);
  const auto ids = list_frames(run.input);
  RunSummary summary;
  summary.frames = ids.size();
  if (ids.empty()) throw Error("no frames in " + run.input.string());

  bool paste = false;
  for (auto k : run.kinds) paste = paste || k == AugmentKind::Paste;
  InstanceDB db;
  if (paste) db = run.db ? load_instance_db(*run.db) : build_instance_db(load_all(run.input, run.cfg, run.jobs), run.cfg);

  const std::size_t nk = run.kinds.size();
  std::vector<std::string> manifest(ids.size() * nk);
  std::vector<std::string> failures(ids.size() * nk);
  parallel_for(ids.size(), run.jobs, [&](std::size_t i) {
    Sample base;
    try {
      base = load_frame(run.input, ids[i], run.cfg);
    } catch (const std::exception& e) {
      for (std::size_t j = 0; j < nk; ++j) failures[i * nk + j] = ids[i] + ": " + e.what();
      return;
    }
    for (std::size_t j = 0; j < nk; ++j) {
      const AugmentKind kind = run.kinds[j];
      std::seed_seq seq{run.seed, static_cast<unsigned long long>(i), static_cast<unsigned long long>(kind)};
      Rng rng(seq);
      const std::string out_id = ids[i] + "_" + to_string(kind);
      try {
        Sample out;
        std::string params;
        switch (kind) {
          case AugmentKind::Scale: {
            const double s = sample_scale(rng, run.cfg);
            out = augment_scale(base, s, run.cfg);
            params = "s=" + fmt("%.6f", s);
            break;
          }
          case AugmentKind::Crop: {
            const Region r = sample_crop_region(rng, base.image.width, base.image.height, run.cfg);
            out = augment_crop(base, r, run.cfg);
            params = region_text(r);
            break;
          }
          case AugmentKind::Move: {
            const double d = sample_camera_move(rng, run.cfg);
            out = augment_move_camera(base, d, run.cfg);
            params = "d=" + fmt("%.6f", d);
            break;
          }
          case AugmentKind::Paste: {
            PasteResult res = paste_instances(base, db, run.mode, rng, run.cfg);
            out = std::move(res.sample);
            params = "mode=" + to_string(run.mode) + ";n=" + std::to_string(res.plans.size());
            for (const auto& p : res.plans) params += ";" + db.patches[p.patch_index].id + "@" + fmt("%.3f", p.depth);
            break;
          }
          case AugmentKind::Flip:
            out = flip_horizontal(base);
            break;
        }
        out.frame_id = out_id;
        save_frame(run.output, out);
        manifest[i * nk + j] = out_id + "," + ids[i] + "," + to_string(kind) + "," + params;
      } catch (const std::exception& e) {
        failures[i * nk + j] = out_id + ": " + e.what();
      }
    }
  });

  std::string text = "frame_id,source_frame,kind,params\n";
  for (std::size_t n = 0; n < manifest.size(); ++n) {
    if (!manifest[n].empty()) {
      text += manifest[n] + "\n";
      ++summary.written;
    }
    if (!failures[n].empty()) summary.errors.push_back(failures[n]);
  }
  text += "# seed=" + std::to_string(run.seed) + "\n";
  write_text(run.output / "manifest.csv", text);
  write_text(run.output / "config.txt", write_config(run.cfg));
  return summary;
}

AdmissionStats run_build_db(const fs::path& input, const fs::path& output, const AugmentConfig& cfg) {
  validate_config(cfg);
  const auto samples = load_all(input, cfg, 1);
  if (samples.empty()) throw Error("no frames in " + input.string());
  const InstanceDB db = build_instance_db(samples, cfg);
  save_instance_db(db, output);
  return db.stats;
}

Suite run_diagnose(const DiagnoseRun& run) {
  validate_config(run.cfg);
  const auto samples = load_all(run.input, run.cfg, 1);
  if (samples.empty()) throw Error("no frames in " + run.input.string());
  std::optional<InstanceDB> db;
  if (!run.suite.paste_depths.empty()) db = run.db ? load_instance_db(*run.db) : build_instance_db(samples, run.cfg);
  Suite suite = generate_suite(samples, run.suite, run.cfg, db ? &*db : nullptr);
  save_suite(suite, run.output);
  return suite;
}

DiagnosisReport run_eval(const EvalRun& run) {
  const auto records = load_suite_records(run.suite);
  if (records.empty()) throw Error("suite in " + run.suite.string() + " has no manipulations");
  const PredictionMap predictions = load_predictions(run.predictions);
  const DiagnosisReport report = depth_deviation_report(records, predictions);

  // Groups: everything, then each kind (and paste mode).
  std::vector<std::pair<std::string, std::vector<const ManipulationRecord*>>> groups{{"all", {}}};
  for (const auto& r : records) {
    groups[0].second.push_back(&r);
    const std::string name = to_string(r.kind) + (r.kind == ManipulationKind::Paste ? "/" + to_string(r.mode) : "");
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == name; });
    if (it == groups.end()) {
      groups.push_back({name, {}});
      it = groups.end() - 1;
    }
    it->second.push_back(&r);
  }

  auto pct = [](const std::optional<double>& v) { return v ? fmt("%.2f", 100.0 * *v) : std::string("n/a"); };
  std::ostringstream ap;
  std::ostringstream swap;
  ap << "group,difficulty,ap40_3d,ap40_bev\n";
  swap << "group,difficulty,base,depth,dim,pos\n";
  for (const auto& [name, members] : groups) {
    TruthMap truths;
    PredictionMap preds;
    for (const ManipulationRecord* r : members) {
      auto& t = truths[r->frame_id];
      for (const auto& e : r->expected) t.push_back(e.object);
      const auto it = predictions.find(r->frame_id);
      if (it != predictions.end()) preds[r->frame_id] = it->second;
    }
    EvalOptions opt;
    opt.difficulty = run.difficulty;
    const auto ap3d = evaluate_ap(preds, truths, opt);
    opt.iou_kind = IouKind::Bev;
    const auto apbev = evaluate_ap(preds, truths, opt);
    opt.iou_kind = IouKind::Box3D;
    ap << name << ',' << run.difficulty.name << ',' << pct(ap3d) << ',' << pct(apbev) << '\n';
    swap << name << ',' << run.difficulty.name;
    for (SwapComponent c : {SwapComponent::Base, SwapComponent::Depth, SwapComponent::Dim, SwapComponent::Pos})
      swap << ',' << pct(component_swap_eval(preds, truths, c, opt));
    swap << '\n';
  }
  write_text(run.output / "ap40.csv", ap.str());
  write_text(run.output / "swap.csv", swap.str());
  write_text(run.output / "deviation.csv", deviation_csv(report));
  return report;
}

std::vector<ValidationIssue> validate_sample(const Sample& s, double tol) {
  std::vector<ValidationIssue> issues;
  auto add = [&](int i, std::string msg) { issues.push_back({s.frame_id, i, std::move(msg)}); };
  if (s.depth && (s.depth->width() != s.image.width || s.depth->height() != s.image.height))
    add(-1, "depth map size differs from image");
  if (s.mask && (s.mask->width != s.image.width || s.mask->height != s.image.height))
    add(-1, "mask size differs from image");

  for (std::size_t n = 0; n < s.objects.size(); ++n) {
    const Object3D& o = s.objects[n];
    const int i = static_cast<int>(n);
    if (o.is_dont_care()) continue;
    if (!(o.dims.h > 0 && o.dims.w > 0 && o.dims.l > 0)) {
      add(i, "non-positive dimensions");
      continue;
    }
    if (!(o.location.z > 0)) {
      add(i, "object is not in front of the camera");
      continue;
    }
    const double alpha_gap = std::abs(normalize_angle(o.alpha - alpha_from_yaw(o.rotation_y, o.location)));
    if (alpha_gap > 0.05) add(i, "alpha disagrees with yaw by " + fmt("%.3f", alpha_gap) + " rad");

    ClippedBox hull;
    try {
      hull = clip_box(project_box2d(o, s.k), s.image.width, s.image.height);
    } catch (const BehindCamera&) {
      add(i, "box reaches behind the camera");
      continue;
    }
    if (hull.box.area() <= 0) {
      add(i, "box projects outside the image");
      continue;
    }
    const double overlap = iou(o.box2d, hull.box);
    if (overlap < 0.5) add(i, "2D box IoU with projected box is " + fmt("%.3f", overlap));
    const double size_gap = std::abs(o.box2d.height() - hull.box.height()) / hull.box.height();
    if (size_gap > tol) add(i, "2D box height off by " + fmt("%.1f", 100 * size_gap) + "%");

    const double v = contact_pixel(o, s.k).v;
    if (!(v > s.ground.horizon_row)) {
      add(i, "contact point is above the horizon");
      continue;
    }
    const double z_pos = depth_from_position(s.k.f, s.ground, v);
    const double pos_gap = std::abs(z_pos - o.location.z) / o.location.z;
    if (pos_gap > tol) add(i, "ground position implies " + fmt("%.2f", z_pos) + " m, label says " + fmt("%.2f", o.location.z) + " m");
  }
  return issues;
}

std::vector<ValidationIssue> run_validate(const fs::path& input, const AugmentConfig& cfg, double tol) {
  const auto ids = list_frames(input);
  if (ids.empty()) throw Error("no frames in " + input.string());
  std::vector<ValidationIssue> issues;
  for (const auto& id : ids) {
    const auto frame = validate_sample(load_frame(input, id, cfg), tol);
    issues.insert(issues.end(), frame.begin(), frame.end());
  }
  return issues;
}

}  // namespace geoaug
