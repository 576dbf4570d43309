#include "geoaug/diagnose.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "geoaug/dataset.hpp"
#include "geoaug/errors.hpp"

namespace geoaug {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double position_cue(const Object3D& obj, const CameraIntrinsics& k, const GroundModel& ground) {
  const double v = contact_pixel(obj, k).v;
  return v > ground.horizon_row ? depth_from_position(k.f, ground, v) : kInf;
}

ExpectedObject expect(const Object3D& obj, const Sample& s, bool manipulated) {
  ExpectedObject e;
  e.object = obj;
  e.expected_depth = obj.location.z;
  e.depth_size_cue = depth_from_size(s.k.f, obj.dims.h, proxy_height(obj, s.k));
  e.depth_position_cue = position_cue(obj, s.k, s.ground);
  e.manipulated = manipulated;
  return e;
}

std::vector<ExpectedObject> expect_all(const Sample& s, bool manipulated) {
  std::vector<ExpectedObject> out;
  for (const auto& o : s.objects)
    if (!o.is_dont_care()) out.push_back(expect(o, s, manipulated));
  return out;
}

bool any_manipulated(const ManipulationRecord& r) {
  return std::any_of(r.expected.begin(), r.expected.end(), [](const ExpectedObject& e) { return e.manipulated; });
}

std::vector<int> crop_offsets(int image_width, int crop_width, int positions) {
  std::vector<int> xs;
  const int span = image_width - crop_width;
  if (positions <= 0) return xs;
  if (positions == 1) return {span / 2};
  for (int j = 0; j < positions; ++j) {
    const int x = static_cast<int>(std::lround(static_cast<double>(j) * span / (positions - 1)));
    if (xs.empty() || xs.back() != x) xs.push_back(x);
  }
  return xs;
}

}  // namespace

std::string to_string(ManipulationKind kind) {
  switch (kind) {
    case ManipulationKind::Scale: return "scale";
    case ManipulationKind::Crop: return "crop";
    case ManipulationKind::MoveCamera: return "move";
    case ManipulationKind::Paste: return "paste";
  }
  return "?";
}

ManipulationKind parse_manipulation_kind(const std::string& text) {
  if (text == "scale") return ManipulationKind::Scale;
  if (text == "crop") return ManipulationKind::Crop;
  if (text == "move") return ManipulationKind::MoveCamera;
  if (text == "paste") return ManipulationKind::Paste;
  throw std::invalid_argument("unknown manipulation kind: " + text);
}

SuiteConfig SuiteConfig::defaults() {
  SuiteConfig c;
  for (int i = 0; i <= 8; ++i) c.scales.push_back(0.8 + 0.05 * i);
  for (int d = -5; d <= 5; ++d) c.moves.push_back(d);
  for (int z = 10; z <= 50; z += 10) c.paste_depths.push_back(z);
  return c;
}

Suite generate_suite(const std::vector<Sample>& samples, const SuiteConfig& config, const AugmentConfig& cfg,
                     const InstanceDB* db) {
  AugmentConfig wide = cfg;
  for (double s : config.scales) {
    wide.scale_min = std::min(wide.scale_min, s);
    wide.scale_max = std::max(wide.scale_max, s);
  }
  for (double z : config.paste_depths) {
    wide.paste_depth_min = std::min(wide.paste_depth_min, z);
    wide.paste_depth_max = std::max(wide.paste_depth_max, z);
  }

  Suite suite;
  auto add = [&suite](Sample s, ManipulationRecord r) {
    if (!any_manipulated(r)) {
      suite.warnings.push_back(r.frame_id + ": no objects left to evaluate");
      return;
    }
    s.frame_id = r.frame_id;
    suite.entries.push_back({std::move(s), std::move(r)});
  };

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& base = samples[i];
    if (!config.moves.empty() && !base.depth) throw MissingDepthMap("frame " + base.frame_id + " has no depth map");

    for (double s : config.scales) {
      Sample out = augment_scale(base, s, wide);
      ManipulationRecord r{base.frame_id + "_scale_" + fmt("%.2f", s), base.frame_id, ManipulationKind::Scale, s,
                           PasteMode::Consistent, expect_all(out, true)};
      add(std::move(out), std::move(r));
    }

    for (double d : config.moves) {
      const std::string id = base.frame_id + "_move_" + fmt("%+.1f", d);
      Sample out;
      try {
        out = augment_move_camera(base, d, wide);
      } catch (const MissingDepthMap&) {
        throw;
      } catch (const Error& e) {
        suite.warnings.push_back(id + ": " + e.what());
        continue;
      }
      ManipulationRecord r{id, base.frame_id, ManipulationKind::MoveCamera, d, PasteMode::Consistent,
                           expect_all(out, true)};
      add(std::move(out), std::move(r));
    }

    const int cw = std::min(cfg.crop_w, base.image.width);
    const int ch = std::min(cfg.crop_h, base.image.height);
    for (int x : crop_offsets(base.image.width, cw, config.crop_positions)) {
      const Region region{x, base.image.height - ch, cw, ch};
      Sample out = augment_crop(base, region, wide);
      ManipulationRecord r{base.frame_id + "_crop_" + std::to_string(x), base.frame_id, ManipulationKind::Crop,
                           static_cast<double>(x), PasteMode::Consistent, expect_all(out, true)};
      add(std::move(out), std::move(r));
    }

    if (config.paste_depths.empty()) continue;
    if (!db || db->patches.empty()) {
      suite.warnings.push_back(base.frame_id + ": no instance database, paste entries skipped");
      continue;
    }
    for (std::size_t j = 0; j < config.paste_depths.size(); ++j) {
      const double depth = config.paste_depths[j];
      std::seed_seq seq{config.seed, static_cast<unsigned long long>(i), static_cast<unsigned long long>(j)};
      Rng rng(seq);
      const std::size_t n = db->patches.size();
      const std::size_t start = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);

      // One patch for every mode so the modes differ only in how it is placed.
      std::vector<PastePlan> plans;
      for (std::size_t step = 0; step < n && plans.empty(); ++step) {
        const std::size_t index = (start + step) % n;
        const InstancePatch& patch = db->patches[index];
        std::vector<PastePlan> candidate;
        try {
          for (PasteMode mode : config.modes) {
            PastePlan plan = plan_paste(patch, base, depth, mode, wide);
            plan.patch_index = index;
            if (mode == PasteMode::Consistent && !consistency_check(plan, patch, base, cfg.tol)) break;
            bool overlap = false;
            for (const auto& o : base.objects)
              overlap = overlap || (!o.is_dont_care() && iou(o.box2d, plan.object.box2d) > cfg.overlap_iou);
            if (overlap) break;
            candidate.push_back(plan);
          }
        } catch (const PlacementError&) {
          continue;
        }
        if (candidate.size() == config.modes.size()) plans = std::move(candidate);
      }
      if (plans.empty()) {
        suite.warnings.push_back(base.frame_id + ": no instance can be pasted at " + fmt("%.1f", depth) + " m");
        continue;
      }
      for (const PastePlan& plan : plans) {
        Sample out = apply_paste(base, {plan}, db->patches, wide);
        ManipulationRecord r{base.frame_id + "_paste_" + to_string(plan.mode) + "_" + fmt("%.1f", depth),
                             base.frame_id, ManipulationKind::Paste, depth, plan.mode, expect_all(base, false)};
        ExpectedObject pasted;
        pasted.object = plan.object;
        pasted.expected_depth = plan.depth;
        pasted.depth_size_cue = plan.expected_depth_size;
        pasted.depth_position_cue = plan.expected_depth_position;
        pasted.manipulated = true;
        r.expected.push_back(pasted);
        add(std::move(out), std::move(r));
      }
    }
  }
  return suite;
}

Assignment match(const std::vector<PredictionRecord>& predictions, const std::vector<Object3D>& truths,
                 double iou_threshold) {
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return predictions[a].score > predictions[b].score; });

  Assignment out;
  std::vector<bool> taken(truths.size(), false);
  for (std::size_t p : order) {
    const Object3D& pred = predictions[p].object;
    std::size_t best = truths.size();
    double best_iou = iou_threshold;
    for (std::size_t t = 0; t < truths.size(); ++t) {
      if (taken[t] || truths[t].is_dont_care() || truths[t].class_name != pred.class_name) continue;
      const double v = iou(pred.box2d, truths[t].box2d);
      if (v >= best_iou && (best == truths.size() || v > best_iou)) {
        best = t;
        best_iou = v;
      }
    }
    if (best < truths.size()) {
      taken[best] = true;
      out.pairs.emplace_back(p, best);
    } else {
      out.unmatched_predictions.push_back(p);
    }
  }
  std::sort(out.unmatched_predictions.begin(), out.unmatched_predictions.end());
  for (std::size_t t = 0; t < truths.size(); ++t)
    if (!taken[t] && !truths[t].is_dont_care()) out.unmatched_truths.push_back(t);
  return out;
}

namespace {

struct P2 {
  double x, z;
};
using Polygon = std::vector<P2>;

double signed_area(const Polygon& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const P2& q = p[i];
    const P2& r = p[(i + 1) % p.size()];
    a += q.x * r.z - r.x * q.z;
  }
  return 0.5 * a;
}

Polygon footprint(const Object3D& obj) {
  if (!(obj.dims.l > 0) || !(obj.dims.w > 0) || !(obj.dims.h > 0))
    throw std::invalid_argument("box has non-positive dimensions");
  const auto c = corners_3d(obj);
  Polygon p{{c[0].x, c[0].z}, {c[1].x, c[1].z}, {c[2].x, c[2].z}, {c[3].x, c[3].z}};
  if (signed_area(p) < 0) std::reverse(p.begin(), p.end());
  return p;
}

// Sutherland-Hodgman against a convex counter-clockwise clip polygon.
Polygon clip_convex(Polygon subject, const Polygon& clip) {
  for (std::size_t i = 0; i < clip.size() && !subject.empty(); ++i) {
    const P2 a = clip[i];
    const P2 b = clip[(i + 1) % clip.size()];
    auto side = [&](const P2& p) { return (b.x - a.x) * (p.z - a.z) - (b.z - a.z) * (p.x - a.x); };
    Polygon out;
    for (std::size_t j = 0; j < subject.size(); ++j) {
      const P2 cur = subject[j];
      const P2 prev = subject[(j + subject.size() - 1) % subject.size()];
      const double sc = side(cur);
      const double sp = side(prev);
      if (sc >= 0) {
        if (sp < 0) {
          const double t = sp / (sp - sc);
          out.push_back({prev.x + t * (cur.x - prev.x), prev.z + t * (cur.z - prev.z)});
        }
        out.push_back(cur);
      } else if (sp >= 0) {
        const double t = sp / (sp - sc);
        out.push_back({prev.x + t * (cur.x - prev.x), prev.z + t * (cur.z - prev.z)});
      }
    }
    subject = std::move(out);
  }
  return subject;
}

double footprint_intersection(const Object3D& a, const Object3D& b) {
  const Polygon pa = footprint(a);
  const Polygon pb = footprint(b);
  const Polygon inter = clip_convex(pa, pb);
  return inter.size() < 3 ? 0.0 : std::abs(signed_area(inter));
}

}  // namespace

double bev_iou(const Object3D& a, const Object3D& b) {
  const double inter = footprint_intersection(a, b);
  const double area_a = a.dims.l * a.dims.w;
  const double area_b = b.dims.l * b.dims.w;
  return inter / (area_a + area_b - inter);
}

double iou_3d(const Object3D& a, const Object3D& b) {
  const double inter_bev = footprint_intersection(a, b);
  // Y points down; a box spans [Y - H, Y].
  const double top = std::max(a.location.y - a.dims.h, b.location.y - b.dims.h);
  const double bottom = std::min(a.location.y, b.location.y);
  const double inter = inter_bev * std::max(0.0, bottom - top);
  const double va = a.dims.l * a.dims.w * a.dims.h;
  const double vb = b.dims.l * b.dims.w * b.dims.h;
  return inter / (va + vb - inter);
}

std::optional<double> ap40(std::vector<ScoredDetection> detections, std::size_t num_truths) {
  if (num_truths == 0) return std::nullopt;
  std::stable_sort(detections.begin(), detections.end(),
                   [](const ScoredDetection& a, const ScoredDetection& b) { return a.score > b.score; });
  std::vector<std::pair<double, double>> points;  // (recall, precision) after each score level
  std::size_t tp = 0;
  for (std::size_t i = 0; i < detections.size();) {
    std::size_t j = i;
    while (j < detections.size() && detections[j].score == detections[i].score) {
      tp += detections[j].true_positive ? 1 : 0;
      ++j;
    }
    points.emplace_back(static_cast<double>(tp) / num_truths, static_cast<double>(tp) / j);
    i = j;
  }
  double sum = 0.0;
  for (int r = 1; r <= 40; ++r) {
    const double level = r / 40.0;
    double best = 0.0;
    for (const auto& [recall, precision] : points)
      if (recall >= level - 1e-12) best = std::max(best, precision);
    sum += best;
  }
  return sum / 40.0;
}

Difficulty Difficulty::parse(const std::string& name) {
  if (name == "easy") return easy();
  if (name == "moderate") return moderate();
  if (name == "hard") return hard();
  if (name == "all") return Difficulty{};
  throw std::invalid_argument("unknown difficulty: " + name);
}

namespace {

bool in_bucket(const Object3D& t, const Difficulty& d) {
  return t.box2d.height() >= d.min_height && t.occluded <= d.max_occlusion && t.truncated <= d.max_truncation;
}

}  // namespace

std::optional<double> evaluate_ap(const PredictionMap& predictions, const TruthMap& truths, const EvalOptions& options) {
  std::vector<ScoredDetection> detections;
  std::size_t num_truths = 0;
  auto frame_eval = [&](const std::vector<PredictionRecord>* preds, const std::vector<Object3D>* frame_truths) {
    std::vector<const Object3D*> valid;
    std::vector<const Object3D*> ignored;
    if (frame_truths) {
      for (const auto& t : *frame_truths) {
        if (t.class_name != options.class_name) continue;
        (in_bucket(t, options.difficulty) ? valid : ignored).push_back(&t);
      }
    }
    num_truths += valid.size();
    if (!preds) return;
    std::vector<const PredictionRecord*> ordered;
    for (const auto& p : *preds)
      if (p.object.class_name == options.class_name) ordered.push_back(&p);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const PredictionRecord* a, const PredictionRecord* b) { return a->score > b->score; });
    std::vector<bool> valid_taken(valid.size(), false);
    std::vector<bool> ignored_taken(ignored.size(), false);
    auto overlap = [&](const Object3D& a, const Object3D& b) {
      return options.iou_kind == IouKind::Box3D ? iou_3d(a, b) : bev_iou(a, b);
    };
    auto best_of = [&](const std::vector<const Object3D*>& pool, const std::vector<bool>& taken, const Object3D& p) {
      std::size_t best = pool.size();
      double best_iou = -1.0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (taken[i]) continue;
        const double v = overlap(p, *pool[i]);
        if (v >= options.iou_threshold && v > best_iou) {
          best = i;
          best_iou = v;
        }
      }
      return best;
    };
    for (const PredictionRecord* p : ordered) {
      const std::size_t v = best_of(valid, valid_taken, p->object);
      if (v < valid.size()) {
        valid_taken[v] = true;
        detections.push_back({p->score, true});
        continue;
      }
      const std::size_t g = best_of(ignored, ignored_taken, p->object);
      if (g < ignored.size()) {
        ignored_taken[g] = true;
        continue;
      }
      detections.push_back({p->score, false});
    }
  };
  for (const auto& [id, frame_truths] : truths) {
    const auto it = predictions.find(id);
    frame_eval(it == predictions.end() ? nullptr : &it->second, &frame_truths);
  }
  for (const auto& [id, preds] : predictions)
    if (!truths.count(id)) frame_eval(&preds, nullptr);
  return ap40(std::move(detections), num_truths);
}

std::string to_string(SwapComponent c) {
  switch (c) {
    case SwapComponent::Base: return "base";
    case SwapComponent::Depth: return "depth";
    case SwapComponent::Dim: return "dim";
    case SwapComponent::Pos: return "pos";
  }
  return "?";
}

std::optional<double> component_swap_eval(const PredictionMap& predictions, const TruthMap& truths,
                                          SwapComponent component, const EvalOptions& options) {
  if (component == SwapComponent::Base) return evaluate_ap(predictions, truths, options);
  PredictionMap hybrid;
  for (const auto& [id, preds] : predictions) {
    const auto it = truths.find(id);
    std::vector<PredictionRecord> out = preds;
    if (it != truths.end()) {
      const Assignment a = match(preds, it->second, 0.5);
      for (const auto& [p, t] : a.pairs) {
        const Object3D& pred = preds[p].object;
        Object3D h = it->second[t];
        const Point3D& tl = h.location;
        const Point3D& pl = pred.location;
        switch (component) {
          case SwapComponent::Depth:
            h.location = {tl.x * pl.z / tl.z, tl.y * pl.z / tl.z, pl.z};
            break;
          case SwapComponent::Dim:
            h.dims = pred.dims;
            break;
          case SwapComponent::Pos:
            h.location = {pl.x * tl.z / pl.z, pl.y * tl.z / pl.z, tl.z};
            break;
          case SwapComponent::Base:
            break;
        }
        out[p].object = h;
      }
    }
    hybrid.emplace(id, std::move(out));
  }
  return evaluate_ap(hybrid, truths, options);
}

DiagnosisReport depth_deviation_report(const std::vector<ManipulationRecord>& records, const PredictionMap& predictions,
                                       double iou_threshold) {
  std::map<std::string, const ManipulationRecord*> by_id;
  for (const auto& r : records) by_id[r.frame_id] = &r;
  for (const auto& [id, preds] : predictions) {
    if (!by_id.count(id)) throw MatchError("prediction frame " + id + " is not part of the suite");
  }

  struct Acc {
    std::size_t expected = 0;
    double expected_sum = 0.0;
    std::vector<double> predicted;
    std::vector<double> dev;
    std::vector<double> dev_pos;
  };
  using Key = std::tuple<int, int, double>;
  std::map<Key, Acc> groups;

  static const std::vector<PredictionRecord> kNone;
  for (const auto& r : records) {
    const int mode = r.kind == ManipulationKind::Paste ? static_cast<int>(r.mode) : 0;
    Acc& acc = groups[Key{static_cast<int>(r.kind), mode, r.magnitude}];
    std::vector<Object3D> truths;
    for (const auto& e : r.expected) truths.push_back(e.object);
    const auto it = predictions.find(r.frame_id);
    const auto& preds = it == predictions.end() ? kNone : it->second;
    const Assignment a = match(preds, truths, iou_threshold);
    std::vector<const PredictionRecord*> matched(truths.size(), nullptr);
    for (const auto& [p, t] : a.pairs) matched[t] = &preds[p];
    for (std::size_t t = 0; t < truths.size(); ++t) {
      const ExpectedObject& e = r.expected[t];
      if (!e.manipulated) continue;
      ++acc.expected;
      acc.expected_sum += e.expected_depth;
      if (!matched[t]) continue;
      const double z = matched[t]->object.location.z;
      acc.predicted.push_back(z);
      acc.dev.push_back(z - e.expected_depth);
      if (std::isfinite(e.depth_position_cue)) acc.dev_pos.push_back(z - e.depth_position_cue);
    }
  }

  auto mean_std = [](const std::vector<double>& v) -> std::pair<double, double> {
    if (v.empty()) return {kNaN, kNaN};
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / v.size())};
  };

  DiagnosisReport report;
  for (const auto& [key, acc] : groups) {
    DeviationRow row;
    row.kind = static_cast<ManipulationKind>(std::get<0>(key));
    row.mode = static_cast<PasteMode>(std::get<1>(key));
    row.magnitude = std::get<2>(key);
    row.expected = acc.expected;
    row.matched = acc.predicted.size();
    row.mean_expected_depth = acc.expected ? acc.expected_sum / acc.expected : kNaN;
    row.mean_predicted_depth = mean_std(acc.predicted).first;
    std::tie(row.mean_deviation, row.std_deviation) = mean_std(acc.dev);
    std::tie(row.mean_deviation_position_cue, row.std_deviation_position_cue) = mean_std(acc.dev_pos);
    row.flagged = row.matched == 0;
    report.rows.push_back(row);
  }
  return report;
}

std::string deviation_csv(const DiagnosisReport& report) {
  std::ostringstream out;
  out << "kind,mode,magnitude,expected,matched,unmatched,mean_expected_depth,mean_predicted_depth,mean_deviation,"
         "std_deviation,mean_deviation_position_cue,std_deviation_position_cue,flagged\n";
  for (const auto& r : report.rows) {
    out << to_string(r.kind) << ',' << (r.kind == ManipulationKind::Paste ? to_string(r.mode) : "-") << ','
        << fmt("%.4g", r.magnitude) << ',' << r.expected << ',' << r.matched << ',' << r.expected - r.matched << ','
        << fmt("%.4f", r.mean_expected_depth) << ',' << fmt("%.4f", r.mean_predicted_depth) << ','
        << fmt("%.4f", r.mean_deviation) << ',' << fmt("%.4f", r.std_deviation) << ','
        << fmt("%.4f", r.mean_deviation_position_cue) << ',' << fmt("%.4f", r.std_deviation_position_cue) << ','
        << (r.flagged ? "no_matches" : "") << '\n';
  }
  return out.str();
}

void save_suite(const Suite& suite, const fs::path& dir) {
  std::ostringstream manip;
  std::ostringstream expected;
  manip << "frame_id,base_frame_id,kind,mode,magnitude\n";
  expected << "frame_id,index,manipulated,expected_depth,depth_size_cue,depth_position_cue,label\n";
  for (const auto& e : suite.entries) {
    save_frame(dir, e.sample);
    const ManipulationRecord& r = e.record;
    manip << r.frame_id << ',' << r.base_frame_id << ',' << to_string(r.kind) << ',' << to_string(r.mode) << ','
          << fmt("%.17g", r.magnitude) << '\n';
    for (std::size_t i = 0; i < r.expected.size(); ++i) {
      const ExpectedObject& x = r.expected[i];
      expected << r.frame_id << ',' << i << ',' << (x.manipulated ? 1 : 0) << ',' << fmt("%.17g", x.expected_depth)
               << ',' << fmt("%.17g", x.depth_size_cue) << ',' << fmt("%.17g", x.depth_position_cue) << ','
               << format_label_full_precision({x.object, std::nullopt}) << '\n';
    }
  }
  write_text(dir / "manipulations.csv", manip.str());
  write_text(dir / "expected.csv", expected.str());
}

namespace {

std::vector<std::string> split_csv(const std::string& line, std::size_t fields) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i + 1 < fields; ++i) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) throw ParseError(ParseError::Kind::FieldCount, "short csv line: " + line);
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  out.push_back(line.substr(start));
  return out;
}

double to_double(const std::string& s) {
  if (s == "inf") return kInf;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(ParseError::Kind::MalformedNumber, "bad number: " + s);
  }
}

}  // namespace

std::vector<ManipulationRecord> load_suite_records(const fs::path& dir) {
  std::vector<ManipulationRecord> records;
  std::map<std::string, std::size_t> index;
  std::istringstream manip(read_text(dir / "manipulations.csv"));
  std::string line;
  std::getline(manip, line);
  while (std::getline(manip, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line, 5);
    ManipulationRecord r;
    r.frame_id = f[0];
    r.base_frame_id = f[1];
    r.kind = parse_manipulation_kind(f[2]);
    r.mode = parse_paste_mode(f[3]);
    r.magnitude = to_double(f[4]);
    index[r.frame_id] = records.size();
    records.push_back(std::move(r));
  }
  std::istringstream expected(read_text(dir / "expected.csv"));
  std::getline(expected, line);
  while (std::getline(expected, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line, 7);
    const auto it = index.find(f[0]);
    if (it == index.end()) throw MatchError("expected.csv names unknown frame " + f[0]);
    ExpectedObject e;
    e.manipulated = f[2] == "1";
    e.expected_depth = to_double(f[3]);
    e.depth_size_cue = to_double(f[4]);
    e.depth_position_cue = to_double(f[5]);
    const auto labels = parse_labels(f[6]);
    if (labels.size() != 1) throw ParseError(ParseError::Kind::FieldCount, "bad label in expected.csv: " + line);
    e.object = labels.front().object;
    records[it->second].expected.push_back(e);
  }
  return records;
}

PredictionMap load_predictions(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("prediction directory not found: " + dir.string());
  PredictionMap out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    const std::string id = entry.path().stem().string();
    auto& frame = out[id];
    for (const auto& r : parse_labels(read_text(entry.path()))) {
      if (!r.score) throw ParseError(ParseError::Kind::FieldCount, "prediction without score in " + entry.path().string());
      frame.push_back({id, r.object, *r.score});
    }
  }
  return out;
}

}  // namespace geoaug
