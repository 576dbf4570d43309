#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "geoaug/diagnose.hpp"
#include "geoaug/synthetic.hpp"

using namespace geoaug;

namespace {

Object3D box(double x, double z, double yaw, double l = 4.0, double w = 2.0, double h = 1.5, double y = 1.65) {
  Object3D o;
  o.dims = {w, h, l};
  o.location = {x, y, z};
  o.rotation_y = yaw;
  o.alpha = alpha_from_yaw(yaw, o.location);
  return o;
}

// Footprint membership by rotating the point into the box frame (x' = cos x + sin z, z' = -sin x + cos z).
bool inside_footprint(const Object3D& o, double x, double z) {
  const double dx = x - o.location.x;
  const double dz = z - o.location.z;
  const double c = std::cos(o.rotation_y), s = std::sin(o.rotation_y);
  const double lx = c * dx - s * dz;
  const double lz = s * dx + c * dz;
  return std::abs(lx) <= o.dims.l / 2 && std::abs(lz) <= o.dims.w / 2;
}

double raster_bev_iou(const Object3D& a, const Object3D& b, double step) {
  const double r = std::max(std::hypot(a.dims.l, a.dims.w), std::hypot(b.dims.l, b.dims.w));
  const double x0 = std::min(a.location.x, b.location.x) - r, x1 = std::max(a.location.x, b.location.x) + r;
  const double z0 = std::min(a.location.z, b.location.z) - r, z1 = std::max(a.location.z, b.location.z) + r;
  long inter = 0, uni = 0;
  for (double x = x0 + step / 2; x < x1; x += step) {
    for (double z = z0 + step / 2; z < z1; z += step) {
      const bool ia = inside_footprint(a, x, z), ib = inside_footprint(b, x, z);
      inter += ia && ib;
      uni += ia || ib;
    }
  }
  return uni ? static_cast<double>(inter) / uni : 0.0;
}

// Independent AP|40: for each recall point, best precision over all score thresholds.
double brute_ap40(const std::vector<ScoredDetection>& dets, std::size_t num_truths) {
  std::set<double> thresholds;
  for (const auto& d : dets) thresholds.insert(d.score);
  std::vector<std::pair<double, double>> pr;  // (recall, precision)
  for (double t : thresholds) {
    double tp = 0, n = 0;
    for (const auto& d : dets) {
      if (d.score >= t) {
        ++n;
        tp += d.true_positive;
      }
    }
    pr.emplace_back(tp / num_truths, tp / n);
  }
  double sum = 0;
  for (int i = 1; i <= 40; ++i) {
    double best = 0;
    for (auto [r, p] : pr)
      if (r >= i / 40.0 - 1e-12) best = std::max(best, p);
    sum += best;
  }
  return sum / 40;
}

PredictionRecord pred(const Object3D& o, double score, const std::string& frame = "f") { return {frame, o, score}; }

// Easy-bucket truths projected with a KITTI-like camera.
std::vector<Object3D> easy_truths() {
  const CameraIntrinsics k{721.5377, 609.5593, 172.854};
  std::vector<Object3D> out;
  for (auto [x, z, yaw] : {std::tuple{-4.0, 12.0, 0.3}, std::tuple{3.0, 15.0, -1.0}, std::tuple{0.5, 22.0, 1.4}}) {
    Object3D o = box(x, z, yaw);
    o.box2d = project_box2d(o, k);
    out.push_back(o);
  }
  return out;
}

SyntheticConfig small_camera() {
  SyntheticConfig c;
  c.width = 620;
  c.height = 190;
  c.k = {360.0, 310.0, 86.0};
  return c;
}

Sample suite_base(const std::string& id) {
  const SyntheticConfig c = small_camera();
  auto car = [&](double u, double z, double yaw) {
    Object3D o;
    o.dims = {1.7, 1.5, 4.0};
    o.location = {(u - c.k.cu) * z / c.k.f, c.camera_height, z};
    o.rotation_y = yaw;
    o.alpha = alpha_from_yaw(yaw, o.location);
    return o;
  };
  return render_scene(id, c, {car(150, 18, 0.4), car(470, 12, -0.8)});
}

// Instances on rays that are free in suite_base frames.
InstanceDB donor_db() {
  const SyntheticConfig c = small_camera();
  Object3D o;
  o.dims = {1.6, 1.4, 3.9};
  o.location = {0.3, c.camera_height, 9.0};
  o.rotation_y = 1.2;
  o.alpha = alpha_from_yaw(o.rotation_y, o.location);
  return build_instance_db({render_scene("donor", c, {o})});
}

PredictionMap oracle_predictions(const std::vector<ManipulationRecord>& records) {
  PredictionMap out;
  for (const auto& r : records) {
    auto& v = out[r.frame_id];
    for (const auto& e : r.expected) v.push_back({r.frame_id, e.object, 0.9});
  }
  return out;
}

}  // namespace

TEST_CASE("manipulation kind strings") {
  for (auto k : {ManipulationKind::Scale, ManipulationKind::Crop, ManipulationKind::MoveCamera, ManipulationKind::Paste})
    CHECK(parse_manipulation_kind(to_string(k)) == k);
  CHECK_THROWS(parse_manipulation_kind("rotate"));
}

TEST_CASE("match: greedy by score, one-to-one, same class") {
  std::vector<Object3D> truths(2);
  truths[0].box2d = {0, 0, 10, 10};
  truths[1].box2d = {100, 0, 110, 10};
  Object3D near0;
  near0.box2d = {1, 0, 11, 10};
  Object3D exact0;
  exact0.box2d = {0, 0, 10, 10};

  // The higher-scoring detection claims the truth even if its IoU is lower.
  const Assignment a = match({pred(exact0, 0.5), pred(near0, 0.9)}, truths);
  REQUIRE(a.pairs.size() == 1);
  CHECK(a.pairs[0] == std::pair<std::size_t, std::size_t>{1, 0});
  CHECK(a.unmatched_predictions == std::vector<std::size_t>{0});
  CHECK(a.unmatched_truths == std::vector<std::size_t>{1});

  Object3D ped = exact0;
  ped.class_name = "Pedestrian";
  CHECK(match({pred(ped, 1.0)}, truths).pairs.empty());

  std::vector<Object3D> dc = truths;
  dc[0].class_name = "DontCare";
  CHECK(match({pred(exact0, 1.0)}, dc).pairs.empty());

  Object3D weak;
  weak.box2d = {5, 0, 15, 10};  // IoU 1/3
  CHECK(match({pred(weak, 1.0)}, truths).pairs.empty());
  CHECK(match({pred(weak, 1.0)}, truths, 0.3).pairs.size() == 1);
}

TEST_CASE("bev_iou closed forms") {
  const Object3D a = box(0, 20, 0.0);
  CHECK(bev_iou(a, a) == doctest::Approx(1.0));
  CHECK(bev_iou(a, box(10, 20, 0.0)) == 0.0);
  // 2 x 4 footprints shifted 1 m along their length: 6 / 10.
  CHECK(bev_iou(a, box(1, 20, 0.0)) == doctest::Approx(0.6));
  // Square rotated by 45 degrees inside itself: octagon area over the union.
  const Object3D sq = box(0, 20, 0.0, 2, 2);
  const Object3D sq45 = box(0, 20, kPi / 4, 2, 2);
  const double octagon = 8 * (std::sqrt(2.0) - 1);
  CHECK(bev_iou(sq, sq45) == doctest::Approx(octagon / (8 - octagon)));
  CHECK_THROWS_AS(bev_iou(a, box(0, 20, 0, 0, 2)), std::invalid_argument);
}

TEST_CASE("bev_iou agrees with a rasterized footprint") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> off(-2.5, 2.5), yaw(-kPi, kPi), dim(1.0, 5.0);
  for (int i = 0; i < 12; ++i) {
    const Object3D a = box(0, 20, yaw(rng), dim(rng), dim(rng));
    const Object3D b = box(off(rng), 20 + off(rng), yaw(rng), dim(rng), dim(rng));
    const double exact = bev_iou(a, b);
    CHECK(exact == doctest::Approx(bev_iou(b, a)).epsilon(1e-12));
    CHECK(std::abs(exact - raster_bev_iou(a, b, 0.005)) < 3e-3);
  }
}

TEST_CASE("iou_3d multiplies footprint by vertical overlap") {
  const Object3D a = box(0, 20, 0.3);
  CHECK(iou_3d(a, a) == doctest::Approx(1.0));
  // Half the height shifted: intersection A H / 2, union 3 A H / 2.
  CHECK(iou_3d(a, box(0, 20, 0.3, 4, 2, 1.5, 1.65 - 0.75)) == doctest::Approx(1.0 / 3));
  CHECK(iou_3d(a, box(0, 20, 0.3, 4, 2, 1.5, 1.65 - 2.0)) == 0.0);
  CHECK(iou_3d(a, box(1, 20, 0.0, 4, 2)) < bev_iou(a, box(1, 20, 0.0, 4, 2)) + 1e-12);
}

TEST_CASE("ap40 closed forms") {
  CHECK(ap40({{0.9, true}, {0.8, true}}, 2).value() == doctest::Approx(1.0));
  CHECK(ap40({{0.9, false}, {0.8, false}}, 2).value() == 0.0);
  CHECK(ap40({{0.9, true}}, 2).value() == doctest::Approx(0.5));
  CHECK(ap40({}, 3).value() == 0.0);
  CHECK_FALSE(ap40({{0.9, false}}, 0).has_value());
  // A false positive ranked first halves precision at every recall point.
  CHECK(ap40({{0.9, false}, {0.8, true}}, 1).value() == doctest::Approx(0.5));
  // Tied scores enter together.
  CHECK(ap40({{0.5, false}, {0.5, true}}, 1).value() == doctest::Approx(0.5));
}

TEST_CASE("ap40 matches a brute-force threshold sweep") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> n(0, 30), coarse(0, 9);
  std::bernoulli_distribution tp(0.6);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ScoredDetection> d(n(rng));
    for (auto& x : d) x = {coarse(rng) / 10.0, tp(rng)};
    const auto tps = static_cast<std::size_t>(std::count_if(d.begin(), d.end(), [](auto& x) { return x.true_positive; }));
    const std::size_t truths = tps + static_cast<std::size_t>(coarse(rng));
    if (truths == 0) continue;
    CHECK(ap40(d, truths).value() == doctest::Approx(brute_ap40(d, truths)).epsilon(1e-12));
  }
}

TEST_CASE("ap40 does not rise when a true positive becomes a false one") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> score(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ScoredDetection> d(20);
    for (auto& x : d) x = {score(rng), true};
    double prev = ap40(d, 25).value();
    for (auto& x : d) {
      x.true_positive = false;
      const double now = ap40(d, 25).value();
      CHECK(now <= prev + 1e-12);
      prev = now;
    }
  }
}

TEST_CASE("difficulty buckets and evaluate_ap") {
  CHECK(Difficulty::parse("moderate").min_height == 25.0);
  CHECK(Difficulty::parse("all").max_occlusion == 3);
  CHECK_THROWS(Difficulty::parse("extreme"));

  const auto truths = easy_truths();
  TruthMap tm{{"f", truths}};
  PredictionMap perfect;
  for (const auto& t : truths) perfect["f"].push_back(pred(t, 0.8));
  CHECK(evaluate_ap(perfect, tm, {}).value() == doctest::Approx(1.0));
  EvalOptions bev;
  bev.iou_kind = IouKind::Bev;
  CHECK(evaluate_ap(perfect, tm, bev).value() == doctest::Approx(1.0));

  // A heavily occluded truth leaves the easy bucket: missing it costs nothing, detecting it too.
  TruthMap hidden = tm;
  hidden["f"][2].occluded = 2;
  PredictionMap two = perfect;
  two["f"].pop_back();
  CHECK(evaluate_ap(two, hidden, {}).value() == doctest::Approx(1.0));
  CHECK(evaluate_ap(perfect, hidden, {}).value() == doctest::Approx(1.0));
  CHECK(evaluate_ap(two, tm, {}).value() == doctest::Approx(2.0 / 3).epsilon(0.02));

  EvalOptions peds;
  peds.class_name = "Pedestrian";
  CHECK_FALSE(evaluate_ap(perfect, tm, peds).has_value());
  // Frames without predictions count their truths as misses.
  TruthMap more = tm;
  more["g"] = truths;
  CHECK(evaluate_ap(perfect, more, {}).value() == doctest::Approx(0.5));
}

TEST_CASE("component swap isolates the faulty component") {
  const auto truths = easy_truths();
  TruthMap tm{{"f", truths}};
  auto run = [&](const PredictionMap& p) {
    std::map<SwapComponent, double> out;
    for (auto c : {SwapComponent::Base, SwapComponent::Depth, SwapComponent::Dim, SwapComponent::Pos})
      out[c] = component_swap_eval(p, tm, c).value();
    return out;
  };

  PredictionMap perfect;
  for (const auto& t : truths) perfect["f"].push_back(pred(t, 0.9));
  for (auto [c, v] : run(perfect)) CHECK(v == doctest::Approx(1.0));

  // Depth 30% too far along the same ray: only the depth component is wrong.
  PredictionMap far;
  for (const auto& t : truths) {
    Object3D o = t;
    o.location = {t.location.x * 1.3, t.location.y * 1.3, t.location.z * 1.3};
    far["f"].push_back(pred(o, 0.9));
  }
  auto r = run(far);
  CHECK(r[SwapComponent::Base] == 0.0);
  CHECK(r[SwapComponent::Depth] == 0.0);
  CHECK(r[SwapComponent::Dim] == doctest::Approx(1.0));
  CHECK(r[SwapComponent::Pos] == doctest::Approx(1.0));

  // Dimensions 30% too large: only the dimension component is wrong.
  PredictionMap big;
  for (const auto& t : truths) {
    Object3D o = t;
    o.dims = {t.dims.w * 1.3, t.dims.h * 1.3, t.dims.l * 1.3};
    big["f"].push_back(pred(o, 0.9));
  }
  r = run(big);
  CHECK(r[SwapComponent::Base] == 0.0);
  CHECK(r[SwapComponent::Depth] == doctest::Approx(1.0));
  CHECK(r[SwapComponent::Dim] == 0.0);
  CHECK(r[SwapComponent::Pos] == doctest::Approx(1.0));

  // Lateral error at the right depth: only the ray is wrong.
  PredictionMap shifted;
  for (const auto& t : truths) {
    Object3D o = t;
    o.location.x += 2.5;
    shifted["f"].push_back(pred(o, 0.9));
  }
  r = run(shifted);
  CHECK(r[SwapComponent::Base] == 0.0);
  CHECK(r[SwapComponent::Depth] == doctest::Approx(1.0));
  CHECK(r[SwapComponent::Dim] == doctest::Approx(1.0));
  CHECK(r[SwapComponent::Pos] == 0.0);
}

TEST_CASE("suite generation") {
  const Sample base = suite_base("000001");
  SuiteConfig sc;
  sc.scales = {0.8, 1.0, 1.2};
  sc.moves = {0.0, 3.0};
  sc.crop_positions = 2;
  sc.paste_depths = {20.0, 30.0};
  sc.seed = 4;
  AugmentConfig cfg;
  cfg.crop_w = 500;
  cfg.crop_h = 190;
  const Suite bare = generate_suite({base}, sc, cfg);
  CHECK(std::none_of(bare.entries.begin(), bare.entries.end(),
                     [](auto& e) { return e.record.kind == ManipulationKind::Paste; }));
  CHECK(bare.warnings.size() == 1);
  const InstanceDB db = donor_db();
  REQUIRE(!db.patches.empty());
  const Suite suite = generate_suite({base}, sc, cfg, &db);

  std::map<std::string, const SuiteEntry*> by_id;
  for (const auto& e : suite.entries) by_id[e.record.frame_id] = &e;
  REQUIRE(by_id.count("000001_scale_1.00"));
  REQUIRE(by_id.count("000001_scale_0.80"));
  REQUIRE(by_id.count("000001_move_+0.0"));
  REQUIRE(by_id.count("000001_move_+3.0"));
  REQUIRE(by_id.count("000001_crop_0"));
  REQUIRE(by_id.count("000001_crop_120"));

  for (const char* id : {"000001_scale_1.00", "000001_move_+0.0"}) {
    const auto& ex = by_id[id]->record.expected;
    REQUIRE(ex.size() == base.objects.size());
    for (std::size_t i = 0; i < ex.size(); ++i) {
      CHECK(ex[i].expected_depth == doctest::Approx(base.objects[i].location.z).epsilon(1e-12));
      CHECK(ex[i].object.location.x == doctest::Approx(base.objects[i].location.x).epsilon(1e-12));
    }
  }
  for (const auto& e : by_id["000001_scale_0.80"]->record.expected) {
    CHECK(e.depth_size_cue == doctest::Approx(e.expected_depth).epsilon(1e-9));
    CHECK(e.depth_position_cue == doctest::Approx(e.expected_depth).epsilon(1e-9));
  }
  CHECK(by_id["000001_move_+3.0"]->record.magnitude == 3.0);
  CHECK(by_id["000001_crop_120"]->sample.image.width == 500);

  // Every paste entry carries one manipulated object, and its cues follow the mode.
  int pastes = 0;
  for (const auto& e : suite.entries) {
    if (e.record.kind != ManipulationKind::Paste) continue;
    ++pastes;
    const auto& ex = e.record.expected;
    const auto it = std::find_if(ex.begin(), ex.end(), [](const ExpectedObject& o) { return o.manipulated; });
    REQUIRE(it != ex.end());
    CHECK(std::count_if(ex.begin(), ex.end(), [](const ExpectedObject& o) { return o.manipulated; }) == 1);
    CHECK(it->expected_depth == e.record.magnitude);
    switch (e.record.mode) {
      case PasteMode::Consistent:
        CHECK(it->depth_size_cue == doctest::Approx(e.record.magnitude).epsilon(1e-9));
        CHECK(it->depth_position_cue == doctest::Approx(e.record.magnitude).epsilon(1e-9));
        break;
      case PasteMode::SizeOnly:
        CHECK(it->depth_size_cue == doctest::Approx(e.record.magnitude).epsilon(1e-9));
        CHECK(it->depth_position_cue != doctest::Approx(e.record.magnitude).epsilon(0.05));
        break;
      case PasteMode::PosOnly:
        CHECK(it->depth_size_cue != doctest::Approx(e.record.magnitude).epsilon(0.05));
        CHECK(it->depth_position_cue == doctest::Approx(e.record.magnitude).epsilon(1e-9));
        break;
    }
  }
  CHECK(pastes == 6);

  // Deterministic.
  const Suite again = generate_suite({base}, sc, cfg, &db);
  REQUIRE(again.entries.size() == suite.entries.size());
  for (std::size_t i = 0; i < suite.entries.size(); ++i) {
    CHECK(again.entries[i].record.frame_id == suite.entries[i].record.frame_id);
    CHECK(again.entries[i].sample.image == suite.entries[i].sample.image);
  }

  Sample no_depth = base;
  no_depth.depth.reset();
  CHECK_THROWS_AS(generate_suite({no_depth}, sc, cfg), MissingDepthMap);
}

TEST_CASE("depth deviation report") {
  const Sample base = suite_base("000002");
  SuiteConfig sc;
  sc.scales = {0.8, 0.9, 1.0, 1.1, 1.2};
  sc.crop_positions = 0;
  const Suite suite = generate_suite({base}, sc);
  std::vector<ManipulationRecord> records;
  for (const auto& e : suite.entries) records.push_back(e.record);

  // Exact predictions deviate by nothing.
  const DiagnosisReport exact = depth_deviation_report(records, oracle_predictions(records));
  REQUIRE(exact.rows.size() == 5);
  for (const auto& row : exact.rows) {
    CHECK(row.matched == row.expected);
    CHECK(row.mean_deviation == doctest::Approx(0.0));
    CHECK(row.std_deviation == doctest::Approx(0.0));
    CHECK_FALSE(row.flagged);
  }

  // A detector blind to the scale keeps predicting the original depth: deviation (1 - s) Z-bar.
  double zbar = 0;
  for (const auto& o : base.objects) zbar += o.location.z;
  zbar /= base.objects.size();
  PredictionMap blind = oracle_predictions(records);
  for (auto& [id, preds] : blind) {
    for (std::size_t i = 0; i < preds.size(); ++i) preds[i].object.location.z = base.objects[i].location.z;
  }
  const DiagnosisReport report = depth_deviation_report(records, blind);
  for (const auto& row : report.rows) {
    CAPTURE(row.magnitude);
    CHECK(row.kind == ManipulationKind::Scale);
    CHECK(row.mean_deviation == doctest::Approx((1 - row.magnitude) * zbar).epsilon(1e-9));
    CHECK(row.mean_expected_depth == doctest::Approx(row.magnitude * zbar).epsilon(1e-9));
  }

  // Missing predictions flag the row.
  PredictionMap partial = oracle_predictions(records);
  partial.erase("000002_scale_0.90");
  const auto flagged = depth_deviation_report(records, partial);
  const auto it = std::find_if(flagged.rows.begin(), flagged.rows.end(), [](auto& r) { return r.magnitude == 0.9; });
  REQUIRE(it != flagged.rows.end());
  CHECK(it->flagged);
  CHECK(it->matched == 0);

  PredictionMap wrong = oracle_predictions(records);
  wrong["999999_scale_1.00"] = wrong.begin()->second;
  CHECK_THROWS_AS(depth_deviation_report(records, wrong), MatchError);

  const std::string csv = deviation_csv(report);
  CHECK(csv.rfind("kind,mode,magnitude", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("suite persistence round trip") {
  const Sample base = suite_base("000003");
  SuiteConfig sc;
  sc.scales = {0.85, 1.15};
  sc.paste_depths = {25.0};
  sc.modes = {PasteMode::SizeOnly};
  const InstanceDB db = donor_db();
  const Suite suite = generate_suite({base}, sc, {}, &db);
  CHECK(std::any_of(suite.entries.begin(), suite.entries.end(),
                    [](auto& e) { return e.record.kind == ManipulationKind::Paste; }));
  const auto dir = std::filesystem::temp_directory_path() / "geoaug_test_suite";
  std::filesystem::remove_all(dir);
  save_suite(suite, dir);
  const auto records = load_suite_records(dir);
  REQUIRE(records.size() == suite.entries.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& a = suite.entries[i].record;
    const auto& b = records[i];
    CHECK(b.frame_id == a.frame_id);
    CHECK(b.base_frame_id == a.base_frame_id);
    CHECK(b.kind == a.kind);
    CHECK(b.mode == a.mode);
    CHECK(b.magnitude == a.magnitude);
    REQUIRE(b.expected.size() == a.expected.size());
    for (std::size_t j = 0; j < a.expected.size(); ++j) {
      CHECK(b.expected[j].expected_depth == a.expected[j].expected_depth);
      CHECK(b.expected[j].depth_size_cue == a.expected[j].depth_size_cue);
      CHECK(b.expected[j].depth_position_cue == a.expected[j].depth_position_cue);
      CHECK(b.expected[j].manipulated == a.expected[j].manipulated);
      CHECK(b.expected[j].object.location.x == a.expected[j].object.location.x);
      CHECK(b.expected[j].object.box2d.v1 == a.expected[j].object.box2d.v1);
    }
  }
  std::filesystem::remove_all(dir);
}
