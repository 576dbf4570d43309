#include "geoaug/copy_paste.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <sstream>

#include "geoaug/errors.hpp"

namespace geoaug {

namespace {

constexpr const char* kDbMagic = "geoaug-instance-db 1";

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// "key: a b c" lines of a patch metadata record.
std::vector<double> numbers_after(const std::string& text, const std::string& key, std::size_t count) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + ":", 0) != 0) continue;
    std::istringstream fields(line.substr(key.size() + 1));
    std::vector<double> out;
    double v = 0;
    while (fields >> v) out.push_back(v);
    if (out.size() != count) throw Error("instance metadata: '" + key + "' needs " + std::to_string(count) + " values");
    return out;
  }
  throw Error("instance metadata: missing '" + key + "'");
}

std::string string_after(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  }
  throw Error("instance metadata: missing '" + key + "'");
}

}  // namespace

std::string to_string(PasteMode mode) {
  switch (mode) {
    case PasteMode::Consistent: return "consistent";
    case PasteMode::SizeOnly: return "size-only";
    case PasteMode::PosOnly: return "pos-only";
  }
  return "consistent";
}

PasteMode parse_paste_mode(const std::string& text) {
  if (text == "consistent") return PasteMode::Consistent;
  if (text == "size-only") return PasteMode::SizeOnly;
  if (text == "pos-only") return PasteMode::PosOnly;
  throw Error("unknown paste mode '" + text + "' (expected consistent, size-only or pos-only)");
}

std::string to_string(Rejection r) {
  switch (r) {
    case Rejection::None: return "admitted";
    case Rejection::Truncation: return "truncation";
    case Rejection::Occlusion: return "occlusion";
    case Rejection::Height: return "height";
    case Rejection::Horizon: return "horizon";
    case Rejection::Mask: return "mask";
  }
  return "admitted";
}

void AdmissionStats::count(Rejection r) {
  ++considered;
  switch (r) {
    case Rejection::None: ++admitted; break;
    case Rejection::Truncation: ++truncation; break;
    case Rejection::Occlusion: ++occlusion; break;
    case Rejection::Height: ++height; break;
    case Rejection::Horizon: ++horizon; break;
    case Rejection::Mask: ++mask; break;
  }
}

double implied_horizon(const Object3D& obj, const CameraIntrinsics& k, const GroundModel& ground) {
  return contact_pixel(obj, k).v - k.f * ground.camera_height / obj.location.z;
}

Rejection admission_check(const Object3D& obj, const CameraIntrinsics& k, const GroundModel& ground,
                          const AugmentConfig& cfg) {
  if (obj.truncated > cfg.db_max_truncation) return Rejection::Truncation;
  if (obj.occluded > cfg.db_max_occlusion) return Rejection::Occlusion;
  if (obj.box2d.height() < cfg.db_min_height) return Rejection::Height;
  if (!(obj.location.z > 0)) return Rejection::Horizon;
  if (std::abs(implied_horizon(obj, k, ground) - ground.horizon_row) > cfg.db_horizon_tol) return Rejection::Horizon;
  return Rejection::None;
}

std::optional<InstancePatch> extract_patch(const Sample& sample, std::size_t index) {
  if (!sample.mask || index >= sample.objects.size()) return std::nullopt;
  const Object3D& obj = sample.objects[index];
  const InstanceMask& ids = *sample.mask;
  const auto id = static_cast<std::uint16_t>(index + 1);

  const int x0 = std::clamp(static_cast<int>(std::floor(obj.box2d.u1)), 0, sample.image.width - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(obj.box2d.v1)), 0, sample.image.height - 1);
  const int x1 = std::clamp(static_cast<int>(std::ceil(obj.box2d.u2)), 0, sample.image.width - 1);
  const int y1 = std::clamp(static_cast<int>(std::ceil(obj.box2d.v2)), 0, sample.image.height - 1);
  if (x1 < x0 || y1 < y0) return std::nullopt;

  InstancePatch patch;
  patch.source_frame = sample.frame_id;
  patch.source = obj;
  patch.source_k = sample.k;
  patch.source_ground = sample.ground;
  patch.pixels = ImageBuffer(x1 - x0 + 1, y1 - y0 + 1);
  patch.mask = Mask(patch.pixels.width, patch.pixels.height);
  bool any = false;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      std::copy_n(sample.image.at(x, y), 3, patch.pixels.at(x - x0, y - y0));
      if (ids.contains(x, y) && ids.at(x, y) == id) {
        patch.mask.at(x - x0, y - y0) = 1;
        any = true;
      }
    }
  }
  if (!any) return std::nullopt;
  const Pixel c = contact_pixel(obj, sample.k);
  patch.contact = {c.u - x0, c.v - y0};
  if (patch.contact.u < 0 || patch.contact.v < 0 || patch.contact.u > patch.pixels.width - 1.0 ||
      patch.contact.v > patch.pixels.height - 1.0) {
    return std::nullopt;
  }
  return patch;
}

InstanceDB build_instance_db(const std::vector<Sample>& samples, const AugmentConfig& cfg) {
  InstanceDB db;
  for (const auto& sample : samples) {
    if (!sample.mask) continue;
    for (std::size_t i = 0; i < sample.objects.size(); ++i) {
      const Object3D& obj = sample.objects[i];
      if (obj.is_dont_care()) continue;
      Rejection r = admission_check(obj, sample.k, sample.ground, cfg);
      std::optional<InstancePatch> patch;
      if (r == Rejection::None) {
        patch = extract_patch(sample, i);
        if (!patch) r = Rejection::Mask;
      }
      db.stats.count(r);
      if (patch) {
        patch->id = sample.frame_id + "_" + std::to_string(i);
        db.patches.push_back(std::move(*patch));
      }
    }
  }
  return db;
}

void save_instance_db(const InstanceDB& db, const fs::path& dir) {
  fs::create_directories(dir);
  std::string manifest = std::string(kDbMagic) + "\ncount " + std::to_string(db.patches.size()) + "\n";
  for (const auto& p : db.patches) {
    manifest += p.id + "\n";
    write_bytes(dir / (p.id + ".png"), encode_image(p.pixels));
    InstanceMask ids(p.mask.width, p.mask.height);
    std::transform(p.mask.data.begin(), p.mask.data.end(), ids.data.begin(),
                   [](std::uint8_t m) { return static_cast<std::uint16_t>(m ? 1 : 0); });
    write_bytes(dir / (p.id + "_mask.png"), encode_mask(ids));
    std::string meta = "version: 1\n";
    meta += "source_frame: " + p.source_frame + "\n";
    meta += "label: " + format_label_full_precision({p.source, std::nullopt}) + "\n";
    meta += "intrinsics: " + fmt17(p.source_k.f) + " " + fmt17(p.source_k.cu) + " " + fmt17(p.source_k.cv) + "\n";
    meta += "ground: " + fmt17(p.source_ground.camera_height) + " " + fmt17(p.source_ground.horizon_row) + "\n";
    meta += "contact: " + fmt17(p.contact.u) + " " + fmt17(p.contact.v) + "\n";
    write_text(dir / (p.id + ".txt"), meta);
  }
  write_text(dir / "manifest.txt", manifest);

  const AdmissionStats& s = db.stats;
  std::string stats = "filter,count\n";
  stats += "considered," + std::to_string(s.considered) + "\n";
  stats += "admitted," + std::to_string(s.admitted) + "\n";
  stats += "truncation," + std::to_string(s.truncation) + "\n";
  stats += "occlusion," + std::to_string(s.occlusion) + "\n";
  stats += "height," + std::to_string(s.height) + "\n";
  stats += "horizon," + std::to_string(s.horizon) + "\n";
  stats += "mask," + std::to_string(s.mask) + "\n";
  write_text(dir / "stats.csv", stats);
}

InstanceDB load_instance_db(const fs::path& dir) {
  std::istringstream manifest(read_text(dir / "manifest.txt"));
  std::string line;
  if (!std::getline(manifest, line) || line != kDbMagic) {
    throw Error("not an instance database (bad manifest header): " + dir.string());
  }
  std::size_t count = 0;
  if (!std::getline(manifest, line) || std::sscanf(line.c_str(), "count %zu", &count) != 1) {
    throw Error("instance database manifest has no count line");
  }
  InstanceDB db;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    InstancePatch p;
    p.id = line;
    const std::string meta = read_text(dir / (p.id + ".txt"));
    if (string_after(meta, "version") != "1") throw Error("unsupported instance metadata version for " + p.id);
    p.source_frame = string_after(meta, "source_frame");
    const auto labels = parse_labels(string_after(meta, "label"));
    if (labels.size() != 1) throw Error("instance metadata label must be a single record: " + p.id);
    p.source = labels.front().object;
    const auto k = numbers_after(meta, "intrinsics", 3);
    p.source_k = {k[0], k[1], k[2]};
    const auto g = numbers_after(meta, "ground", 2);
    p.source_ground = {g[0], g[1]};
    const auto c = numbers_after(meta, "contact", 2);
    p.contact = {c[0], c[1]};
    p.pixels = decode_image(read_bytes(dir / (p.id + ".png")));
    const InstanceMask ids = load_mask(read_bytes(dir / (p.id + "_mask.png")));
    if (ids.width != p.pixels.width || ids.height != p.pixels.height) throw Error("mask size mismatch for " + p.id);
    p.mask = Mask(ids.width, ids.height);
    std::transform(ids.data.begin(), ids.data.end(), p.mask.data.begin(),
                   [](std::uint16_t v) { return static_cast<std::uint8_t>(v ? 1 : 0); });
    db.patches.push_back(std::move(p));
  }
  if (db.patches.size() != count) throw Error("instance database manifest count does not match its entries");
  return db;
}

PastePlan plan_paste(const InstancePatch& patch, const Sample& target, double depth, PasteMode mode,
                     const AugmentConfig& cfg) {
  if (!(depth > cfg.min_depth) || depth < cfg.paste_depth_min || depth > cfg.paste_depth_max) {
    throw PlacementError("paste depth " + std::to_string(depth) + " m is outside the valid range");
  }
  const Object3D& src = patch.source;
  const CameraIntrinsics& ks = patch.source_k;
  const CameraIntrinsics& kt = target.k;
  const double z = src.location.z;

  const double source_height_px = proxy_height(src, ks);
  const Pixel source_contact = contact_pixel(src, ks);
  const double ground_row = vertical_contact_at_depth(kt.f, target.ground, depth);

  PastePlan plan;
  plan.mode = mode;
  plan.depth = depth;
  plan.source_depth = z;

  // Same viewing ray as the source; the projected column follows from it.
  const double x_new = src.location.x * depth / z;
  const double u_new = kt.f * x_new / depth + kt.cu;
  const double size_scale = (kt.f / ks.f) * (z / depth);

  double contact_row = ground_row;
  switch (mode) {
    case PasteMode::Consistent:
      plan.scale = size_scale;
      break;
    case PasteMode::SizeOnly:
      plan.scale = size_scale;
      contact_row = source_contact.v;
      break;
    case PasteMode::PosOnly:
      plan.scale = kt.f / ks.f;
      break;
  }
  plan.anchor = {u_new, contact_row};

  Object3D obj = src;
  obj.location = {x_new, (contact_row - kt.cv) * depth / kt.f, depth};
  obj.occluded = 0;
  if (!refresh_box(obj, kt, target.image.width, target.image.height)) {
    throw PlacementError("pasted box reaches behind the camera");
  }
  if (mode == PasteMode::PosOnly) {
    // The pixels keep the source's apparent size, so the 2D box follows them, not the 3D label.
    const Box2D& b = src.box2d;
    const Box2D scaled{plan.anchor.u + plan.scale * (b.u1 - source_contact.u),
                       plan.anchor.v + plan.scale * (b.v1 - source_contact.v),
                       plan.anchor.u + plan.scale * (b.u2 - source_contact.u),
                       plan.anchor.v + plan.scale * (b.v2 - source_contact.v)};
    const ClippedBox clipped = clip_box(scaled, target.image.width, target.image.height);
    obj.box2d = clipped.box;
    obj.truncated = clipped.truncation;
  }
  plan.object = obj;

  if (plan.anchor.u < 0 || plan.anchor.v < 0 || plan.anchor.u > target.image.width - 1.0 ||
      plan.anchor.v > target.image.height - 1.0) {
    throw PlacementError("paste anchor falls off the target image");
  }

  plan.expected_depth_size = kt.f * src.dims.h / (plan.scale * source_height_px);
  plan.expected_depth_position =
      contact_row > target.ground.horizon_row ? depth_from_position(kt.f, target.ground, contact_row)
                                              : std::numeric_limits<double>::infinity();
  return plan;
}

bool consistency_check(const PastePlan& plan, const InstancePatch& patch, const Sample& target, double tol) {
  const Object3D& src = patch.source;
  const double source_offset = contact_pixel(src, patch.source_k).v - patch.source_ground.horizon_row;
  const double target_offset = plan.anchor.v - target.ground.horizon_row;
  if (!(source_offset > 0) || !(target_offset > 0)) return false;
  const double placed = target_offset * proxy_height(src, patch.source_k) / source_offset;
  const double expected = apparent_height_at_depth(target.k.f, plan.object.dims.h, plan.depth);
  return std::abs(placed - expected) / expected <= tol;
}

Sample apply_paste(const Sample& target, const std::vector<PastePlan>& plans, const std::vector<InstancePatch>& patches,
                   const AugmentConfig& cfg) {
  for (const auto& plan : plans) {
    if (plan.patch_index >= patches.size()) throw std::out_of_range("paste plan refers to a missing patch");
    for (const auto& obj : target.objects) {
      if (!obj.is_dont_care() && iou(obj.box2d, plan.object.box2d) > cfg.overlap_iou) {
        throw PlacementError("pasted box overlaps an existing object");
      }
    }
  }
  std::vector<const PastePlan*> order;
  for (const auto& p : plans) order.push_back(&p);
  std::stable_sort(order.begin(), order.end(), [](const PastePlan* a, const PastePlan* b) { return a->depth > b->depth; });

  Sample out = target;
  for (const PastePlan* plan : order) {
    const InstancePatch& patch = patches[plan->patch_index];
    const ScaledPatch sp = scale_patch(patch.pixels, patch.mask, patch.contact, plan->anchor, plan->scale);
    out.image = composite_patch(out.image, patch.pixels, patch.mask, patch.contact, plan->anchor, plan->scale);
    out.objects.push_back(plan->object);
    const auto id = static_cast<std::uint16_t>(out.objects.size());
    for (int y = 0; y < sp.mask.height; ++y) {
      for (int x = 0; x < sp.mask.width; ++x) {
        if (!sp.mask.at(x, y)) continue;
        const int dx = sp.x0 + x;
        const int dy = sp.y0 + y;
        if (!out.image.contains(dx, dy)) continue;
        if (out.depth) out.depth->set(dx, dy, plan->depth);
        if (out.mask) out.mask->at(dx, dy) = id;
      }
    }
  }
  return out;
}

PasteResult paste_instances(const Sample& target, const InstanceDB& db, PasteMode mode, Rng& rng,
                            const AugmentConfig& cfg) {
  if (db.patches.empty()) throw Error("instance database is empty");
  std::uniform_int_distribution<std::size_t> pick(0, db.patches.size() - 1);
  std::uniform_real_distribution<double> depth_dist(cfg.paste_depth_min, cfg.paste_depth_max);

  std::vector<PastePlan> accepted;
  for (int n = 0; n < cfg.instances_per_image; ++n) {
    for (int attempt = 0; attempt < cfg.max_paste_attempts; ++attempt) {
      const std::size_t index = pick(rng);
      const double depth = depth_dist(rng);
      if (!(depth > cfg.min_depth)) continue;
      PastePlan plan;
      try {
        plan = plan_paste(db.patches[index], target, depth, mode, cfg);
      } catch (const PlacementError&) {
        continue;
      }
      plan.patch_index = index;
      if (mode == PasteMode::Consistent && !consistency_check(plan, db.patches[index], target, cfg.tol)) continue;
      bool overlap = false;
      for (const auto& obj : target.objects)
        overlap = overlap || (!obj.is_dont_care() && iou(obj.box2d, plan.object.box2d) > cfg.overlap_iou);
      for (const auto& other : accepted) overlap = overlap || iou(other.object.box2d, plan.object.box2d) > cfg.overlap_iou;
      if (overlap) continue;
      accepted.push_back(plan);
      break;
    }
  }
  PasteResult result{apply_paste(target, accepted, db.patches, cfg), accepted};
  return result;
}

}  // namespace geoaug
