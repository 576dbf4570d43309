#include "geoaug/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "geoaug/errors.hpp"

namespace geoaug {

namespace {

std::optional<ClippedBox> projected_box(const Object3D& obj, const CameraIntrinsics& k, int w, int h) {
  try {
    return clip_box(project_box2d(obj, k), w, h);
  } catch (const BehindCamera&) {
    return std::nullopt;
  }
}

Box2D scale_box(const Box2D& b, double r) { return {b.u1 * r, b.v1 * r, b.u2 * r, b.v2 * r}; }

DepthMap resize_depth(const DepthMap& depth, double r, double value_scale) {
  const int w = std::max(1, static_cast<int>(std::lround(r * depth.width())));
  const int h = std::max(1, static_cast<int>(std::lround(r * depth.height())));
  DepthMap out(w, h);
  for (int v = 0; v < h; ++v) {
    const int sy = std::clamp(static_cast<int>(std::floor(v / r + 0.5)), 0, depth.height() - 1);
    for (int u = 0; u < w; ++u) {
      const int sx = std::clamp(static_cast<int>(std::floor(u / r + 0.5)), 0, depth.width() - 1);
      if (const auto z = depth.at(sx, sy)) out.set(u, v, *z * value_scale);
    }
  }
  return out;
}

InstanceMask resize_ids(const InstanceMask& mask, double r) {
  const int w = std::max(1, static_cast<int>(std::lround(r * mask.width)));
  const int h = std::max(1, static_cast<int>(std::lround(r * mask.height)));
  InstanceMask out(w, h);
  for (int v = 0; v < h; ++v) {
    const int sy = std::clamp(static_cast<int>(std::floor(v / r + 0.5)), 0, mask.height - 1);
    for (int u = 0; u < w; ++u) {
      const int sx = std::clamp(static_cast<int>(std::floor(u / r + 0.5)), 0, mask.width - 1);
      out.at(u, v) = mask.at(sx, sy);
    }
  }
  return out;
}

std::optional<double> median_depth(const DepthMap& depth, const Box2D& box) {
  std::vector<double> values;
  const int x0 = std::max(0, static_cast<int>(std::floor(box.u1)));
  const int x1 = std::min(depth.width() - 1, static_cast<int>(std::ceil(box.u2)));
  const int y0 = std::max(0, static_cast<int>(std::floor(box.v1)));
  const int y1 = std::min(depth.height() - 1, static_cast<int>(std::ceil(box.v2)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (const auto z = depth.at(x, y)) values.push_back(*z);
  if (values.empty()) return std::nullopt;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

}  // namespace

Sample make_sample(std::string frame_id, ImageBuffer image, CalibFile calib, GroundModel ground,
                   std::vector<Object3D> objects) {
  Sample s;
  s.frame_id = std::move(frame_id);
  s.image = std::move(image);
  s.k = calib.intrinsics();
  s.calib = std::move(calib);
  s.ground = ground;
  s.objects = std::move(objects);
  return s;
}

bool refresh_box(Object3D& obj, const CameraIntrinsics& k, int image_width, int image_height) {
  const auto clipped = projected_box(obj, k, image_width, image_height);
  if (!clipped) return false;
  obj.box2d = clipped->box;
  obj.truncated = clipped->truncation;
  return true;
}

CueResiduals cue_residuals(const Object3D& obj, const CameraIntrinsics& k, const GroundModel& ground) {
  CueResiduals r;
  const double z = obj.location.z;
  r.size = std::abs(depth_from_size(k.f, obj.dims.h, proxy_height(obj, k)) - z) / z;
  r.position = std::abs(vertical_contact_at_depth(k.f, ground, z) - contact_pixel(obj, k).v);
  return r;
}

Sample augment_scale(const Sample& sample, double s, const AugmentConfig& cfg) {
  if (!(s > 0)) throw std::invalid_argument("scale factor must be positive");
  s = std::clamp(s, cfg.scale_min, cfg.scale_max);
  const double r = 1.0 / s;

  Sample out = sample;
  out.image = resize(sample.image, r);
  out.ground.horizon_row = sample.ground.horizon_row * r;
  if (cfg.focal_scaling) {
    out.calib.apply_pixel_transform(r, r, 0.0, 0.0);
    out.k = {sample.k.f * r, sample.k.cu * r, sample.k.cv * r};
  }
  if (sample.depth) out.depth = resize_depth(*sample.depth, r, cfg.focal_scaling ? 1.0 : s);
  if (sample.mask) out.mask = resize_ids(*sample.mask, r);

  for (auto& obj : out.objects) {
    const Box2D scaled = scale_box(obj.box2d, r);
    if (obj.is_dont_care()) {
      obj.box2d = scaled;
      continue;
    }
    if (!cfg.focal_scaling) {
      obj.location = scale_transform(obj.location, s, sample.k);
      if (!(obj.location.z > cfg.min_depth)) throw ObjectTooClose(obj.location.z);
      // Same pixels, same appearance: the observation angle stays and the yaw follows the ray.
      obj.rotation_y = normalize_angle(obj.alpha + std::atan2(obj.location.x, obj.location.z));
    }
    const auto clipped = projected_box(obj, out.k, out.image.width, out.image.height);
    obj.box2d = clipped ? clipped->box : scaled;
  }
  return out;
}

double normalized_depth(const Object3D& obj, const CameraIntrinsics& k) { return obj.location.z / k.f; }

double denormalize(double value, const CameraIntrinsics& k) { return value * k.f; }

Sample augment_crop(const Sample& sample, const Region& region, const AugmentConfig& cfg) {
  if (!region.fits(sample.image.width, sample.image.height)) throw std::out_of_range("crop region outside the image");

  Sample out = sample;
  out.image = crop_then_pad(sample.image, region);
  out.k.cu = sample.k.cu - region.x;
  out.calib.apply_pixel_transform(1.0, 1.0, -static_cast<double>(region.x), 0.0);

  const auto row_kept = [&](int y) { return y >= region.y && y < region.y + region.h; };
  if (sample.depth) {
    DepthMap d(region.w, sample.depth->height());
    for (int y = 0; y < d.height(); ++y) {
      if (!row_kept(y)) continue;
      for (int x = 0; x < region.w; ++x) d.set_raw(x, y, sample.depth->raw(region.x + x, y));
    }
    out.depth = std::move(d);
  }
  if (sample.mask) {
    InstanceMask m(region.w, sample.mask->height);
    for (int y = 0; y < m.height; ++y) {
      if (!row_kept(y)) continue;
      for (int x = 0; x < region.w; ++x) m.at(x, y) = sample.mask->at(region.x + x, y);
    }
    out.mask = std::move(m);
  }

  // Rows stay where they are, so only the horizontal extent of a box is clipped. Visibility
  // (for dropping and truncation) also counts the zero-padded rows.
  const double u_max = region.w - 1.0;
  const double v_lo = region.y;
  const double v_hi = region.y + region.h - 1.0;
  out.objects.clear();
  for (const auto& src : sample.objects) {
    Object3D obj = src;
    const Box2D shifted{src.box2d.u1 - region.x, src.box2d.v1, src.box2d.u2 - region.x, src.box2d.v2};
    const Box2D hclip{std::clamp(shifted.u1, 0.0, u_max), shifted.v1, std::clamp(shifted.u2, 0.0, u_max), shifted.v2};
    const Box2D visible{hclip.u1, std::clamp(shifted.v1, v_lo, v_hi), hclip.u2, std::clamp(shifted.v2, v_lo, v_hi)};
    const double before = shifted.area();
    double ratio = 0.0;
    if (before > 0) {
      ratio = visible.area() / before;
    } else {
      const double cu = 0.5 * (shifted.u1 + shifted.u2);
      const double cv = 0.5 * (shifted.v1 + shifted.v2);
      ratio = (cu >= 0 && cu <= u_max && cv >= v_lo && cv <= v_hi) ? 1.0 : 0.0;
    }
    if (obj.is_dont_care()) {
      if (hclip.width() <= 0) continue;
    } else {
      if (ratio < cfg.drop_area_fraction || ratio <= 0.0) continue;
      obj.truncated = std::clamp(1.0 - (1.0 - src.truncated) * ratio, 0.0, 1.0);
    }
    obj.box2d = hclip;
    out.objects.push_back(std::move(obj));
  }
  return out;
}

Sample augment_move_camera(const Sample& sample, double d, const AugmentConfig& cfg) {
  if (!sample.depth) throw MissingDepthMap();
  WarpResult warp = forward_warp(sample.image, *sample.depth, sample.k, d, cfg.min_depth);

  Sample out = sample;
  out.image = std::move(warp.image);
  out.depth = std::move(warp.depth);
  out.mask.reset();
  out.objects.clear();

  const int w = sample.image.width;
  const int h = sample.image.height;
  std::size_t real_objects = 0;
  for (const auto& src : sample.objects) {
    Object3D obj = src;
    if (obj.is_dont_care()) {
      const auto z = median_depth(*sample.depth, src.box2d);
      if (!z || !(*z + d > cfg.min_depth)) continue;
      const double m = *z / (*z + d);
      const Box2D moved{sample.k.cu + (src.box2d.u1 - sample.k.cu) * m, sample.k.cv + (src.box2d.v1 - sample.k.cv) * m,
                        sample.k.cu + (src.box2d.u2 - sample.k.cu) * m, sample.k.cv + (src.box2d.v2 - sample.k.cv) * m};
      const ClippedBox c = clip_box(moved, w, h);
      if (c.truncation >= 1.0) continue;
      obj.box2d = c.box;
      out.objects.push_back(std::move(obj));
      continue;
    }
    ++real_objects;
    try {
      obj.location = translate_camera(src.location, d, cfg.min_depth);
    } catch (const ObjectTooClose&) {
      continue;
    }
    obj.alpha = alpha_from_yaw(obj.rotation_y, obj.location);
    const auto clipped = projected_box(obj, sample.k, w, h);
    if (!clipped || 1.0 - clipped->truncation < cfg.drop_area_fraction) continue;
    obj.box2d = clipped->box;
    obj.truncated = clipped->truncation;
    out.objects.push_back(std::move(obj));
  }
  const bool any_real = std::any_of(out.objects.begin(), out.objects.end(), [](const Object3D& o) { return !o.is_dont_care(); });
  if (real_objects > 0 && !any_real) throw Error("moving the camera by " + std::to_string(d) + " m dropped every object");
  return out;
}

Sample flip_horizontal(const Sample& sample) {
  Sample out = sample;
  const double last = sample.image.width - 1.0;
  out.image = flip_horizontal(sample.image);
  if (sample.depth) out.depth = flip_horizontal(*sample.depth);
  if (sample.mask) out.mask = flip_horizontal(*sample.mask);
  for (auto& obj : out.objects) {
    obj.box2d = {last - obj.box2d.u2, obj.box2d.v1, last - obj.box2d.u1, obj.box2d.v2};
    if (obj.is_dont_care()) continue;
    const Point3D& p = obj.location;
    obj.location.x = (last - 2.0 * sample.k.cu) * p.z / sample.k.f - p.x;
    obj.rotation_y = normalize_angle(kPi - obj.rotation_y);
    obj.alpha = alpha_from_yaw(obj.rotation_y, obj.location);
  }
  return out;
}

double sample_scale(Rng& rng, const AugmentConfig& cfg) {
  return std::uniform_real_distribution<double>(cfg.scale_min, cfg.scale_max)(rng);
}

double sample_camera_move(Rng& rng, const AugmentConfig& cfg) {
  return std::uniform_real_distribution<double>(cfg.cam_move_min, cfg.cam_move_max)(rng);
}

Region sample_crop_region(Rng& rng, int image_width, int image_height, const AugmentConfig& cfg) {
  Region r;
  r.w = std::min(cfg.crop_w, image_width);
  r.h = std::min(cfg.crop_h, image_height);
  r.x = std::uniform_int_distribution<int>(0, image_width - r.w)(rng);
  r.y = std::uniform_int_distribution<int>(0, image_height - r.h)(rng);
  return r;
}

}  // namespace geoaug
