#include "geoaug/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geoaug/errors.hpp"

namespace geoaug {

namespace {

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

void ground_color(double x, double z, std::uint8_t* px) {
  const bool check = (static_cast<long>(std::floor(x)) + static_cast<long>(std::floor(z))) % 2 == 0;
  const double base = check ? 110.0 : 80.0;
  px[0] = to_byte(base + 20.0 * std::sin(z * 0.7));
  px[1] = to_byte(base + 10.0);
  px[2] = to_byte(base - 10.0 + 15.0 * std::cos(x * 0.9));
}

void wall_color(double x, double y, std::uint8_t* px) {
  px[0] = to_byte(150.0 + 40.0 * std::sin(x * 0.3));
  px[1] = to_byte(170.0 + 30.0 * std::cos(y * 0.8));
  px[2] = to_byte(200.0);
}

// Slab test in the box's local frame; returns the entry distance along `dir` or +inf.
double ray_box(const Object3D& obj, double dx, double dy, double dz, double* face) {
  const double c = std::cos(obj.rotation_y);
  const double s = std::sin(obj.rotation_y);
  // Local = R^T (p - t); the box spans x in [-L/2, L/2], y in [-H, 0], z in [-W/2, W/2].
  const double ox = -obj.location.x, oy = -obj.location.y, oz = -obj.location.z;
  const double lox = c * ox - s * oz, loy = oy, loz = s * ox + c * oz;
  const double ldx = c * dx - s * dz, ldy = dy, ldz = s * dx + c * dz;
  const double lo[3] = {-obj.dims.l / 2, -obj.dims.h, -obj.dims.w / 2};
  const double hi[3] = {obj.dims.l / 2, 0.0, obj.dims.w / 2};
  const double o[3] = {lox, loy, loz};
  const double d[3] = {ldx, ldy, ldz};
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  int axis = 0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (o[i] < lo[i] || o[i] > hi[i]) return std::numeric_limits<double>::infinity();
      continue;
    }
    double a = (lo[i] - o[i]) / d[i];
    double b = (hi[i] - o[i]) / d[i];
    if (a > b) std::swap(a, b);
    if (a > t0) {
      t0 = a;
      axis = i;
    }
    t1 = std::min(t1, b);
    if (t0 > t1) return std::numeric_limits<double>::infinity();
  }
  *face = axis;
  return t0;
}

}  // namespace

Sample render_scene(const std::string& frame_id, const SyntheticConfig& cfg, std::vector<Object3D> objects) {
  const CameraIntrinsics& k = cfg.k;
  const GroundModel ground{cfg.camera_height, horizon_row(k)};
  ImageBuffer image(cfg.width, cfg.height);
  DepthMap depth(cfg.width, cfg.height);
  InstanceMask mask(cfg.width, cfg.height);
  std::vector<double> zbuf(static_cast<std::size_t>(cfg.width) * cfg.height);
  std::vector<std::size_t> full(objects.size(), 0), seen(objects.size(), 0);

  for (int v = 0; v < cfg.height; ++v) {
    for (int u = 0; u < cfg.width; ++u) {
      const double dx = (u - k.cu) / k.f;
      const double dy = (v - k.cv) / k.f;
      double z = cfg.wall_depth;
      if (v > ground.horizon_row) z = std::min(z, k.f * cfg.camera_height / (v - ground.horizon_row));
      std::uint8_t* px = image.at(u, v);
      if (z < cfg.wall_depth) {
        ground_color(dx * z, z, px);
      } else {
        wall_color(dx * z, dy * z, px);
      }
      std::uint16_t id = 0;
      for (std::size_t i = 0; i < objects.size(); ++i) {
        double face = 0;
        const double t = ray_box(objects[i], dx, dy, 1.0, &face);
        if (!std::isfinite(t)) continue;
        ++full[i];
        if (t < z) {
          z = t;
          id = static_cast<std::uint16_t>(i + 1);
          const double shade = 0.7 + 0.15 * face;
          const double stripe = 0.85 + 0.15 * std::sin((dx * t + dy * t) * 6.0);
          px[0] = to_byte((60 + 45 * (i % 4)) * shade * stripe);
          px[1] = to_byte((200 - 35 * (i % 5)) * shade * stripe);
          px[2] = to_byte((90 + 50 * (i % 3)) * shade * stripe);
        }
      }
      zbuf[static_cast<std::size_t>(v) * cfg.width + u] = z;
      depth.set(u, v, z);
      mask.at(u, v) = id;
      if (id) ++seen[id - 1];
    }
  }

  for (std::size_t i = 0; i < objects.size(); ++i) {
    Object3D& o = objects[i];
    if (o.is_dont_care()) continue;
    refresh_box(o, k, cfg.width, cfg.height);
    o.alpha = alpha_from_yaw(o.rotation_y, o.location);
    const double visible = full[i] ? static_cast<double>(seen[i]) / full[i] : 0.0;
    o.occluded = visible > 0.9 ? 0 : visible > 0.5 ? 1 : 2;
  }
  Sample s = make_sample(frame_id, std::move(image), make_calib(k), ground, std::move(objects));
  s.depth = std::move(depth);
  s.mask = std::move(mask);
  return s;
}

Sample make_synthetic_frame(const std::string& frame_id, const SyntheticConfig& cfg, Rng& rng) {
  std::uniform_int_distribution<int> count(cfg.min_objects, cfg.max_objects);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = count(rng);
  std::vector<Object3D> objects;
  for (int attempt = 0; attempt < 200 && static_cast<int>(objects.size()) < n; ++attempt) {
    Object3D o;
    o.class_name = "Car";
    o.dims = {1.6 + 0.3 * unit(rng), 1.4 + 0.3 * unit(rng), 3.5 + 1.0 * unit(rng)};
    const double z = cfg.min_depth + (cfg.max_depth - cfg.min_depth) * unit(rng);
    // Keep the center column inside the image.
    const double u = 0.1 * cfg.width + 0.8 * cfg.width * unit(rng);
    o.location = {(u - cfg.k.cu) * z / cfg.k.f, cfg.camera_height, z};
    o.rotation_y = normalize_angle(-kPi + 2 * kPi * unit(rng));
    bool ok = true;
    try {
      const ClippedBox b = clip_box(project_box2d(o, cfg.k), cfg.width, cfg.height);
      ok = b.truncation < 0.3 && b.box.height() >= 20.0;
    } catch (const BehindCamera&) {
      ok = false;
    }
    for (const auto& other : objects) {
      const double ddx = other.location.x - o.location.x;
      const double ddz = other.location.z - o.location.z;
      ok = ok && std::hypot(ddx, ddz) > 6.0;
    }
    if (ok) objects.push_back(o);
  }
  // Label order far to near, as annotation tools usually emit.
  std::stable_sort(objects.begin(), objects.end(),
                   [](const Object3D& a, const Object3D& b) { return a.location.z > b.location.z; });
  return render_scene(frame_id, cfg, std::move(objects));
}

}  // namespace geoaug
