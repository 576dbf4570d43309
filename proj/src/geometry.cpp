#include "geoaug/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "geoaug/errors.hpp"

namespace geoaug {

double iou(const Box2D& a, const Box2D& b) {
  const double iw = std::min(a.u2, b.u2) - std::max(a.u1, b.u1);
  const double ih = std::min(a.v2, b.v2) - std::max(a.v1, b.v1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

double normalize_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  // remainder() can return -pi for exact odd multiples; keep pi to make flips involutive.
  if (r <= -kPi) r = kPi;
  return r;
}

double alpha_from_yaw(double rotation_y, const Point3D& location) {
  return normalize_angle(rotation_y - std::atan2(location.x, location.z));
}

Pixel project(const Point3D& p, const CameraIntrinsics& k) {
  if (!(p.z > 0)) throw BehindCamera();
  return {k.f * p.x / p.z + k.cu, k.f * p.y / p.z + k.cv};
}

Point3D backproject(const Pixel& p, double z, const CameraIntrinsics& k) {
  if (!(z > 0)) throw BehindCamera();
  return {(p.u - k.cu) * z / k.f, (p.v - k.cv) * z / k.f, z};
}

std::array<Point3D, 8> corners_3d(const Object3D& obj) {
  const double l2 = obj.dims.l / 2.0;
  const double w2 = obj.dims.w / 2.0;
  const double h = obj.dims.h;
  const std::array<double, 8> xs{l2, l2, -l2, -l2, l2, l2, -l2, -l2};
  const std::array<double, 8> ys{0, 0, 0, 0, -h, -h, -h, -h};
  const std::array<double, 8> zs{w2, -w2, -w2, w2, w2, -w2, -w2, w2};

  const double c = std::cos(obj.rotation_y);
  const double s = std::sin(obj.rotation_y);
  std::array<Point3D, 8> out;
  for (std::size_t i = 0; i < 8; ++i) {
    out[i] = {c * xs[i] + s * zs[i] + obj.location.x, ys[i] + obj.location.y,
              -s * xs[i] + c * zs[i] + obj.location.z};
  }
  return out;
}

Box2D project_box2d(const Object3D& obj, const CameraIntrinsics& k) {
  Box2D box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& c : corners_3d(obj)) {
    const Pixel p = project(c, k);
    box.u1 = std::min(box.u1, p.u);
    box.v1 = std::min(box.v1, p.v);
    box.u2 = std::max(box.u2, p.u);
    box.v2 = std::max(box.v2, p.v);
  }
  return box;
}

ClippedBox clip_box(const Box2D& box, int image_width, int image_height) {
  ClippedBox out;
  out.box = {std::clamp(box.u1, 0.0, image_width - 1.0), std::clamp(box.v1, 0.0, image_height - 1.0),
             std::clamp(box.u2, 0.0, image_width - 1.0), std::clamp(box.v2, 0.0, image_height - 1.0)};
  const double full = box.area();
  if (full > 0) {
    out.truncation = std::clamp(1.0 - out.box.area() / full, 0.0, 1.0);
  } else {
    // Zero-area boxes: judge by whether the extent survived clipping.
    const bool same = out.box.u1 == box.u1 && out.box.u2 == box.u2 && out.box.v1 == box.v1 && out.box.v2 == box.v2;
    out.truncation = same ? 0.0 : 1.0;
  }
  return out;
}

Pixel contact_pixel(const Object3D& obj, const CameraIntrinsics& k) { return project(obj.location, k); }

double proxy_height(const Object3D& obj, const CameraIntrinsics& k) {
  const Point3D top{obj.location.x, obj.location.y - obj.dims.h, obj.location.z};
  return project(obj.location, k).v - project(top, k).v;
}

double depth_from_size(double f, double height_m, double height_px) {
  if (!(height_px > 0)) throw DegenerateCue("apparent height must be positive");
  if (!(height_m > 0)) throw DegenerateCue("object height must be positive");
  return f * height_m / height_px;
}

double depth_from_position(double f, const GroundModel& ground, double v) {
  if (!(v > ground.horizon_row)) throw AboveHorizon();
  return f * ground.camera_height / (v - ground.horizon_row);
}

double apparent_height_at_depth(double f, double height_m, double z) {
  if (!(z > 0)) throw BehindCamera();
  return f * height_m / z;
}

double vertical_contact_at_depth(double f, const GroundModel& ground, double z) {
  if (!(z > 0)) throw BehindCamera();
  return ground.horizon_row + f * ground.camera_height / z;
}

Point3D scale_transform(const Point3D& p, double s, const CameraIntrinsics& k) {
  if (!(s > 0)) throw std::invalid_argument("scale factor must be positive");
  return {p.x + (1.0 - s) * (k.cu / k.f) * p.z, p.y + (1.0 - s) * (k.cv / k.f) * p.z, s * p.z};
}

Point3D translate_camera(const Point3D& p, double d, double min_depth) {
  const double z = p.z + d;
  if (!(z > min_depth)) throw ObjectTooClose(z);
  return {p.x, p.y, z};
}

double horizon_row(const CameraIntrinsics& k, double pitch) {
  if (!(std::abs(pitch) < kPi / 2)) throw std::invalid_argument("pitch must be within (-pi/2, pi/2)");
  return k.cv + k.f * std::tan(pitch);
}

}  // namespace geoaug
