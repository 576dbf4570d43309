#pragma once

#include <array>
#include <string>

namespace geoaug {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDefaultMinDepth = 0.5;

/// Pinhole intrinsics with a single focal length. P2's fourth column is not part of this model.
struct CameraIntrinsics {
  double f = 1.0;
  double cu = 0.0;
  double cv = 0.0;
};

/// Camera frame: X right, Y down, Z forward. Meters.
struct Point3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

struct Box2D {
  double u1 = 0.0;
  double v1 = 0.0;
  double u2 = 0.0;
  double v2 = 0.0;

  double width() const { return u2 - u1; }
  double height() const { return v2 - v1; }
  double area() const { return width() > 0 && height() > 0 ? width() * height() : 0.0; }
};

double iou(const Box2D& a, const Box2D& b);

struct Dimensions {
  double w = 0.0;
  double h = 0.0;
  double l = 0.0;
};

/// One labeled object. `location` is the bottom-face center.
struct Object3D {
  std::string class_name = "Car";
  double truncated = 0.0;
  int occluded = 0;
  double alpha = 0.0;
  Box2D box2d;
  Dimensions dims;
  Point3D location;
  double rotation_y = 0.0;

  bool is_dont_care() const { return class_name == "DontCare"; }
};

/// Flat ground seen from a camera `camera_height` meters above it; `horizon_row` is v_h.
struct GroundModel {
  double camera_height = 1.65;
  double horizon_row = 0.0;
};

/// Wraps into [-pi, pi].
double normalize_angle(double a);

/// Observation angle for a yaw at a location: theta - atan2(X, Z), normalized.
double alpha_from_yaw(double rotation_y, const Point3D& location);

Pixel project(const Point3D& p, const CameraIntrinsics& k);
Point3D backproject(const Pixel& p, double z, const CameraIntrinsics& k);

/// Eight box corners: local (+-L/2, {0,-H}, +-W/2) rotated about Y by rotation_y and
/// translated to the bottom-center. Indices 0-3 are the bottom face, 4-7 the top face.
std::array<Point3D, 8> corners_3d(const Object3D& obj);

/// Axis-aligned hull of the projected corners. Throws BehindCamera if any corner has Z <= 0.
Box2D project_box2d(const Object3D& obj, const CameraIntrinsics& k);

struct ClippedBox {
  Box2D box;
  double truncation = 0.0;  // 1 - visible area / full area
};

ClippedBox clip_box(const Box2D& box, int image_width, int image_height);

/// Contact pixel of the object: projection of its bottom-center.
Pixel contact_pixel(const Object3D& obj, const CameraIntrinsics& k);

/// Apparent height of the zero-footprint proxy (bottom-center to top-center), f*H/Z.
double proxy_height(const Object3D& obj, const CameraIntrinsics& k);

// Pictorial depth cues and their inverses.
double depth_from_size(double f, double height_m, double height_px);
double depth_from_position(double f, const GroundModel& ground, double v);
double apparent_height_at_depth(double f, double height_m, double z);
double vertical_contact_at_depth(double f, const GroundModel& ground, double z);

/// Moves a point as if the image were resized by 1/s about the pixel origin with fixed intrinsics.
/// `s` is the depth scale: Z' = s Z.
Point3D scale_transform(const Point3D& p, double s, const CameraIntrinsics& k);

/// Moves the point by `d` along the optical axis. Throws ObjectTooClose if the new depth
/// does not exceed `min_depth`.
Point3D translate_camera(const Point3D& p, double d, double min_depth = kDefaultMinDepth);

/// Horizon row for a flat ground: v_h = c_v + f tan(pitch). Positive pitch puts the horizon below c_v.
double horizon_row(const CameraIntrinsics& k, double pitch = 0.0);

}  // namespace geoaug
