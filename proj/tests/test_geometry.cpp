#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "geoaug/errors.hpp"
#include "geoaug/geometry.hpp"

using namespace geoaug;

namespace {

const CameraIntrinsics kK{700.0, 600.0, 180.0};

Object3D car(double x, double y, double z, double w, double h, double l, double ry = 0.0) {
  Object3D o;
  o.dims = {w, h, l};
  o.location = {x, y, z};
  o.rotation_y = ry;
  o.alpha = alpha_from_yaw(ry, o.location);
  return o;
}

// Homogeneous K [I|0] P, written out as a matrix product.
Pixel project_by_matrix(const Point3D& p, const CameraIntrinsics& k) {
  const double m[3][4] = {{k.f, 0, k.cu, 0}, {0, k.f, k.cv, 0}, {0, 0, 1, 0}};
  const double h[4] = {p.x, p.y, p.z, 1.0};
  double r[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) r[i] += m[i][j] * h[j];
  return {r[0] / r[2], r[1] / r[2]};
}

}  // namespace

TEST_CASE("project: principal ray and unit offset") {
  const Pixel a = project({0, 0, 10}, kK);
  CHECK(a.u == 600.0);
  CHECK(a.v == 180.0);
  const Pixel b = project({1, 0, 10}, kK);
  CHECK(b.u == doctest::Approx(670.0).epsilon(1e-12));
  CHECK(b.v == 180.0);
  CHECK_THROWS_AS(project({0, 0, -1}, kK), BehindCamera);
  CHECK_THROWS_AS(project({0, 0, 0}, kK), BehindCamera);
}

TEST_CASE("project agrees with the homogeneous matrix product") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> xy(-20, 20), z(1, 80), f(300, 1500), c(100, 900);
  for (int i = 0; i < 1000; ++i) {
    const CameraIntrinsics k{f(rng), c(rng), c(rng)};
    const Point3D p{xy(rng), xy(rng), z(rng)};
    const Pixel a = project(p, k);
    const Pixel b = project_by_matrix(p, k);
    CHECK(std::abs(a.u - b.u) <= 1e-9 * std::max(1.0, std::abs(b.u)));
    CHECK(std::abs(a.v - b.v) <= 1e-9 * std::max(1.0, std::abs(b.v)));
  }
}

TEST_CASE("backproject inverts project") {
  const Point3D p = backproject({600, 180}, 10, kK);
  CHECK(p.x == 0.0);
  CHECK(p.y == 0.0);
  CHECK(p.z == 10.0);
  CHECK_THROWS(backproject({600, 180}, 0, kK));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1242), v(0, 375), z(1, 80);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const Pixel px{u(rng), v(rng)};
    const Pixel back = project(backproject(px, z(rng), kK), kK);
    worst = std::max({worst, std::abs(back.u - px.u) / std::max(1.0, px.u), std::abs(back.v - px.v) / std::max(1.0, px.v)});
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("corners_3d follows the rotation-matrix expansion") {
  // L along local x, W along local z.
  const Object3D o = car(0, 1.65, 10, 2, 1.5, 4);
  const auto c = corners_3d(o);
  std::set<double> zs, xs, ys;
  for (const auto& p : c) {
    zs.insert(p.z);
    xs.insert(p.x);
    ys.insert(p.y);
  }
  CHECK(zs == std::set<double>{9.0, 11.0});
  CHECK(xs == std::set<double>{-2.0, 2.0});
  CHECK(ys == std::set<double>{1.65 - 1.5, 1.65});
  for (int i = 0; i < 4; ++i) CHECK(c[i].y == 1.65);
  for (int i = 4; i < 8; ++i) CHECK(c[i].y == doctest::Approx(0.15));

  // Quarter turn: the length now spans depth.
  const auto r = corners_3d(car(0, 1.65, 10, 2, 1.5, 4, kPi / 2));
  double zmin = 1e9, zmax = -1e9, xmin = 1e9, xmax = -1e9;
  for (const auto& p : r) {
    zmin = std::min(zmin, p.z);
    zmax = std::max(zmax, p.z);
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
  }
  CHECK(zmin == doctest::Approx(8.0));
  CHECK(zmax == doctest::Approx(12.0));
  CHECK(xmin == doctest::Approx(-1.0));
  CHECK(xmax == doctest::Approx(1.0));
}

TEST_CASE("corners_3d against an explicit R * local + t oracle") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(-kPi, kPi), d(0.5, 5), t(-10, 10), z(5, 60);
  for (int n = 0; n < 200; ++n) {
    const Object3D o = car(t(rng), t(rng), z(rng), d(rng), d(rng), d(rng), a(rng));
    const double c = std::cos(o.rotation_y), s = std::sin(o.rotation_y);
    const double R[3][3] = {{c, 0, s}, {0, 1, 0}, {-s, 0, c}};
    const double L = o.dims.l, H = o.dims.h, W = o.dims.w;
    const double local[3][8] = {{L / 2, L / 2, -L / 2, -L / 2, L / 2, L / 2, -L / 2, -L / 2},
                                {0, 0, 0, 0, -H, -H, -H, -H},
                                {W / 2, -W / 2, -W / 2, W / 2, W / 2, -W / 2, -W / 2, W / 2}};
    const auto got = corners_3d(o);
    for (int i = 0; i < 8; ++i) {
      double p[3];
      for (int r = 0; r < 3; ++r) p[r] = R[r][0] * local[0][i] + R[r][1] * local[1][i] + R[r][2] * local[2][i];
      CHECK(got[i].x == doctest::Approx(p[0] + o.location.x).epsilon(1e-12));
      CHECK(got[i].y == doctest::Approx(p[1] + o.location.y).epsilon(1e-12));
      CHECK(got[i].z == doctest::Approx(p[2] + o.location.z).epsilon(1e-12));
    }
  }
}

TEST_CASE("corners_3d equivariance and degenerate height") {
  const Object3D o = car(1, 1.5, 20, 1.8, 1.5, 4.2, 0.7);
  Object3D moved = o;
  moved.location = {4, 0.5, 27};
  const auto a = corners_3d(o);
  const auto b = corners_3d(moved);
  for (int i = 0; i < 8; ++i) {
    CHECK(b[i].x - a[i].x == doctest::Approx(3));
    CHECK(b[i].y - a[i].y == doctest::Approx(-1));
    CHECK(b[i].z - a[i].z == doctest::Approx(7));
  }
  // Yaw + pi maps the set onto itself.
  Object3D turned = o;
  turned.rotation_y += kPi;
  const auto t = corners_3d(turned);
  for (const auto& p : a) {
    const bool found = std::any_of(t.begin(), t.end(), [&](const Point3D& q) {
      return std::abs(p.x - q.x) < 1e-9 && std::abs(p.y - q.y) < 1e-9 && std::abs(p.z - q.z) < 1e-9;
    });
    CHECK(found);
  }
  Object3D flat = o;
  flat.dims.h = 0;
  const auto f = corners_3d(flat);
  for (int i = 0; i < 4; ++i) {
    CHECK(f[i].x == f[i + 4].x);
    CHECK(f[i].y == f[i + 4].y);
    CHECK(f[i].z == f[i + 4].z);
  }
}

TEST_CASE("project_box2d: degenerate proxy height is f H / Z") {
  const Object3D proxy = car(0, 1.65, 15, 0, 1.5, 0);
  const Box2D b = project_box2d(proxy, kK);
  CHECK(b.height() == doctest::Approx(70.0).epsilon(1e-12));
  Object3D far = proxy;
  far.location.z = 30;
  CHECK(project_box2d(far, kK).height() == doctest::Approx(35.0).epsilon(1e-12));

  const Object3D full = car(0, 1.65, 15, 2, 1.5, 4);
  const Box2D h = project_box2d(full, kK);
  CHECK(h.u1 < b.u1);
  CHECK(h.u2 > b.u2);
  CHECK(h.v1 < b.v1);
  CHECK(h.v2 > b.v2);

  CHECK_THROWS_AS(project_box2d(car(0, 1.65, 1.0, 2, 1.5, 4), kK), BehindCamera);
}

TEST_CASE("clip_box reports truncation") {
  const ClippedBox inside = clip_box({10, 10, 50, 30}, 100, 100);
  CHECK(inside.truncation == 0.0);
  CHECK(inside.box.u1 == 10);
  const ClippedBox half = clip_box({-41, 0, 39, 10}, 100, 100);
  CHECK(half.box.u1 == 0);
  CHECK(half.truncation == doctest::Approx(1.0 - 39.0 / 80.0));
}

TEST_CASE("depth cues and their inverses") {
  CHECK(depth_from_size(1, 1, 1) == 1.0);
  CHECK(depth_from_size(700, 1.5, 70) == doctest::Approx(15.0).epsilon(1e-15));
  CHECK_THROWS_AS(depth_from_size(700, 1.5, 0), DegenerateCue);

  const GroundModel g{1.65, 180};
  CHECK(depth_from_position(700, g, 180 + 77) == doctest::Approx(15.0).epsilon(1e-15));
  CHECK_THROWS_AS(depth_from_position(700, g, 180), AboveHorizon);
  CHECK_THROWS_AS(depth_from_position(700, g, 100), AboveHorizon);

  CHECK(apparent_height_at_depth(700, 1.5, 15) == doctest::Approx(70.0));
  CHECK_THROWS(apparent_height_at_depth(700, 1.5, 0));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> z(1, 80);
  double prev_v = 1e18;
  for (double zz = 1; zz < 1000; zz *= 1.5) {
    const double v = vertical_contact_at_depth(700, g, zz);
    CHECK(v > g.horizon_row);
    CHECK(v < prev_v);
    prev_v = v;
  }
  for (int i = 0; i < 1000; ++i) {
    const double zz = z(rng);
    CHECK(std::abs(depth_from_position(700, g, vertical_contact_at_depth(700, g, zz)) - zz) <= 1e-9 * zz);
    CHECK(apparent_height_at_depth(700, 1.5, zz) * zz == doctest::Approx(700 * 1.5).epsilon(1e-12));
  }
}

TEST_CASE("ground-contact projection with zero-pitch horizon recovers depth") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> x(-15, 15), z(1, 80);
  const GroundModel g{1.65, horizon_row(kK, 0.0)};
  for (int i = 0; i < 1000; ++i) {
    const Point3D p{x(rng), 1.65, z(rng)};
    const double v = project(p, kK).v;
    CHECK(std::abs(depth_from_position(kK.f, g, v) - p.z) <= 1e-9 * p.z);
  }
}

TEST_CASE("scale_transform") {
  const Point3D p{1.0, 2.0, 10.0};
  const Point3D same = scale_transform(p, 1.0, kK);
  CHECK(same.x == p.x);
  CHECK(same.y == p.y);
  CHECK(same.z == p.z);

  const CameraIntrinsics k{100, 50, 30};  // c_u/f = 0.5, c_v/f = 0.3
  const Point3D q = scale_transform({0, 0, 10}, 0.5, k);
  CHECK(q.x == doctest::Approx(2.5));
  CHECK(q.y == doctest::Approx(1.5));
  CHECK(q.z == doctest::Approx(5.0));
  CHECK(project(q, k).u == doctest::Approx(2 * project({0, 0, 10}, k).u));

  CHECK_THROWS_AS(scale_transform(p, 0.0, kK), std::invalid_argument);
  CHECK_THROWS_AS(scale_transform(p, -1.0, kK), std::invalid_argument);
}

TEST_CASE("translate_camera") {
  const Point3D p = translate_camera({1, 1, 10}, 5);
  CHECK(p.x == 1);
  CHECK(p.y == 1);
  CHECK(p.z == 15);
  const Point3D same = translate_camera({1, 1, 10}, 0);
  CHECK(same.z == 10);
  CHECK_THROWS_AS(translate_camera({0, 0, 1}, -1), ObjectTooClose);
  CHECK_THROWS_AS(translate_camera({0, 0, 1}, -0.5, 0.5), ObjectTooClose);
}

TEST_CASE("horizon_row") {
  CHECK(horizon_row(kK, 0.0) == 180.0);
  CHECK(horizon_row(kK, 0.05) > 180.0);
  CHECK(horizon_row(kK, -0.05) < 180.0);
  CHECK_THROWS(horizon_row(kK, kPi / 2));
}

TEST_CASE("angles") {
  CHECK(normalize_angle(3 * kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(0.5 + 4 * kPi) == doctest::Approx(0.5));
  const Point3D loc{10, 1.65, 10};
  CHECK(alpha_from_yaw(0.0, loc) == doctest::Approx(-kPi / 4));
}

TEST_CASE("relocation along the viewing ray keeps the ray angle") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> x(-20, 20), z(2, 70), s(0.1, 5);
  for (int i = 0; i < 1000; ++i) {
    const double X = x(rng), Z = z(rng), Zn = Z * s(rng);
    const double Xn = X * Zn / Z;
    CHECK(std::abs(std::atan2(Xn, Zn) - std::atan2(X, Z)) < 1e-12);
    CHECK(std::abs(project({Xn, 1.65, Zn}, kK).u - project({X, 1.65, Z}, kK).u) < 1e-9);
  }
}

TEST_CASE("iou of 2D boxes") {
  CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
  CHECK(iou({0, 0, 10, 10}, {20, 20, 30, 30}) == 0.0);
  CHECK(iou({0, 0, 10, 10}, {5, 0, 15, 10}) == doctest::Approx(50.0 / 150.0));
}
