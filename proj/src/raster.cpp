#include "geoaug/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "geoaug/errors.hpp"

namespace geoaug {

namespace {

int scaled_dim(int n, double r) { return std::max(1, static_cast<int>(std::lround(r * n))); }

}  // namespace

ImageBuffer resize(const ImageBuffer& img, double r) {
  if (!(r > 0)) throw std::invalid_argument("resize factor must be positive");
  ImageBuffer out(scaled_dim(img.width, r), scaled_dim(img.height, r));
  for (int v = 0; v < out.height; ++v) {
    const double sy = std::clamp(v / r, 0.0, img.height - 1.0);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fy = sy - y0;
    for (int u = 0; u < out.width; ++u) {
      const double sx = std::clamp(u / r, 0.0, img.width - 1.0);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double fx = sx - x0;
      const std::uint8_t* p00 = img.at(x0, y0);
      const std::uint8_t* p10 = img.at(x1, y0);
      const std::uint8_t* p01 = img.at(x0, y1);
      const std::uint8_t* p11 = img.at(x1, y1);
      std::uint8_t* dst = out.at(u, v);
      for (int c = 0; c < 3; ++c) {
        const double top = p00[c] + fx * (p10[c] - p00[c]);
        const double bottom = p01[c] + fx * (p11[c] - p01[c]);
        dst[c] = static_cast<std::uint8_t>(std::lround(std::clamp(top + fy * (bottom - top), 0.0, 255.0)));
      }
    }
  }
  return out;
}

Mask resize_nearest(const Mask& mask, double r) {
  if (!(r > 0)) throw std::invalid_argument("resize factor must be positive");
  Mask out(scaled_dim(mask.width, r), scaled_dim(mask.height, r));
  for (int v = 0; v < out.height; ++v) {
    const int sy = std::clamp(static_cast<int>(std::floor(v / r + 0.5)), 0, mask.height - 1);
    for (int u = 0; u < out.width; ++u) {
      const int sx = std::clamp(static_cast<int>(std::floor(u / r + 0.5)), 0, mask.width - 1);
      out.at(u, v) = mask.at(sx, sy);
    }
  }
  return out;
}

ImageBuffer crop_then_pad(const ImageBuffer& img, const Region& region) {
  if (!region.fits(img.width, img.height)) throw std::out_of_range("crop region outside the image");
  ImageBuffer out(region.w, img.height, 0);
  for (int v = region.y; v < region.y + region.h; ++v) {
    std::copy_n(img.at(region.x, v), static_cast<std::size_t>(region.w) * 3, out.at(0, v));
  }
  return out;
}

ScaledPatch scale_patch(const ImageBuffer& patch, const Mask& mask, Pixel reference, Pixel at, double scale) {
  if (!(scale > 0)) throw std::invalid_argument("patch scale must be positive");
  if (patch.width != mask.width || patch.height != mask.height) {
    throw std::invalid_argument("patch and mask dimensions differ");
  }
  ScaledPatch out;
  out.pixels = resize(patch, scale);
  out.mask = resize_nearest(mask, scale);
  out.x0 = static_cast<int>(std::lround(at.u - reference.u * scale));
  out.y0 = static_cast<int>(std::lround(at.v - reference.v * scale));
  return out;
}

ImageBuffer composite_patch(const ImageBuffer& img, const ImageBuffer& patch, const Mask& mask, Pixel reference,
                            Pixel at, double scale) {
  const bool empty = std::none_of(mask.data.begin(), mask.data.end(), [](std::uint8_t m) { return m != 0; });
  if (empty) return img;
  const ScaledPatch sp = scale_patch(patch, mask, reference, at, scale);
  ImageBuffer out = img;
  std::size_t written = 0;
  for (int y = 0; y < sp.mask.height; ++y) {
    for (int x = 0; x < sp.mask.width; ++x) {
      if (!sp.mask.at(x, y)) continue;
      const int dx = sp.x0 + x;
      const int dy = sp.y0 + y;
      if (!out.contains(dx, dy)) continue;
      std::copy_n(sp.pixels.at(x, y), 3, out.at(dx, dy));
      ++written;
    }
  }
  if (written == 0) throw Error("patch placement is fully off-image");
  return out;
}

WarpResult forward_warp(const ImageBuffer& img, const DepthMap& depth, const CameraIntrinsics& k, double d,
                        double min_depth) {
  if (depth.width() != img.width || depth.height() != img.height) {
    throw std::invalid_argument("depth map and image dimensions differ");
  }
  if (depth.valid_count() == 0) throw MissingDepthMap();

  const int w = img.width;
  const int h = img.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> zbuf(n, std::numeric_limits<double>::infinity());
  std::vector<int> source(n, -1);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto z = depth.at(x, y);
      if (!z) continue;
      const double z_new = *z + d;
      if (!(z_new > min_depth)) continue;
      const Point3D p = backproject({static_cast<double>(x), static_cast<double>(y)}, *z, k);
      const double u = k.f * p.x / z_new + k.cu;
      const double v = k.f * p.y / z_new + k.cv;
      const long tx = std::lround(u);
      const long ty = std::lround(v);
      if (tx < 0 || ty < 0 || tx >= w || ty >= h) continue;
      const std::size_t t = static_cast<std::size_t>(ty) * w + tx;
      if (z_new < zbuf[t]) {
        zbuf[t] = z_new;
        source[t] = y * w + x;
      }
    }
  }

  WarpResult result;
  result.image = ImageBuffer(w, h);
  result.depth = DepthMap(w, h);
  std::size_t written = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (source[t] < 0) continue;
    ++written;
    const int tx = static_cast<int>(t % w);
    const int ty = static_cast<int>(t / w);
    std::copy_n(img.at(source[t] % w, source[t] / w), 3, result.image.at(tx, ty));
    result.depth.set(tx, ty, zbuf[t]);
  }
  result.coverage = static_cast<double>(written) / static_cast<double>(n);
  if (written == 0 || written == n) return result;

  // Nearest written row per column (ties to the upper row), then a widening column search
  // per hole comparing (squared distance, row, column).
  std::vector<int> nearest_row(n, -1);
  std::vector<int> up(h), down(h);
  for (int x = 0; x < w; ++x) {
    int last = -1;
    for (int y = 0; y < h; ++y) {
      if (source[static_cast<std::size_t>(y) * w + x] >= 0) last = y;
      up[y] = last;
    }
    last = -1;
    for (int y = h - 1; y >= 0; --y) {
      if (source[static_cast<std::size_t>(y) * w + x] >= 0) last = y;
      down[y] = last;
    }
    for (int y = 0; y < h; ++y) {
      int best = up[y];
      if (down[y] >= 0 && (best < 0 || down[y] - y < y - best)) best = down[y];
      nearest_row[static_cast<std::size_t>(y) * w + x] = best;
    }
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t t = static_cast<std::size_t>(y) * w + x;
      if (source[t] >= 0) continue;
      long best_d2 = std::numeric_limits<long>::max();
      int best_row = 0;
      int best_col = 0;
      auto consider = [&](int cx) {
        const int row = nearest_row[static_cast<std::size_t>(y) * w + cx];
        if (row < 0) return;
        const long dx = cx - x;
        const long dy = row - y;
        const long d2 = dx * dx + dy * dy;
        if (d2 < best_d2 || (d2 == best_d2 && (row < best_row || (row == best_row && cx < best_col)))) {
          best_d2 = d2;
          best_row = row;
          best_col = cx;
        }
      };
      for (long off = 0; off * off <= best_d2 && (x - off >= 0 || x + off < w); ++off) {
        if (x - off >= 0) consider(static_cast<int>(x - off));
        if (off != 0 && x + off < w) consider(static_cast<int>(x + off));
      }
      std::copy_n(result.image.at(best_col, best_row), 3, result.image.at(x, y));
    }
  }
  return result;
}

ImageBuffer flip_horizontal(const ImageBuffer& img) {
  ImageBuffer out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) std::copy_n(img.at(x, y), 3, out.at(img.width - 1 - x, y));
  return out;
}

DepthMap flip_horizontal(const DepthMap& depth) {
  DepthMap out(depth.width(), depth.height());
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x) out.set_raw(depth.width() - 1 - x, y, depth.raw(x, y));
  return out;
}

}  // namespace geoaug
