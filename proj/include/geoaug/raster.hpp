#pragma once

#include "geoaug/geometry.hpp"
#include "geoaug/image.hpp"

namespace geoaug {

struct Region {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool fits(int width, int height) const { return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= width && y + h <= height; }
};

/// Output is round(r * dims). Sampling is anchored at the pixel origin: output (u, v) reads
/// input (u / r, v / r), so a label at pixel p lands at r * p.
ImageBuffer resize(const ImageBuffer& img, double r);
/// Nearest-neighbour counterpart of resize() for masks.
Mask resize_nearest(const Mask& mask, double r);

/// Keeps columns [x, x+w) and rows [y, y+h) at their original row indices; every other row is
/// zero. Output is region.w wide and as tall as the input.
ImageBuffer crop_then_pad(const ImageBuffer& img, const Region& region);

/// Resizes `patch` by `scale` (bilinear colour, nearest mask) and writes the masked pixels so
/// that the patch's `reference` pixel lands on `at`. Throws if nothing lands inside `img`.
ImageBuffer composite_patch(const ImageBuffer& img, const ImageBuffer& patch, const Mask& mask, Pixel reference,
                            Pixel at, double scale);

/// Destination footprint of composite_patch: integer offset of the scaled patch's top-left
/// corner plus the scaled patch and mask.
struct ScaledPatch {
  int x0 = 0;
  int y0 = 0;
  ImageBuffer pixels;
  Mask mask;
};
ScaledPatch scale_patch(const ImageBuffer& patch, const Mask& mask, Pixel reference, Pixel at, double scale);

struct WarpResult {
  ImageBuffer image;
  DepthMap depth;  // new depth at directly written pixels, missing elsewhere
  double coverage = 0.0;
};

/// Renders the view after moving the camera by -d along Z (every point gets Z + d).
/// Z-buffer by new depth; points with Z + d <= min_depth are dropped; holes take the nearest
/// written pixel (Euclidean, ties to the smaller row then the smaller column).
WarpResult forward_warp(const ImageBuffer& img, const DepthMap& depth, const CameraIntrinsics& k, double d,
                        double min_depth = kDefaultMinDepth);

template <typename T>
Grid<T> flip_horizontal(const Grid<T>& g) {
  Grid<T> out(g.width, g.height);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) out.at(g.width - 1 - x, y) = g.at(x, y);
  return out;
}
ImageBuffer flip_horizontal(const ImageBuffer& img);
DepthMap flip_horizontal(const DepthMap& depth);

}  // namespace geoaug
