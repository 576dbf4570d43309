#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace geoaug {

/// 8-bit RGB, row-major, interleaved.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, std::uint8_t fill = 0);

  std::uint8_t* at(int x, int y) { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* at(int x, int y) const { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  bool operator==(const ImageBuffer&) const = default;
};

/// Single-channel grid, used for binary patch masks (0/1) and instance-id masks.
template <typename T>
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  bool operator==(const Grid&) const = default;
};

using Mask = Grid<std::uint8_t>;
/// Per-pixel instance id, 0 = background.
using InstanceMask = Grid<std::uint16_t>;

/// Metric depth in meters. Missing pixels are stored as raw 0 and never read back as a depth.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int w, int h) : width_(w), height_(h), raw_(static_cast<std::size_t>(w) * h, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }

  std::optional<double> at(int x, int y) const {
    const auto r = raw_[index(x, y)];
    if (r == 0) return std::nullopt;
    return r / 256.0;
  }
  /// Quantizes to 1/256 m; values that would round to 0 are clamped to the smallest positive step.
  void set(int x, int y, double meters);
  void set_missing(int x, int y) { raw_[index(x, y)] = 0; }

  std::uint16_t raw(int x, int y) const { return raw_[index(x, y)]; }
  void set_raw(int x, int y, std::uint16_t r) { raw_[index(x, y)] = r; }

  std::size_t valid_count() const;

  bool operator==(const DepthMap&) const = default;

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint16_t> raw_;
};

}  // namespace geoaug
