#include "geoaug/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geoaug {

ImageBuffer::ImageBuffer(int w, int h, std::uint8_t fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("image dimensions must be positive");
}

void DepthMap::set(int x, int y, double meters) {
  if (!(meters > 0) || !std::isfinite(meters)) {
    raw_[index(x, y)] = 0;
    return;
  }
  const double r = std::clamp(std::round(meters * 256.0), 1.0, 65535.0);
  raw_[index(x, y)] = static_cast<std::uint16_t>(r);
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(std::count_if(raw_.begin(), raw_.end(), [](std::uint16_t r) { return r != 0; }));
}

}  // namespace geoaug
