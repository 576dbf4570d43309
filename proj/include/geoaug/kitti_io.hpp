#pragma once

// KITTI object-benchmark formats: calibration text, 15/16-field label text, and the PNG
// carriers for scene images, 16-bit depth maps and instance-id masks.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoaug/geometry.hpp"
#include "geoaug/image.hpp"

namespace geoaug {

using Matrix34 = std::array<std::array<double, 4>, 3>;

/// Parsed calibration file. Projection matrices ("P0".."P3") are numeric; every other block
/// (R0_rect, Tr_velo_to_cam, ...) is validated but kept as its original text.
class CalibFile {
 public:
  struct Entry {
    std::string key;
    bool is_projection = false;
    Matrix34 projection{};
    std::string raw;  // text after the colon, verbatim, for passthrough blocks
  };

  const std::vector<Entry>& entries() const { return entries_; }
  bool has(std::string_view key) const;
  const Matrix34& projection(std::string_view key) const;
  void set_projection(std::string_view key, const Matrix34& m);

  /// f = P2[0][0], c_u = P2[0][2], c_v = P2[1][2].
  CameraIntrinsics intrinsics() const;
  /// |P2[0][0] - P2[1][1]| / P2[0][0] > 1e-3.
  bool anisotropic_focal() const;

  /// Writes f, c_u, c_v back into P2; every other element is left as parsed.
  void set_intrinsics(const CameraIntrinsics& k);

  /// Left-multiplies every projection matrix by [[a,0,tu],[0,b,tv],[0,0,1]], the pixel-space
  /// map applied to the image (crop offsets, resizes).
  void apply_pixel_transform(double a, double b, double tu, double tv);

  friend CalibFile parse_calib(std::string_view text);

 private:
  std::vector<Entry> entries_;
};

CalibFile parse_calib(std::string_view text);
std::string write_calib(const CalibFile& calib);
/// Minimal calib holding only P2 built from intrinsics (used by generated data).
CalibFile make_calib(const CameraIntrinsics& k);

struct LabelRecord {
  Object3D object;
  std::optional<double> score;
};

std::vector<LabelRecord> parse_labels(std::string_view text);
/// Two fractional digits per real, one record per line, trailing newline.
std::string write_labels(const std::vector<LabelRecord>& records, bool include_score = false);
/// Same field order as a label line but with round-trip precision; used by metadata files.
std::string format_label_full_precision(const LabelRecord& record);

using Bytes = std::vector<std::uint8_t>;

ImageBuffer decode_image(const Bytes& png);
Bytes encode_image(const ImageBuffer& img);

/// 16-bit single-channel PNG, depth = raw / 256, raw 0 = missing.
DepthMap load_depth(const Bytes& png);
Bytes encode_depth(const DepthMap& depth);

/// 8- or 16-bit single-channel PNG of instance ids.
InstanceMask load_mask(const Bytes& png);
Bytes encode_mask(const InstanceMask& mask);

/// Reads width and height from a PNG header without decoding pixels.
std::pair<int, int> png_size(const Bytes& png);

}  // namespace geoaug
