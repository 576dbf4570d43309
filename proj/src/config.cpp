#include "geoaug/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "geoaug/errors.hpp"

namespace geoaug {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error("config: value for '" + std::string(key) + "' is not a number: " + std::string(v));
  }
  return out;
}

int to_int(std::string_view key, std::string_view v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw Error("config: value for '" + std::string(key) + "' must be an integer");
  return static_cast<int>(d);
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error("config: value for '" + std::string(key) + "' must be true or false");
}

using Setter = std::function<void(AugmentConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"scale_min", [](AugmentConfig& c, auto k, auto v) { c.scale_min = to_double(k, v); }},
      {"scale_max", [](AugmentConfig& c, auto k, auto v) { c.scale_max = to_double(k, v); }},
      {"focal_scaling", [](AugmentConfig& c, auto k, auto v) { c.focal_scaling = to_bool(k, v); }},
      {"crop_w", [](AugmentConfig& c, auto k, auto v) { c.crop_w = to_int(k, v); }},
      {"crop_h", [](AugmentConfig& c, auto k, auto v) { c.crop_h = to_int(k, v); }},
      {"drop_area_fraction", [](AugmentConfig& c, auto k, auto v) { c.drop_area_fraction = to_double(k, v); }},
      {"cam_move_min", [](AugmentConfig& c, auto k, auto v) { c.cam_move_min = to_double(k, v); }},
      {"cam_move_max", [](AugmentConfig& c, auto k, auto v) { c.cam_move_max = to_double(k, v); }},
      {"min_depth", [](AugmentConfig& c, auto k, auto v) { c.min_depth = to_double(k, v); }},
      {"camera_height", [](AugmentConfig& c, auto k, auto v) { c.camera_height = to_double(k, v); }},
      {"pitch", [](AugmentConfig& c, auto k, auto v) { c.pitch = to_double(k, v); }},
      {"paste_depth_min", [](AugmentConfig& c, auto k, auto v) { c.paste_depth_min = to_double(k, v); }},
      {"paste_depth_max", [](AugmentConfig& c, auto k, auto v) { c.paste_depth_max = to_double(k, v); }},
      {"instances_per_image", [](AugmentConfig& c, auto k, auto v) { c.instances_per_image = to_int(k, v); }},
      {"tol", [](AugmentConfig& c, auto k, auto v) { c.tol = to_double(k, v); }},
      {"overlap_iou", [](AugmentConfig& c, auto k, auto v) { c.overlap_iou = to_double(k, v); }},
      {"max_paste_attempts", [](AugmentConfig& c, auto k, auto v) { c.max_paste_attempts = to_int(k, v); }},
      {"db_max_truncation", [](AugmentConfig& c, auto k, auto v) { c.db_max_truncation = to_double(k, v); }},
      {"db_max_occlusion", [](AugmentConfig& c, auto k, auto v) { c.db_max_occlusion = to_int(k, v); }},
      {"db_min_height", [](AugmentConfig& c, auto k, auto v) { c.db_min_height = to_double(k, v); }},
      {"db_horizon_tol", [](AugmentConfig& c, auto k, auto v) { c.db_horizon_tol = to_double(k, v); }},
  };
  return table;
}

}  // namespace

AugmentConfig parse_config(std::string_view text, AugmentConfig cfg) {
  std::size_t start = 0;
  int line_no = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw Error("config: unknown key '" + std::string(key) + "'");
    it->second(cfg, key, value);
  }
  validate_config(cfg);
  return cfg;
}

std::string write_config(const AugmentConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "scale_min = " << c.scale_min << "\n"
     << "scale_max = " << c.scale_max << "\n"
     << "focal_scaling = " << (c.focal_scaling ? "true" : "false") << "\n"
     << "crop_w = " << c.crop_w << "\n"
     << "crop_h = " << c.crop_h << "\n"
     << "drop_area_fraction = " << c.drop_area_fraction << "\n"
     << "cam_move_min = " << c.cam_move_min << "\n"
     << "cam_move_max = " << c.cam_move_max << "\n"
     << "min_depth = " << c.min_depth << "\n"
     << "camera_height = " << c.camera_height << "\n"
     << "pitch = " << c.pitch << "\n"
     << "paste_depth_min = " << c.paste_depth_min << "\n"
     << "paste_depth_max = " << c.paste_depth_max << "\n"
     << "instances_per_image = " << c.instances_per_image << "\n"
     << "tol = " << c.tol << "\n"
     << "overlap_iou = " << c.overlap_iou << "\n"
     << "max_paste_attempts = " << c.max_paste_attempts << "\n"
     << "db_max_truncation = " << c.db_max_truncation << "\n"
     << "db_max_occlusion = " << c.db_max_occlusion << "\n"
     << "db_min_height = " << c.db_min_height << "\n"
     << "db_horizon_tol = " << c.db_horizon_tol << "\n";
  return os.str();
}

void validate_config(const AugmentConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("config: ") + what);
  };
  require(c.scale_min > 0 && c.scale_min <= c.scale_max, "need 0 < scale_min <= scale_max");
  require(c.crop_w > 0 && c.crop_h > 0, "crop size must be positive");
  require(c.drop_area_fraction >= 0 && c.drop_area_fraction <= 1, "drop_area_fraction must be in [0, 1]");
  require(c.cam_move_min <= c.cam_move_max, "need cam_move_min <= cam_move_max");
  require(c.min_depth > 0, "min_depth must be positive");
  require(c.camera_height > 0, "camera_height must be positive");
  require(std::abs(c.pitch) < 1.5707963267948966, "pitch must be within (-pi/2, pi/2)");
  require(c.paste_depth_min >= 0 && c.paste_depth_min < c.paste_depth_max, "need 0 <= paste_depth_min < paste_depth_max");
  require(c.paste_depth_max > c.min_depth, "paste_depth_max must exceed min_depth");
  require(c.instances_per_image >= 0, "instances_per_image must be non-negative");
  require(c.tol >= 0, "tol must be non-negative");
  require(c.overlap_iou >= 0 && c.overlap_iou <= 1, "overlap_iou must be in [0, 1]");
  require(c.max_paste_attempts > 0, "max_paste_attempts must be positive");
  require(c.db_min_height >= 0 && c.db_horizon_tol >= 0, "database thresholds must be non-negative");
}

}  // namespace geoaug
