#include "geoaug/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "geoaug/errors.hpp"

namespace geoaug {

namespace {

fs::path frame_path(const fs::path& root, const char* folder, const std::string& id, const char* ext) {
  return root / folder / (id + ext);
}

}  // namespace

std::vector<std::string> list_frames(const fs::path& root) {
  const fs::path labels = root / "label_2";
  if (!fs::is_directory(labels)) throw Error("no label_2 directory under " + root.string());
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(labels)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

GroundModel parse_ground(const std::string& text) {
  GroundModel g;
  bool have_height = false;
  bool have_horizon = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(line.substr(colon + 1), &used);
    } catch (const std::exception&) {
      throw ParseError(ParseError::Kind::MalformedNumber, "bad ground value: " + line);
    }
    if (key == "camera_height") {
      g.camera_height = value;
      have_height = true;
    } else if (key == "horizon_row") {
      g.horizon_row = value;
      have_horizon = true;
    }
  }
  if (!have_height) throw ParseError(ParseError::Kind::MissingKey, "ground file lacks camera_height");
  if (!have_horizon) throw ParseError(ParseError::Kind::MissingKey, "ground file lacks horizon_row");
  if (!(g.camera_height > 0)) throw ParseError(ParseError::Kind::NonFinite, "camera_height must be positive");
  return g;
}

std::string write_ground(const GroundModel& ground) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "camera_height: %.17g\nhorizon_row: %.17g\n", ground.camera_height,
                ground.horizon_row);
  return buf;
}

std::vector<LabelRecord> to_records(const std::vector<Object3D>& objects) {
  std::vector<LabelRecord> records;
  records.reserve(objects.size());
  for (const auto& o : objects) records.push_back({o, std::nullopt});
  return records;
}

Sample load_frame(const fs::path& root, const std::string& id, const AugmentConfig& cfg) {
  CalibFile calib = parse_calib(read_text(frame_path(root, "calib", id, ".txt")));
  ImageBuffer image = decode_image(read_bytes(frame_path(root, "image_2", id, ".png")));
  std::vector<Object3D> objects;
  for (auto& r : parse_labels(read_text(frame_path(root, "label_2", id, ".txt")))) objects.push_back(r.object);

  const fs::path ground_file = frame_path(root, "ground", id, ".txt");
  GroundModel ground;
  if (fs::exists(ground_file)) {
    ground = parse_ground(read_text(ground_file));
  } else {
    ground.camera_height = cfg.camera_height;
    ground.horizon_row = horizon_row(calib.intrinsics(), cfg.pitch);
  }
  Sample s = make_sample(id, std::move(image), std::move(calib), ground, std::move(objects));

  const fs::path depth_file = frame_path(root, "depth", id, ".png");
  if (fs::exists(depth_file)) {
    s.depth = load_depth(read_bytes(depth_file));
    if (s.depth->width() != s.image.width || s.depth->height() != s.image.height)
      throw Error("depth map size differs from image for frame " + id);
  }
  const fs::path mask_file = frame_path(root, "masks", id, ".png");
  if (fs::exists(mask_file)) {
    s.mask = load_mask(read_bytes(mask_file));
    if (s.mask->width != s.image.width || s.mask->height != s.image.height)
      throw Error("mask size differs from image for frame " + id);
  }
  return s;
}

void save_frame(const fs::path& root, const Sample& sample) {
  const std::string& id = sample.frame_id;
  write_bytes(frame_path(root, "image_2", id, ".png"), encode_image(sample.image));
  write_text(frame_path(root, "calib", id, ".txt"), write_calib(sample.calib));
  write_text(frame_path(root, "label_2", id, ".txt"), write_labels(to_records(sample.objects)));
  write_text(frame_path(root, "ground", id, ".txt"), write_ground(sample.ground));
  if (sample.depth) write_bytes(frame_path(root, "depth", id, ".png"), encode_depth(*sample.depth));
  if (sample.mask) write_bytes(frame_path(root, "masks", id, ".png"), encode_mask(*sample.mask));
}

}  // namespace geoaug
