#pragma once

#include <filesystem>
#include <string>

#include "geoaug/kitti_io.hpp"

namespace geoaug {

namespace fs = std::filesystem;

Bytes read_bytes(const fs::path& path);
std::string read_text(const fs::path& path);
/// Writes through a temporary sibling and renames, so readers never see partial files.
void write_bytes(const fs::path& path, const Bytes& bytes);
void write_text(const fs::path& path, const std::string& text);

}  // namespace geoaug
