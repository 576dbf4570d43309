#include "geoaug/kitti_io.hpp"

#include <png.h>

#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "geoaug/errors.hpp"

namespace geoaug {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool is_blank(std::string_view line) { return line.find_first_not_of(" \t") == std::string_view::npos; }

double parse_number(std::string_view field, std::string_view context) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw ParseError(ParseError::Kind::MalformedNumber,
                     "malformed number '" + std::string(field) + "' in " + std::string(context));
  }
  return value;
}

std::string format_fixed2(double v) {
  if (!std::isfinite(v)) throw ParseError(ParseError::Kind::NonFinite, "non-finite label field");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  if (std::strcmp(buf, "-0.00") == 0) return "0.00";
  return buf;
}

std::string format_full(double v) {
  if (!std::isfinite(v)) throw ParseError(ParseError::Kind::NonFinite, "non-finite label field");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename Fmt>
std::string format_record(const LabelRecord& r, bool include_score, Fmt fmt) {
  const Object3D& o = r.object;
  std::string line = o.class_name;
  auto add = [&](const std::string& s) {
    line += ' ';
    line += s;
  };
  add(fmt(o.truncated));
  add(std::to_string(o.occluded));
  for (double v : {o.alpha, o.box2d.u1, o.box2d.v1, o.box2d.u2, o.box2d.v2, o.dims.h, o.dims.w, o.dims.l,
                   o.location.x, o.location.y, o.location.z, o.rotation_y}) {
    add(fmt(v));
  }
  if (include_score) {
    if (!r.score) throw std::invalid_argument("record has no score but scores were requested");
    add(fmt(*r.score));
  }
  return line;
}

}  // namespace

// ---------------------------------------------------------------------------
// Calibration

bool CalibFile::has(std::string_view key) const {
  for (const auto& e : entries_)
    if (e.key == key) return true;
  return false;
}

const Matrix34& CalibFile::projection(std::string_view key) const {
  for (const auto& e : entries_)
    if (e.key == key && e.is_projection) return e.projection;
  throw ParseError(ParseError::Kind::MissingKey, "calib has no projection matrix " + std::string(key));
}

void CalibFile::set_projection(std::string_view key, const Matrix34& m) {
  for (auto& e : entries_) {
    if (e.key == key && e.is_projection) {
      e.projection = m;
      return;
    }
  }
  Entry e;
  e.key = std::string(key);
  e.is_projection = true;
  e.projection = m;
  entries_.push_back(std::move(e));
}

CameraIntrinsics CalibFile::intrinsics() const {
  const Matrix34& p = projection("P2");
  return {p[0][0], p[0][2], p[1][2]};
}

bool CalibFile::anisotropic_focal() const {
  const Matrix34& p = projection("P2");
  return std::abs(p[0][0] - p[1][1]) / p[0][0] > 1e-3;
}

void CalibFile::set_intrinsics(const CameraIntrinsics& k) {
  Matrix34 p = projection("P2");
  p[0][0] = k.f;
  p[0][2] = k.cu;
  p[1][2] = k.cv;
  set_projection("P2", p);
}

void CalibFile::apply_pixel_transform(double a, double b, double tu, double tv) {
  for (auto& e : entries_) {
    if (!e.is_projection) continue;
    Matrix34& p = e.projection;
    for (int c = 0; c < 4; ++c) {
      p[0][c] = a * p[0][c] + tu * p[2][c];
      p[1][c] = b * p[1][c] + tv * p[2][c];
    }
  }
}

CalibFile parse_calib(std::string_view text) {
  CalibFile calib;
  for (std::string_view line : split_lines(text)) {
    if (is_blank(line)) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError(ParseError::Kind::MalformedNumber, "calib line without 'KEY:' prefix: " + std::string(line));
    }
    CalibFile::Entry e;
    e.key = std::string(line.substr(0, colon));
    const std::string_view rest = line.substr(colon + 1);
    const auto fields = split_fields(rest);
    std::vector<double> values;
    values.reserve(fields.size());
    for (auto f : fields) values.push_back(parse_number(f, "calib key " + e.key));

    if (!e.key.empty() && e.key[0] == 'P') {
      if (values.size() != 12) {
        throw ParseError(ParseError::Kind::ElementCount,
                         e.key + " has " + std::to_string(values.size()) + " elements, expected 12");
      }
      e.is_projection = true;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) e.projection[r][c] = values[r * 4 + c];
    } else {
      std::size_t expected = 0;
      if (e.key == "R0_rect" || e.key == "R_rect") expected = 9;
      if (e.key.rfind("Tr_", 0) == 0) expected = 12;
      if (expected != 0 && values.size() != expected) {
        throw ParseError(ParseError::Kind::ElementCount, e.key + " has " + std::to_string(values.size()) +
                                                             " elements, expected " + std::to_string(expected));
      }
      e.raw = std::string(rest);
    }
    calib.entries_.push_back(std::move(e));
  }
  if (!calib.has("P2")) throw ParseError(ParseError::Kind::MissingKey, "MissingKey(\"P2\")");
  const Matrix34& p2 = calib.projection("P2");
  if (!(p2[0][0] > 0) || !(p2[1][1] > 0)) {
    throw ParseError(ParseError::Kind::MalformedNumber, "P2 focal entries must be positive");
  }
  return calib;
}

std::string write_calib(const CalibFile& calib) {
  std::string out;
  char buf[64];
  for (const auto& e : calib.entries()) {
    out += e.key;
    out += ':';
    if (e.is_projection) {
      for (const auto& row : e.projection) {
        for (double v : row) {
          std::snprintf(buf, sizeof(buf), " %.12e", v);
          out += buf;
        }
      }
    } else {
      out += e.raw;
    }
    out += '\n';
  }
  return out;
}

CalibFile make_calib(const CameraIntrinsics& k) {
  Matrix34 p{};
  p[0][0] = k.f;
  p[0][2] = k.cu;
  p[1][1] = k.f;
  p[1][2] = k.cv;
  p[2][2] = 1.0;
  std::string text = "P2:";
  char buf[64];
  for (const auto& row : p) {
    for (double v : row) {
      std::snprintf(buf, sizeof(buf), " %.17g", v);
      text += buf;
    }
  }
  return parse_calib(text);
}

// ---------------------------------------------------------------------------
// Labels

std::vector<LabelRecord> parse_labels(std::string_view text) {
  std::vector<LabelRecord> records;
  int line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto f = split_fields(line);
    const std::string ctx = "label line " + std::to_string(line_no);
    if (f.size() != 15 && f.size() != 16) {
      throw ParseError(ParseError::Kind::FieldCount,
                       "FieldCount: " + ctx + " has " + std::to_string(f.size()) + " fields, expected 15 or 16");
    }
    LabelRecord r;
    Object3D& o = r.object;
    o.class_name = std::string(f[0]);
    o.truncated = parse_number(f[1], ctx);
    const double occ = parse_number(f[2], ctx);
    if (occ != std::floor(occ)) {
      throw ParseError(ParseError::Kind::MalformedNumber, "occlusion must be an integer in " + ctx);
    }
    o.occluded = static_cast<int>(occ);
    o.alpha = parse_number(f[3], ctx);
    o.box2d = {parse_number(f[4], ctx), parse_number(f[5], ctx), parse_number(f[6], ctx), parse_number(f[7], ctx)};
    o.dims.h = parse_number(f[8], ctx);
    o.dims.w = parse_number(f[9], ctx);
    o.dims.l = parse_number(f[10], ctx);
    o.location = {parse_number(f[11], ctx), parse_number(f[12], ctx), parse_number(f[13], ctx)};
    o.rotation_y = parse_number(f[14], ctx);
    if (f.size() == 16) r.score = parse_number(f[15], ctx);
    if (o.box2d.u2 < o.box2d.u1 || o.box2d.v2 < o.box2d.v1) {
      throw ParseError(ParseError::Kind::InvalidBox, "inverted 2D box in " + ctx);
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::string write_labels(const std::vector<LabelRecord>& records, bool include_score) {
  std::string out;
  for (const auto& r : records) {
    out += format_record(r, include_score, format_fixed2);
    out += '\n';
  }
  return out;
}

std::string format_label_full_precision(const LabelRecord& record) {
  return format_record(record, record.score.has_value(), format_full);
}

// ---------------------------------------------------------------------------
// PNG codecs

namespace {

struct ReadCursor {
  const Bytes* bytes;
  std::size_t pos;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + n > cur->bytes->size()) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, cur->bytes->data() + cur->pos, n);
  cur->pos += n;
}

void write_to_memory(png_structp png, png_bytep in, png_size_t n) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + n);
}

void flush_noop(png_structp) {}

void on_png_error(png_structp png, png_const_charp msg) {
  auto* message = static_cast<std::string*>(png_get_error_ptr(png));
  if (message) *message = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

enum class Want { Rgb8, Gray };

struct Decoded {
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  int channels = 3;
  std::vector<std::uint8_t> rows;  // packed rows after transforms
};

Decoded decode_png(const Bytes& bytes, Want want) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw ParseError(ParseError::Kind::Decode, "not a PNG stream");
  }
  // Everything touched between setjmp and a possible longjmp lives in heap storage owned here.
  auto message = std::make_unique<std::string>();
  auto d = std::make_unique<Decoded>();
  auto row_ptrs = std::make_unique<std::vector<png_bytep>>();
  ReadCursor cursor{&bytes, 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, message.get(), on_png_error, on_png_warning);
  if (!png) throw ParseError(ParseError::Kind::Decode, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  volatile bool multi_channel = false;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(ParseError::Kind::Decode, "PNG decode failure: " + *message);
  }
  png_set_read_fn(png, &cursor, read_from_memory);
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (want == Want::Rgb8) {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (depth == 16) png_set_strip_16(png);
  } else {
    if (color_type != PNG_COLOR_TYPE_GRAY) {
      multi_channel = true;
    } else if (depth < 8) {
      png_set_expand_gray_1_2_4_to_8(png);
    }
  }
  if (!multi_channel) {
    png_read_update_info(png, info);
    d->width = static_cast<int>(png_get_image_width(png, info));
    d->height = static_cast<int>(png_get_image_height(png, info));
    d->bit_depth = png_get_bit_depth(png, info);
    d->channels = png_get_channels(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    d->rows.resize(rowbytes * d->height);
    row_ptrs->resize(d->height);
    for (int y = 0; y < d->height; ++y) (*row_ptrs)[y] = d->rows.data() + rowbytes * y;
    png_read_image(png, row_ptrs->data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (multi_channel) throw ParseError(ParseError::Kind::MultiChannel, "expected a single-channel image");
  return std::move(*d);
}

Bytes encode_png(int width, int height, int bit_depth, int color_type, const std::vector<std::uint8_t>& rows) {
  auto out = std::make_unique<Bytes>();
  auto message = std::make_unique<std::string>();
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, message.get(), on_png_error, on_png_warning);
  if (!png) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("PNG encode failure: " + *message);
  }
  png_set_write_fn(png, out.get(), write_to_memory, flush_noop);
  png_set_compression_level(png, 3);  // fast; files stay lossless
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t rowbytes = rows.size() / height;
  for (int y = 0; y < height; ++y) png_write_row(png, const_cast<png_bytep>(rows.data() + rowbytes * y));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return std::move(*out);
}

}  // namespace

ImageBuffer decode_image(const Bytes& png) {
  Decoded d = decode_png(png, Want::Rgb8);
  if (d.channels != 3 || d.bit_depth != 8) throw ParseError(ParseError::Kind::Decode, "unsupported PNG layout");
  ImageBuffer img(d.width, d.height);
  img.data = std::move(d.rows);
  return img;
}

Bytes encode_image(const ImageBuffer& img) { return encode_png(img.width, img.height, 8, PNG_COLOR_TYPE_RGB, img.data); }

DepthMap load_depth(const Bytes& png) {
  Decoded d = decode_png(png, Want::Gray);
  if (d.bit_depth != 16) throw ParseError(ParseError::Kind::Decode, "depth maps must be 16-bit");
  DepthMap depth(d.width, d.height);
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * d.width + x) * 2;
      depth.set_raw(x, y, static_cast<std::uint16_t>((d.rows[i] << 8) | d.rows[i + 1]));
    }
  }
  return depth;
}

Bytes encode_depth(const DepthMap& depth) {
  std::vector<std::uint8_t> rows(static_cast<std::size_t>(depth.width()) * depth.height() * 2);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * depth.width() + x) * 2;
      const std::uint16_t r = depth.raw(x, y);
      rows[i] = static_cast<std::uint8_t>(r >> 8);
      rows[i + 1] = static_cast<std::uint8_t>(r & 0xff);
    }
  }
  return encode_png(depth.width(), depth.height(), 16, PNG_COLOR_TYPE_GRAY, rows);
}

InstanceMask load_mask(const Bytes& png) {
  Decoded d = decode_png(png, Want::Gray);
  InstanceMask mask(d.width, d.height);
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * d.width + x;
      if (d.bit_depth == 16) {
        mask.at(x, y) = static_cast<std::uint16_t>((d.rows[idx * 2] << 8) | d.rows[idx * 2 + 1]);
      } else {
        mask.at(x, y) = d.rows[idx];
      }
    }
  }
  return mask;
}

Bytes encode_mask(const InstanceMask& mask) {
  std::uint16_t max_id = 0;
  for (auto v : mask.data) max_id = std::max(max_id, v);
  if (max_id <= 255) {
    std::vector<std::uint8_t> rows(mask.data.begin(), mask.data.end());
    return encode_png(mask.width, mask.height, 8, PNG_COLOR_TYPE_GRAY, rows);
  }
  std::vector<std::uint8_t> rows(mask.data.size() * 2);
  for (std::size_t i = 0; i < mask.data.size(); ++i) {
    rows[i * 2] = static_cast<std::uint8_t>(mask.data[i] >> 8);
    rows[i * 2 + 1] = static_cast<std::uint8_t>(mask.data[i] & 0xff);
  }
  return encode_png(mask.width, mask.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

std::pair<int, int> png_size(const Bytes& png) {
  // IHDR is always the first chunk: signature(8) length(4) type(4) width(4) height(4).
  if (png.size() < 24 || png_sig_cmp(png.data(), 0, 8) != 0 || std::memcmp(png.data() + 12, "IHDR", 4) != 0) {
    throw ParseError(ParseError::Kind::Decode, "not a PNG stream");
  }
  auto be32 = [&](std::size_t off) {
    return static_cast<int>((png[off] << 24) | (png[off + 1] << 16) | (png[off + 2] << 8) | png[off + 3]);
  };
  return {be32(16), be32(20)};
}

}  // namespace geoaug
