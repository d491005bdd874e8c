#include "dpdisp/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

#include "dpdisp/error.hpp"

namespace dpdisp {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kMaxPixels = std::size_t{1} << 28;

std::string lower_extension(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

void check_dimensions(long long w, long long h, const fs::path& path) {
  if (w <= 0 || h <= 0 || w > std::numeric_limits<int>::max() || h > std::numeric_limits<int>::max() ||
      static_cast<unsigned long long>(w) * static_cast<unsigned long long>(h) > kMaxPixels) {
    throw IoError(path.string() + ": invalid or oversized dimensions " + std::to_string(w) + "x" +
                  std::to_string(h));
  }
}

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
}

// Reads the next whitespace-delimited PFM header token.
std::string next_token(std::istream& in, const fs::path& path) {
  std::string tok;
  if (!(in >> tok)) throw IoError(path.string() + ": truncated PFM header");
  return tok;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

[[noreturn]] void png_error_handler(png_structp, png_const_charp msg) { throw IoError(std::string("png: ") + msg); }
void png_warning_handler(png_structp, png_const_charp) {}

struct PngPixels {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;  // interleaved
};

PngPixels read_png_raw(const fs::path& path) {
  auto file = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw IoError(path.string() + ": not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const auto w = png_get_image_width(png, info);
  const auto h = png_get_image_height(png, info);
  check_dimensions(w, h, path);
  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);

  depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  const auto rowbytes = png_get_rowbytes(png, info);
  std::vector<unsigned char> buf(rowbytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buf.data() + y * rowbytes;
  png_read_image(png, rows.data());

  PngPixels px;
  px.width = static_cast<int>(w);
  px.height = static_cast<int>(h);
  px.channels = channels;
  px.bit_depth = depth;
  px.samples.resize(static_cast<std::size_t>(w) * h * channels);
  for (png_uint_32 y = 0; y < h; ++y) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * channels; ++i) {
      std::uint16_t v;
      if (depth == 16) {
        std::memcpy(&v, rows[y] + 2 * i, 2);
      } else {
        v = rows[y][i];
      }
      px.samples[y * static_cast<std::size_t>(w) * channels + i] = v;
    }
  }
  return px;
}

void write_png_raw(const fs::path& path, int width, int height, int channels, int bit_depth,
                   const std::vector<std::uint16_t>& samples) {
  auto file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  png_init_io(png, file.get());
  const int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);

  const std::size_t row_samples = static_cast<std::size_t>(width) * channels;
  std::vector<unsigned char> row(row_samples * (bit_depth == 16 ? 2 : 1));
  for (int y = 0; y < height; ++y) {
    for (std::size_t i = 0; i < row_samples; ++i) {
      const std::uint16_t v = samples[static_cast<std::size_t>(y) * row_samples + i];
      if (bit_depth == 16) {
        std::memcpy(row.data() + 2 * i, &v, 2);
      } else {
        row[i] = static_cast<unsigned char>(v);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
}

fs::path sidecar_path(const fs::path& png_path) {
  auto p = png_path;
  p += ".json";
  return p;
}

}  // namespace

MapFormat map_format_from_path(const fs::path& path) {
  const auto ext = lower_extension(path);
  if (ext == ".pfm") return MapFormat::kPfm;
  if (ext == ".png") return MapFormat::kPng16;
  throw IoError(path.string() + ": unsupported map extension (expected .pfm or .png)");
}

Image read_pfm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const auto magic = next_token(in, path);
  int channels = 0;
  if (magic == "Pf") {
    channels = 1;
  } else if (magic == "PF") {
    channels = 3;
  } else {
    throw IoError(path.string() + ": bad PFM magic '" + magic + "'");
  }
  long long w = 0;
  long long h = 0;
  double scale = 0.0;
  try {
    w = std::stoll(next_token(in, path));
    h = std::stoll(next_token(in, path));
    scale = std::stod(next_token(in, path));
  } catch (const std::logic_error&) {
    throw IoError(path.string() + ": malformed PFM header");
  }
  check_dimensions(w, h, path);
  if (scale == 0.0 || !std::isfinite(scale)) throw IoError(path.string() + ": invalid PFM scale");
  in.get();  // single whitespace byte ends the header

  const bool file_little = scale < 0.0;
  const bool swap = file_little != (std::endian::native == std::endian::little);
  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * channels;
  std::vector<std::uint32_t> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * 4));
  if (in.gcount() != static_cast<std::streamsize>(count * 4)) {
    throw IoError(path.string() + ": truncated PFM data");
  }

  Image img(static_cast<int>(w), static_cast<int>(h), channels);
  for (int row = 0; row < h; ++row) {
    const int y = static_cast<int>(h) - 1 - row;
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        std::uint32_t bits = raw[(static_cast<std::size_t>(row) * w + x) * channels + c];
        if (swap) bits = byteswap32(bits);
        img(x, y, c) = static_cast<double>(std::bit_cast<float>(bits));
      }
    }
  }
  return img;
}

void write_pfm(const fs::path& path, const Image& image) {
  const int channels = image.channels();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << (channels == 3 ? "PF" : "Pf") << '\n' << image.width() << ' ' << image.height() << '\n' << "-1.0\n";
  std::vector<std::uint32_t> raw(static_cast<std::size_t>(image.width()) * image.height() * channels);
  std::size_t k = 0;
  for (int y = image.height() - 1; y >= 0; --y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < channels; ++c) {
        std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(image(x, y, c)));
        if constexpr (std::endian::native != std::endian::little) bits = byteswap32(bits);
        raw[k++] = bits;
      }
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
  if (!out) throw IoError("write failed: " + path.string());
}

Image read_png(const fs::path& path) {
  const auto px = read_png_raw(path);
  const int out_channels = px.channels >= 3 ? 3 : 1;
  const double norm = px.bit_depth == 16 ? 65535.0 : 255.0;
  Image img(px.width, px.height, out_channels);
  for (int y = 0; y < px.height; ++y) {
    for (int x = 0; x < px.width; ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * px.width + x) * px.channels;
      for (int c = 0; c < out_channels; ++c) img(x, y, c) = px.samples[base + c] / norm;
    }
  }
  return img;
}

void write_png8(const fs::path& path, const Image& image) {
  const int channels = image.channels();
  std::vector<std::uint16_t> samples(static_cast<std::size_t>(image.width()) * image.height() * channels);
  std::size_t k = 0;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < channels; ++c) {
        const double v = std::isfinite(image(x, y, c)) ? std::clamp(image(x, y, c), 0.0, 1.0) : 0.0;
        samples[k++] = static_cast<std::uint16_t>(std::lround(v * 255.0));
      }
    }
  }
  write_png_raw(path, image.width(), image.height(), channels, 8, samples);
}

void write_png8(const fs::path& path, const Mask& mask) {
  std::vector<std::uint16_t> samples(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) samples[i] = mask[i] ? 255 : 0;
  write_png_raw(path, mask.width(), mask.height(), 1, 8, samples);
}

Image read_image(const fs::path& path) {
  const auto ext = lower_extension(path);
  if (ext == ".pfm") return read_pfm(path);
  if (ext == ".png") return read_png(path);
  throw IoError(path.string() + ": unsupported image extension");
}

Png16Quantization read_png16_sidecar(const fs::path& png_path) {
  const auto side = sidecar_path(png_path);
  Png16Quantization q;
  if (!fs::exists(side)) throw IoError(png_path.string() + ": missing quantization sidecar " + side.string());
  const auto j = read_json(side);
  try {
    q.scale = j.at("scale").get<double>();
    q.offset = j.value("offset", 0.0);
    q.valid_sentinel = j.value("valid_sentinel", std::uint16_t{65535});
  } catch (const json::exception& e) {
    throw IoError(side.string() + ": " + e.what());
  }
  if (!(q.scale != 0.0) || !std::isfinite(q.scale) || !std::isfinite(q.offset)) {
    throw IoError(side.string() + ": invalid scale/offset");
  }
  return q;
}

MapData read_map_data(const fs::path& path, MapFormat format) {
  MapData m;
  if (format == MapFormat::kPfm) {
    auto img = read_pfm(path);
    if (img.channels() != 1) throw IoError(path.string() + ": expected a single-channel PFM map");
    m.values = std::move(img.channel(0));
    m.valid = Mask(m.values.width(), m.values.height(), 0);
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      if (std::isfinite(m.values[i])) {
        m.valid[i] = 1;
      } else {
        m.values[i] = kInvalidValue;
      }
    }
    return m;
  }

  const auto q = read_png16_sidecar(path);
  const auto px = read_png_raw(path);
  if (px.channels != 1 || px.bit_depth != 16) throw IoError(path.string() + ": expected a 16-bit grayscale PNG");
  m.values = GridD(px.width, px.height, kInvalidValue);
  m.valid = Mask(px.width, px.height, 0);
  for (std::size_t i = 0; i < px.samples.size(); ++i) {
    const auto s = px.samples[i];
    if (s == q.valid_sentinel) continue;
    m.values[i] = (static_cast<double>(s) - q.offset) / q.scale;
    m.valid[i] = 1;
  }
  return m;
}

void write_map_data(const fs::path& path, MapFormat format, const GridD& values, const Mask& valid,
                    const Png16Quantization& quant) {
  if (!values.same_shape(valid)) throw IoError("map values and mask differ in shape");
  if (format == MapFormat::kPfm) {
    GridD out = values;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!valid[i]) out[i] = kInvalidValue;
    }
    write_pfm(path, Image(std::move(out)));
    return;
  }

  std::vector<std::uint16_t> samples(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!valid[i]) {
      samples[i] = quant.valid_sentinel;
      continue;
    }
    if (!std::isfinite(values[i])) throw IoError(path.string() + ": non-finite value in 16-bit export");
    const double s = std::round(values[i] * quant.scale + quant.offset);
    if (s < 0.0 || s > 65535.0 || s == quant.valid_sentinel) {
      throw IoError(path.string() + ": value " + std::to_string(values[i]) + " outside the 16-bit range");
    }
    samples[i] = static_cast<std::uint16_t>(s);
  }
  write_png_raw(path, values.width(), values.height(), 1, 16, samples);
  write_json(sidecar_path(path),
             json{{"scale", quant.scale}, {"offset", quant.offset}, {"valid_sentinel", quant.valid_sentinel}});
}

ConfidenceMap read_confidence(const fs::path& path) {
  auto data = read_map_data(path, map_format_from_path(path));
  for (std::size_t i = 0; i < data.values.size(); ++i) {
    if (!data.valid[i]) data.values[i] = 0.0;
  }
  return ConfidenceMap(std::move(data.values));
}

void write_confidence(const ConfidenceMap& conf, const fs::path& path) {
  write_map_data(path, map_format_from_path(path), conf.values, Mask(conf.width(), conf.height(), 1));
}

CameraParams camera_from_json(const json& j) {
  try {
    const double f = j.at("focal_length_m").get<double>();
    const double fnum = j.at("f_number").get<double>();
    const double zf = j.at("focus_distance_m").get<double>();
    const double alpha = j.value("alpha", 1.0);
    return CameraParams::from_f_number(f, fnum, zf, alpha);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("camera JSON: ") + e.what());
  }
}

json camera_to_json(const CameraParams& cam) {
  return json{{"focal_length_m", cam.focal_length},
              {"f_number", cam.f_number},
              {"focus_distance_m", cam.focus_distance},
              {"alpha", cam.alpha}};
}

CameraParams read_camera(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("camera file not found: " + path.string());
  return camera_from_json(read_json(path));
}

void write_camera(const CameraParams& cam, const fs::path& path) { write_json(path, camera_to_json(cam)); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace dpdisp
