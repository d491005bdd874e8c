#pragma once

#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "dpdisp/types.hpp"

namespace dpdisp {

enum class MapFormat {
  kPfm,    ///< little-endian portable float map, scale -1.0
  kPng16,  ///< 16-bit grayscale PNG + "<path>.json" quantization sidecar
};

/// .pfm -> kPfm, .png -> kPng16; throws IoError otherwise.
MapFormat map_format_from_path(const std::filesystem::path& path);

/// stored = round(value * scale + offset); invalid pixels store valid_sentinel.
struct Png16Quantization {
  double scale = 1000.0;
  double offset = 0.0;
  std::uint16_t valid_sentinel = 65535;

  friend bool operator==(const Png16Quantization&, const Png16Quantization&) = default;
};

// Raw float maps. PFM rows are stored bottom-to-top; NaN/inf entries read as invalid.
Image read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const Image& image);

// Plain PNG images, 8- or 16-bit gray/RGB(A), normalized to [0,1] on read.
Image read_png(const std::filesystem::path& path);
void write_png8(const std::filesystem::path& path, const Image& image);
void write_png8(const std::filesystem::path& path, const Mask& mask);

/// Dispatches on extension (.pfm or .png).
Image read_image(const std::filesystem::path& path);

Png16Quantization read_png16_sidecar(const std::filesystem::path& png_path);

struct MapData {
  GridD values;
  Mask valid;
};

MapData read_map_data(const std::filesystem::path& path, MapFormat format);
void write_map_data(const std::filesystem::path& path, MapFormat format, const GridD& values,
                    const Mask& valid, const Png16Quantization& quant = {});

template <typename Tag>
MaskedMap<Tag> read_map(const std::filesystem::path& path, MapFormat format) {
  auto data = read_map_data(path, format);
  MaskedMap<Tag> m;
  m.values = std::move(data.values);
  m.valid = std::move(data.valid);
  return m;
}

template <typename Tag>
MaskedMap<Tag> read_map(const std::filesystem::path& path) {
  return read_map<Tag>(path, map_format_from_path(path));
}

template <typename Tag>
void write_map(const MaskedMap<Tag>& map, const std::filesystem::path& path, MapFormat format,
               const Png16Quantization& quant = {}) {
  write_map_data(path, format, map.values, map.valid, quant);
}

template <typename Tag>
void write_map(const MaskedMap<Tag>& map, const std::filesystem::path& path) {
  write_map(map, path, map_format_from_path(path));
}

inline DepthMap read_depth(const std::filesystem::path& path) { return read_map<DepthTag>(path); }
inline DisparityMap read_disparity(const std::filesystem::path& path) {
  return read_map<DisparityTag>(path);
}

ConfidenceMap read_confidence(const std::filesystem::path& path);
void write_confidence(const ConfidenceMap& conf, const std::filesystem::path& path);

/// Camera JSON: {focal_length_m, f_number, focus_distance_m, alpha}.
CameraParams camera_from_json(const nlohmann::json& j);
nlohmann::json camera_to_json(const CameraParams& cam);
CameraParams read_camera(const std::filesystem::path& path);
void write_camera(const CameraParams& cam, const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace dpdisp
