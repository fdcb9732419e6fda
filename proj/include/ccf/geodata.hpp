#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ccf {

/// GDAL-style affine transform:
///   x = origin_x + col * pixel_width + row * row_rotation
///   y = origin_y + col * col_rotation + row * pixel_height
struct GeoTransform {
  double origin_x = 0.0;
  double pixel_width = 1.0;
  double row_rotation = 0.0;
  double origin_y = 0.0;
  double col_rotation = 0.0;
  double pixel_height = -1.0;

  std::array<double, 6> as_array() const {
    return {origin_x, pixel_width, row_rotation, origin_y, col_rotation, pixel_height};
  }
};

/// Band-sequential raster of raw u16 reflectance counts (0..10000 scale).
struct Scene {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t n_bands = 0;
  GeoTransform geotransform;
  std::uint16_t nodata = 0;
  std::vector<std::uint16_t> data;

  std::uint16_t value(std::size_t band, std::size_t col, std::size_t row) const {
    return data[(band * height + row) * width + col];
  }
  std::uint16_t& value(std::size_t band, std::size_t col, std::size_t row) {
    return data[(band * height + row) * width + col];
  }
  std::size_t pixel_count() const { return width * height; }
};

struct PixelCoord {
  std::size_t col = 0;
  std::size_t row = 0;
  bool operator==(const PixelCoord&) const = default;
};

struct LabeledPoint {
  std::string source_id;
  double lon = 0.0;
  double lat = 0.0;
  std::string survey_class;
};

enum class MaskValue : std::uint8_t { kEnvironment = 0, kUnknown = 128, kInformal = 255 };

struct GroundTruthMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<MaskValue> values;

  MaskValue at(std::size_t col, std::size_t row) const { return values[row * width + col]; }
};

struct PixelSpectrum {
  std::vector<std::uint16_t> values;
  bool has_nodata = false;
};

/// Throws InputError when data length or geotransform are inconsistent.
void validate_scene(const Scene& scene);

/// Reads a JSON header and a little-endian band-sequential u16 file.
/// Throws LoadError naming the missing field or the expected vs actual
/// byte count.
Scene load_scene(const std::string& header_path, const std::string& data_path);
void write_scene(const Scene& scene, const std::string& header_path, const std::string& data_path);
std::string scene_header_json(const Scene& scene);

/// Inverse affine then floor. Empty when the pixel falls outside the
/// raster. Throws ConfigError on a singular transform.
std::optional<PixelCoord> geo_to_pixel(const Scene& scene, double lon, double lat);

/// Map coordinates of a pixel centre.
std::pair<double, double> pixel_to_geo(const Scene& scene, std::size_t col, std::size_t row);

PixelSpectrum pixel_spectrum(const Scene& scene, std::size_t col, std::size_t row);

/// CSV with header `source_id,lon,lat,survey_class`. Quoted fields and
/// CRLF line endings are accepted. Throws ParseError with the row number.
std::vector<LabeledPoint> load_points(const std::string& csv_path);
std::vector<LabeledPoint> parse_points(const std::string& csv_text);
void write_points(const std::vector<LabeledPoint>& points, const std::string& csv_path);

/// 8-bit gray PNG: 255 informal, 0 environment, 128 unknown.
GroundTruthMask load_mask(const std::string& path);
GroundTruthMask decode_mask(const std::vector<std::uint8_t>& png_bytes);
std::vector<std::uint8_t> encode_mask(const GroundTruthMask& mask);
void write_mask(const GroundTruthMask& mask, const std::string& path);

}  // namespace ccf
