#include "ccf/geodata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ccf/errors.hpp"
#include "ccf/png.hpp"

namespace ccf {
namespace {

using Json = nlohmann::ordered_json;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const Json& header_field(const Json& header, const char* key, const std::string& path) {
  auto it = header.find(key);
  if (it == header.end()) throw LoadError("scene header '" + path + "': missing field '" + key + "'");
  return *it;
}

std::size_t header_count(const Json& header, const char* key, const std::string& path) {
  const Json& v = header_field(header, key, path);
  if (!v.is_number_unsigned()) {
    throw LoadError("scene header '" + path + "': field '" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string header_string(const Json& header, const char* key, const std::string& path) {
  const Json& v = header_field(header, key, path);
  if (!v.is_string()) throw LoadError("scene header '" + path + "': field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(std::string_view text, std::size_t line, const char* column) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    throw ParseError("points CSV row " + std::to_string(line) + ": column '" + column + "' is not a number: '" +
                     std::string(text) + "'");
  }
  return v;
}

std::string quote_csv(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// line breaks; records end at LF or CRLF.
std::vector<CsvRecord> split_csv(const std::string& text) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(current.fields.size() == 1 && current.fields[0].empty())) records.push_back(std::move(current));
    current = CsvRecord{};
    current.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw ParseError("points CSV row " + std::to_string(line) + ": stray quote");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field += c;
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) throw ParseError("points CSV row " + std::to_string(current.line) + ": unterminated quote");
  if (field_started || !field.empty() || !current.fields.empty()) end_record();
  return records;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

void validate_scene(const Scene& scene) {
  if (scene.width == 0 || scene.height == 0 || scene.n_bands == 0) {
    throw InputError("scene: width, height and bands must all be >= 1");
  }
  if (scene.data.size() != scene.width * scene.height * scene.n_bands) {
    throw InputError("scene: data holds " + std::to_string(scene.data.size()) + " samples, expected " +
                     std::to_string(scene.width * scene.height * scene.n_bands));
  }
  if (scene.geotransform.pixel_width == 0.0 || scene.geotransform.pixel_height == 0.0) {
    throw InputError("scene: geotransform pixel size must be non-zero");
  }
}

std::string scene_header_json(const Scene& scene) {
  Json header;
  header["width"] = scene.width;
  header["height"] = scene.height;
  header["bands"] = scene.n_bands;
  header["dtype"] = "u16";
  header["order"] = "band_sequential";
  header["geotransform"] = scene.geotransform.as_array();
  header["nodata"] = scene.nodata;
  return header.dump(2) + "\n";
}

Scene load_scene(const std::string& header_path, const std::string& data_path) {
  Json header;
  try {
    header = Json::parse(read_text(header_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError("scene header '" + header_path + "': " + e.what());
  }
  if (!header.is_object()) throw LoadError("scene header '" + header_path + "': not a JSON object");

  Scene scene;
  scene.width = header_count(header, "width", header_path);
  scene.height = header_count(header, "height", header_path);
  scene.n_bands = header_count(header, "bands", header_path);
  const std::string dtype = header_string(header, "dtype", header_path);
  if (dtype != "u16") throw LoadError("scene header '" + header_path + "': unknown dtype '" + dtype + "'");
  const std::string order = header_string(header, "order", header_path);
  if (order != "band_sequential") {
    throw LoadError("scene header '" + header_path + "': unknown order '" + order + "'");
  }
  const Json& gt = header_field(header, "geotransform", header_path);
  if (!gt.is_array() || gt.size() != 6 || !std::all_of(gt.begin(), gt.end(), [](const Json& v) { return v.is_number(); })) {
    throw LoadError("scene header '" + header_path + "': geotransform must be 6 numbers");
  }
  scene.geotransform = {gt[0].get<double>(), gt[1].get<double>(), gt[2].get<double>(),
                        gt[3].get<double>(), gt[4].get<double>(), gt[5].get<double>()};
  const std::size_t nodata = header_count(header, "nodata", header_path);
  if (nodata > 0xFFFF) throw LoadError("scene header '" + header_path + "': nodata does not fit in u16");
  scene.nodata = static_cast<std::uint16_t>(nodata);
  if (scene.width == 0 || scene.height == 0 || scene.n_bands == 0) {
    throw LoadError("scene header '" + header_path + "': width, height and bands must be >= 1");
  }
  if (scene.geotransform.pixel_width == 0.0 || scene.geotransform.pixel_height == 0.0) {
    throw LoadError("scene header '" + header_path + "': geotransform pixel size must be non-zero");
  }

  const std::vector<std::uint8_t> raw = read_file_bytes(data_path);
  const std::size_t expected = scene.width * scene.height * scene.n_bands * 2;
  if (raw.size() != expected) {
    throw LoadError("scene data '" + data_path + "': expected " + std::to_string(expected) + " bytes, found " +
                    std::to_string(raw.size()));
  }
  scene.data.resize(expected / 2);
  for (std::size_t i = 0; i < scene.data.size(); ++i) {
    scene.data[i] = static_cast<std::uint16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
  }
  return scene;
}

void write_scene(const Scene& scene, const std::string& header_path, const std::string& data_path) {
  validate_scene(scene);
  std::vector<std::uint8_t> raw(scene.data.size() * 2);
  for (std::size_t i = 0; i < scene.data.size(); ++i) {
    raw[2 * i] = static_cast<std::uint8_t>(scene.data[i] & 0xFF);
    raw[2 * i + 1] = static_cast<std::uint8_t>(scene.data[i] >> 8);
  }
  const std::string header = scene_header_json(scene);
  write_file_bytes(header_path, {header.begin(), header.end()});
  write_file_bytes(data_path, raw);
}

std::optional<PixelCoord> geo_to_pixel(const Scene& scene, double lon, double lat) {
  const GeoTransform& g = scene.geotransform;
  const double det = g.pixel_width * g.pixel_height - g.row_rotation * g.col_rotation;
  if (det == 0.0 || !std::isfinite(det)) throw ConfigError("geotransform is singular");
  const double dx = lon - g.origin_x;
  const double dy = lat - g.origin_y;
  const double col = (g.pixel_height * dx - g.row_rotation * dy) / det;
  const double row = (-g.col_rotation * dx + g.pixel_width * dy) / det;
  if (!std::isfinite(col) || !std::isfinite(row)) return std::nullopt;
  const double c = std::floor(col);
  const double r = std::floor(row);
  if (c < 0.0 || r < 0.0 || c >= static_cast<double>(scene.width) || r >= static_cast<double>(scene.height)) {
    return std::nullopt;
  }
  return PixelCoord{static_cast<std::size_t>(c), static_cast<std::size_t>(r)};
}

std::pair<double, double> pixel_to_geo(const Scene& scene, std::size_t col, std::size_t row) {
  const GeoTransform& g = scene.geotransform;
  const double c = static_cast<double>(col) + 0.5;
  const double r = static_cast<double>(row) + 0.5;
  return {g.origin_x + c * g.pixel_width + r * g.row_rotation, g.origin_y + c * g.col_rotation + r * g.pixel_height};
}

PixelSpectrum pixel_spectrum(const Scene& scene, std::size_t col, std::size_t row) {
  if (col >= scene.width || row >= scene.height) {
    throw InputError("pixel_spectrum: pixel (" + std::to_string(col) + ", " + std::to_string(row) +
                     ") is outside the scene");
  }
  PixelSpectrum out;
  out.values.resize(scene.n_bands);
  for (std::size_t b = 0; b < scene.n_bands; ++b) {
    out.values[b] = scene.value(b, col, row);
    out.has_nodata = out.has_nodata || out.values[b] == scene.nodata;
  }
  return out;
}

std::vector<LabeledPoint> parse_points(const std::string& csv_text) {
  const std::vector<CsvRecord> records = split_csv(csv_text);
  if (records.empty()) throw ParseError("points CSV: missing header row");
  const std::vector<std::string> expected = {"source_id", "lon", "lat", "survey_class"};
  std::vector<std::string> header;
  for (const auto& f : records[0].fields) header.push_back(trim(f));
  if (header != expected) {
    throw ParseError("points CSV row 1: header must be 'source_id,lon,lat,survey_class'");
  }

  std::vector<LabeledPoint> points;
  points.reserve(records.size() - 1);
  for (std::size_t i = 1; i < records.size(); ++i) {
    const CsvRecord& rec = records[i];
    if (rec.fields.size() != 4) {
      throw ParseError("points CSV row " + std::to_string(rec.line) + ": expected 4 columns, found " +
                       std::to_string(rec.fields.size()));
    }
    LabeledPoint p;
    p.source_id = trim(rec.fields[0]);
    p.lon = parse_double(trim(rec.fields[1]), rec.line, "lon");
    p.lat = parse_double(trim(rec.fields[2]), rec.line, "lat");
    p.survey_class = rec.fields[3];
    if (!(p.lat >= -90.0 && p.lat <= 90.0)) {
      throw ParseError("points CSV row " + std::to_string(rec.line) + ": lat " + trim(rec.fields[2]) +
                       " outside [-90, 90]");
    }
    if (!(p.lon >= -180.0 && p.lon <= 180.0)) {
      throw ParseError("points CSV row " + std::to_string(rec.line) + ": lon " + trim(rec.fields[1]) +
                       " outside [-180, 180]");
    }
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<LabeledPoint> load_points(const std::string& csv_path) {
  try {
    return parse_points(read_text(csv_path));
  } catch (const ParseError& e) {
    throw ParseError(csv_path + ": " + e.what());
  }
}

void write_points(const std::vector<LabeledPoint>& points, const std::string& csv_path) {
  std::string out = "source_id,lon,lat,survey_class\n";
  for (const auto& p : points) {
    out += quote_csv(p.source_id) + "," + format_double(p.lon) + "," + format_double(p.lat) + "," +
           quote_csv(p.survey_class) + "\n";
  }
  write_file_bytes(csv_path, {out.begin(), out.end()});
}

GroundTruthMask decode_mask(const std::vector<std::uint8_t>& png_bytes) {
  const Image8 image = decode_png(png_bytes);
  if (image.channels != 1) throw LoadError("mask must be an 8-bit grayscale PNG");
  GroundTruthMask mask{image.width, image.height, {}};
  mask.values.reserve(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const std::uint8_t v = image.pixels[i];
    if (v != 0 && v != 128 && v != 255) {
      throw LoadError("mask pixel (" + std::to_string(i % image.width) + ", " + std::to_string(i / image.width) +
                      ") has value " + std::to_string(v) + "; allowed values are 0, 128, 255");
    }
    mask.values.push_back(static_cast<MaskValue>(v));
  }
  return mask;
}

GroundTruthMask load_mask(const std::string& path) {
  try {
    return decode_mask(read_file_bytes(path));
  } catch (const LoadError& e) {
    throw LoadError(path + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_mask(const GroundTruthMask& mask) {
  Image8 image{mask.width, mask.height, 1, {}};
  image.pixels.reserve(mask.values.size());
  for (MaskValue v : mask.values) image.pixels.push_back(static_cast<std::uint8_t>(v));
  return encode_png(image);
}

void write_mask(const GroundTruthMask& mask, const std::string& path) { write_file_bytes(path, encode_mask(mask)); }

}  // namespace ccf
