#include "ccf/evalmap.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ccf/errors.hpp"
#include "ccf/png.hpp"

namespace ccf {
namespace {

constexpr std::uint8_t kInvalidCode = 255;
constexpr const char* kGridMagic = "CGRID";

void check_map(const ClassMap& map) {
  const std::size_t n = map.width * map.height;
  if (map.width == 0 || map.height == 0 || map.classes.size() != n || map.valid.size() != n) {
    throw InputError("class map: buffers do not match " + std::to_string(map.width) + "x" +
                     std::to_string(map.height));
  }
  for (std::uint8_t c : map.classes) {
    if (c >= kMaterialCount) throw InputError("class map: class code " + std::to_string(c) + " out of range");
  }
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ClassMap classify_scene(const Forest& forest, const Scene& scene, unsigned n_threads) {
  validate_scene(scene);
  if (forest.n_features != scene.n_bands) {
    throw InputError("classify_scene: model expects " + std::to_string(forest.n_features) +
                     " bands but the scene has " + std::to_string(scene.n_bands));
  }
  ClassMap map{scene.width, scene.height, std::vector<std::uint8_t>(scene.pixel_count(), 0),
               std::vector<std::uint8_t>(scene.pixel_count(), 0)};

  auto classify_rows = [&](std::size_t row_begin, std::size_t row_end) {
    std::vector<double> features(scene.n_bands);
    for (std::size_t row = row_begin; row < row_end; ++row) {
      for (std::size_t col = 0; col < scene.width; ++col) {
        bool nodata = false;
        for (std::size_t b = 0; b < scene.n_bands; ++b) {
          const std::uint16_t raw = scene.value(b, col, row);
          nodata = nodata || raw == scene.nodata;
          features[b] = normalize_reflectance(raw);
        }
        if (nodata) continue;
        const std::size_t i = row * scene.width + col;
        map.classes[i] = static_cast<std::uint8_t>(predict_class(forest, features));
        map.valid[i] = 1;
      }
    }
  };

  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, scene.height));
  if (n_threads <= 1) {
    classify_rows(0, scene.height);
    return map;
  }
  {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (scene.height + n_threads - 1) / n_threads;
    for (std::size_t begin = 0; begin < scene.height; begin += chunk) {
      workers.emplace_back(classify_rows, begin, std::min(scene.height, begin + chunk));
    }
  }
  return map;
}

std::vector<std::uint8_t> render_png(const ClassMap& map) {
  check_map(map);
  Image8 image{map.width, map.height, 3, {}};
  image.pixels.reserve(map.classes.size() * 3);
  for (std::size_t i = 0; i < map.classes.size(); ++i) {
    const Rgb c = map.valid[i] ? kPalette[map.classes[i]] : kInvalidColor;
    image.pixels.insert(image.pixels.end(), {c.r, c.g, c.b});
  }
  return encode_png(image);
}

ClassMap decode_class_png(const std::vector<std::uint8_t>& png_bytes) {
  const Image8 image = decode_png(png_bytes);
  if (image.channels != 3) throw LoadError("class map PNG must be RGB");
  ClassMap map{image.width, image.height, {}, {}};
  map.classes.resize(image.width * image.height, 0);
  map.valid.resize(image.width * image.height, 0);
  for (std::size_t i = 0; i < map.classes.size(); ++i) {
    const Rgb c{image.pixels[3 * i], image.pixels[3 * i + 1], image.pixels[3 * i + 2]};
    if (c == kInvalidColor) continue;
    const auto it = std::find(kPalette.begin(), kPalette.end(), c);
    if (it == kPalette.end()) {
      throw LoadError("class map PNG: pixel " + std::to_string(i) + " has a colour outside the palette");
    }
    map.classes[i] = static_cast<std::uint8_t>(it - kPalette.begin());
    map.valid[i] = 1;
  }
  return map;
}

std::vector<std::uint8_t> encode_class_grid(const ClassMap& map) {
  check_map(map);
  const std::string header =
      std::string(kGridMagic) + " 1 " + std::to_string(map.width) + " " + std::to_string(map.height) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + map.classes.size());
  for (std::size_t i = 0; i < map.classes.size(); ++i) out.push_back(map.valid[i] ? map.classes[i] : kInvalidCode);
  return out;
}

ClassMap decode_class_grid(const std::vector<std::uint8_t>& bytes) {
  const auto newline = std::find(bytes.begin(), bytes.end(), std::uint8_t{'\n'});
  if (newline == bytes.end()) throw LoadError("class grid: missing header line");
  std::istringstream header(std::string(bytes.begin(), newline));
  std::string magic;
  int version = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  if (!(header >> magic >> version >> width >> height) || magic != kGridMagic) {
    throw LoadError("class grid: malformed header");
  }
  if (version != 1) throw LoadError("class grid: unsupported version " + std::to_string(version));
  const std::size_t offset = static_cast<std::size_t>(newline - bytes.begin()) + 1;
  if (width == 0 || height == 0 || bytes.size() - offset != width * height) {
    throw LoadError("class grid: expected " + std::to_string(width * height) + " pixel bytes, found " +
                    std::to_string(bytes.size() - offset));
  }
  ClassMap map{width, height, std::vector<std::uint8_t>(width * height, 0),
               std::vector<std::uint8_t>(width * height, 0)};
  for (std::size_t i = 0; i < width * height; ++i) {
    const std::uint8_t v = bytes[offset + i];
    if (v == kInvalidCode) continue;
    if (v >= kMaterialCount) throw LoadError("class grid: byte " + std::to_string(i) + " has invalid code");
    map.classes[i] = v;
    map.valid[i] = 1;
  }
  return map;
}

void write_class_grid(const ClassMap& map, const std::string& path) {
  write_file_bytes(path, encode_class_grid(map));
}

ClassMap load_class_grid(const std::string& path) {
  try {
    return decode_class_grid(read_file_bytes(path));
  } catch (const LoadError& e) {
    throw LoadError(path + ": " + e.what());
  }
}

EvalReport evaluate_against_mask(const ClassMap& map, const GroundTruthMask& mask) {
  check_map(map);
  if (mask.width != map.width || mask.height != map.height || mask.values.size() != map.classes.size()) {
    throw InputError("evaluate_against_mask: map is " + std::to_string(map.width) + "x" +
                     std::to_string(map.height) + " but mask is " + std::to_string(mask.width) + "x" +
                     std::to_string(mask.height));
  }
  EvalReport report;
  std::size_t detected = 0;
  std::size_t rejected_env = 0;
  for (std::size_t i = 0; i < map.classes.size(); ++i) {
    if (mask.values[i] == MaskValue::kUnknown || !map.valid[i]) {
      ++report.n_unknown_skipped;
      continue;
    }
    ++report.n_evaluated;
    const std::uint8_t predicted = map.classes[i];
    ++report.per_class_pixel_counts[predicted];
    const bool settlement = predicted != static_cast<std::uint8_t>(MaterialClass::kEnvironment);
    if (mask.values[i] == MaskValue::kInformal) {
      ++report.n_informal;
      if (settlement) ++detected;
    } else {
      ++report.n_environment;
      if (!settlement) ++rejected_env;
    }
  }
  report.settlement_recall = ratio(detected, report.n_informal);
  report.environment_specificity = ratio(rejected_env, report.n_environment);
  return report;
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "metric                    value\n";
  out << "------------------------  ----------\n";
  out << "settlement_recall         " << settlement_recall << "\n";
  out << "environment_specificity   " << environment_specificity << "\n";
  out << "n_evaluated               " << n_evaluated << "\n";
  out << "n_unknown_skipped         " << n_unknown_skipped << "\n";
  out << "n_informal                " << n_informal << "\n";
  out << "n_environment             " << n_environment << "\n";
  for (MaterialClass c : kAllMaterials) {
    const std::string name = "pixels_" + std::string(material_name(c));
    out << name << std::string(26 - name.size(), ' ') << per_class_pixel_counts[static_cast<std::size_t>(c)] << "\n";
  }
  return out.str();
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["settlement_recall"] = settlement_recall;
  doc["environment_specificity"] = environment_specificity;
  doc["n_evaluated"] = n_evaluated;
  doc["n_unknown_skipped"] = n_unknown_skipped;
  doc["n_informal"] = n_informal;
  doc["n_environment"] = n_environment;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (MaterialClass c : kAllMaterials) {
    counts[std::string(material_name(c))] = per_class_pixel_counts[static_cast<std::size_t>(c)];
  }
  doc["per_class_pixel_counts"] = std::move(counts);
  return doc.dump(2) + "\n";
}

ConfusionMatrix confusion_matrix(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw InputError("confusion_matrix: " + std::to_string(predicted.size()) + " predictions for " +
                     std::to_string(truth.size()) + " labels");
  }
  ConfusionMatrix m{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || p < 0 || t >= static_cast<int>(kMaterialCount) || p >= static_cast<int>(kMaterialCount)) {
      throw InputError("confusion_matrix: label out of range at index " + std::to_string(i));
    }
    ++m[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  return m;
}

double accuracy(const ConfusionMatrix& m) {
  std::uint64_t trace = 0;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < kMaterialCount; ++i) {
    for (std::size_t j = 0; j < kMaterialCount; ++j) total += m[i][j];
    trace += m[i][i];
  }
  return total == 0 ? 0.0 : static_cast<double>(trace) / static_cast<double>(total);
}

}  // namespace ccf
