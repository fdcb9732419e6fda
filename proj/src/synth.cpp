#include "ccf/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "ccf/errors.hpp"
#include "ccf/random.hpp"

namespace ccf {
namespace {

using Json = nlohmann::ordered_json;

// Band order B1 B2 B3 B4 B5 B6 B7 B8 B8A B9 B10 B11 B12.
const std::vector<ClassPrototype>& builtin_prototypes() {
  static const std::vector<ClassPrototype> prototypes = {
      {MaterialClass::kEnvironment,
       {0.12, 0.09, 0.08, 0.06, 0.11, 0.25, 0.31, 0.33, 0.34, 0.12, 0.01, 0.20, 0.11},
       {0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.005, 0.02, 0.02}},
      {MaterialClass::kMetal,
       {0.30, 0.32, 0.34, 0.35, 0.36, 0.36, 0.37, 0.37, 0.37, 0.20, 0.03, 0.33, 0.29},
       {0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.005, 0.02, 0.02}},
      {MaterialClass::kShingles,
       {0.16, 0.17, 0.18, 0.19, 0.20, 0.21, 0.21, 0.22, 0.22, 0.10, 0.01, 0.24, 0.22},
       {0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.005, 0.02, 0.02}},
      {MaterialClass::kThatch,
       {0.09, 0.10, 0.14, 0.19, 0.23, 0.26, 0.28, 0.29, 0.30, 0.11, 0.01, 0.38, 0.30},
       {0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.005, 0.02, 0.02}},
  };
  return prototypes;
}

MaterialClass material_from_name(const std::string& name) {
  for (MaterialClass c : kAllMaterials) {
    if (material_name(c) == name) return c;
  }
  throw InputError("unknown material class '" + name + "'");
}

const ClassPrototype& prototype_for(const std::vector<ClassPrototype>& prototypes, MaterialClass c) {
  for (const auto& p : prototypes) {
    if (p.material == c) return p;
  }
  throw InputError("no prototype for class '" + std::string(material_name(c)) + "'");
}

std::string survey_answer(MaterialClass c, std::size_t i) {
  switch (c) {
    case MaterialClass::kMetal:
      return "Metal, tin or zinc";
    case MaterialClass::kShingles:
      return i % 2 == 0 ? "Shingles" : "Asbestos";
    case MaterialClass::kThatch:
      return "Thatch or grass";
    case MaterialClass::kEnvironment:
      return "environment";
  }
  return {};
}

}  // namespace

std::vector<ClassPrototype> default_prototypes() { return builtin_prototypes(); }

void validate_prototypes(const std::vector<ClassPrototype>& prototypes) {
  if (prototypes.empty()) throw InputError("prototypes: none given");
  const std::size_t bands = prototypes.front().mean.size();
  for (const auto& p : prototypes) {
    const std::string name(material_name(p.material));
    if (p.mean.size() != bands || p.stddev.size() != bands || bands == 0) {
      throw InputError("prototype '" + name + "': mean and stddev must both have " + std::to_string(bands) + " bands");
    }
    for (std::size_t b = 0; b < bands; ++b) {
      if (!(p.mean[b] >= 0.0 && p.mean[b] <= 1.0)) throw InputError("prototype '" + name + "': mean outside [0, 1]");
      if (!(p.stddev[b] > 0.0) || !std::isfinite(p.stddev[b])) {
        throw InputError("prototype '" + name + "': stddev must be > 0");
      }
    }
  }
}

std::string prototypes_json(const std::vector<ClassPrototype>& prototypes) {
  Json list = Json::array();
  for (const auto& p : prototypes) {
    Json item;
    item["class"] = material_name(p.material);
    item["mean"] = p.mean;
    item["stddev"] = p.stddev;
    list.push_back(std::move(item));
  }
  Json doc;
  doc["bands"] = {"B1", "B2", "B3", "B4", "B5", "B6", "B7", "B8", "B8A", "B9", "B10", "B11", "B12"};
  doc["prototypes"] = std::move(list);
  return doc.dump(2) + "\n";
}

std::vector<ClassPrototype> parse_prototypes(const std::string& json_text) {
  std::vector<ClassPrototype> out;
  try {
    const Json doc = Json::parse(json_text);
    for (const Json& item : doc.at("prototypes")) {
      out.push_back({material_from_name(item.at("class").get<std::string>()), item.at("mean").get<std::vector<double>>(),
                     item.at("stddev").get<std::vector<double>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("prototypes document: ") + e.what());
  }
  validate_prototypes(out);
  return out;
}

std::vector<ClassPrototype> load_prototypes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open prototypes file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_prototypes(buffer.str());
}

std::vector<double> sample_spectrum(const ClassPrototype& prototype, Rng& rng) {
  std::vector<double> out(prototype.mean.size());
  for (std::size_t b = 0; b < out.size(); ++b) {
    out[b] = std::clamp(prototype.mean[b] + normal(rng, 0.0, prototype.stddev[b]), 0.0, 1.2);
  }
  return out;
}

std::vector<SpectralSample> generate_samples(const std::vector<ClassPrototype>& prototypes,
                                             std::size_t n_per_class, std::uint64_t seed) {
  std::vector<SpectralSample> out;
  out.reserve(prototypes.size() * n_per_class);
  for (std::size_t k = 0; k < prototypes.size(); ++k) {
    const ClassPrototype& p = prototypes[k];
    Rng rng = make_rng(seed, k);
    for (std::size_t i = 0; i < n_per_class; ++i) {
      out.push_back({sample_spectrum(p, rng), p.material,
                     "synth-" + std::string(material_name(p.material)) + "-" + std::to_string(i)});
    }
  }
  return out;
}

Layout quadrant_layout(std::size_t width, std::size_t height) {
  Layout layout{width, height, std::vector<MaterialClass>(width * height)};
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const bool right = c >= width / 2;
      const bool bottom = r >= height / 2;
      layout.classes[r * width + c] = !bottom ? (right ? MaterialClass::kMetal : MaterialClass::kEnvironment)
                                              : (right ? MaterialClass::kThatch : MaterialClass::kShingles);
    }
  }
  return layout;
}

Layout block_layout(std::size_t width, std::size_t height, std::size_t block, double environment_share,
                    std::uint64_t seed) {
  if (block == 0) throw InputError("block_layout: block size must be >= 1");
  const std::size_t tiles_x = (width + block - 1) / block;
  const std::size_t tiles_y = (height + block - 1) / block;
  const std::size_t n_tiles = tiles_x * tiles_y;
  Rng rng = make_rng(seed, 2);
  std::vector<MaterialClass> tiles(n_tiles);
  for (auto& t : tiles) {
    t = uniform_real(rng, 0.0, 1.0) < environment_share ? MaterialClass::kEnvironment
                                                         : kAllMaterials[1 + uniform_index(rng, 3)];
  }
  if (n_tiles >= kMaterialCount) {
    // Pin one randomly placed tile per class so every material appears.
    std::vector<std::size_t> order(n_tiles);
    for (std::size_t i = 0; i < n_tiles; ++i) order[i] = i;
    for (std::size_t i = 0; i < kMaterialCount; ++i) {
      std::swap(order[i], order[i + uniform_index(rng, n_tiles - i)]);
      tiles[order[i]] = kAllMaterials[i];
    }
  }
  Layout layout{width, height, std::vector<MaterialClass>(width * height)};
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) layout.classes[r * width + c] = tiles[(r / block) * tiles_x + c / block];
  }
  return layout;
}

SyntheticScene generate_scene(const Layout& layout, const std::vector<ClassPrototype>& prototypes,
                              std::uint64_t seed, const SceneOptions& options) {
  validate_prototypes(prototypes);
  if (layout.width == 0 || layout.height == 0 || layout.classes.size() != layout.width * layout.height) {
    throw InputError("generate_scene: layout does not match its dimensions");
  }
  if (!(options.unknown_fraction >= 0.0 && options.unknown_fraction <= 1.0)) {
    throw InputError("generate_scene: unknown_fraction must be in [0, 1]");
  }

  SyntheticScene out;
  out.truth = layout;
  Scene& scene = out.scene;
  scene.width = layout.width;
  scene.height = layout.height;
  scene.n_bands = prototypes.front().mean.size();
  scene.geotransform = options.geotransform;
  scene.nodata = options.nodata;
  scene.data.assign(scene.width * scene.height * scene.n_bands, 0);

  Rng pixels = make_rng(seed, 0);
  for (std::size_t r = 0; r < scene.height; ++r) {
    for (std::size_t c = 0; c < scene.width; ++c) {
      const std::vector<double> spectrum = sample_spectrum(prototype_for(prototypes, layout.at(c, r)), pixels);
      for (std::size_t b = 0; b < scene.n_bands; ++b) {
        auto raw = static_cast<std::uint16_t>(std::lround(10000.0 * spectrum[b]));
        // Keep generated data clear of the sentinel.
        if (raw == scene.nodata) raw = static_cast<std::uint16_t>(raw == 0 ? 1 : raw - 1);
        scene.value(b, c, r) = raw;
      }
    }
  }

  GroundTruthMask& mask = out.mask;
  mask.width = layout.width;
  mask.height = layout.height;
  mask.values.resize(layout.classes.size());
  for (std::size_t i = 0; i < layout.classes.size(); ++i) {
    mask.values[i] = layout.classes[i] == MaterialClass::kEnvironment ? MaskValue::kEnvironment : MaskValue::kInformal;
  }
  const std::size_t n = mask.values.size();
  const auto n_unknown = static_cast<std::size_t>(std::llround(options.unknown_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng unknown = make_rng(seed, 1);
  for (std::size_t i = 0; i < n_unknown; ++i) {
    std::swap(order[i], order[i + uniform_index(unknown, n - i)]);
    mask.values[order[i]] = MaskValue::kUnknown;
  }
  return out;
}

SyntheticSurvey generate_survey(const SyntheticScene& synthetic, const SurveyOptions& options, std::uint64_t seed) {
  const Scene& scene = synthetic.scene;
  const Layout& truth = synthetic.truth;
  std::array<std::vector<std::size_t>, kMaterialCount> pixels;
  for (std::size_t i = 0; i < truth.classes.size(); ++i) pixels[static_cast<std::size_t>(truth.classes[i])].push_back(i);

  Rng rng = make_rng(seed, 3);
  SyntheticSurvey survey;
  std::size_t next_id = 0;
  auto point_at = [&](std::size_t pixel, std::string answer) {
    const auto [lon, lat] = pixel_to_geo(scene, pixel % scene.width, pixel / scene.width);
    char id[32];
    std::snprintf(id, sizeof id, "S%05zu", next_id++);
    return LabeledPoint{id, lon, lat, std::move(answer)};
  };
  auto draw = [&](MaterialClass c, std::size_t count, std::vector<LabeledPoint>& into) {
    const auto& pool = pixels[static_cast<std::size_t>(c)];
    if (count > 0 && pool.empty()) {
      throw InputError("generate_survey: layout has no '" + std::string(material_name(c)) + "' pixels");
    }
    for (std::size_t i = 0; i < count; ++i) into.push_back(point_at(pool[uniform_index(rng, pool.size())], survey_answer(c, i)));
  };

  draw(MaterialClass::kMetal, options.metal, survey.survey_points);
  draw(MaterialClass::kShingles, options.shingles, survey.survey_points);
  draw(MaterialClass::kThatch, options.thatch, survey.survey_points);

  static const char* const kExcluded[] = {"Tiles", "Plastic sheets", "Could not tell/could not see",
                                          "Multiple materials", "Some other material"};
  std::map<std::string, std::size_t> excluded_counts;
  for (std::size_t i = 0; i < options.excluded_answers; ++i) {
    const std::string answer = kExcluded[i % std::size(kExcluded)];
    survey.survey_points.push_back(point_at(uniform_index(rng, truth.classes.size()), answer));
    ++excluded_counts[answer];
  }
  for (std::size_t i = 0; i < options.off_raster; ++i) {
    LabeledPoint p = point_at(0, survey_answer(MaterialClass::kMetal, i));
    p.lon = scene.geotransform.origin_x - (5.0 + static_cast<double>(i)) * scene.geotransform.pixel_width;
    survey.survey_points.push_back(std::move(p));
  }
  draw(MaterialClass::kEnvironment, options.environment, survey.environment_points);

  RejectionReport& expected = survey.expected;
  expected.n_points = survey.survey_points.size() + survey.environment_points.size();
  expected.counts[static_cast<std::size_t>(RejectReason::kRejectedClass)] = options.excluded_answers;
  expected.counts[static_cast<std::size_t>(RejectReason::kOutOfBounds)] = options.off_raster;
  expected.n_accepted = expected.n_points - options.excluded_answers - options.off_raster;
  expected.rejected_answers.assign(excluded_counts.begin(), excluded_counts.end());
  return survey;
}

TrainingSet rotated_two_class(std::size_t n, double angle_degrees, std::uint64_t seed, double noise) {
  constexpr std::size_t kDims = 13;
  const double angle = angle_degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(angle);
  const double sn = std::sin(angle);
  Rng rng = make_rng(seed, 4);

  TrainingSet set;
  set.class_names = {"negative", "positive"};
  set.features.resize(static_cast<Eigen::Index>(n), kDims);
  set.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const double u = uniform_real(rng, 0.1, 1.0) * (label == 1 ? 1.0 : -1.0);
    const double v = uniform_real(rng, -1.0, 1.0);
    const auto row = static_cast<Eigen::Index>(i);
    set.features(row, 0) = u * cs - v * sn;
    set.features(row, 1) = u * sn + v * cs;
    for (std::size_t j = 2; j < kDims; ++j) set.features(row, static_cast<Eigen::Index>(j)) = normal(rng, 0.0, 0.5);
    if (noise > 0.0) {
      for (std::size_t j = 0; j < kDims; ++j) set.features(row, static_cast<Eigen::Index>(j)) += normal(rng, 0.0, noise);
    }
    set.labels[i] = label;
  }
  return set;
}

}  // namespace ccf
