#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ccf/forest.hpp"
#include "ccf/geodata.hpp"
#include "ccf/pipeline.hpp"

namespace ccf {

/// Gaussian per-band reflectance model of one material.
struct ClassPrototype {
  MaterialClass material = MaterialClass::kEnvironment;
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// The four hand-designed, well-separated 13-band spectra shipped in
/// data/prototypes.json. Synthetic, not measured.
std::vector<ClassPrototype> default_prototypes();
std::vector<ClassPrototype> load_prototypes(const std::string& path);
std::vector<ClassPrototype> parse_prototypes(const std::string& json_text);
std::string prototypes_json(const std::vector<ClassPrototype>& prototypes);

/// Throws InputError unless means lie in [0,1], stddevs are > 0 and all
/// prototypes share one band count.
void validate_prototypes(const std::vector<ClassPrototype>& prototypes);

/// Draw of mean + N(0, stddev) per band, clamped to [0, 1.2].
std::vector<double> sample_spectrum(const ClassPrototype& prototype, Rng& rng);

/// n_per_class samples per prototype, in prototype order.
std::vector<SpectralSample> generate_samples(const std::vector<ClassPrototype>& prototypes,
                                             std::size_t n_per_class, std::uint64_t seed);

/// Row-major per-pixel material codes.
struct Layout {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<MaterialClass> classes;

  MaterialClass at(std::size_t col, std::size_t row) const { return classes[row * width + col]; }
};

/// environment | metal over shingles | thatch.
Layout quadrant_layout(std::size_t width, std::size_t height);

/// Square tiles; each tile is environment with probability
/// `environment_share`, otherwise a uniformly chosen roof material. Every
/// material is guaranteed at least one tile when there are >= 4 tiles.
Layout block_layout(std::size_t width, std::size_t height, std::size_t block, double environment_share,
                    std::uint64_t seed);

struct SyntheticScene {
  Scene scene;
  GroundTruthMask mask;
  Layout truth;
};

struct SceneOptions {
  double unknown_fraction = 0.0;
  GeoTransform geotransform{36.78, 1e-4, 0.0, -1.31, 0.0, -1e-4};
  std::uint16_t nodata = 65535;
};

/// Raw band value = round(10000 * sampled spectrum). Non-environment
/// pixels are informal in the mask, and round(unknown_fraction * pixels)
/// randomly chosen mask pixels are set to unknown.
SyntheticScene generate_scene(const Layout& layout, const std::vector<ClassPrototype>& prototypes,
                              std::uint64_t seed, const SceneOptions& options = {});

struct SurveyOptions {
  std::size_t metal = 37;
  std::size_t shingles = 20;
  std::size_t thatch = 16;
  std::size_t environment = 25;
  /// Points with answers outside the four classes (Tiles, Plastic sheets, ...).
  std::size_t excluded_answers = 6;
  /// Points with valid answers placed west of the raster.
  std::size_t off_raster = 3;
};

struct SyntheticSurvey {
  std::vector<LabeledPoint> survey_points;
  std::vector<LabeledPoint> environment_points;
  /// What extract_samples should reject, by reason.
  RejectionReport expected;
};

/// Survey points on pixels of the matching truth class, plus analyst
/// environment points. Throws InputError when a requested class has no
/// pixel in the layout.
SyntheticSurvey generate_survey(const SyntheticScene& synthetic, const SurveyOptions& options, std::uint64_t seed);

/// Two classes split by a line at `angle_degrees` in the first two of 13
/// dimensions; the other 11 are uninformative N(0, 0.5) noise. Points
/// keep a margin of 0.1 from the boundary before N(0, noise) jitter is
/// added to every dimension. Labels alternate 0, 1, 0, ...
TrainingSet rotated_two_class(std::size_t n, double angle_degrees, std::uint64_t seed, double noise = 0.05);

}  // namespace ccf
