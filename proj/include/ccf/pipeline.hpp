#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccf/forest.hpp"
#include "ccf/geodata.hpp"

namespace ccf {

/// Stable codes: they index class distributions and the render palette.
enum class MaterialClass : std::uint8_t { kEnvironment = 0, kMetal = 1, kShingles = 2, kThatch = 3 };

inline constexpr std::size_t kMaterialCount = 4;
inline constexpr std::size_t kSentinelBands = 13;

std::string_view material_name(MaterialClass c);
std::vector<std::string> material_names();
inline constexpr std::array<MaterialClass, kMaterialCount> kAllMaterials = {
    MaterialClass::kEnvironment, MaterialClass::kMetal, MaterialClass::kShingles, MaterialClass::kThatch};

struct SpectralSample {
  std::vector<double> features;
  std::optional<MaterialClass> label;
  std::string provenance;
};

struct SurveyMapping {
  std::optional<MaterialClass> material;
  std::string reason;  ///< empty when accepted
};

/// Roof-material survey answer to training class. Case-insensitive on the
/// trimmed answer; class names map to themselves.
SurveyMapping map_survey_class(std::string_view answer);

/// Level-1C convention: reflectance = raw / 10000. Saturated values pass through.
constexpr double normalize_reflectance(std::uint16_t raw) { return static_cast<double>(raw) / 10000.0; }

enum class RejectReason { kRejectedClass, kOutOfBounds, kNodata, kEmpty };
inline constexpr std::size_t kRejectReasonCount = 4;
std::string_view reason_name(RejectReason r);

struct RejectionReport {
  std::size_t n_points = 0;
  std::size_t n_accepted = 0;
  std::array<std::size_t, kRejectReasonCount> counts{};
  /// Rejected survey answers and how often each occurred.
  std::vector<std::pair<std::string, std::size_t>> rejected_answers;

  std::size_t rejected() const;
  void merge(const RejectionReport& other);
  std::string to_text() const;
  std::string to_json() const;
};

struct ExtractionResult {
  std::vector<SpectralSample> samples;
  RejectionReport report;
};

/// Maps, locates and reads every point; rejects unmapped answers,
/// off-raster points, pixels with a nodata band and all-zero spectra.
ExtractionResult extract_samples(const Scene& scene, const std::vector<LabeledPoint>& points);

/// Exactly n_per_class samples of each of the four materials, drawn
/// without replacement. Output is sorted by class then provenance.
/// Throws ImbalanceError naming the first short class.
std::vector<SpectralSample> balance(const std::vector<SpectralSample>& samples, std::size_t n_per_class,
                                    std::uint64_t seed);

/// Labeled samples to a training set over the four material classes.
TrainingSet to_training_set(const std::vector<SpectralSample>& samples);

}  // namespace ccf
