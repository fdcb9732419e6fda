#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ccf/forest.hpp"
#include "ccf/geodata.hpp"
#include "ccf/pipeline.hpp"

namespace ccf {

/// Per-pixel material codes in row-major order. Invalid pixels (a nodata
/// band in the source) hold environment and are skipped by evaluation.
struct ClassMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> classes;
  std::vector<std::uint8_t> valid;

  bool operator==(const ClassMap&) const = default;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

/// environment black, metal yellow, shingles blue, thatch red.
inline constexpr std::array<Rgb, kMaterialCount> kPalette = {
    Rgb{0, 0, 0}, Rgb{255, 255, 0}, Rgb{0, 0, 255}, Rgb{255, 0, 0}};
inline constexpr Rgb kInvalidColor{64, 64, 64};

/// Classifies every pixel with a complete spectrum. Rows are spread over
/// `n_threads` workers (0 = hardware concurrency); output does not
/// depend on the split.
ClassMap classify_scene(const Forest& forest, const Scene& scene, unsigned n_threads = 0);

std::vector<std::uint8_t> render_png(const ClassMap& map);

/// Inverse of render_png. Throws LoadError on a colour outside the palette.
ClassMap decode_class_png(const std::vector<std::uint8_t>& png_bytes);

/// Binary grid file: ASCII line "CGRID 1 <width> <height>\n" then one byte
/// per pixel, row-major: the class code, or 255 for an invalid pixel.
std::vector<std::uint8_t> encode_class_grid(const ClassMap& map);
ClassMap decode_class_grid(const std::vector<std::uint8_t>& bytes);
void write_class_grid(const ClassMap& map, const std::string& path);
ClassMap load_class_grid(const std::string& path);

struct EvalReport {
  double settlement_recall = 0.0;
  double environment_specificity = 0.0;
  std::array<std::size_t, kMaterialCount> per_class_pixel_counts{};
  std::size_t n_evaluated = 0;
  /// Pixels left out: unknown in the mask or invalid in the map.
  std::size_t n_unknown_skipped = 0;
  std::size_t n_informal = 0;
  std::size_t n_environment = 0;

  std::string to_text() const;
  std::string to_json() const;
};

/// Compares a class map with a binary settlement mask. Any non-environment
/// material counts as a settlement detection. A rate whose denominator is
/// empty is reported as 0.
EvalReport evaluate_against_mask(const ClassMap& map, const GroundTruthMask& mask);

using ConfusionMatrix = std::array<std::array<std::uint64_t, kMaterialCount>, kMaterialCount>;

/// Rows are truth, columns prediction.
ConfusionMatrix confusion_matrix(std::span<const int> predicted, std::span<const int> truth);
double accuracy(const ConfusionMatrix& m);

}  // namespace ccf
