#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ccf/random.hpp"

namespace ccf {

/// Row-major so that a sample's features are contiguous.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Impurity { kGini, kEntropy };
enum class SplitMode { kCcf, kAxisAligned };

std::string_view to_string(Impurity impurity);
std::string_view to_string(SplitMode mode);
Impurity parse_impurity(std::string_view text);
SplitMode parse_split_mode(std::string_view text);

struct ForestParams {
  std::size_t n_trees = 10;
  std::size_t n_classes = 0;
  /// Features drawn per node; 0 means ceil(sqrt(d)).
  std::size_t feature_subsample = 0;
  std::size_t min_node_size = 2;
  /// Unlimited when empty.
  std::optional<std::size_t> max_depth;
  Impurity impurity = Impurity::kGini;
  SplitMode mode = SplitMode::kCcf;
  /// Ridge for the node CCA, relative to the mean variance of each block.
  double gamma = 1e-6;
  std::uint64_t seed = 0;
};

/// Labeled rows. Labels index `class_names`.
struct TrainingSet {
  FeatureMatrix features;
  std::vector<int> labels;
  std::vector<std::string> class_names;
};

/// One node of a flattened tree. A node is a leaf when `left < 0`.
/// Internal nodes send a row left when
///   sum_i projection[i] * row[features[i]] <= threshold.
struct TreeNode {
  std::vector<std::uint32_t> features;
  std::vector<double> projection;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<double> distribution;

  bool is_leaf() const { return left < 0; }
};

/// Nodes in depth-first pre-order; the root is nodes[0].
struct Tree {
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(std::span<const double> row) const;
};

struct Forest {
  static constexpr std::uint32_t kFormatVersion = 1;

  ForestParams params;
  std::vector<Tree> trees;
  std::size_t n_features = 0;
  std::vector<std::string> class_names;
  std::uint32_t format_version = kFormatVersion;

  std::size_t n_classes() const { return class_names.size(); }
};

struct SplitResult {
  std::size_t dim = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

/// Column-major projected values: values[dim][row].
using ProjectedColumns = std::vector<std::vector<double>>;

/// Impurity of a class-count histogram.
double node_impurity(std::span<const std::size_t> counts, std::size_t total, Impurity impurity);

/// Exhaustive best threshold over every projected dimension. Thresholds
/// are midpoints between consecutive distinct values; ties go to the lower
/// dimension, then the lower threshold. Returns gain 0 when no dimension
/// has two distinct values.
SplitResult best_split(const ProjectedColumns& projected, std::span<const int> labels,
                       std::size_t n_classes, Impurity impurity);

/// Dot product used for routing, shared by training and prediction so
/// that both see bit-identical projected values.
double project_row(std::span<const double> row, std::span<const std::uint32_t> features,
                   std::span<const double> projection);

/// Grows one tree on every row of `data` using `rng` for feature
/// subsets and projection bootstraps.
Tree train_tree(const TrainingSet& data, const ForestParams& params, Rng& rng);

/// Trains params.n_trees trees. Tree i draws from make_rng(seed, i), so
/// the result does not depend on `n_threads` (0 = hardware concurrency).
///
/// Throws InputError when fewer than two classes are present, shapes
/// disagree or values are not finite.
Forest train_forest(const TrainingSet& data, ForestParams params, unsigned n_threads = 0);

/// Mean of the reached leaf distributions. Throws InputError on a wrong
/// length or non-finite feature.
std::vector<double> predict_proba(const Forest& forest, std::span<const double> features);

/// Argmax of predict_proba, lowest index on ties.
int predict_class(const Forest& forest, std::span<const double> features);

int argmax(std::span<const double> proba);

/// Versioned JSON document with the trees as nested nodes.
std::string serialize(const Forest& forest);

/// Throws ParseError (with line/field context) on malformed input and
/// UnsupportedVersionError on an unknown format_version.
Forest deserialize(std::string_view text);

void save_forest(const Forest& forest, const std::string& path);
Forest load_forest(const std::string& path);

}  // namespace ccf
