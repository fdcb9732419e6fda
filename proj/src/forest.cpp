#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>

#include "ccf/cca.hpp"
#include "ccf/errors.hpp"
#include "ccf/forest.hpp"

namespace ccf {
namespace {

// Splits whose impurity decrease is within roundoff of zero are rejected.
constexpr double kMinGain = 1e-12;

struct Candidate {
  std::vector<std::uint32_t> features;
  std::vector<double> projection;
  double threshold = 0.0;
};

std::size_t ceil_sqrt(std::size_t d) {
  std::size_t s = 1;
  while (s * s < d) ++s;
  return s;
}

std::span<const double> row_of(const FeatureMatrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const ForestParams& params, Rng& rng)
      : data_(data), params_(params), rng_(rng) {}

  Tree build() {
    std::vector<std::size_t> rows(static_cast<std::size_t>(data_.features.rows()));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(const std::vector<std::size_t>& rows, std::size_t depth) {
    const auto index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    std::vector<std::size_t> counts(params_.n_classes, 0);
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(data_.labels[r])];
    const std::size_t distinct =
        static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));

    std::vector<double> distribution(params_.n_classes);
    for (std::size_t c = 0; c < counts.size(); ++c) {
      distribution[c] = static_cast<double>(counts[c]) / static_cast<double>(rows.size());
    }

    const bool at_depth_limit = params_.max_depth && depth >= *params_.max_depth;
    if (distinct <= 1 || rows.size() < params_.min_node_size || at_depth_limit || rows.size() < 2) {
      tree_.nodes[static_cast<std::size_t>(index)].distribution = std::move(distribution);
      return index;
    }

    const std::vector<std::uint32_t> features = draw_features();
    std::optional<Candidate> split;
    if (params_.mode == SplitMode::kCcf) {
      for (int attempt = 0; attempt < 2 && !split; ++attempt) split = ccf_split(rows, features);
    }
    if (!split) split = axis_split(rows, features);
    if (!split) {
      tree_.nodes[static_cast<std::size_t>(index)].distribution = std::move(distribution);
      return index;
    }

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t r : rows) {
      const double v = project_row(row_of(data_.features, static_cast<Eigen::Index>(r)), split->features,
                                   split->projection);
      (v <= split->threshold ? left_rows : right_rows).push_back(r);
    }

    const std::int32_t left = grow(left_rows, depth + 1);
    const std::int32_t right = grow(right_rows, depth + 1);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.features = std::move(split->features);
    node.projection = std::move(split->projection);
    node.threshold = split->threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  std::vector<std::uint32_t> draw_features() {
    const auto d = static_cast<std::size_t>(data_.features.cols());
    std::vector<std::uint32_t> pool(d);
    for (std::size_t i = 0; i < d; ++i) pool[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i < params_.feature_subsample; ++i) {
      std::swap(pool[i], pool[i + uniform_index(rng_, d - i)]);
    }
    pool.resize(params_.feature_subsample);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  std::vector<int> labels_of(const std::vector<std::size_t>& rows) const {
    std::vector<int> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = data_.labels[rows[i]];
    return labels;
  }

  std::optional<Candidate> choose(const std::vector<std::size_t>& rows,
                                  std::vector<std::vector<double>> directions,
                                  const std::vector<std::uint32_t>& features) const {
    ProjectedColumns projected(directions.size(), std::vector<double>(rows.size()));
    for (std::size_t dim = 0; dim < directions.size(); ++dim) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        projected[dim][i] =
            project_row(row_of(data_.features, static_cast<Eigen::Index>(rows[i])), features, directions[dim]);
      }
    }
    const std::vector<int> labels = labels_of(rows);
    const SplitResult best = best_split(projected, labels, params_.n_classes, params_.impurity);
    if (!(best.gain > kMinGain)) return std::nullopt;
    return Candidate{features, std::move(directions[best.dim]), best.threshold};
  }

  // CCA on a with-replacement resample of the node, split on the node itself.
  std::optional<Candidate> ccf_split(const std::vector<std::size_t>& rows,
                                     const std::vector<std::uint32_t>& features) {
    const std::size_t n = rows.size();
    std::vector<std::size_t> boot(n);
    for (std::size_t i = 0; i < n; ++i) boot[i] = rows[uniform_index(rng_, n)];

    // Compact the labels present in the bootstrap to 0..k'-1.
    std::vector<int> remap(params_.n_classes, -1);
    int k = 0;
    for (std::size_t r : boot) {
      int& slot = remap[static_cast<std::size_t>(data_.labels[r])];
      if (slot < 0) slot = k++;
    }
    if (k < 2) return std::nullopt;

    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(features.size()));
    std::vector<int> compact(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < features.size(); ++j) {
        x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            data_.features(static_cast<Eigen::Index>(boot[i]), static_cast<Eigen::Index>(features[j]));
      }
      compact[i] = remap[static_cast<std::size_t>(data_.labels[boot[i]])];
    }

    CcaResult cca;
    try {
      cca = canonical_correlation(x, one_hot(compact, static_cast<std::size_t>(k)), params_.gamma,
                                  RidgeScale::kRelative);
    } catch (const InputError&) {
      return std::nullopt;
    }

    std::vector<std::vector<double>> directions;
    for (Eigen::Index j = 0; j < cca.projections_x.cols(); ++j) {
      const Vector column = cca.projections_x.col(j);
      const double norm = column.norm();
      if (!std::isfinite(norm) || norm == 0.0) continue;
      std::vector<double> direction(features.size());
      for (std::size_t i = 0; i < features.size(); ++i) {
        direction[i] = column(static_cast<Eigen::Index>(i)) / norm;
      }
      directions.push_back(std::move(direction));
    }
    if (directions.empty()) return std::nullopt;
    return choose(rows, std::move(directions), features);
  }

  std::optional<Candidate> axis_split(const std::vector<std::size_t>& rows,
                                      const std::vector<std::uint32_t>& features) const {
    ProjectedColumns projected(features.size(), std::vector<double>(rows.size()));
    for (std::size_t dim = 0; dim < features.size(); ++dim) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        projected[dim][i] = data_.features(static_cast<Eigen::Index>(rows[i]), features[dim]);
      }
    }
    const std::vector<int> labels = labels_of(rows);
    const SplitResult best = best_split(projected, labels, params_.n_classes, params_.impurity);
    if (!(best.gain > kMinGain)) return std::nullopt;
    return Candidate{{features[best.dim]}, {1.0}, best.threshold};
  }

  const TrainingSet& data_;
  const ForestParams& params_;
  Rng& rng_;
  Tree tree_;
};

ForestParams validated(const TrainingSet& data, ForestParams params) {
  const auto n = static_cast<std::size_t>(data.features.rows());
  const auto d = static_cast<std::size_t>(data.features.cols());
  if (n < 2) throw InputError("train_forest: need at least 2 samples, got " + std::to_string(n));
  if (d == 0) throw InputError("train_forest: samples have no features");
  if (data.labels.size() != n) {
    throw InputError("train_forest: " + std::to_string(n) + " feature rows but " +
                     std::to_string(data.labels.size()) + " labels");
  }
  if (!data.features.allFinite()) throw InputError("train_forest: features contain non-finite values");
  if (data.class_names.empty()) throw InputError("train_forest: class_names is empty");
  params.n_classes = data.class_names.size();

  std::set<int> present;
  for (int label : data.labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= params.n_classes) {
      throw InputError("train_forest: label " + std::to_string(label) + " has no class name");
    }
    present.insert(label);
  }
  if (present.size() < 2) {
    throw InputError("train_forest: need at least 2 distinct classes, got " + std::to_string(present.size()));
  }
  if (params.n_trees < 1) throw InputError("train_forest: n_trees must be >= 1");
  if (params.min_node_size < 1) throw InputError("train_forest: min_node_size must be >= 1");
  if (params.feature_subsample == 0) params.feature_subsample = ceil_sqrt(d);
  if (params.feature_subsample > d) {
    throw InputError("train_forest: feature_subsample " + std::to_string(params.feature_subsample) +
                     " exceeds feature count " + std::to_string(d));
  }
  if (!(params.gamma >= 0.0) || !std::isfinite(params.gamma)) {
    throw InputError("train_forest: gamma must be finite and >= 0");
  }
  return params;
}

}  // namespace

std::string_view to_string(Impurity impurity) { return impurity == Impurity::kGini ? "gini" : "entropy"; }

std::string_view to_string(SplitMode mode) { return mode == SplitMode::kCcf ? "ccf" : "axis_aligned"; }

Impurity parse_impurity(std::string_view text) {
  if (text == "gini") return Impurity::kGini;
  if (text == "entropy") return Impurity::kEntropy;
  throw InputError("unknown impurity '" + std::string(text) + "' (expected gini or entropy)");
}

SplitMode parse_split_mode(std::string_view text) {
  if (text == "ccf") return SplitMode::kCcf;
  if (text == "axis_aligned" || text == "axis") return SplitMode::kAxisAligned;
  throw InputError("unknown split mode '" + std::string(text) + "' (expected ccf or axis)");
}

double project_row(std::span<const double> row, std::span<const std::uint32_t> features,
                   std::span<const double> projection) {
  double acc = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) acc += projection[i] * row[features[i]];
  return acc;
}

const TreeNode& Tree::leaf_for(std::span<const double> row) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    const double v = project_row(row, node->features, node->projection);
    node = &nodes[static_cast<std::size_t>(v <= node->threshold ? node->left : node->right)];
  }
  return *node;
}

Tree train_tree(const TrainingSet& data, const ForestParams& params, Rng& rng) {
  const ForestParams checked = validated(data, params);
  return TreeBuilder(data, checked, rng).build();
}

Forest train_forest(const TrainingSet& data, ForestParams params, unsigned n_threads) {
  Forest forest;
  forest.params = validated(data, params);
  forest.n_features = static_cast<std::size_t>(data.features.cols());
  forest.class_names = data.class_names;
  forest.trees.resize(forest.params.n_trees);

  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, forest.params.n_trees));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < forest.params.n_trees; i = next++) {
      try {
        Rng rng = make_rng(forest.params.seed, i);
        forest.trees[i] = TreeBuilder(data, forest.params, rng).build();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return forest;
}

std::vector<double> predict_proba(const Forest& forest, std::span<const double> features) {
  if (features.size() != forest.n_features) {
    throw InputError("predict_proba: expected " + std::to_string(forest.n_features) + " features, got " +
                     std::to_string(features.size()));
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!std::isfinite(features[i])) {
      throw InputError("predict_proba: feature " + std::to_string(i) + " is not finite");
    }
  }
  std::vector<double> proba(forest.n_classes(), 0.0);
  for (const Tree& tree : forest.trees) {
    const TreeNode& leaf = tree.leaf_for(features);
    for (std::size_t c = 0; c < proba.size(); ++c) proba[c] += leaf.distribution[c];
  }
  const double scale = 1.0 / static_cast<double>(forest.trees.size());
  for (double& p : proba) p *= scale;
  return proba;
}

int argmax(std::span<const double> proba) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < proba.size(); ++c) {
    if (proba[c] > proba[best]) best = c;
  }
  return static_cast<int>(best);
}

int predict_class(const Forest& forest, std::span<const double> features) {
  return argmax(predict_proba(forest, features));
}

}  // namespace ccf
