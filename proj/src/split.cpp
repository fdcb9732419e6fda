#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ccf/errors.hpp"
#include "ccf/forest.hpp"

namespace ccf {

double node_impurity(std::span<const std::size_t> counts, std::size_t total, Impurity impurity) {
  if (total == 0) return 0.0;
  const double n = static_cast<double>(total);
  double acc = 0.0;
  if (impurity == Impurity::kGini) {
    for (std::size_t c : counts) {
      const double p = static_cast<double>(c) / n;
      acc += p * p;
    }
    return 1.0 - acc;
  }
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    acc -= p * std::log2(p);
  }
  return acc;
}

SplitResult best_split(const ProjectedColumns& projected, std::span<const int> labels,
                       std::size_t n_classes, Impurity impurity) {
  const std::size_t n = labels.size();
  if (n < 2) throw InputError("best_split: need at least 2 rows");
  for (const auto& column : projected) {
    if (column.size() != n) throw InputError("best_split: projected column length differs from label count");
  }

  std::vector<std::size_t> parent(n_classes, 0);
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes) {
      throw InputError("best_split: label " + std::to_string(label) + " out of range");
    }
    ++parent[static_cast<std::size_t>(label)];
  }
  const double parent_impurity = node_impurity(parent, n, impurity);
  const double total = static_cast<double>(n);

  SplitResult best;
  bool found = false;
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> left(n_classes);
  std::vector<std::size_t> right(n_classes);

  for (std::size_t dim = 0; dim < projected.size(); ++dim) {
    const auto& values = projected[dim];
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::fill(left.begin(), left.end(), 0);
    right = parent;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const auto label = static_cast<std::size_t>(labels[order[i]]);
      ++left[label];
      --right[label];
      const double lo = values[order[i]];
      const double hi = values[order[i + 1]];
      if (!(lo < hi)) continue;

      const std::size_t n_left = i + 1;
      const std::size_t n_right = n - n_left;
      const double gain = parent_impurity -
                          (static_cast<double>(n_left) / total) * node_impurity(left, n_left, impurity) -
                          (static_cast<double>(n_right) / total) * node_impurity(right, n_right, impurity);
      if (!found || gain > best.gain) {
        double threshold = std::midpoint(lo, hi);
        if (!(threshold < hi)) threshold = lo;
        best = {dim, threshold, gain};
        found = true;
      }
    }
  }
  if (!found) return {};
  return best;
}

}  // namespace ccf
