#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ccf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct CenteredMatrix {
  Matrix centered;
  Vector means;
};

/// Paired canonical directions from one CCA solve.
///
/// Column j of `projections_x` (d x rank) and of `projections_y` (k x rank)
/// is the j-th canonical pair; `correlations[j]` is its correlation.
/// Correlations are clamped to [0, 1] and sorted non-increasing. Each pair
/// is sign-normalized so the largest-magnitude entry of the x column is
/// positive (the y column is flipped with it, keeping the pair's
/// correlation non-negative).
struct CcaResult {
  Matrix projections_x;
  Matrix projections_y;
  std::vector<double> correlations;
  std::size_t rank = 0;
};

/// How `gamma` is turned into the ridge added to each covariance.
enum class RidgeScale {
  kAbsolute,  ///< add gamma * I
  kRelative,  ///< add gamma * mean(diag(cov)) * I, per covariance
};

/// Subtracts column means. Throws InputError on an empty matrix.
CenteredMatrix center_columns(const Matrix& m);

/// n x k indicator matrix. Throws InputError when a label is >= k.
Matrix one_hot(std::span<const int> labels, std::size_t k);

/// Regularized CCA between x (n x d) and y (n x k).
///
/// Both blocks are centered, covariances use divisor n-1, and gamma is
/// added to both diagonals. Inverse square roots come from a symmetric
/// eigendecomposition with eigenvalues clamped at 1e-12, and the
/// correlations are the singular values of Sxx^-1/2 Sxy Syy^-1/2.
/// Directions with correlation <= 1e-9 are dropped, except that the
/// leading direction is always kept. The rank never exceeds
/// min(d, k, n-1).
///
/// Throws DegenerateInputError when n < 2 and InputError on shape
/// mismatch, negative gamma or non-finite entries.
CcaResult canonical_correlation(const Matrix& x, const Matrix& y, double gamma,
                                RidgeScale scale = RidgeScale::kAbsolute);

}  // namespace ccf
