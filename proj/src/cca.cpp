#include "ccf/cca.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccf/errors.hpp"

namespace ccf {
namespace {

constexpr double kEigenFloor = 1e-12;
constexpr double kRankTolerance = 1e-9;

void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) {
    throw InputError(std::string("canonical_correlation: ") + name + " contains non-finite values");
  }
}

// Symmetric inverse square root with eigenvalues floored at kEigenFloor.
Matrix inverse_sqrt(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  Vector values = eig.eigenvalues().cwiseMax(kEigenFloor).cwiseSqrt().cwiseInverse();
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

double ridge_for(const Matrix& cov, double gamma, RidgeScale scale) {
  if (scale == RidgeScale::kAbsolute) return gamma;
  return gamma * cov.diagonal().mean();
}

}  // namespace

CenteredMatrix center_columns(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw InputError("center_columns: matrix is empty");
  }
  CenteredMatrix out;
  out.means = m.colwise().mean().transpose();
  out.centered = m.rowwise() - out.means.transpose();
  return out;
}

Matrix one_hot(std::span<const int> labels, std::size_t k) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw InputError("one_hot: label " + std::to_string(label) + " at row " + std::to_string(i) +
                       " is outside [0, " + std::to_string(k) + ")");
    }
    out(static_cast<Eigen::Index>(i), label) = 1.0;
  }
  return out;
}

CcaResult canonical_correlation(const Matrix& x, const Matrix& y, double gamma, RidgeScale scale) {
  if (x.rows() != y.rows()) {
    throw InputError("canonical_correlation: x has " + std::to_string(x.rows()) + " rows but y has " +
                     std::to_string(y.rows()));
  }
  if (x.cols() == 0 || y.cols() == 0) {
    throw InputError("canonical_correlation: x and y need at least one column");
  }
  if (x.rows() < 2) {
    throw DegenerateInputError("canonical_correlation: need at least 2 samples, got " +
                               std::to_string(x.rows()));
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InputError("canonical_correlation: gamma must be finite and >= 0");
  }
  require_finite(x, "x");
  require_finite(y, "y");

  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::Index k = y.cols();
  const Matrix xc = center_columns(x).centered;
  const Matrix yc = center_columns(y).centered;
  const double divisor = static_cast<double>(n - 1);

  Matrix sxx = (xc.transpose() * xc) / divisor;
  Matrix syy = (yc.transpose() * yc) / divisor;
  const Matrix sxy = (xc.transpose() * yc) / divisor;
  sxx.diagonal().array() += ridge_for(sxx, gamma, scale);
  syy.diagonal().array() += ridge_for(syy, gamma, scale);

  const Matrix wx = inverse_sqrt(sxx);
  const Matrix wy = inverse_sqrt(syy);
  const Matrix whitened = wx * sxy * wy;

  Eigen::JacobiSVD<Matrix> svd(whitened, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& singular = svd.singularValues();

  const Eigen::Index max_rank = std::min({d, k, n - 1});
  Eigen::Index rank = 0;
  while (rank < max_rank && singular(rank) > kRankTolerance) ++rank;
  rank = std::max<Eigen::Index>(rank, 1);

  CcaResult result;
  result.rank = static_cast<std::size_t>(rank);
  result.projections_x = wx * svd.matrixU().leftCols(rank);
  result.projections_y = wy * svd.matrixV().leftCols(rank);
  result.correlations.resize(result.rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    result.correlations[static_cast<std::size_t>(j)] = std::clamp(singular(j), 0.0, 1.0);

    Eigen::Index arg = 0;
    result.projections_x.col(j).cwiseAbs().maxCoeff(&arg);
    if (result.projections_x(arg, j) < 0.0) {
      result.projections_x.col(j) *= -1.0;
      result.projections_y.col(j) *= -1.0;
    }
  }
  return result;
}

}  // namespace ccf
