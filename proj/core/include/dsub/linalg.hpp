#pragma once

#include <span>

#include "dsub/types.hpp"

namespace dsub::linalg {

/// z = (1, x^T)^T for one covariate row. Entry 0 is exactly 1.
class AugmentedRow {
 public:
  explicit AugmentedRow(const Eigen::Ref<const Vector>& covariates);

  static AugmentedRow of_row(const DataMatrix& data, Index row);

  const Vector& values() const { return values_; }
  Index size() const { return values_.size(); }

 private:
  Vector values_;
};

enum class Direction { add, remove };

/// Q = sum over selected rows of z z^T (sigma = 1), carried together with
/// its lower Cholesky factor and log-determinant.
class MomentState {
 public:
  /// Factorizes q. Throws SingularMatrixError if q is not numerically
  /// positive definite.
  MomentState(Matrix q, Index count);

  Index dim() const { return q_.rows(); }
  Index count() const { return count_; }
  const Matrix& q() const { return q_; }
  const Matrix& chol() const { return chol_; }
  double log_det() const { return log_det_; }

  /// Q <- Q + zz^T or Q - zz^T in O(dim^2). A failed downdate throws
  /// DowndateError and leaves the state untouched.
  void rank_one_update(const AugmentedRow& z, Direction direction);

  /// log det(Q - out out^T + in in^T) - log det(Q), without mutation.
  /// Returns -infinity when the swapped matrix is singular.
  double swap_delta_logdet(const AugmentedRow& out,
                           const AugmentedRow& in) const;

  /// trace(Q^{-1}) = ||L^{-1}||_F^2.
  double trace_inverse() const;

  /// Solves Q x = b through the factor.
  Vector solve(const Eigen::Ref<const Vector>& b) const;

  /// L^{-1} v (forward substitution).
  Vector forward_solve(const Eigen::Ref<const Vector>& v) const;

  /// Recomputes the factor from q; drops accumulated update round-off.
  void refactorize();

 private:
  void factorize();

  Matrix q_;
  Matrix chol_;
  double log_det_ = 0.0;
  Index count_ = 0;
};

/// Q_Sub over the selected rows. Throws SingularMatrixError when the rows do
/// not span (p+1) dimensions, std::invalid_argument on bad indices.
MomentState build_moment(const DataMatrix& data, std::span<const Index> rows);
MomentState build_moment(const DataMatrix& data, const Selection& sel);

/// Means and population covariance (divisor k) of the selected covariates.
struct CovarianceSummary {
  Vector means;
  Matrix cov;
};

CovarianceSummary covariance_summary(const DataMatrix& data,
                                     std::span<const Index> rows);
CovarianceSummary covariance_summary(const DataMatrix& data,
                                     const Selection& sel);

/// 2 * sum(log diag(L)) for a lower-triangular factor.
double log_det_from_factor(const Matrix& chol);

}  // namespace dsub::linalg
