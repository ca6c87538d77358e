#include "dsub/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include <Eigen/Cholesky>

namespace dsub {

std::string_view to_string(SelectionSource source) {
  switch (source) {
    case SelectionSource::uniform:
      return "uniform";
    case SelectionSource::iboss:
      return "iboss";
    case SelectionSource::oss:
      return "oss";
    case SelectionSource::custom:
      return "custom";
  }
  return "custom";
}

void validate_selection(const Selection& sel, Index n) {
  std::unordered_set<Index> seen;
  seen.reserve(sel.indices.size());
  for (Index i : sel.indices) {
    if (i < 0 || i >= n) {
      throw std::invalid_argument("selection index " + std::to_string(i) +
                                  " out of range [0, " + std::to_string(n) +
                                  ")");
    }
    if (!seen.insert(i).second) {
      throw std::invalid_argument("selection index " + std::to_string(i) +
                                  " repeated");
    }
  }
}

}  // namespace dsub

namespace dsub::linalg {

namespace {

// Smallest admissible ratio L_jj^2 / q_jj, i.e. the share of a coordinate's
// second moment not explained by earlier coordinates.
constexpr double kPivotTolerance = 1e-12;

}  // namespace

AugmentedRow::AugmentedRow(const Eigen::Ref<const Vector>& covariates)
    : values_(covariates.size() + 1) {
  values_(0) = 1.0;
  values_.tail(covariates.size()) = covariates;
}

AugmentedRow AugmentedRow::of_row(const DataMatrix& data, Index row) {
  return AugmentedRow(data.x.row(row).transpose());
}

MomentState::MomentState(Matrix q, Index count)
    : q_(std::move(q)), count_(count) {
  if (q_.rows() != q_.cols() || q_.rows() == 0) {
    throw std::invalid_argument("moment matrix must be square and non-empty");
  }
  factorize();
}

void MomentState::factorize() {
  Eigen::LLT<Matrix> llt(q_);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("moment matrix is not positive definite");
  }
  chol_ = llt.matrixL();
  for (Index j = 0; j < dim(); ++j) {
    const double pivot = chol_(j, j) * chol_(j, j);
    if (!(pivot > kPivotTolerance * q_(j, j))) {
      throw SingularMatrixError("moment matrix is numerically singular");
    }
  }
  log_det_ = log_det_from_factor(chol_);
}

void MomentState::refactorize() { factorize(); }

void MomentState::rank_one_update(const AugmentedRow& z, Direction direction) {
  const Index d = dim();
  if (z.size() != d) {
    throw std::invalid_argument("augmented row dimension mismatch");
  }
  Matrix l = chol_;
  Vector w = z.values();
  const double sign = direction == Direction::add ? 1.0 : -1.0;

  // Givens rotations for an update, hyperbolic rotations for a downdate.
  for (Index k = 0; k < d; ++k) {
    const double lkk = l(k, k);
    const double r2 = lkk * lkk + sign * w(k) * w(k);
    if (!(r2 > kPivotTolerance * lkk * lkk)) {
      throw DowndateError("rank-one downdate breaks positive definiteness");
    }
    const double r = std::sqrt(r2);
    const double c = r / lkk;
    const double s = w(k) / lkk;
    l(k, k) = r;
    if (k + 1 < d) {
      const Index m = d - k - 1;
      l.col(k).tail(m) = (l.col(k).tail(m) + sign * s * w.tail(m)) / c;
      w.tail(m) = c * w.tail(m) - s * l.col(k).tail(m);
    }
  }

  chol_ = std::move(l);
  q_.noalias() += sign * z.values() * z.values().transpose();
  log_det_ = log_det_from_factor(chol_);
  count_ += direction == Direction::add ? 1 : -1;
}

Vector MomentState::forward_solve(const Eigen::Ref<const Vector>& v) const {
  return chol_.triangularView<Eigen::Lower>().solve(v);
}

Vector MomentState::solve(const Eigen::Ref<const Vector>& b) const {
  Vector y = forward_solve(b);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(y);
  return y;
}

double MomentState::swap_delta_logdet(const AugmentedRow& out,
                                      const AugmentedRow& in) const {
  if (out.size() != dim() || in.size() != dim()) {
    throw std::invalid_argument("augmented row dimension mismatch");
  }
  if (out.values() == in.values()) {
    return 0.0;
  }
  const Vector u = forward_solve(out.values());
  const Vector v = forward_solve(in.values());
  const double alpha = u.squaredNorm();
  const double beta = v.squaredNorm();
  const double gamma = u.dot(v);
  // det(Q - aa^T + bb^T) / det(Q) = (1 - a'Q^-1 a)(1 + b'Q^-1 b) + (a'Q^-1 b)^2
  const double ratio_minus_one = beta - alpha - alpha * beta + gamma * gamma;
  if (!(1.0 + ratio_minus_one > kPivotTolerance)) {
    return -std::numeric_limits<double>::infinity();
  }
  return std::log1p(ratio_minus_one);
}

double MomentState::trace_inverse() const {
  const Matrix inv_l = chol_.triangularView<Eigen::Lower>().solve(
      Matrix::Identity(dim(), dim()));
  return inv_l.squaredNorm();
}

double log_det_from_factor(const Matrix& chol) {
  double acc = 0.0;
  for (Index j = 0; j < chol.rows(); ++j) {
    acc += std::log(chol(j, j));
  }
  return 2.0 * acc;
}

MomentState build_moment(const DataMatrix& data, std::span<const Index> rows) {
  if (rows.empty()) {
    throw std::invalid_argument("build_moment needs at least one row");
  }
  Selection probe{{rows.begin(), rows.end()}, SelectionSource::custom};
  validate_selection(probe, data.n());

  const Index d = data.p() + 1;
  Matrix z(static_cast<Index>(rows.size()), d);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    z(static_cast<Index>(r), 0) = 1.0;
    z.row(static_cast<Index>(r)).tail(data.p()) = data.x.row(rows[r]);
  }
  Matrix q = Matrix::Zero(d, d);
  q.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
  q.triangularView<Eigen::StrictlyUpper>() = q.transpose();
  return MomentState(std::move(q), static_cast<Index>(rows.size()));
}

MomentState build_moment(const DataMatrix& data, const Selection& sel) {
  return build_moment(data, std::span<const Index>(sel.indices));
}

CovarianceSummary covariance_summary(const DataMatrix& data,
                                     std::span<const Index> rows) {
  if (rows.size() < 2) {
    throw std::invalid_argument("covariance_summary needs at least two rows");
  }
  const Index p = data.p();
  const double k = static_cast<double>(rows.size());
  Vector means = Vector::Zero(p);
  for (Index r : rows) {
    means += data.x.row(r).transpose();
  }
  means /= k;
  Matrix cov = Matrix::Zero(p, p);
  for (Index r : rows) {
    const Vector centered = data.x.row(r).transpose() - means;
    cov.noalias() += centered * centered.transpose();
  }
  cov /= k;
  return {std::move(means), std::move(cov)};
}

CovarianceSummary covariance_summary(const DataMatrix& data,
                                     const Selection& sel) {
  return covariance_summary(data, std::span<const Index>(sel.indices));
}

}  // namespace dsub::linalg
