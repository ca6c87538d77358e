#pragma once

#include <vector>

#include "dsub/types.hpp"

namespace dsub::metrics {

struct EfficiencyReport {
  /// det of the population covariance of the selected covariates.
  double gen_variance = 0.0;
  double log_gen_variance = 0.0;
  /// det(Q)^{1/(p+1)} / k
  double d_eff = 0.0;
  /// (p+1) / (k trace(Q^{-1}))
  double a_eff = 0.0;
  double log_det_q = 0.0;
};

/// Throws SingularMatrixError for a rank-deficient selection. The <= 1 bound
/// on both efficiencies only holds when covariates lie in [-1,1].
EfficiencyReport efficiency(const DataMatrix& data, const Selection& sel);

struct MseReport {
  double mse_intercept = 0.0;
  double mse_slopes = 0.0;
};

/// beta vectors are (intercept, slopes...). Throws std::invalid_argument on
/// a length mismatch.
MseReport mse(const Vector& beta_hat, const Vector& beta_true);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Hull2d {
  /// Counterclockwise, starting from the lowest-x (then lowest-y) vertex.
  /// Collinear boundary points are dropped.
  std::vector<Point2> vertices;
  double area = 0.0;
};

/// Andrew's monotone chain plus the shoelace area.
Hull2d hull_2d(std::vector<Point2> points);

/// Signed doubled area of triangle (o, a, b); positive for a left turn.
double cross(const Point2& o, const Point2& a, const Point2& b);

}  // namespace dsub::metrics
