#include "dsub/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dsub/exchange.hpp"
#include "dsub/linalg.hpp"

namespace dsub::metrics {

EfficiencyReport efficiency(const DataMatrix& data, const Selection& sel) {
  const linalg::MomentState state = linalg::build_moment(data, sel);
  const auto k = static_cast<double>(sel.size());
  const auto dim = static_cast<double>(state.dim());
  EfficiencyReport report;
  report.log_det_q = state.log_det();
  report.log_gen_variance = exchange::log_generalized_variance(
      state.log_det(), data.p(), static_cast<Index>(sel.size()));
  report.gen_variance = std::exp(report.log_gen_variance);
  report.d_eff = std::exp(state.log_det() / dim) / k;
  report.a_eff = dim / (k * state.trace_inverse());
  return report;
}

MseReport mse(const Vector& beta_hat, const Vector& beta_true) {
  if (beta_hat.size() != beta_true.size() || beta_hat.size() < 1) {
    throw std::invalid_argument("mse: coefficient vectors differ in length");
  }
  const Index p = beta_hat.size() - 1;
  const double d0 = beta_hat(0) - beta_true(0);
  return {d0 * d0, (beta_hat.tail(p) - beta_true.tail(p)).squaredNorm()};
}

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

Hull2d hull_2d(std::vector<Point2> points) {
  if (points.empty()) {
    throw std::invalid_argument("hull_2d needs at least one point");
  }
  std::sort(points.begin(), points.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  Hull2d hull;
  if (points.size() < 3) {
    hull.vertices = points;
    return hull;
  }

  std::vector<Point2> chain(2 * points.size());
  std::size_t m = 0;
  for (const Point2& pt : points) {
    while (m >= 2 && cross(chain[m - 2], chain[m - 1], pt) <= 0.0) --m;
    chain[m++] = pt;
  }
  const std::size_t lower = m + 1;
  for (std::size_t i = points.size() - 1; i-- > 0;) {
    while (m >= lower && cross(chain[m - 2], chain[m - 1], points[i]) <= 0.0) --m;
    chain[m++] = points[i];
  }
  chain.resize(m - 1);  // last point repeats the first
  hull.vertices = std::move(chain);

  double twice_area = 0.0;
  for (std::size_t i = 0; i < hull.vertices.size(); ++i) {
    const Point2& a = hull.vertices[i];
    const Point2& b = hull.vertices[(i + 1) % hull.vertices.size()];
    twice_area += a.x * b.y - b.x * a.y;
  }
  hull.area = 0.5 * std::abs(twice_area);
  return hull;
}

}  // namespace dsub::metrics
