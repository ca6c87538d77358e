#include <cmath>
#include <random>

#include <doctest.h>
#include <Eigen/Eigenvalues>

#include "dsub/linalg.hpp"
#include "support/oracles.hpp"

using namespace dsub;
using linalg::AugmentedRow;
using linalg::Direction;
using linalg::MomentState;

namespace {

DataMatrix column(std::initializer_list<double> values) {
  DataMatrix d{Matrix(static_cast<Index>(values.size()), 1), std::nullopt};
  Index i = 0;
  for (double v : values) d.x(i++, 0) = v;
  return d;
}

AugmentedRow aug(std::initializer_list<double> covariates) {
  Vector v(static_cast<Index>(covariates.size()));
  Index i = 0;
  for (double c : covariates) v(i++) = c;
  return AugmentedRow(v);
}

}  // namespace

TEST_CASE("augmented row carries a leading one") {
  const AugmentedRow z = aug({3.0, -2.0});
  CHECK(z.size() == 3);
  CHECK(z.values()(0) == 1.0);
  CHECK(z.values()(2) == -2.0);
}

TEST_CASE("build_moment on symmetric pair") {
  const DataMatrix d = column({1.0, -1.0});
  const std::vector<Index> rows{0, 1};
  const MomentState s = linalg::build_moment(d, rows);
  CHECK(s.q().isApprox(2.0 * Matrix::Identity(2, 2)));
  CHECK(s.log_det() == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  CHECK(s.count() == 2);
}

TEST_CASE("build_moment rejects a rank-deficient selection") {
  const DataMatrix d = column({0.0, 1.0});
  const std::vector<Index> one{0};
  CHECK_THROWS_AS(linalg::build_moment(d, one), SingularMatrixError);

  const DataMatrix repeated = column({1.0, 1.0});
  const std::vector<Index> both{0, 1};
  CHECK_THROWS_AS(linalg::build_moment(repeated, both), SingularMatrixError);
}

TEST_CASE("build_moment rejects invalid indices") {
  const DataMatrix d = column({0.0, 1.0});
  const std::vector<Index> dup{1, 1};
  CHECK_THROWS_AS(linalg::build_moment(d, dup), std::invalid_argument);
  const std::vector<Index> out{0, 2};
  CHECK_THROWS_AS(linalg::build_moment(d, out), std::invalid_argument);
}

TEST_CASE("build_moment on the 2^2 factorial") {
  const DataMatrix d{oracle::full_factorial(2), std::nullopt};
  const std::vector<Index> rows{0, 1, 2, 3};
  const MomentState s = linalg::build_moment(d, rows);
  CHECK(s.q().isApprox(4.0 * Matrix::Identity(3, 3)));
  CHECK(s.log_det() == doctest::Approx(3.0 * std::log(4.0)).epsilon(1e-14));
  CHECK(s.trace_inverse() == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("rank-one add follows the determinant lemma") {
  MomentState s(Matrix::Identity(2, 2), 0);
  CHECK(s.log_det() == 0.0);
  // z = (1, 0)
  s.rank_one_update(aug({0.0}), Direction::add);
  Matrix want(2, 2);
  want << 2.0, 0.0, 0.0, 1.0;
  CHECK((s.q() - want).norm() < 1e-15);
  CHECK(s.log_det() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK((s.chol() * s.chol().transpose() - want).norm() < 1e-14);
}

TEST_CASE("update then downdate restores the state") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    const Index p = 1 + trial % 6;
    MomentState s(oracle::random_spd(rng, p + 1), 10);
    const MomentState before = s;
    Vector x(p);
    for (Index j = 0; j < p; ++j) x(j) = normal(rng);
    const AugmentedRow z(x);
    s.rank_one_update(z, Direction::add);
    s.rank_one_update(z, Direction::remove);
    CHECK((s.q() - before.q()).norm() < 1e-10);
    CHECK((s.chol() - before.chol()).norm() < 1e-10);
    CHECK(s.count() == before.count());
  }
}

TEST_CASE("rank-one update matches refactorization") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const Index p = 1 + trial % 8;
    const Matrix q = oracle::random_spd(rng, p + 1);
    MomentState s(q, 5);
    Vector x(p);
    for (Index j = 0; j < p; ++j) x(j) = normal(rng);
    const AugmentedRow z(x);
    const double lemma = std::log1p(z.values().dot(q.ldlt().solve(z.values())));
    s.rank_one_update(z, Direction::add);
    const Matrix q2 = q + z.values() * z.values().transpose();
    CHECK(oracle::rel_err(s.log_det(), std::log(oracle::det(q2))) < 1e-8);
    CHECK(std::abs(s.log_det() - std::log(oracle::det(q)) - lemma) < 1e-8);
    CHECK((s.chol() * s.chol().transpose() - q2).norm() / q2.norm() < 1e-8);
  }
}

TEST_CASE("downdate of a row never added is reported") {
  MomentState s(Matrix::Identity(2, 2), 1);
  const MomentState before = s;
  CHECK_THROWS_AS(s.rank_one_update(aug({3.0}), Direction::remove), DowndateError);
  CHECK(s.q() == before.q());
  CHECK(s.chol() == before.chol());
}

TEST_CASE("swap_delta_logdet") {
  SUBCASE("identity swap is exactly zero") {
    MomentState s(2.0 * Matrix::Identity(2, 2), 2);
    CHECK(s.swap_delta_logdet(aug({1.0}), aug({1.0})) == 0.0);
  }
  SUBCASE("p=1 hand example: +1 out, +2 in gives ln(9/4)") {
    const DataMatrix d = column({-1.0, 1.0});
    const std::vector<Index> rows{0, 1};
    const MomentState s = linalg::build_moment(d, rows);
    Matrix after(2, 2);
    after << 2.0, 1.0, 1.0, 5.0;
    CHECK(oracle::det(after) == doctest::Approx(9.0));
    const double delta = s.swap_delta_logdet(aug({1.0}), aug({2.0}));
    CHECK(delta == doctest::Approx(std::log(9.0 / 4.0)).epsilon(1e-14));
  }
  SUBCASE("removal that leaves a singular matrix is inadmissible") {
    const DataMatrix d = column({-1.0, 1.0});
    const std::vector<Index> rows{0, 1};
    const MomentState s = linalg::build_moment(d, rows);
    // Two rows in two dimensions: dropping either one leaves rank one.
    const double bad = s.swap_delta_logdet(aug({-1.0}), aug({1.0}));
    CHECK(bad == -std::numeric_limits<double>::infinity());
  }
  SUBCASE("matches a full rebuild on random instances") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
      const Index p = 1 + trial % 5;
      const Index k = p + 2 + trial % (20 - p - 1);
      const Index n = k + 5;
      const DataMatrix d = oracle::random_data(rng, n, p);
      std::vector<Index> rows = oracle::random_rows(rng, n, k);
      const MomentState s = linalg::build_moment(d, rows);
      std::vector<Index> outside;
      for (Index i = 0; i < n; ++i) {
        if (std::find(rows.begin(), rows.end(), i) == rows.end()) outside.push_back(i);
      }
      const std::size_t slot = static_cast<std::size_t>(trial) % rows.size();
      const Index in_row = outside[static_cast<std::size_t>(trial) % outside.size()];
      const double delta = s.swap_delta_logdet(AugmentedRow::of_row(d, rows[slot]),
                                               AugmentedRow::of_row(d, in_row));
      const double before = std::log(oracle::det(oracle::moment_matrix(d, rows)));
      rows[slot] = in_row;
      const double after = std::log(oracle::det(oracle::moment_matrix(d, rows)));
      CHECK(std::abs(delta - (after - before)) <= 1e-8 * std::max(1.0, std::abs(after - before)));
    }
  }
}

TEST_CASE("trace_inverse") {
  Matrix q(2, 2);
  q << 2.0, 0.0, 0.0, 4.0;
  CHECK(MomentState(q, 2).trace_inverse() == doctest::Approx(0.75).epsilon(1e-15));

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const Index d = 2 + trial % 6;
    const Matrix m = oracle::random_spd(rng, d);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    const double want = eig.eigenvalues().cwiseInverse().sum();
    CHECK(oracle::rel_err(MomentState(m, 0).trace_inverse(), want) < 1e-8);
  }
}

TEST_CASE("Cholesky determinant equals cofactor expansion") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = 2 + trial % 4;  // p <= 4
    const Matrix m = oracle::random_spd(rng, d);
    const MomentState s(m, 0);
    double prod = 1.0;
    for (Index j = 0; j < d; ++j) prod *= s.chol()(j, j) * s.chol()(j, j);
    CHECK(oracle::rel_err(prod, oracle::cofactor_det(m)) < 1e-10);
    CHECK(oracle::rel_err(std::exp(s.log_det()), oracle::cofactor_det(m)) < 1e-10);
  }
}

TEST_CASE("covariance_summary") {
  SUBCASE("p=1 symmetric pair") {
    const DataMatrix d = column({-1.0, 1.0});
    const std::vector<Index> rows{0, 1};
    const auto c = linalg::covariance_summary(d, rows);
    CHECK(c.means(0) == 0.0);
    CHECK(c.cov(0, 0) == 1.0);
  }
  SUBCASE("2^2 factorial") {
    const DataMatrix d{oracle::full_factorial(2), std::nullopt};
    const std::vector<Index> rows{0, 1, 2, 3};
    const auto c = linalg::covariance_summary(d, rows);
    CHECK(c.means.norm() == 0.0);
    CHECK((c.cov - Matrix::Identity(2, 2)).norm() == 0.0);
  }
  SUBCASE("needs two rows") {
    const DataMatrix d = column({-1.0, 1.0});
    const std::vector<Index> rows{0};
    CHECK_THROWS_AS(linalg::covariance_summary(d, rows), std::invalid_argument);
  }
  SUBCASE("generalized variance identity det(Q) = k^(p+1) det(cov)") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
      const Index p = 1 + trial % 6;
      const Index k = p + 1 + trial % 15;
      const DataMatrix d = oracle::random_data(rng, k + 10, p, 3.0);
      const std::vector<Index> rows = oracle::random_rows(rng, d.n(), k);
      const auto c = linalg::covariance_summary(d, rows);
      CHECK((c.cov - oracle::covariance(d, rows)).cwiseAbs().maxCoeff() < 1e-10);
      const MomentState s = linalg::build_moment(d, rows);
      const double lhs = s.log_det();
      const double rhs = static_cast<double>(p + 1) * std::log(static_cast<double>(k)) +
                         std::log(oracle::det(c.cov));
      CHECK(std::abs(std::expm1(lhs - rhs)) < 1e-8);
    }
  }
}
