#pragma once

// Independent reference computations for the test suites. Nothing here uses
// the Cholesky factor, rank-one updates or determinant-lemma shortcuts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dsub/types.hpp"

namespace oracle {

using dsub::DataMatrix;
using dsub::Index;
using dsub::Matrix;
using dsub::Vector;

inline Matrix moment_matrix(const DataMatrix& data, const std::vector<Index>& rows) {
  const Index d = data.p() + 1;
  Matrix q = Matrix::Zero(d, d);
  for (Index r : rows) {
    Vector z(d);
    z(0) = 1.0;
    z.tail(data.p()) = data.x.row(r).transpose();
    q += z * z.transpose();
  }
  return q;
}

/// Partial-pivot LU determinant.
inline double det(const Matrix& m) { return m.fullPivLu().determinant(); }

/// Laplace expansion along the first row; for tiny matrices only.
inline double cofactor_det(const Matrix& m) {
  const Index n = m.rows();
  if (n == 1) return m(0, 0);
  double acc = 0.0;
  for (Index c = 0; c < n; ++c) {
    Matrix minor(n - 1, n - 1);
    for (Index i = 1; i < n; ++i) {
      Index cc = 0;
      for (Index j = 0; j < n; ++j) {
        if (j == c) continue;
        minor(i - 1, cc++) = m(i, j);
      }
    }
    acc += ((c % 2 == 0) ? 1.0 : -1.0) * m(0, c) * cofactor_det(minor);
  }
  return acc;
}

/// Population covariance (divisor k) by its definition.
inline Matrix covariance(const DataMatrix& data, const std::vector<Index>& rows) {
  const Index p = data.p();
  const double k = static_cast<double>(rows.size());
  Matrix cov = Matrix::Zero(p, p);
  for (Index a = 0; a < p; ++a) {
    for (Index b = 0; b < p; ++b) {
      double ma = 0.0, mb = 0.0;
      for (Index r : rows) {
        ma += data.x(r, a);
        mb += data.x(r, b);
      }
      ma /= k;
      mb /= k;
      double s = 0.0;
      for (Index r : rows) s += (data.x(r, a) - ma) * (data.x(r, b) - mb);
      cov(a, b) = s / k;
    }
  }
  return cov;
}

/// Generalized variance det(cov), zero for degenerate selections.
inline double gen_variance(const DataMatrix& data, const std::vector<Index>& rows) {
  return det(covariance(data, rows));
}

/// Visits every k-subset of {0..n-1} in lexicographic order.
inline void for_each_subset(Index n, Index k,
                            const std::function<void(const std::vector<Index>&)>& fn) {
  std::vector<Index> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), Index{0});
  while (true) {
    fn(idx);
    Index i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

/// Largest det(Q) over all k-subsets.
inline double best_subset_det(const DataMatrix& data, Index k) {
  double best = -std::numeric_limits<double>::infinity();
  for_each_subset(data.n(), k, [&](const std::vector<Index>& rows) {
    best = std::max(best, det(moment_matrix(data, rows)));
  });
  return best;
}

// Per-slot argmax oracle: slot i takes whichever of its occupant and the
// current candidate set maximizes det(Q); determinants by LU.
inline std::vector<Index> per_slot_argmax(const DataMatrix& d, std::vector<Index> sel,
                                          std::vector<Index> pool) {
  for (std::size_t i = 0; i < sel.size(); ++i) {
    double best = det(moment_matrix(d, sel));
    std::size_t best_w = pool.size();
    for (std::size_t w = 0; w < pool.size(); ++w) {
      std::vector<Index> trial = sel;
      trial[i] = pool[w];
      const double v = det(moment_matrix(d, trial));
      if (v > best * (1.0 + 1e-12)) {
        best = v;
        best_w = w;
      }
    }
    if (best_w < pool.size()) std::swap(sel[i], pool[best_w]);
  }
  return sel;
}

/// Literal OSS greedy on data already in [-1,1]: recomputes the full loss
/// for every candidate at every step, no incremental accumulation.
inline std::vector<Index> oss_greedy(const DataMatrix& data, Index k, bool signed_term) {
  const Index n = data.n();
  const Index p = data.p();
  auto sign_neg = [](double v) { return v < 0.0; };
  auto term = [&](Index a, Index b) {
    double agree = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (sign_neg(data.x(a, j)) == sign_neg(data.x(b, j))) agree += 1.0;
    }
    const double t = signed_term ? 2.0 * agree - static_cast<double>(p) : agree;
    return static_cast<double>(p) - 0.5 * data.x.row(a).squaredNorm() -
           0.5 * data.x.row(b).squaredNorm() + t;
  };
  std::vector<Index> chosen;
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  Index first = 0;
  for (Index i = 1; i < n; ++i) {
    if (data.x.row(i).squaredNorm() > data.x.row(first).squaredNorm()) first = i;
  }
  chosen.push_back(first);
  used[static_cast<std::size_t>(first)] = 1;
  while (static_cast<Index>(chosen.size()) < k) {
    Index best = -1;
    double best_loss = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      double loss = 0.0;
      for (Index s : chosen) loss += term(i, s) * term(i, s);
      if (loss < best_loss) {
        best_loss = loss;
        best = i;
      }
    }
    chosen.push_back(best);
    used[static_cast<std::size_t>(best)] = 1;
  }
  return chosen;
}

/// Random n x p covariates from a normal with optional equicorrelation.
inline DataMatrix random_data(std::mt19937_64& rng, Index n, Index p, double spread = 1.0) {
  std::normal_distribution<double> normal(0.0, spread);
  DataMatrix d{Matrix(n, p), std::nullopt};
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) d.x(i, j) = normal(rng);
  }
  return d;
}

/// k distinct random rows.
inline std::vector<Index> random_rows(std::mt19937_64& rng, Index n, Index k) {
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(k));
  return all;
}

/// Random symmetric positive-definite matrix.
inline Matrix random_spd(std::mt19937_64& rng, Index d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) a(i, j) = normal(rng);
  }
  return a * a.transpose() + static_cast<double>(d) * Matrix::Identity(d, d);
}

/// Two-level full factorial in p factors, rows in binary counting order.
inline Matrix full_factorial(Index p) {
  const Index rows = Index{1} << p;
  Matrix m(rows, p);
  for (Index r = 0; r < rows; ++r) {
    for (Index j = 0; j < p; ++j) m(r, j) = ((r >> j) & 1) ? 1.0 : -1.0;
  }
  return m;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace oracle
