#include "dsub/exchange.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_set>

#include "dsub/linalg.hpp"

namespace dsub::exchange {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Forward substitution L v = (1, x^T)^T into a caller-owned buffer.
void forward_augmented(const Matrix& chol, const DataMatrix& data, Index row,
                       Vector& v) {
  const Index d = chol.rows();
  for (Index i = 0; i < d; ++i) {
    double acc = i == 0 ? 1.0 : data.x(row, i - 1);
    for (Index j = 0; j < i; ++j) {
      acc -= chol(i, j) * v(j);
    }
    v(i) = acc / chol(i, i);
  }
}

}  // namespace

double log_generalized_variance(double log_det_q, Index p, Index k) {
  return log_det_q - static_cast<double>(p + 1) * std::log(static_cast<double>(k));
}

CandidatePool candidate_pool(const DataMatrix& data, const Selection& sel,
                             Index K) {
  if (K < 2) {
    throw std::invalid_argument("candidates per covariate K must be at least 2, got " +
                                std::to_string(K));
  }
  validate_selection(sel, data.n());
  std::vector<char> selected(static_cast<std::size_t>(data.n()), 0);
  for (Index i : sel.indices) selected[static_cast<std::size_t>(i)] = 1;

  std::vector<Index> remaining;
  remaining.reserve(static_cast<std::size_t>(data.n()) - sel.size());
  for (Index i = 0; i < data.n(); ++i) {
    if (!selected[static_cast<std::size_t>(i)]) remaining.push_back(i);
  }
  if (remaining.empty()) {
    throw std::invalid_argument("candidate pool would be empty: every row is selected");
  }

  const auto n_rem = static_cast<Index>(remaining.size());
  const Index low_take = std::min<Index>((K + 1) / 2, n_rem);
  const Index high_take = std::min<Index>(K / 2, n_rem);

  std::vector<Index> raw;
  raw.reserve(static_cast<std::size_t>((low_take + high_take) * data.p()));
  std::vector<Index> work;
  for (Index j = 0; j < data.p(); ++j) {
    const auto column = data.x.col(j);
    auto ascending = [&](Index a, Index b) {
      return column(a) < column(b) || (column(a) == column(b) && a < b);
    };
    work = remaining;
    auto low_end = work.begin() + low_take;
    std::nth_element(work.begin(), low_end, work.end(), ascending);
    std::sort(work.begin(), low_end, ascending);
    raw.insert(raw.end(), work.begin(), low_end);

    work = remaining;
    auto high_begin = work.end() - high_take;
    std::nth_element(work.begin(), high_begin, work.end(), ascending);
    std::sort(high_begin, work.end(), ascending);
    raw.insert(raw.end(), high_begin, work.end());
  }

  CandidatePool pool;
  pool.capacity_K = K;
  std::unordered_set<Index> seen;
  seen.reserve(raw.size());
  for (Index i : raw) {
    if (seen.insert(i).second) pool.indices.push_back(i);
  }
  return pool;
}

ExchangeResult run_exchange(const DataMatrix& data, const Selection& seed,
                            CandidatePool pool, bool scan_all, int iterations,
                            bool early_stop) {
  const auto start = Clock::now();
  if (iterations < 1) {
    throw std::invalid_argument("iterations must be at least 1");
  }
  validate_selection(seed, data.n());
  {
    std::unordered_set<Index> in_seed(seed.indices.begin(), seed.indices.end());
    for (Index f : pool.indices) {
      if (f < 0 || f >= data.n() || in_seed.count(f) != 0) {
        throw std::invalid_argument("candidate pool must hold unselected rows only");
      }
    }
  }

  ExchangeResult result{seed, std::move(pool), {}};
  std::vector<Index>& s = result.selection.indices;
  std::vector<Index>& f = result.pool.indices;
  ExchangeTrace& trace = result.trace;

  const Index p = data.p();
  const auto k = static_cast<Index>(s.size());
  linalg::MomentState state = linalg::build_moment(data, result.selection);
  auto log_v = [&] { return log_generalized_variance(state.log_det(), p, k); };
  trace.initial_log_v = log_v();

  Vector u(p + 1);
  Vector v(p + 1);

  for (int iter = 1; iter <= iterations; ++iter) {
    int commits_this_pass = 0;
    for (Index i = 0; i < k; ++i) {
      SlotRecord record;
      record.iteration = iter;
      record.slot = i;
      record.log_v_before = log_v();

      forward_augmented(state.chol(), data, s[static_cast<std::size_t>(i)], u);
      double alpha = u.squaredNorm();

      for (std::size_t w = 0; w < f.size(); ++w) {
        forward_augmented(state.chol(), data, f[w], v);
        const double beta = v.squaredNorm();
        const double gamma = u.dot(v);
        const double ratio_minus_one = beta - alpha - alpha * beta + gamma * gamma;
        if (!(1.0 + ratio_minus_one > 1e-12)) continue;
        const double delta = std::log1p(ratio_minus_one);
        if (!(delta > kImprovementThreshold)) continue;

        const Index out_row = s[static_cast<std::size_t>(i)];
        const Index in_row = f[w];
        std::swap(s[static_cast<std::size_t>(i)], f[w]);
        state.rank_one_update(linalg::AugmentedRow::of_row(data, in_row),
                              linalg::Direction::add);
        try {
          state.rank_one_update(linalg::AugmentedRow::of_row(data, out_row),
                                linalg::Direction::remove);
        } catch (const DowndateError&) {
          state = linalg::build_moment(data, result.selection);
        }

        record.accepted = true;
        record.pool_position = static_cast<Index>(w);
        ++record.commits;
        ++commits_this_pass;
        ++trace.accepted_swaps;
        if (!scan_all) break;

        forward_augmented(state.chol(), data, s[static_cast<std::size_t>(i)], u);
        alpha = u.squaredNorm();
      }
      record.log_v_after = log_v();
      trace.slots.push_back(record);
    }

    // Drop round-off accumulated by the rank-one updates.
    state = linalg::build_moment(data, result.selection);
    trace.iterations_run = iter;
    trace.commits_per_iteration.push_back(commits_this_pass);
    trace.log_v_per_iteration.push_back(log_v());
    trace.seconds_per_iteration.push_back(seconds_since(start));
    if (early_stop && commits_this_pass == 0) break;
  }

  trace.final_log_v = log_v();
  trace.wall_seconds = seconds_since(start);
  return result;
}

ExchangeResult alg1(const DataMatrix& data, const Selection& seed, Index K,
                    const Alg1Options& options) {
  const auto start = Clock::now();
  CandidatePool pool = candidate_pool(data, seed, K);
  const double pool_seconds = seconds_since(start);
  ExchangeResult result = run_exchange(data, seed, std::move(pool), false,
                                       options.iterations, options.early_stop);
  for (double& t : result.trace.seconds_per_iteration) t += pool_seconds;
  result.trace.wall_seconds += pool_seconds;
  return result;
}

ExchangeResult valg1(const DataMatrix& data, const Selection& seed, Index K) {
  const auto start = Clock::now();
  CandidatePool pool = candidate_pool(data, seed, K);
  const double pool_seconds = seconds_since(start);
  ExchangeResult result = run_exchange(data, seed, std::move(pool), true, 1, false);
  for (double& t : result.trace.seconds_per_iteration) t += pool_seconds;
  result.trace.wall_seconds += pool_seconds;
  return result;
}

}  // namespace dsub::exchange
