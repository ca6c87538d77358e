#pragma once

#include <vector>

#include "dsub/types.hpp"

namespace dsub::exchange {

/// Candidate set F: extreme rows of the unselected data, per covariate,
/// without exclusion across covariates, deduplicated by first occurrence.
struct CandidatePool {
  std::vector<Index> indices;
  Index capacity_K = 0;

  std::size_t size() const { return indices.size(); }
};

/// For each covariate j, appends the ceil(K/2) smallest and floor(K/2)
/// largest unselected rows (both blocks in ascending x_j, ties by row index),
/// then drops repeats. The per-side take is clamped to the number of
/// unselected rows. Throws std::invalid_argument for K < 2 or when every row
/// is already selected.
CandidatePool candidate_pool(const DataMatrix& data, const Selection& sel,
                             Index K);

/// One visit of a selection slot during an exchange pass.
struct SlotRecord {
  int iteration = 0;
  Index slot = 0;
  /// Pool position of the last committed swap in this visit, -1 if none.
  Index pool_position = -1;
  bool accepted = false;
  int commits = 0;
  double log_v_before = 0.0;
  double log_v_after = 0.0;
};

/// log V is the log generalized variance, log det(Q) - (p+1) log k.
struct ExchangeTrace {
  std::vector<SlotRecord> slots;
  double initial_log_v = 0.0;
  double final_log_v = 0.0;
  int accepted_swaps = 0;
  int iterations_run = 0;
  /// Commits per exchange pass, in pass order.
  std::vector<int> commits_per_iteration;
  /// log V after each pass.
  std::vector<double> log_v_per_iteration;
  /// Cumulative wall seconds at the end of each pass (includes building the state and pool).
  std::vector<double> seconds_per_iteration;
  double wall_seconds = 0.0;
};

struct ExchangeResult {
  Selection selection;
  CandidatePool pool;
  ExchangeTrace trace;
};

struct Alg1Options {
  int iterations = 5;
  /// Stop once a full pass commits nothing.
  bool early_stop = false;
};

/// A swap must raise log det(Q) by more than this to be committed.
inline constexpr double kImprovementThreshold = 1e-12;

/// First-improvement exchange. Builds Q and F once, then runs `iterations`
/// passes: for each slot, scan F in construction order and commit the first
/// swap that strictly raises V; the displaced row takes the candidate's
/// place in F. Throws SingularMatrixError if the seed's moment matrix is
/// singular.
ExchangeResult alg1(const DataMatrix& data, const Selection& seed, Index K,
                    const Alg1Options& options = {});

/// Scan-all variant: the inner loop never breaks, so each slot ends up with
/// the best of its original occupant and every candidate seen. One pass.
ExchangeResult valg1(const DataMatrix& data, const Selection& seed, Index K);

/// Exchange passes only, over an explicit pool. Exposed for oracles that need full
/// control of F.
ExchangeResult run_exchange(const DataMatrix& data, const Selection& seed,
                            CandidatePool pool, bool scan_all, int iterations,
                            bool early_stop);

/// log det(cov) of the selected covariates, via log det(Q) - (p+1) log k.
double log_generalized_variance(double log_det_q, Index p, Index k);

}  // namespace dsub::exchange
