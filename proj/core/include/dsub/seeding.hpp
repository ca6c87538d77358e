#pragma once

#include <cstdint>
#include <utility>

#include "dsub/types.hpp"

namespace dsub::seeding {

/// Per-column affine map min -> -1, max -> +1.
struct ScalingParams {
  Vector min;
  Vector max;

  DataMatrix apply(const DataMatrix& data) const;
  DataMatrix invert(const DataMatrix& scaled) const;
};

/// Throws std::invalid_argument on a constant column or n < 2.
std::pair<DataMatrix, ScalingParams> scale_to_unit_cube(const DataMatrix& data);

/// k distinct rows drawn without replacement from a seeded mt19937_64.
Selection uniform_seed(const DataMatrix& data, Index k, std::uint64_t rng_seed);

/// IBOSS: for covariates 1..p in turn, the r_j smallest and r_j largest rows
/// not taken yet. r_j = floor(k / 2p); the remainder k - 2p*floor(k / 2p) is
/// handed out one per extreme in the order (1 low, 1 high, 2 low, ...).
/// Ties resolve to the lower row index.
Selection iboss_seed(const DataMatrix& data, Index k);

/// Pairwise sign term inside the OSS loss.
enum class OssLoss {
  /// delta(x,s) = (#agreeing signs) - (#disagreeing signs), in [-p, p]. The
  /// discrepancy used by orthogonal subsampling.
  sign_agreement,
  /// m(x,s) = #agreeing signs, in [0, p]. Attains zero only for antipodal
  /// corners, so it favours opposite pairs over orthogonal ones.
  match_count,
};

struct OssOptions {
  OssLoss loss = OssLoss::sign_agreement;
  /// After each addition, drop this fraction of the remaining candidates
  /// with the smallest squared norm. 0 disables pruning.
  double prune_fraction = 0.0;
};

/// Greedy orthogonality-driven selection on covariates rescaled to [-1,1].
/// The first pick maximizes ||x||^2; each later pick minimizes
///   loss(x|S) = sum_{s in S} (p - ||x||^2/2 - ||s||^2/2 + t(x,s))^2
/// with t the sign term chosen by OssOptions::loss (zero counts as positive).
/// Ties go to the lower row index.
Selection oss_seed(const DataMatrix& data, Index k, const OssOptions& options = {});

}  // namespace dsub::seeding
