#include "dsub/seeding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace dsub::seeding {

namespace {

void require_k(const DataMatrix& data, Index k) {
  if (k < 1) {
    throw std::invalid_argument("subdata size k must be positive");
  }
  if (k > data.n()) {
    throw std::invalid_argument("subdata size k=" + std::to_string(k) +
                                " exceeds n=" + std::to_string(data.n()));
  }
}

}  // namespace

DataMatrix ScalingParams::apply(const DataMatrix& data) const {
  DataMatrix out{data.x, data.y};
  for (Index j = 0; j < data.p(); ++j) {
    const double half_range = 0.5 * (max(j) - min(j));
    const double mid = 0.5 * (max(j) + min(j));
    out.x.col(j) = (data.x.col(j).array() - mid) / half_range;
  }
  return out;
}

DataMatrix ScalingParams::invert(const DataMatrix& scaled) const {
  DataMatrix out{scaled.x, scaled.y};
  for (Index j = 0; j < scaled.p(); ++j) {
    const double half_range = 0.5 * (max(j) - min(j));
    const double mid = 0.5 * (max(j) + min(j));
    out.x.col(j) = scaled.x.col(j).array() * half_range + mid;
  }
  return out;
}

std::pair<DataMatrix, ScalingParams> scale_to_unit_cube(const DataMatrix& data) {
  if (data.n() < 2) {
    throw std::invalid_argument("scaling needs at least two rows");
  }
  ScalingParams params{data.x.colwise().minCoeff().transpose(),
                       data.x.colwise().maxCoeff().transpose()};
  for (Index j = 0; j < data.p(); ++j) {
    if (!(params.max(j) > params.min(j))) {
      throw std::invalid_argument("column " + std::to_string(j) +
                                  " is constant; scaling undefined");
    }
  }
  DataMatrix scaled = params.apply(data);
  // Pin the endpoints so they map to exactly -1 and +1.
  for (Index j = 0; j < data.p(); ++j) {
    for (Index i = 0; i < data.n(); ++i) {
      if (data.x(i, j) == params.min(j)) scaled.x(i, j) = -1.0;
      if (data.x(i, j) == params.max(j)) scaled.x(i, j) = 1.0;
    }
  }
  return {std::move(scaled), std::move(params)};
}

Selection uniform_seed(const DataMatrix& data, Index k, std::uint64_t rng_seed) {
  require_k(data, k);
  std::mt19937_64 rng(rng_seed);
  std::vector<Index> pool(static_cast<std::size_t>(data.n()));
  std::iota(pool.begin(), pool.end(), Index{0});
  // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, data.n() - 1);
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return {std::move(pool), SelectionSource::uniform};
}

Selection iboss_seed(const DataMatrix& data, Index k) {
  require_k(data, k);
  const Index p = data.p();
  if (p < 1) {
    throw std::invalid_argument("iboss needs at least one covariate");
  }
  const Index base = k / (2 * p);
  const Index remainder = k - 2 * p * base;

  std::vector<char> taken(static_cast<std::size_t>(data.n()), 0);
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(k));
  std::vector<Index> free_rows;
  free_rows.reserve(static_cast<std::size_t>(data.n()));

  // extreme 2j is the low side of covariate j, 2j+1 the high side
  auto quota = [&](Index extreme) { return base + (extreme < remainder ? 1 : 0); };

  for (Index j = 0; j < p; ++j) {
    const auto column = data.x.col(j);
    for (int side = 0; side < 2; ++side) {
      const Index want = quota(2 * j + side);
      if (want == 0) continue;
      free_rows.clear();
      for (Index i = 0; i < data.n(); ++i) {
        if (!taken[static_cast<std::size_t>(i)]) free_rows.push_back(i);
      }
      const Index take = std::min<Index>(want, static_cast<Index>(free_rows.size()));
      auto low_first = [&](Index a, Index b) {
        return column(a) < column(b) || (column(a) == column(b) && a < b);
      };
      auto high_first = [&](Index a, Index b) {
        return column(a) > column(b) || (column(a) == column(b) && a < b);
      };
      auto mid = free_rows.begin() + take;
      if (side == 0) {
        std::nth_element(free_rows.begin(), mid, free_rows.end(), low_first);
        std::sort(free_rows.begin(), mid, low_first);
      } else {
        std::nth_element(free_rows.begin(), mid, free_rows.end(), high_first);
        std::sort(free_rows.begin(), mid, high_first);
      }
      for (auto it = free_rows.begin(); it != mid; ++it) {
        taken[static_cast<std::size_t>(*it)] = 1;
        out.push_back(*it);
      }
    }
  }
  return {std::move(out), SelectionSource::iboss};
}

Selection oss_seed(const DataMatrix& data, Index k, const OssOptions& options) {
  require_k(data, k);
  if (options.prune_fraction < 0.0 || options.prune_fraction >= 1.0) {
    throw std::invalid_argument("prune_fraction must lie in [0, 1)");
  }
  const Index n = data.n();
  const Index p = data.p();
  const DataMatrix scaled = scale_to_unit_cube(data).first;

  const Index words = (p + 63) / 64;
  std::vector<std::uint64_t> signs(static_cast<std::size_t>(n * words), 0);
  std::vector<double> norms(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    norms[static_cast<std::size_t>(i)] = scaled.x.row(i).squaredNorm();
    for (Index j = 0; j < p; ++j) {
      if (scaled.x(i, j) < 0.0) {
        signs[static_cast<std::size_t>(i * words + j / 64)] |= std::uint64_t{1} << (j % 64);
      }
    }
  }
  auto matches = [&](Index a, Index b) {
    Index differ = 0;
    for (Index w = 0; w < words; ++w) {
      differ += std::popcount(signs[static_cast<std::size_t>(a * words + w)] ^
                              signs[static_cast<std::size_t>(b * words + w)]);
    }
    return p - differ;
  };

  // Candidates kept in ascending row order so ties resolve to lower indices.
  std::vector<Index> candidates(static_cast<std::size_t>(n));
  std::iota(candidates.begin(), candidates.end(), Index{0});
  std::vector<double> loss(static_cast<std::size_t>(n), 0.0);
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(k));

  auto take = [&](std::size_t pos) {
    const Index chosen = candidates[pos];
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pos));
    out.push_back(chosen);
    return chosen;
  };

  std::size_t first = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    if (norms[static_cast<std::size_t>(candidates[c])] >
        norms[static_cast<std::size_t>(candidates[first])]) {
      first = c;
    }
  }
  Index last = take(first);

  const double dp = static_cast<double>(p);
  const bool signed_term = options.loss == OssLoss::sign_agreement;
  while (static_cast<Index>(out.size()) < k) {
    const double half_last = 0.5 * norms[static_cast<std::size_t>(last)];
    std::size_t best = 0;
    double best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const Index i = candidates[c];
      const auto agree = static_cast<double>(matches(i, last));
      const double sign_term = signed_term ? 2.0 * agree - dp : agree;
      const double term = dp - 0.5 * norms[static_cast<std::size_t>(i)] - half_last + sign_term;
      double& acc = loss[static_cast<std::size_t>(i)];
      acc += term * term;
      if (acc < best_loss) {
        best_loss = acc;
        best = c;
      }
    }
    last = take(best);

    if (options.prune_fraction > 0.0) {
      const auto remaining_needed = static_cast<std::size_t>(k) - out.size();
      const auto drop = static_cast<std::size_t>(
          std::floor(options.prune_fraction * static_cast<double>(candidates.size())));
      const std::size_t keep = std::max(candidates.size() - drop, remaining_needed);
      if (keep < candidates.size()) {
        std::vector<Index> by_norm = candidates;
        auto larger_norm = [&](Index a, Index b) {
          const double na = norms[static_cast<std::size_t>(a)];
          const double nb = norms[static_cast<std::size_t>(b)];
          return na > nb || (na == nb && a < b);
        };
        std::nth_element(by_norm.begin(), by_norm.begin() + static_cast<std::ptrdiff_t>(keep),
                         by_norm.end(), larger_norm);
        by_norm.resize(keep);
        std::sort(by_norm.begin(), by_norm.end());
        candidates = std::move(by_norm);
      }
    }
  }
  return {std::move(out), SelectionSource::oss};
}

}  // namespace dsub::seeding
