#include "dsub/sim.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "dsub/exchange.hpp"
#include "dsub/linalg.hpp"
#include "dsub/seeding.hpp"

namespace dsub::sim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  Selection selection;
  int accepted_swaps = 0;
  double seconds = 0.0;
};

Selection seed_selection(const DataMatrix& data, Method method, Index k,
                         std::uint64_t uniform_seed) {
  switch (method) {
    case Method::uniform:
      return seeding::uniform_seed(data, k, uniform_seed);
    case Method::iboss:
      return seeding::iboss_seed(data, k);
    case Method::oss:
      return seeding::oss_seed(data, k);
    default:
      throw std::invalid_argument("seed method must be uniform, iboss or oss");
  }
}

// Runs the methods of one dataset. The seed selection used by alg1/valg1 is
// computed once and shared with the matching plain seeding method.
class MethodRunner {
 public:
  MethodRunner(const DataMatrix& data, Index k, Index K, int iterations,
               bool early_stop, Method seed_method, std::uint64_t uniform_seed)
      : data_(data),
        k_(k),
        K_(K),
        iterations_(iterations),
        early_stop_(early_stop),
        seed_method_(seed_method),
        uniform_seed_(uniform_seed) {}

  Outcome run(Method method) {
    switch (method) {
      case Method::uniform:
      case Method::iboss:
      case Method::oss: {
        if (method == seed_method_) {
          const Outcome& seed = seed_outcome();
          return seed;
        }
        const auto start = Clock::now();
        Selection sel = seed_selection(data_, method, k_, uniform_seed_);
        return {std::move(sel), 0, seconds_since(start)};
      }
      case Method::alg1: {
        const Outcome& seed = seed_outcome();
        exchange::ExchangeResult res = exchange::alg1(
            data_, seed.selection, K_, {iterations_, early_stop_});
        return {std::move(res.selection), res.trace.accepted_swaps,
                res.trace.wall_seconds};
      }
      case Method::valg1: {
        const Outcome& seed = seed_outcome();
        exchange::ExchangeResult res = exchange::valg1(data_, seed.selection, K_);
        return {std::move(res.selection), res.trace.accepted_swaps,
                res.trace.wall_seconds};
      }
    }
    throw std::invalid_argument("unknown method");
  }

 private:
  const Outcome& seed_outcome() {
    if (!seed_) {
      const auto start = Clock::now();
      Selection sel = seed_selection(data_, seed_method_, k_, uniform_seed_);
      seed_ = Outcome{std::move(sel), 0, seconds_since(start)};
    }
    return *seed_;
  }

  const DataMatrix& data_;
  Index k_;
  Index K_;
  int iterations_;
  bool early_stop_;
  Method seed_method_;
  std::uint64_t uniform_seed_;
  std::optional<Outcome> seed_;
};

struct ScoringContext {
  const DataMatrix& data;
  const DataMatrix& scaled;
  Vector x_bar;
  double y_bar = 0.0;
  Vector beta_true;
  Index outlier_start = -1;
};

ScoringContext make_context(const DataMatrix& data, const DataMatrix& scaled,
                            Vector beta_true, Index outlier_start) {
  return {data, scaled, data.x.colwise().mean().transpose(), data.y->mean(),
          std::move(beta_true), outlier_start};
}

ExperimentRecord score(const ScoringContext& ctx, MethodRunner& runner,
                       Method method, bool store_selection) {
  ExperimentRecord rec;
  rec.method = method;
  try {
    Outcome out = runner.run(method);
    rec.seconds = out.seconds;
    rec.accepted_swaps = out.accepted_swaps;
    const OlsFit fit = ols_fit(ctx.data, out.selection);
    Vector beta_hat = fit.coefficients;
    beta_hat(0) = adjusted_intercept(ctx.y_bar, ctx.x_bar, fit.slopes());
    rec.mse = metrics::mse(beta_hat, ctx.beta_true);
    rec.efficiency = metrics::efficiency(ctx.scaled, out.selection);
    if (ctx.outlier_start >= 0) {
      rec.outliers_selected = static_cast<Index>(std::count_if(
          out.selection.indices.begin(), out.selection.indices.end(),
          [&](Index i) { return i >= ctx.outlier_start; }));
    }
    if (store_selection) rec.selection = std::move(out.selection.indices);
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::nan("");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<MethodSummary> aggregate(const std::vector<ExperimentRecord>& records,
                                     const std::vector<Method>& methods) {
  std::vector<MethodSummary> out;
  for (Method m : methods) {
    MethodSummary s;
    s.method = m;
    std::vector<double> mi, ms, de, ae, lv, sec;
    for (const ExperimentRecord& r : records) {
      if (r.method != m) continue;
      if (!r.ok) {
        ++s.failed;
        continue;
      }
      ++s.ok;
      mi.push_back(r.mse.mse_intercept);
      ms.push_back(r.mse.mse_slopes);
      de.push_back(r.efficiency.d_eff);
      ae.push_back(r.efficiency.a_eff);
      lv.push_back(r.efficiency.log_gen_variance);
      sec.push_back(r.seconds);
    }
    s.mse_intercept = summarize(std::move(mi));
    s.mse_slopes = summarize(std::move(ms));
    s.d_eff = summarize(std::move(de));
    s.a_eff = summarize(std::move(ae));
    s.log_gen_variance = summarize(std::move(lv));
    s.seconds = summarize(std::move(sec));
    out.push_back(s);
  }
  return out;
}

template <typename Fn>
void for_each_index(int count, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < count; i += threads) fn(i);
    });
  }
}

}  // namespace

Vector ModelParams::coefficients() const {
  Vector beta(beta1.size() + 1);
  beta(0) = beta0;
  beta.tail(beta1.size()) = beta1;
  return beta;
}

OlsFit ols_fit(const DataMatrix& data, const Selection& sel) {
  if (!data.has_response()) {
    throw std::invalid_argument("ols_fit needs a response vector");
  }
  if (static_cast<Index>(sel.size()) < data.p() + 1) {
    throw std::invalid_argument("ols_fit needs at least p+1 selected rows");
  }
  const linalg::MomentState state = linalg::build_moment(data, sel);
  Vector zty = Vector::Zero(data.p() + 1);
  for (Index i : sel.indices) {
    const double yi = (*data.y)(i);
    zty(0) += yi;
    zty.tail(data.p()) += yi * data.x.row(i).transpose();
  }
  return {state.solve(zty)};
}

double adjusted_intercept(double y_bar_full, const Vector& x_bar_full,
                          const Vector& slopes) {
  if (x_bar_full.size() != slopes.size()) {
    throw std::invalid_argument("adjusted_intercept: mean and slope lengths differ");
  }
  return y_bar_full - x_bar_full.dot(slopes);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

DataMatrix gen_mvn_equicorr(Index n, Index p, double rho, std::uint64_t rng_seed) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("rho must lie in [0, 1)");
  }
  if (n < 1 || p < 1) {
    throw std::invalid_argument("n and p must be positive");
  }
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double own = std::sqrt(1.0 - rho);
  const double shared = std::sqrt(rho);
  DataMatrix data{Matrix(n, p), std::nullopt};
  for (Index i = 0; i < n; ++i) {
    const double g0 = normal(rng);
    for (Index j = 0; j < p; ++j) {
      data.x(i, j) = own * normal(rng) + shared * g0;
    }
  }
  return data;
}

DataMatrix gen_outlier_scenario(Index n, Index p, Index count,
                                const Vector& mean_shift, double rho,
                                std::uint64_t rng_seed) {
  if (count < 0 || count > n) {
    throw std::invalid_argument("outlier count must lie in [0, n]");
  }
  if (mean_shift.size() != p) {
    throw std::invalid_argument("mean_shift length must equal p");
  }
  DataMatrix data = gen_mvn_equicorr(n, p, rho, rng_seed);
  data.x.bottomRows(count).rowwise() += mean_shift.transpose();
  return data;
}

Vector gen_response(const DataMatrix& data, const ModelParams& params,
                    std::uint64_t rng_seed) {
  if (params.beta1.size() != data.p()) {
    throw std::invalid_argument("beta1 length must equal p");
  }
  if (!(params.sigma2 >= 0.0)) {
    throw std::invalid_argument("sigma2 must be non-negative");
  }
  Vector y = (data.x * params.beta1).array() + params.beta0;
  if (params.sigma2 > 0.0) {
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(params.sigma2));
    for (Index i = 0; i < y.size(); ++i) y(i) += noise(rng);
  }
  return y;
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::uniform:
      return "uniform";
    case Method::iboss:
      return "iboss";
    case Method::oss:
      return "oss";
    case Method::alg1:
      return "alg1";
    case Method::valg1:
      return "valg1";
  }
  return "uniform";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::uniform, Method::iboss, Method::oss, Method::alg1, Method::valg1}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

namespace {

void check_seed_method(Method m) {
  if (m == Method::alg1 || m == Method::valg1) {
    throw ConfigError("seed_method", "must be uniform, iboss or oss");
  }
}

void check_methods(const std::vector<Method>& methods) {
  if (methods.empty()) {
    throw ConfigError("methods", "at least one method is required");
  }
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = i + 1; j < methods.size(); ++j) {
      if (methods[i] == methods[j]) {
        throw ConfigError("methods", "duplicate method " + std::string(to_string(methods[i])));
      }
    }
  }
}

}  // namespace

void validate(const ExperimentConfig& c) {
  if (c.p < 1) throw ConfigError("p", "must be at least 1");
  if (c.n < 2) throw ConfigError("n", "must be at least 2");
  if (c.k < c.p + 1) throw ConfigError("k", "must be at least p+1");
  if (c.k > c.n) throw ConfigError("k", "must not exceed n");
  if (c.K < 2) throw ConfigError("K", "must be at least 2");
  if (!(c.rho >= 0.0 && c.rho < 1.0)) throw ConfigError("rho", "must lie in [0, 1)");
  if (c.repetitions < 1) throw ConfigError("repetitions", "must be at least 1");
  if (c.alg1_iterations < 1) throw ConfigError("alg1_iterations", "must be at least 1");
  if (c.threads < 1) throw ConfigError("threads", "must be at least 1");
  check_methods(c.methods);
  check_seed_method(c.seed_method);
  if (c.outliers) {
    if (c.outliers->count < 0 || c.outliers->count > c.n) {
      throw ConfigError("outliers.count", "must lie in [0, n]");
    }
    if (c.outliers->mean_shift.size() != c.p) {
      throw ConfigError("outliers.mean_shift", "length must equal p");
    }
  }
  if (c.model.beta1.size() != 0 && c.model.beta1.size() != c.p) {
    throw ConfigError("model.beta1", "length must equal p");
  }
  if (!(c.model.sigma2 >= 0.0)) throw ConfigError("model.sigma2", "must be non-negative");
}

Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) {
    s.mean = s.q05 = s.q50 = s.q95 = std::nan("");
    return s;
  }
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  s.q05 = quantile_sorted(values, 0.05);
  s.q50 = quantile_sorted(values, 0.5);
  s.q95 = quantile_sorted(values, 0.95);
  return s;
}

std::vector<const ExperimentRecord*> ExperimentReport::of(Method method) const {
  std::vector<const ExperimentRecord*> out;
  for (const ExperimentRecord& r : records) {
    if (r.method == method) out.push_back(&r);
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  validate(config);
  ModelParams model = config.model;
  if (model.beta1.size() == 0) model.beta1 = Vector::Ones(config.p);
  const Vector beta_true = model.coefficients();

  std::vector<std::vector<ExperimentRecord>> per_rep(
      static_cast<std::size_t>(config.repetitions));
  for_each_index(config.repetitions, config.threads, [&](int r) {
    const std::uint64_t rep_seed = config.rng_seed + static_cast<std::uint64_t>(r);
    DataMatrix data =
        config.outliers
            ? gen_outlier_scenario(config.n, config.p, config.outliers->count,
                                   config.outliers->mean_shift, config.rho,
                                   derive_seed(rep_seed, 0))
            : gen_mvn_equicorr(config.n, config.p, config.rho, derive_seed(rep_seed, 0));
    data.y = gen_response(data, model, derive_seed(rep_seed, 1));
    const DataMatrix scaled = seeding::scale_to_unit_cube(data).first;
    const Index outlier_start =
        config.outliers ? config.n - config.outliers->count : Index{-1};
    const ScoringContext ctx = make_context(data, scaled, beta_true, outlier_start);

    MethodRunner runner(data, config.k, config.K, config.alg1_iterations,
                        config.alg1_early_stop, config.seed_method,
                        derive_seed(rep_seed, 2));
    auto& out = per_rep[static_cast<std::size_t>(r)];
    for (Method m : config.methods) {
      ExperimentRecord rec = score(ctx, runner, m, config.store_selections);
      rec.repetition = r;
      rec.k = config.k;
      rec.K = config.K;
      rec.iterations = m == Method::alg1 ? config.alg1_iterations
                                         : (m == Method::valg1 ? 1 : 0);
      rec.seed = rep_seed;
      out.push_back(std::move(rec));
    }
  });

  ExperimentReport report;
  for (auto& rep : per_rep) {
    for (auto& rec : rep) report.records.push_back(std::move(rec));
  }
  report.summary = aggregate(report.records, config.methods);
  return report;
}

void validate(const BootstrapConfig& c, const DataMatrix& data) {
  if (!data.has_response()) throw ConfigError("response", "bootstrap needs a response column");
  if (c.B < 1) throw ConfigError("B", "must be at least 1");
  if (c.k < data.p() + 1) throw ConfigError("k", "must be at least p+1");
  if (c.k > data.n()) throw ConfigError("k", "must not exceed n");
  if (c.K < 2) throw ConfigError("K", "must be at least 2");
  if (c.alg1_iterations < 1) throw ConfigError("alg1_iterations", "must be at least 1");
  check_methods(c.methods);
  check_seed_method(c.seed_method);
}

Vector full_data_ols(const DataMatrix& data) {
  Selection all;
  all.indices.resize(static_cast<std::size_t>(data.n()));
  std::iota(all.indices.begin(), all.indices.end(), Index{0});
  return ols_fit(data, all).coefficients;
}

std::vector<ExperimentRecord> bootstrap_replicate(const DataMatrix& data,
                                                  const std::vector<Index>& rows,
                                                  const Vector& reference_beta,
                                                  const BootstrapConfig& config,
                                                  int replicate) {
  const std::uint64_t rep_seed = config.rng_seed + static_cast<std::uint64_t>(replicate);
  DataMatrix sample{Matrix(static_cast<Index>(rows.size()), data.p()),
                    Vector(static_cast<Index>(rows.size()))};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    sample.x.row(static_cast<Index>(r)) = data.x.row(rows[r]);
    (*sample.y)(static_cast<Index>(r)) = (*data.y)(rows[r]);
  }
  std::optional<DataMatrix> scaled;
  try {
    scaled = seeding::scale_to_unit_cube(sample).first;
  } catch (const std::invalid_argument&) {
    scaled = sample;  // constant column in the resample; score unscaled
  }
  const ScoringContext ctx = make_context(sample, *scaled, reference_beta, -1);
  MethodRunner runner(sample, config.k, config.K, config.alg1_iterations, false,
                      config.seed_method, derive_seed(rep_seed, 2));
  std::vector<ExperimentRecord> out;
  for (Method m : config.methods) {
    ExperimentRecord rec = score(ctx, runner, m, config.store_selections);
    rec.repetition = replicate;
    rec.k = config.k;
    rec.K = config.K;
    rec.iterations = m == Method::alg1 ? config.alg1_iterations
                                       : (m == Method::valg1 ? 1 : 0);
    rec.seed = rep_seed;
    out.push_back(std::move(rec));
  }
  return out;
}

ExperimentReport bootstrap_mse(const DataMatrix& data, const BootstrapConfig& config) {
  validate(config, data);
  const Vector reference = full_data_ols(data);
  ExperimentReport report;
  std::vector<Index> rows(static_cast<std::size_t>(data.n()));
  for (int b = 0; b < config.B; ++b) {
    std::mt19937_64 rng(derive_seed(config.rng_seed + static_cast<std::uint64_t>(b), 3));
    std::uniform_int_distribution<Index> pick(0, data.n() - 1);
    for (Index& r : rows) r = pick(rng);
    for (auto& rec : bootstrap_replicate(data, rows, reference, config, b)) {
      report.records.push_back(std::move(rec));
    }
  }
  report.summary = aggregate(report.records, config.methods);
  return report;
}

void validate(const TimingConfig& c) {
  if (c.p < 1) throw ConfigError("p", "must be at least 1");
  if (c.n < 2) throw ConfigError("n", "must be at least 2");
  if (!(c.rho >= 0.0 && c.rho < 1.0)) throw ConfigError("rho", "must lie in [0, 1)");
  if (c.ks.empty()) throw ConfigError("ks", "grid must not be empty");
  if (c.Ks.empty()) throw ConfigError("Ks", "grid must not be empty");
  if (c.iterations.empty()) throw ConfigError("iterations", "grid must not be empty");
  for (Index k : c.ks) {
    if (k < c.p + 1 || k > c.n) throw ConfigError("ks", "each k must lie in [p+1, n]");
  }
  for (Index K : c.Ks) {
    if (K < 2) throw ConfigError("Ks", "each K must be at least 2");
  }
  for (int t : c.iterations) {
    if (t < 1) throw ConfigError("iterations", "each count must be at least 1");
  }
  if (c.repetitions < 1) throw ConfigError("repetitions", "must be at least 1");
  check_seed_method(c.seed_method);
}

std::vector<TimingRow> timing_study(const TimingConfig& config) {
  validate(config);
  const int max_iter = *std::max_element(config.iterations.begin(), config.iterations.end());
  const auto reps = static_cast<double>(config.repetitions);
  std::vector<TimingRow> rows;
  for (Index k : config.ks) {
    for (Index K : config.Ks) {
      std::vector<double> alg1_seconds(config.iterations.size(), 0.0);
      std::vector<double> alg1_pct(config.iterations.size(), 0.0);
      double valg1_seconds = 0.0;
      double valg1_pct = 0.0;
      for (int r = 0; r < config.repetitions; ++r) {
        const std::uint64_t rep_seed = config.rng_seed + static_cast<std::uint64_t>(r);
        const DataMatrix data =
            gen_mvn_equicorr(config.n, config.p, config.rho, derive_seed(rep_seed, 0));
        const Selection seed =
            seed_selection(data, config.seed_method, k, derive_seed(rep_seed, 2));
        const exchange::ExchangeResult res = exchange::alg1(data, seed, K, {max_iter, false});
        const double log_v0 = res.trace.initial_log_v;
        for (std::size_t t = 0; t < config.iterations.size(); ++t) {
          const auto pass = static_cast<std::size_t>(config.iterations[t] - 1);
          alg1_seconds[t] += res.trace.seconds_per_iteration[pass];
          alg1_pct[t] += 100.0 * std::expm1(res.trace.log_v_per_iteration[pass] - log_v0);
        }
        if (config.include_valg1) {
          const exchange::ExchangeResult v = exchange::valg1(data, seed, K);
          valg1_seconds += v.trace.wall_seconds;
          valg1_pct += 100.0 * std::expm1(v.trace.final_log_v - v.trace.initial_log_v);
        }
      }
      for (std::size_t t = 0; t < config.iterations.size(); ++t) {
        rows.push_back({k, K, config.iterations[t], Method::alg1, alg1_seconds[t] / reps,
                        alg1_pct[t] / reps});
      }
      if (config.include_valg1) {
        rows.push_back({k, K, 0, Method::valg1, valg1_seconds / reps, valg1_pct / reps});
      }
    }
  }
  return rows;
}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("linear_fit_r2 needs two equal-length series");
  }
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (syy == 0.0) return 1.0;
  if (sxx == 0.0) return 0.0;
  return sxy * sxy / (sxx * syy);
}

}  // namespace dsub::sim
