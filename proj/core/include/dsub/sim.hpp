#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsub/metrics.hpp"
#include "dsub/types.hpp"

namespace dsub::sim {

/// y = beta0 + x^T beta1 + eps, eps ~ N(0, sigma2).
struct ModelParams {
  double beta0 = 1.0;
  Vector beta1;
  double sigma2 = 1.0;

  Vector coefficients() const;
};

struct OlsFit {
  /// (intercept, slopes...) from the subdata normal equations.
  Vector coefficients;

  Vector slopes() const { return coefficients.tail(coefficients.size() - 1); }
  double intercept() const { return coefficients(0); }
};

/// Solves the normal equations of the selected rows through the Cholesky
/// factor of Q_Sub. Needs a response and a nonsingular selection.
OlsFit ols_fit(const DataMatrix& data, const Selection& sel);

/// ybar - xbar^T slopes, with means taken over the full data.
double adjusted_intercept(double y_bar_full, const Vector& x_bar_full,
                          const Vector& slopes);

/// Rows iid N(0, (1-rho) I + rho J): x = sqrt(1-rho) g + sqrt(rho) g0 1.
DataMatrix gen_mvn_equicorr(Index n, Index p, double rho, std::uint64_t rng_seed);

/// Same draw as gen_mvn_equicorr, with mean_shift added to the last `count`
/// rows.
DataMatrix gen_outlier_scenario(Index n, Index p, Index count,
                                const Vector& mean_shift, double rho,
                                std::uint64_t rng_seed);

/// Returns the response vector; data is not modified.
Vector gen_response(const DataMatrix& data, const ModelParams& params,
                    std::uint64_t rng_seed);

/// Derives an independent stream seed from (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum class Method { uniform, iboss, oss, alg1, valg1 };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

/// A config field failed validation.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct OutlierSpec {
  Index count = 0;
  Vector mean_shift;
};

struct ExperimentConfig {
  Index n = 10000;
  Index p = 10;
  Index k = 100;
  Index K = 25;
  double rho = 0.5;
  int repetitions = 100;
  int alg1_iterations = 5;
  bool alg1_early_stop = false;
  std::vector<Method> methods{Method::iboss, Method::oss, Method::alg1, Method::valg1};
  /// Starting subdata for alg1/valg1.
  Method seed_method = Method::oss;
  std::uint64_t rng_seed = 20240501;
  std::optional<OutlierSpec> outliers;
  /// beta1 empty means all ones of length p.
  ModelParams model{1.0, Vector(), 3.0};
  bool store_selections = false;
  int threads = 1;
};

/// Throws ConfigError naming the first offending field.
void validate(const ExperimentConfig& config);

struct ExperimentRecord {
  Method method = Method::uniform;
  int repetition = 0;
  Index k = 0;
  Index K = 0;
  int iterations = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  metrics::MseReport mse;
  metrics::EfficiencyReport efficiency;
  int accepted_swaps = 0;
  /// Selected rows drawn from the mean-shifted component.
  Index outliers_selected = 0;
  double seconds = 0.0;
  std::vector<Index> selection;
};

struct Summary {
  double mean = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
};

Summary summarize(std::vector<double> values);

struct MethodSummary {
  Method method = Method::uniform;
  int ok = 0;
  int failed = 0;
  Summary mse_intercept;
  Summary mse_slopes;
  Summary d_eff;
  Summary a_eff;
  Summary log_gen_variance;
  Summary seconds;
};

struct ExperimentReport {
  std::vector<ExperimentRecord> records;
  std::vector<MethodSummary> summary;

  std::vector<const ExperimentRecord*> of(Method method) const;
};

/// Per repetition r (seed rng_seed + r): draw covariates and responses, run
/// every requested method, score it. A failing method marks its record and
/// the batch continues. Records come out ordered by (repetition, method).
ExperimentReport run_experiment(const ExperimentConfig& config);

struct BootstrapConfig {
  Index k = 0;
  Index K = 20;
  int B = 100;
  std::vector<Method> methods{Method::iboss, Method::oss, Method::alg1, Method::valg1};
  int alg1_iterations = 5;
  Method seed_method = Method::iboss;
  std::uint64_t rng_seed = 20240501;
  bool store_selections = false;
};

void validate(const BootstrapConfig& config, const DataMatrix& data);

/// Full-data OLS of the original dataset; the reference beta for bootstrap.
Vector full_data_ols(const DataMatrix& data);

/// One replicate on data.x/y restricted to `rows` (with repeats allowed).
std::vector<ExperimentRecord> bootstrap_replicate(const DataMatrix& data,
                                                  const std::vector<Index>& rows,
                                                  const Vector& reference_beta,
                                                  const BootstrapConfig& config,
                                                  int replicate);

/// B resamples of size n with replacement; each method is scored against
/// the full-data OLS fit of the original data.
ExperimentReport bootstrap_mse(const DataMatrix& data, const BootstrapConfig& config);

struct TimingConfig {
  Index n = 1000;
  Index p = 7;
  double rho = 0.5;
  std::vector<Index> ks{28, 42, 56};
  std::vector<Index> Ks{20, 40, 60};
  std::vector<int> iterations{1, 3, 5, 7, 10, 12, 15, 18, 20};
  int repetitions = 500;
  Method seed_method = Method::oss;
  bool include_valg1 = true;
  std::uint64_t rng_seed = 20240501;
};

void validate(const TimingConfig& config);

struct TimingRow {
  Index k = 0;
  Index K = 0;
  /// 0 for valg1 rows.
  int iterations = 0;
  Method algorithm = Method::alg1;
  double mean_seconds = 0.0;
  /// Mean of 100 (V_after / V_seed - 1).
  double mean_pct_gv_increase = 0.0;
};

/// Alg1 runs once per (cell, repetition) with max(iterations) passes; the
/// cumulative time and V at pass t are the figures for t iterations, since
/// the first t passes of a longer run are exactly a t-iteration run.
std::vector<TimingRow> timing_study(const TimingConfig& config);

/// Ordinary least squares R^2 of y on x.
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dsub::sim
