#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lifetime_pd/filter.h"
#include "lifetime_pd/macro.h"
#include "lifetime_pd/propagation.h"
#include "lifetime_pd/ratings.h"

namespace lifetime_pd {

enum class Method { kRaw, kNaive, kAnchored };

std::string to_string(Method method);
Method parse_method(const std::string& name);
inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> m{Method::kRaw, Method::kNaive, Method::kAnchored};
  return m;
}

/// What the macro RMSE is measured against.
enum class TruthMode {
  kLatentAr1,  // AR(1) state simulated from M_star with the Q schedule
  kRealized,   // realised composite index, M_star past T_F
};

struct Portfolio {
  RatingDistribution pi0;
  TransitionMatrix ttc;
  SensitivityMatrix betas;  // already oriented
  double exponent_cap = kDefaultExponentCap;

  /// G(P^TTC, m).
  TransitionMatrix pit(double m) const;
};

struct RunConfig {
  Portfolio portfolio;
  CompositeIndexParams index_params;
  std::vector<ScenarioSpec> scenarios;
  MacroStateModel model;
  /// Process covariance from quarter T_F on, for truth and filters alike.
  /// Unset keeps Q.
  std::optional<Matrix> process_cov_after_horizon;
  /// Filter prior covariance; unset uses the stationary covariance of the
  /// model (or Q when A is not stable).
  std::optional<Matrix> prior_cov;
  AnchorConfig anchor;
  int horizon_t = 40;
  /// Quarter whose Y_t feeds mean_YT / std_YT; 0 means horizon_t.
  int report_quarter = 0;
  int n_replications = 200;
  std::uint64_t master_seed = 42;
  RandomizationScope scope = RandomizationScope::kRealizedOnly;
  TruthMode truth = TruthMode::kLatentAr1;
  std::vector<Method> methods = all_methods();
  /// 0 selects the hardware concurrency.
  unsigned threads = 0;

  int forecast_horizon_tf() const noexcept { return anchor.forecast_horizon_tf; }
  int summary_quarter() const noexcept { return report_quarter > 0 ? report_quarter : horizon_t; }
  void validate() const;

  RunConfig(Portfolio p, MacroStateModel m, AnchorConfig a)
      : portfolio(std::move(p)), model(std::move(m)), anchor(std::move(a)) {}
};

/// The data one replication of one scenario feeds to every method.
struct ReplicationInputs {
  ScenarioPaths paths;                // window only
  std::vector<double> forecast_index; // length horizon_t, M_star past T_F
  std::vector<double> realized_index; // length horizon_t, M_star past T_F
  std::vector<double> truth;          // length horizon_t
};

std::uint64_t replication_seed(std::uint64_t master, const std::string& scenario, int rep);

ReplicationInputs make_replication_inputs(const ScenarioSpec& spec, const RunConfig& config,
                                          std::uint64_t rep_seed);

struct FilterTraceRow {
  int t = 0;
  double mu = 0.0;
  double sigma = 0.0;
  double innovation = 0.0;
  double gain = 0.0;
};

struct MethodRun {
  PDTermStructure pd;
  std::vector<double> macro_estimate;  // m_k used for the PIT matrix of quarter k+1
  std::vector<FilterTraceRow> trace;   // empty for the raw method
};

/// Macro estimates for `forecast` (length horizon_t) under `method`.
MethodRun run_method(Method method, const std::vector<double>& forecast,
                     const RunConfig& config);
MethodRun run_method(Method method, const ScenarioSpec& spec, const RunConfig& config,
                     std::uint64_t rep_seed);

struct SummaryRow {
  std::string scenario;  // scenario name, "all" or "pooled"
  Method method;
  double mean_var_yt = 0.0;
  double mean_yt = 0.0;
  double std_yt = 0.0;
  double macro_rmse = 0.0;
};

struct CellResult {
  std::string scenario;
  Method method;
  PDTermStructure mean_pd;
  std::vector<std::vector<double>> pd_paths;  // [rep][t-1]
  std::vector<double> macro_mse;              // per replication
  MethodRun first_run;
};

struct MonteCarloResult {
  std::vector<SummaryRow> rows;
  std::vector<CellResult> cells;
  std::vector<ScenarioPaths> first_paths;  // replication 0, per scenario

  const SummaryRow& row(const std::string& scenario, Method method) const;
  const CellResult& cell(const std::string& scenario, Method method) const;
};

/// Runs every (scenario, replication) unit, possibly on several threads,
/// then aggregates sequentially in a fixed order, so results do not depend
/// on `config.threads`.
MonteCarloResult monte_carlo(const RunConfig& config);

/// Columns `scenario,method,mean_var_Yt,mean_YT,std_YT,macro_rmse`.
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
/// Columns `t,mu,sigma,innovation,gain,method`.
void write_filter_trace_csv(std::ostream& out, const std::vector<FilterTraceRow>& trace,
                            Method method);
/// Columns `rep,t,Y_t`.
void write_pd_paths_csv(std::ostream& out, const CellResult& cell);

/// Calls fn(i) for i in [0, n) on up to `threads` workers. Each index runs
/// exactly once; the first exception is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

struct InstabilityConfig {
  double epsilon = 0.1;
  double probability = 0.3;  // P(delta_t != 0); delta_t = +-epsilon otherwise 0
  int horizon = 80;
  int block = 10;
  int n_paths = 400;
  /// <= 0 selects half the smallest |d phi / dm| along the error-free path
  /// over m in [M_star - epsilon, M_star + epsilon].
  double alpha_probe = 0.0;
  std::uint64_t seed = 7;
};

struct InstabilityResult {
  double alpha_probe = 0.0;
  std::vector<int> block_start;  // first quarter index of each block
  std::vector<double> raw_frequency;
  std::vector<double> anchored_frequency;
};

/// Injects i.i.d. forecast errors around the error-free path M_t = M_star and
/// counts |Y_{t+1} - phi(pi_t, M_t)| >= alpha * epsilon per time block, where
/// pi_t is the method's own rating distribution.
InstabilityResult instability_demo(const RunConfig& config, const InstabilityConfig& demo);

struct BoundCheckConfig {
  int n_paths = 1000;
  int horizon = 40;
  double delta_half_width = 1.0;  // delta_t ~ U(-w, w)
  double macro_clamp = 2.0;       // |M_t| clipped to this level
  MacroGrid lipschitz_grid{-3.0, 3.0, 0.01};
  std::uint64_t seed = 11;
};

struct BoundCheckResult {
  double lipschitz = 0.0;
  double fraction_holding = 0.0;
  double min_slack = 0.0;  // min over paths and t of b_t - e_t
  double max_ratio = 0.0;  // max over paths and t of e_t / b_t where b_t > 0
};

/// ||pi_t - pi°_t||_1 for the perturbed and error-free propagations.
std::vector<double> realized_deviation(const Portfolio& portfolio,
                                       const std::vector<double>& macro,
                                       const std::vector<double>& deltas);

/// Samples macro paths and perturbations and checks the accumulation bound
/// at every quarter of every path.
BoundCheckResult bound_check(const RunConfig& config, const BoundCheckConfig& check);

struct NaiveResidualResult {
  double mean_abs_deviation = 0.0;  // over late steps and paths
  std::vector<double> block_means;
};

/// Naive filter fed y_t = H M_t + v_t on a long AR(1) path; reports the mean
/// of |Y_{t+1} - phi(pi_t, M_t)| over steps t >= late_from, with pi_t the
/// filter-driven distribution.
NaiveResidualResult naive_residual_statistic(const RunConfig& config, int steps, int n_paths,
                                             int late_from, int block, std::uint64_t seed);

struct SweepRow {
  double rho = 0.0;
  double r = 0.0;
  double var_raw = 0.0;
  double var_naive = 0.0;
  double var_anchored = 0.0;
  bool ordering_holds = false;
};

/// Re-runs the Monte Carlo over rho in {0.80, 0.90, 0.95} x R in {0.1, 0.25, 0.5}.
std::vector<SweepRow> robustness_sweep(const RunConfig& config);

}  // namespace lifetime_pd
