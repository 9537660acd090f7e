#include "lifetime_pd/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "lifetime_pd/csv.h"
#include "lifetime_pd/errors.h"
#include "lifetime_pd/random.h"

namespace lifetime_pd {

std::string to_string(Method method) {
  switch (method) {
    case Method::kRaw: return "raw";
    case Method::kNaive: return "naive";
    case Method::kAnchored: return "anchored";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown method '" + name + "'");
}

TransitionMatrix Portfolio::pit(double m) const {
  return logit_overlay(ttc, betas, m, exponent_cap);
}

void RunConfig::validate() const {
  check_compatible(portfolio.ttc, portfolio.betas);
  require(portfolio.pi0.size() == portfolio.ttc.size() &&
              portfolio.pi0.default_index() == portfolio.ttc.default_index(),
          ErrorKind::kDimensionMismatch, "initial distribution does not match the TTC matrix");
  require(model.state_dim() == 1 && model.obs_dim() == 1, ErrorKind::kDimensionMismatch,
          "the experiment drives a scalar composite index; the macro model must be 1x1");
  anchor.validate(model.state_dim());
  const int tf = forecast_horizon_tf();
  require(horizon_t >= tf, ErrorKind::kInvalidArgument,
          "horizon_T " + std::to_string(horizon_t) + " is shorter than T_F " +
              std::to_string(tf));
  require(summary_quarter() >= 1 && summary_quarter() <= horizon_t,
          ErrorKind::kInvalidArgument, "report quarter outside 1..horizon_T");
  require(n_replications >= 1, ErrorKind::kInvalidArgument,
          "need at least one replication");
  require(!methods.empty(), ErrorKind::kInvalidArgument, "no methods selected");
  if (process_cov_after_horizon) {
    require(process_cov_after_horizon->rows() == 1 && process_cov_after_horizon->cols() == 1,
            ErrorKind::kDimensionMismatch, "post-horizon Q must be 1x1");
  }
  if (prior_cov) {
    require(prior_cov->rows() == 1 && prior_cov->cols() == 1, ErrorKind::kDimensionMismatch,
            "prior covariance must be 1x1");
  }
  for (const auto& s : scenarios) {
    s.validate();
    require(s.horizon() == tf, ErrorKind::kLengthMismatch,
            "scenario '" + s.name + "' covers " + std::to_string(s.horizon()) +
                " quarters, T_F is " + std::to_string(tf));
  }
}

namespace {

double neumaier_sum(const std::vector<double>& xs) {
  double sum = 0.0;
  double c = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + c;
}

double mean_of(const std::vector<double>& xs) {
  return xs.empty() ? 0.0 : neumaier_sum(xs) / static_cast<double>(xs.size());
}

// Unbiased sample variance; 0 for fewer than two samples.
double variance_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mu) * (xs[i] - mu);
  return neumaier_sum(sq) / static_cast<double>(xs.size() - 1);
}

struct WindowModels {
  MacroStateModel inside;
  MacroStateModel outside;
};

WindowModels window_models(const RunConfig& config) {
  if (!config.process_cov_after_horizon) return {config.model, config.model};
  return {config.model, config.model.with_process_cov(*config.process_cov_after_horizon)};
}

FilterState prior_state(const RunConfig& config) {
  Matrix cov;
  if (config.prior_cov) {
    cov = *config.prior_cov;
  } else if (spectral_radius(config.model.A()) < 1.0) {
    cov = stationary_covariance(config.model);
  } else {
    cov = config.model.Q();
  }
  return FilterState(config.anchor.m_star, cov, 0);
}

std::vector<double> pad_with(std::vector<double> xs, std::size_t n, double value) {
  xs.resize(n, value);
  return xs;
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t master, const std::string& scenario, int rep) {
  return derive_seed(master, {fnv1a(scenario), static_cast<std::uint64_t>(rep)});
}

ReplicationInputs make_replication_inputs(const ScenarioSpec& spec, const RunConfig& config,
                                          std::uint64_t rep_seed) {
  const auto n = static_cast<std::size_t>(config.horizon_t);
  const double m_star = config.anchor.m_star(0);
  ReplicationInputs in;
  in.paths = generate_scenario(spec, derive_seed(rep_seed, {1}), config.index_params,
                               config.scope);
  in.forecast_index = pad_with(in.paths.forecast_index, n, m_star);
  in.realized_index = pad_with(in.paths.realized_index, n, m_star);
  if (config.truth == TruthMode::kRealized) {
    in.truth = in.realized_index;
  } else {
    std::optional<ProcessNoiseSchedule> schedule;
    if (config.process_cov_after_horizon) {
      // w_{k-1} drives M_k, so the noise feeding quarter index T_F is the
      // first one on the post-horizon schedule.
      schedule = ProcessNoiseSchedule{config.forecast_horizon_tf() - 1,
                                      *config.process_cov_after_horizon};
    }
    const auto states = simulate_truth(config.model, derive_seed(rep_seed, {2}),
                                       config.horizon_t - 1, config.anchor.m_star, schedule);
    in.truth.reserve(n);
    for (const auto& s : states) in.truth.push_back(s(0));
  }
  return in;
}

MethodRun run_method(Method method, const std::vector<double>& forecast,
                     const RunConfig& config) {
  const auto n = static_cast<std::size_t>(config.horizon_t);
  require(forecast.size() == n, ErrorKind::kLengthMismatch,
          "forecast covers " + std::to_string(forecast.size()) + " quarters, expected " +
              std::to_string(n));
  MethodRun run;
  if (method == Method::kRaw) {
    run.macro_estimate = forecast;
  } else {
    const WindowModels models = window_models(config);
    const int tf = config.forecast_horizon_tf();
    FilterState state = prior_state(config);
    run.macro_estimate.reserve(n);
    run.trace.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int k = static_cast<int>(i);
      const MacroStateModel& model = k < tf ? models.inside : models.outside;
      const Vector y = Vector::Constant(1, forecast[i]);
      FilterStep step = method == Method::kNaive
                            ? naive_step(state, model, y)
                            : anchored_step(state, model, y, config.anchor, k);
      run.macro_estimate.push_back(step.state.mean()(0));
      run.trace.push_back({k + 1, step.state.mean()(0), step.state.covariance()(0, 0),
                           step.innovation(0), step.gain(0, 0)});
      state = std::move(step.state);
    }
  }
  std::vector<TransitionMatrix> matrices;
  matrices.reserve(n);
  for (double m : run.macro_estimate) matrices.push_back(config.portfolio.pit(m));
  run.pd = lifetime_pd(config.portfolio.pi0, matrices);
  return run;
}

MethodRun run_method(Method method, const ScenarioSpec& spec, const RunConfig& config,
                     std::uint64_t rep_seed) {
  return run_method(method, make_replication_inputs(spec, config, rep_seed).forecast_index,
                    config);
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (!failed.load()) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n) return;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            failed.store(true);
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct UnitResult {
  std::vector<std::vector<double>> pd;   // per method
  std::vector<double> mse;               // per method
  std::vector<MethodRun> runs;           // kept for replication 0 only
  std::optional<ScenarioPaths> paths;    // replication 0 only
};

double macro_mse(const std::vector<double>& est, const std::vector<double>& truth) {
  std::vector<double> sq(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) sq[i] = (est[i] - truth[i]) * (est[i] - truth[i]);
  return mean_of(sq);
}

// Variance across paths at each t, averaged over t.
double mean_variance(const std::vector<const std::vector<double>*>& paths) {
  if (paths.empty()) return 0.0;
  const std::size_t horizon = paths.front()->size();
  std::vector<double> per_t(horizon);
  std::vector<double> column(paths.size());
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t r = 0; r < paths.size(); ++r) column[r] = (*paths[r])[t];
    per_t[t] = variance_of(column);
  }
  return mean_of(per_t);
}

}  // namespace

const SummaryRow& MonteCarloResult::row(const std::string& scenario, Method method) const {
  for (const auto& r : rows) {
    if (r.scenario == scenario && r.method == method) return r;
  }
  throw Error(ErrorKind::kInvalidArgument,
              "no summary row for " + scenario + "/" + to_string(method));
}

const CellResult& MonteCarloResult::cell(const std::string& scenario, Method method) const {
  for (const auto& c : cells) {
    if (c.scenario == scenario && c.method == method) return c;
  }
  throw Error(ErrorKind::kInvalidArgument, "no cell for " + scenario + "/" + to_string(method));
}

MonteCarloResult monte_carlo(const RunConfig& config) {
  config.validate();
  const std::size_t n_scen = config.scenarios.size();
  const auto n_rep = static_cast<std::size_t>(config.n_replications);
  const std::size_t n_meth = config.methods.size();

  std::vector<UnitResult> units(n_scen * n_rep);
  parallel_for(units.size(), config.threads, [&](std::size_t u) {
    const std::size_t s = u / n_rep;
    const std::size_t r = u % n_rep;
    const ScenarioSpec& spec = config.scenarios[s];
    const auto seed = replication_seed(config.master_seed, spec.name, static_cast<int>(r));
    ReplicationInputs in = make_replication_inputs(spec, config, seed);
    UnitResult& out = units[u];
    for (Method m : config.methods) {
      MethodRun run = run_method(m, in.forecast_index, config);
      out.pd.push_back(run.pd.values);
      out.mse.push_back(macro_mse(run.macro_estimate, in.truth));
      if (r == 0) out.runs.push_back(std::move(run));
    }
    if (r == 0) out.paths = std::move(in.paths);
  });

  MonteCarloResult result;
  const auto tq = static_cast<std::size_t>(config.summary_quarter() - 1);
  for (std::size_t s = 0; s < n_scen; ++s) {
    result.first_paths.push_back(*units[s * n_rep].paths);
    for (std::size_t mi = 0; mi < n_meth; ++mi) {
      CellResult cell;
      cell.scenario = config.scenarios[s].name;
      cell.method = config.methods[mi];
      cell.first_run = units[s * n_rep].runs[mi];
      std::vector<const std::vector<double>*> paths;
      for (std::size_t r = 0; r < n_rep; ++r) {
        const UnitResult& unit = units[s * n_rep + r];
        cell.pd_paths.push_back(unit.pd[mi]);
        cell.macro_mse.push_back(unit.mse[mi]);
      }
      for (const auto& p : cell.pd_paths) paths.push_back(&p);
      const std::size_t horizon = cell.pd_paths.front().size();
      cell.mean_pd.values.resize(horizon);
      std::vector<double> column(n_rep);
      for (std::size_t t = 0; t < horizon; ++t) {
        for (std::size_t r = 0; r < n_rep; ++r) column[r] = cell.pd_paths[r][t];
        cell.mean_pd.values[t] = mean_of(column);
      }
      std::vector<double> yt(n_rep);
      for (std::size_t r = 0; r < n_rep; ++r) yt[r] = cell.pd_paths[r][tq];
      result.rows.push_back({cell.scenario, cell.method, mean_variance(paths), mean_of(yt),
                             std::sqrt(variance_of(yt)), std::sqrt(mean_of(cell.macro_mse))});
      result.cells.push_back(std::move(cell));
    }
  }

  for (std::size_t mi = 0; mi < n_meth; ++mi) {
    std::vector<double> vars, means, stds, mses, pooled_yt, pooled_mse;
    std::vector<const std::vector<double>*> pooled_paths;
    for (std::size_t s = 0; s < n_scen; ++s) {
      const SummaryRow& row = result.rows[s * n_meth + mi];
      const CellResult& cell = result.cells[s * n_meth + mi];
      vars.push_back(row.mean_var_yt);
      means.push_back(row.mean_yt);
      stds.push_back(row.std_yt);
      mses.push_back(mean_of(cell.macro_mse));
      for (const auto& p : cell.pd_paths) {
        pooled_paths.push_back(&p);
        pooled_yt.push_back(p[tq]);
      }
      pooled_mse.insert(pooled_mse.end(), cell.macro_mse.begin(), cell.macro_mse.end());
    }
    const Method m = config.methods[mi];
    result.rows.push_back({"all", m, mean_of(vars), mean_of(means), mean_of(stds),
                           std::sqrt(mean_of(mses))});
    result.rows.push_back({"pooled", m, mean_variance(pooled_paths), mean_of(pooled_yt),
                           std::sqrt(variance_of(pooled_yt)), std::sqrt(mean_of(pooled_mse))});
  }
  return result;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  write_csv_row(out, {"scenario", "method", "mean_var_Yt", "mean_YT", "std_YT", "macro_rmse"});
  for (const auto& r : rows) {
    write_csv_row(out, {r.scenario, to_string(r.method), format_number(r.mean_var_yt),
                        format_number(r.mean_yt), format_number(r.std_yt),
                        format_number(r.macro_rmse)});
  }
}

void write_filter_trace_csv(std::ostream& out, const std::vector<FilterTraceRow>& trace,
                            Method method) {
  write_csv_row(out, {"t", "mu", "sigma", "innovation", "gain", "method"});
  for (const auto& row : trace) {
    write_csv_row(out, {std::to_string(row.t), format_number(row.mu), format_number(row.sigma),
                        format_number(row.innovation), format_number(row.gain),
                        to_string(method)});
  }
}

void write_pd_paths_csv(std::ostream& out, const CellResult& cell) {
  write_csv_row(out, {"rep", "t", "Y_t"});
  for (std::size_t r = 0; r < cell.pd_paths.size(); ++r) {
    for (std::size_t t = 0; t < cell.pd_paths[r].size(); ++t) {
      write_csv_row(out, {std::to_string(r), std::to_string(t + 1),
                          format_number(cell.pd_paths[r][t])});
    }
  }
}

InstabilityResult instability_demo(const RunConfig& config, const InstabilityConfig& demo) {
  require(demo.epsilon > 0.0 && demo.probability >= 0.0 && demo.probability <= 1.0,
          ErrorKind::kInvalidArgument, "instability demo needs epsilon > 0 and p in [0, 1]");
  require(demo.horizon >= config.forecast_horizon_tf() && demo.block >= 1 && demo.n_paths >= 1,
          ErrorKind::kInvalidArgument,
          "instability demo needs horizon >= T_F, block >= 1 and at least one path");
  RunConfig cfg = config;
  cfg.horizon_t = demo.horizon;
  cfg.report_quarter = 0;
  cfg.validate();
  const Portfolio& pf = cfg.portfolio;
  const double m_star = cfg.anchor.m_star(0);
  const int d = pf.ttc.default_index();
  const auto n = static_cast<std::size_t>(demo.horizon);

  const TransitionMatrix g_star = pf.pit(m_star);
  InstabilityResult out;
  out.alpha_probe = demo.alpha_probe;
  if (out.alpha_probe <= 0.0) {
    double lo = std::numeric_limits<double>::infinity();
    RatingDistribution pi = pf.pi0;
    for (std::size_t k = 0; k < n; ++k) {
      for (int g = 0; g <= 20; ++g) {
        const double m = m_star - demo.epsilon + demo.epsilon * g / 10.0;
        lo = std::min(lo, std::abs(overlay_default_sensitivity(pf.ttc, pf.betas, pi, m,
                                                               pf.exponent_cap)));
      }
      pi = propagate_one(pi, g_star);
    }
    out.alpha_probe = 0.5 * lo;
  }
  const double threshold = out.alpha_probe * demo.epsilon;

  const std::size_t n_blocks = (n + static_cast<std::size_t>(demo.block) - 1) /
                               static_cast<std::size_t>(demo.block);
  std::vector<double> raw_hits(n_blocks, 0.0), anch_hits(n_blocks, 0.0), counts(n_blocks, 0.0);

  // One pass of a method: |Y_{k+1} - phi(pi_k, M_star)| along its own path.
  auto count_hits = [&](const std::vector<double>& estimates, std::vector<double>& hits) {
    RatingDistribution pi = pf.pi0;
    for (std::size_t k = 0; k < n; ++k) {
      const TransitionMatrix g = pf.pit(estimates[k]);
      const RatingDistribution next = propagate_one(pi, g);
      const double ref = pi.weights().dot(g_star.entries().col(d));
      if (std::abs(next.default_mass() - ref) >= threshold) {
        hits[k / static_cast<std::size_t>(demo.block)] += 1.0;
      }
      pi = next;
    }
  };

  for (int path = 0; path < demo.n_paths; ++path) {
    Rng rng = make_rng(derive_seed(demo.seed, {static_cast<std::uint64_t>(path)}));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> forecast(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double hit = unif(rng);
      const double sign = unif(rng) < 0.5 ? -1.0 : 1.0;
      forecast[k] = m_star + (hit < demo.probability ? sign * demo.epsilon : 0.0);
    }
    count_hits(forecast, raw_hits);
    count_hits(run_method(Method::kAnchored, forecast, cfg).macro_estimate, anch_hits);
    for (std::size_t k = 0; k < n; ++k) counts[k / static_cast<std::size_t>(demo.block)] += 1.0;
  }
  for (std::size_t b = 0; b < n_blocks; ++b) {
    out.block_start.push_back(static_cast<int>(b) * demo.block);
    out.raw_frequency.push_back(raw_hits[b] / counts[b]);
    out.anchored_frequency.push_back(anch_hits[b] / counts[b]);
  }
  return out;
}

std::vector<double> realized_deviation(const Portfolio& portfolio,
                                       const std::vector<double>& macro,
                                       const std::vector<double>& deltas) {
  require(macro.size() == deltas.size(), ErrorKind::kLengthMismatch,
          "macro path and perturbations differ in length");
  RatingDistribution ref = portfolio.pi0;
  RatingDistribution pert = portfolio.pi0;
  std::vector<double> out;
  out.reserve(macro.size());
  for (std::size_t k = 0; k < macro.size(); ++k) {
    ref = propagate_one(ref, portfolio.pit(macro[k]));
    pert = propagate_one(pert, portfolio.pit(macro[k] + deltas[k]));
    out.push_back((pert.weights() - ref.weights()).lpNorm<1>());
  }
  return out;
}

BoundCheckResult bound_check(const RunConfig& config, const BoundCheckConfig& check) {
  require(check.n_paths >= 1 && check.horizon >= 1 && check.delta_half_width >= 0.0 &&
              check.macro_clamp >= 0.0,
          ErrorKind::kInvalidArgument, "invalid bound check configuration");
  const Portfolio& pf = config.portfolio;
  BoundCheckResult out;
  out.lipschitz = estimate_lipschitz(pf.ttc, pf.betas, check.lipschitz_grid);
  out.min_slack = std::numeric_limits<double>::infinity();
  const auto n = static_cast<std::size_t>(check.horizon);
  std::vector<char> holds(static_cast<std::size_t>(check.n_paths), 0);
  std::vector<double> slack(holds.size()), ratio(holds.size());
  parallel_for(holds.size(), config.threads, [&](std::size_t path) {
    const auto seed = derive_seed(check.seed, {static_cast<std::uint64_t>(path)});
    const auto states =
        simulate_truth(config.model, derive_seed(seed, {1}), check.horizon - 1,
                       config.anchor.m_star);
    std::vector<double> macro(n), deltas(n);
    Rng rng = make_rng(derive_seed(seed, {2}));
    std::uniform_real_distribution<double> unif(-check.delta_half_width, check.delta_half_width);
    for (std::size_t k = 0; k < n; ++k) {
      macro[k] = std::clamp(states[k](0), -check.macro_clamp, check.macro_clamp);
      deltas[k] = unif(rng);
    }
    const auto e = realized_deviation(pf, macro, deltas);
    const auto b = deviation_bound(0.0, out.lipschitz, deltas);
    bool ok = true;
    double s = std::numeric_limits<double>::infinity();
    double q = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      ok = ok && e[t] <= b[t];
      s = std::min(s, b[t] - e[t]);
      if (b[t] > 0.0) q = std::max(q, e[t] / b[t]);
    }
    holds[path] = ok ? 1 : 0;
    slack[path] = s;
    ratio[path] = q;
  });
  double held = 0.0;
  for (std::size_t p = 0; p < holds.size(); ++p) {
    held += holds[p];
    out.min_slack = std::min(out.min_slack, slack[p]);
    out.max_ratio = std::max(out.max_ratio, ratio[p]);
  }
  out.fraction_holding = held / static_cast<double>(holds.size());
  return out;
}

NaiveResidualResult naive_residual_statistic(const RunConfig& config, int steps, int n_paths,
                                             int late_from, int block, std::uint64_t seed) {
  require(steps > late_from && late_from >= 0 && n_paths >= 1 && block >= 1,
          ErrorKind::kInvalidArgument, "invalid residual statistic configuration");
  const Portfolio& pf = config.portfolio;
  const int d = pf.ttc.default_index();
  const int late = steps - late_from;
  const int n_blocks = (late + block - 1) / block;
  std::vector<std::vector<double>> per_path(static_cast<std::size_t>(n_paths));
  const double r_sd = std::sqrt(config.model.R()(0, 0));
  parallel_for(per_path.size(), config.threads, [&](std::size_t path) {
    const auto pseed = derive_seed(seed, {static_cast<std::uint64_t>(path)});
    const auto truth =
        simulate_truth(config.model, derive_seed(pseed, {1}), steps - 1, config.anchor.m_star);
    Rng rng = make_rng(derive_seed(pseed, {2}));
    std::normal_distribution<double> normal(0.0, 1.0);
    FilterState state = prior_state(config);
    RatingDistribution pi = pf.pi0;
    std::vector<double> dev;
    dev.reserve(static_cast<std::size_t>(late));
    for (int k = 0; k < steps; ++k) {
      const double m_true = truth[static_cast<std::size_t>(k)](0);
      const Vector y = config.model.H() * truth[static_cast<std::size_t>(k)] +
                       Vector::Constant(1, r_sd * normal(rng));
      FilterStep step = naive_step(state, config.model, y);
      const double m_hat = step.state.mean()(0);
      state = std::move(step.state);
      const TransitionMatrix g = pf.pit(m_hat);
      if (k >= late_from) {
        const double ref = pi.weights().dot(pf.pit(m_true).entries().col(d));
        const double got = pi.weights().dot(g.entries().col(d));
        dev.push_back(std::abs(got - ref));
      }
      pi = propagate_one(pi, g);
    }
    per_path[path] = std::move(dev);
  });
  NaiveResidualResult out;
  std::vector<double> all;
  std::vector<std::vector<double>> blocks(static_cast<std::size_t>(n_blocks));
  for (const auto& dev : per_path) {
    for (std::size_t i = 0; i < dev.size(); ++i) {
      all.push_back(dev[i]);
      blocks[i / static_cast<std::size_t>(block)].push_back(dev[i]);
    }
  }
  out.mean_abs_deviation = mean_of(all);
  for (const auto& b : blocks) out.block_means.push_back(mean_of(b));
  return out;
}

std::vector<SweepRow> robustness_sweep(const RunConfig& config) {
  std::vector<SweepRow> out;
  const double q = config.model.Q()(0, 0);
  const double h = config.model.H()(0, 0);
  const double m_star = config.model.m_star()(0);
  for (double rho : {0.80, 0.90, 0.95}) {
    for (double r : {0.1, 0.25, 0.5}) {
      RunConfig cfg = config;
      cfg.model = MacroStateModel::scalar(rho, q, r, m_star, h);
      cfg.methods = all_methods();
      const MonteCarloResult mc = monte_carlo(cfg);
      SweepRow row;
      row.rho = rho;
      row.r = r;
      row.var_raw = mc.row("all", Method::kRaw).mean_var_yt;
      row.var_naive = mc.row("all", Method::kNaive).mean_var_yt;
      row.var_anchored = mc.row("all", Method::kAnchored).mean_var_yt;
      row.ordering_holds = row.var_anchored < row.var_naive && row.var_naive < row.var_raw;
      out.push_back(row);
    }
  }
  return out;
}

}  // namespace lifetime_pd
