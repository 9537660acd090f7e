#include "lifetime_pd/macro.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "lifetime_pd/csv.h"
#include "lifetime_pd/errors.h"
#include "lifetime_pd/random.h"

namespace lifetime_pd {

void CompositeIndexParams::validate() const {
  require(std::isfinite(gdp_mean) && std::isfinite(unemp_mean),
          ErrorKind::kInvalidArgument, "standardisation means must be finite");
  require(gdp_std > 0.0 && unemp_std > 0.0, ErrorKind::kInvalidArgument,
          "standardisation deviations must be positive");
}

std::vector<double> composite_index(const std::vector<double>& gdp,
                                    const std::vector<double>& unemp,
                                    const CompositeIndexParams& params) {
  params.validate();
  require(gdp.size() == unemp.size(), ErrorKind::kLengthMismatch,
          "GDP path has " + std::to_string(gdp.size()) +
              " quarters, unemployment has " + std::to_string(unemp.size()));
  std::vector<double> m(gdp.size());
  for (std::size_t t = 0; t < gdp.size(); ++t) {
    const double zg = (gdp[t] - params.gdp_mean) / params.gdp_std;
    const double zu = (unemp[t] - params.unemp_mean) / params.unemp_std;
    m[t] = 0.5 * zg - 0.5 * zu;
  }
  return m;
}

void ScenarioSpec::validate() const {
  const auto& names = scenario_names();
  require(std::find(names.begin(), names.end(), name) != names.end(),
          ErrorKind::kInvalidArgument, "unknown scenario name '" + name + "'");
  require(!gdp_forecast.empty(), ErrorKind::kInvalidArgument,
          "scenario '" + name + "' has an empty forecast");
  require(gdp_forecast.size() == unemp_forecast.size(), ErrorKind::kLengthMismatch,
          "scenario '" + name + "' forecast paths differ in length");
  require(noise_sigma_gdp >= 0.0 && noise_sigma_unemp >= 0.0,
          ErrorKind::kInvalidArgument, "noise sigmas must be nonnegative");
  for (const auto& [t, shock] : realized_overrides) {
    require(t >= 1 && t <= horizon(), ErrorKind::kInvalidArgument,
            "scenario '" + name + "' override quarter " + std::to_string(t) +
                " outside 1.." + std::to_string(horizon()));
    require(std::isfinite(shock.gdp) && std::isfinite(shock.unemp),
            ErrorKind::kInvalidArgument, "override values must be finite");
  }
}

std::vector<double> piecewise_linear(const std::vector<std::pair<double, double>>& knots,
                                     int n) {
  require(!knots.empty(), ErrorKind::kInvalidArgument, "no interpolation knots");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    require(knots[i].first > knots[i - 1].first, ErrorKind::kInvalidArgument,
            "interpolation knots must have increasing quarters");
  }
  std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)));
  for (int t = 1; t <= n; ++t) {
    const double x = t;
    double v;
    if (x <= knots.front().first) {
      v = knots.front().second;
    } else if (x >= knots.back().first) {
      v = knots.back().second;
    } else {
      std::size_t i = 1;
      while (knots[i].first < x) ++i;
      const auto [x0, y0] = knots[i - 1];
      const auto [x1, y1] = knots[i];
      // Knot values are returned exactly.
      v = x == x1 ? y1 : y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
    out[static_cast<std::size_t>(t - 1)] = v;
  }
  return out;
}

std::vector<double> sinusoid(double mean, double amplitude, double period, int n) {
  require(period > 0.0, ErrorKind::kInvalidArgument, "period must be positive");
  std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)));
  for (int t = 1; t <= n; ++t) {
    out[static_cast<std::size_t>(t - 1)] =
        mean + amplitude * std::sin(2.0 * std::numbers::pi * t / period);
  }
  return out;
}

ScenarioSpec builtin_baseline_scenario(int horizon_tf) {
  ScenarioSpec s;
  s.name = "baseline";
  s.gdp_forecast = sinusoid(0.5, 0.2, 8.0, horizon_tf);
  s.unemp_forecast.assign(static_cast<std::size_t>(horizon_tf), 5.5);
  s.noise_sigma_gdp = 0.2;
  s.noise_sigma_unemp = 0.2;
  return s;
}

ScenarioSpec builtin_stress_scenario(int horizon_tf) {
  ScenarioSpec s;
  s.name = "stress";
  s.gdp_forecast = piecewise_linear({{1, -2.0}, {20, 0.5}}, horizon_tf);
  s.unemp_forecast = piecewise_linear({{1, 5.5}, {6, 7.5}, {20, 5.5}}, horizon_tf);
  s.realized_overrides[1] = {-0.5, 0.0};
  if (horizon_tf >= 6) s.realized_overrides[6] = {0.0, 0.5};
  s.noise_sigma_gdp = 0.2;
  s.noise_sigma_unemp = 0.2;
  return s;
}

ScenarioSpec builtin_pandemic_scenario(int horizon_tf) {
  ScenarioSpec s;
  s.name = "pandemic";
  s.gdp_forecast =
      piecewise_linear({{1, 0.5}, {2, -8.0}, {3, 6.0}, {5, 0.5}, {20, 0.5}}, horizon_tf);
  s.unemp_forecast = piecewise_linear({{1, 5.5}, {2, 9.5}, {5, 5.5}, {20, 5.5}}, horizon_tf);
  if (horizon_tf >= 3) s.realized_overrides[3] = {2.0, 0.0};
  s.noise_sigma_gdp = 0.2;
  s.noise_sigma_unemp = 0.2;
  return s;
}

ScenarioSpec builtin_scenario(const std::string& name, int horizon_tf) {
  if (name == "baseline") return builtin_baseline_scenario(horizon_tf);
  if (name == "stress") return builtin_stress_scenario(horizon_tf);
  if (name == "pandemic") return builtin_pandemic_scenario(horizon_tf);
  throw Error(ErrorKind::kInvalidArgument, "unknown scenario name '" + name + "'");
}

ScenarioPaths generate_scenario(const ScenarioSpec& spec, std::uint64_t seed,
                                const CompositeIndexParams& params,
                                RandomizationScope scope) {
  spec.validate();
  params.validate();
  const auto n = static_cast<std::size_t>(spec.horizon());
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  ScenarioPaths out;
  out.gdp_forecast = spec.gdp_forecast;
  out.unemp_forecast = spec.unemp_forecast;
  out.gdp_realized.resize(n);
  out.unemp_realized.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    MacroShock shock;
    if (auto it = spec.realized_overrides.find(static_cast<int>(i) + 1);
        it != spec.realized_overrides.end()) {
      shock = it->second;
    }
    const double eg = normal(rng);
    const double eu = normal(rng);
    out.gdp_realized[i] = spec.gdp_forecast[i] + shock.gdp + spec.noise_sigma_gdp * eg;
    out.unemp_realized[i] =
        spec.unemp_forecast[i] + shock.unemp + spec.noise_sigma_unemp * eu;
  }
  if (scope == RandomizationScope::kForecastAndRealized) {
    for (std::size_t i = 0; i < n; ++i) {
      const double eg = normal(rng);
      const double eu = normal(rng);
      out.gdp_forecast[i] += spec.noise_sigma_gdp * eg;
      out.unemp_forecast[i] += spec.noise_sigma_unemp * eu;
    }
  }
  out.forecast_index = composite_index(out.gdp_forecast, out.unemp_forecast, params);
  out.realized_index = composite_index(out.gdp_realized, out.unemp_realized, params);
  return out;
}

void write_scenario_csv(std::ostream& out, const ScenarioPaths& paths) {
  write_csv_row(out, {"t", "gdp_forecast", "unemp_forecast", "gdp_realized",
                      "unemp_realized", "M_forecast", "M_realized"});
  for (std::size_t i = 0; i < paths.forecast_index.size(); ++i) {
    write_csv_row(out, {std::to_string(i + 1), format_number(paths.gdp_forecast[i]),
                        format_number(paths.unemp_forecast[i]),
                        format_number(paths.gdp_realized[i]),
                        format_number(paths.unemp_realized[i]),
                        format_number(paths.forecast_index[i]),
                        format_number(paths.realized_index[i])});
  }
}

namespace {

bool is_symmetric(const Matrix& m, double tol = 1e-12) {
  return m.rows() == m.cols() &&
         (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Rank of a complex matrix with singular values relative to the largest.
int numeric_rank(const Eigen::MatrixXcd& m, double tol) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol * std::max(1.0, s(0))) ++rank;
  }
  return rank;
}

}  // namespace

bool is_detectable(const Matrix& a, const Matrix& h, double tol) {
  const auto r = a.rows();
  Eigen::EigenSolver<Matrix> es(a, false);
  for (Eigen::Index i = 0; i < r; ++i) {
    const std::complex<double> lambda = es.eigenvalues()(i);
    if (std::abs(lambda) < 1.0) continue;
    Eigen::MatrixXcd pbh(r + h.rows(), r);
    pbh.topRows(r) = lambda * Eigen::MatrixXcd::Identity(r, r) - a.cast<std::complex<double>>();
    pbh.bottomRows(h.rows()) = h.cast<std::complex<double>>();
    if (numeric_rank(pbh, tol) < r) return false;
  }
  return true;
}

bool is_stabilizable(const Matrix& a, const Matrix& b, double tol) {
  return is_detectable(a.transpose(), b.transpose(), tol);
}

Matrix psd_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

MacroStateModel::MacroStateModel(Matrix a, Matrix q, Matrix h, Matrix r, Vector m_star)
    : a_(std::move(a)), q_(std::move(q)), h_(std::move(h)), r_(std::move(r)),
      m_star_(std::move(m_star)) {
  const auto n = a_.rows();
  require(n >= 1 && a_.cols() == n, ErrorKind::kDimensionMismatch, "A must be square");
  require(q_.rows() == n && q_.cols() == n, ErrorKind::kDimensionMismatch,
          "Q must match A");
  require(h_.cols() == n && h_.rows() >= 1, ErrorKind::kDimensionMismatch,
          "H must have one column per state");
  require(r_.rows() == h_.rows() && r_.cols() == h_.rows(),
          ErrorKind::kDimensionMismatch, "R must match the rows of H");
  require(m_star_.size() == n, ErrorKind::kDimensionMismatch,
          "M_star must have one entry per state");
  require(a_.allFinite() && q_.allFinite() && h_.allFinite() && r_.allFinite() &&
              m_star_.allFinite(),
          ErrorKind::kInvalidArgument, "model matrices must be finite");
  require(is_symmetric(q_) && min_eigenvalue(q_) >= -1e-10, ErrorKind::kInvalidArgument,
          "Q must be symmetric positive semidefinite");
  require(is_symmetric(r_) && min_eigenvalue(r_) > 0.0, ErrorKind::kInvalidArgument,
          "R must be symmetric positive definite");
  if (!is_detectable(a_, h_)) warnings_.push_back("(A, H) is not detectable");
  if (!is_stabilizable(a_, psd_sqrt(q_))) {
    warnings_.push_back("(A, Q^1/2) is not stabilisable");
  }
}

MacroStateModel MacroStateModel::scalar(double rho, double q, double r, double m_star,
                                        double h) {
  return MacroStateModel(Matrix::Constant(1, 1, rho), Matrix::Constant(1, 1, q),
                         Matrix::Constant(1, 1, h), Matrix::Constant(1, 1, r),
                         Vector::Constant(1, m_star));
}

MacroStateModel MacroStateModel::with_process_cov(Matrix q) const {
  return MacroStateModel(a_, std::move(q), h_, r_, m_star_);
}

std::vector<Vector> simulate_truth(const MacroStateModel& model, std::uint64_t seed,
                                   int steps, const Vector& init,
                                   const std::optional<ProcessNoiseSchedule>& schedule) {
  require(steps >= 1, ErrorKind::kInvalidArgument, "need at least one step");
  const int r = model.state_dim();
  require(init.size() == r, ErrorKind::kDimensionMismatch,
          "initial state has the wrong dimension");
  const Matrix l_before = psd_sqrt(model.Q());
  Matrix l_after = l_before;
  if (schedule) {
    require(schedule->q_after.rows() == r && schedule->q_after.cols() == r,
            ErrorKind::kDimensionMismatch, "scheduled Q has the wrong dimension");
    l_after = psd_sqrt(schedule->q_after);
  }
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> path;
  path.reserve(static_cast<std::size_t>(steps) + 1);
  path.push_back(init);
  Vector z(r);
  for (int t = 0; t < steps; ++t) {
    for (int i = 0; i < r; ++i) z(i) = normal(rng);
    const bool after = schedule && t >= schedule->switch_step;
    path.push_back(model.A() * path.back() + (after ? l_after : l_before) * z);
  }
  return path;
}

Matrix stationary_covariance(const MacroStateModel& model) {
  const Matrix& a = model.A();
  require(spectral_radius(a) < 1.0, ErrorKind::kInvalidArgument,
          "stationary covariance needs a stable A");
  const auto n = a.rows();
  Matrix kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) kron.block(i * n, j * n, n, n) = a(i, j) * a;
  }
  const Matrix lhs = Matrix::Identity(n * n, n * n) - kron;
  const Vector vec_q = Eigen::Map<const Vector>(model.Q().data(), n * n);
  const Vector vec_s = lhs.partialPivLu().solve(vec_q);
  Matrix s = Eigen::Map<const Matrix>(vec_s.data(), n, n);
  return 0.5 * (s + s.transpose());
}

}  // namespace lifetime_pd
