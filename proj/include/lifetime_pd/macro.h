#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lifetime_pd/distribution.h"

namespace lifetime_pd {

/// Standardisation constants for z(.) in M_t = z(g_t)/2 - z(u_t)/2.
struct CompositeIndexParams {
  double gdp_mean = 0.5;
  double gdp_std = 1.0;
  double unemp_mean = 5.5;
  double unemp_std = 1.0;

  void validate() const;
};

/// M_t = (g_t - gdp_mean) / (2 gdp_std) - (u_t - unemp_mean) / (2 unemp_std).
std::vector<double> composite_index(const std::vector<double>& gdp,
                                    const std::vector<double>& unemp,
                                    const CompositeIndexParams& params);

/// Deterministic realised-minus-forecast deviation, in percent / pp.
struct MacroShock {
  double gdp = 0.0;
  double unemp = 0.0;
};

/// Forecast paths over the window t = 1..T_F plus realisation noise.
struct ScenarioSpec {
  std::string name;
  std::vector<double> gdp_forecast;
  std::vector<double> unemp_forecast;
  /// Keyed by quarter t in 1..T_F.
  std::map<int, MacroShock> realized_overrides;
  double noise_sigma_gdp = 0.0;
  double noise_sigma_unemp = 0.0;

  int horizon() const noexcept { return static_cast<int>(gdp_forecast.size()); }
  void validate() const;
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"baseline", "stress", "pandemic"};
  return names;
}

/// Linear interpolation through (t, value) knots evaluated at t = 1..n; flat
/// beyond the first and last knot. Knots must have strictly increasing t.
std::vector<double> piecewise_linear(const std::vector<std::pair<double, double>>& knots,
                                     int n);

/// mean + amplitude sin(2 pi t / period) at t = 1..n.
std::vector<double> sinusoid(double mean, double amplitude, double period, int n);

ScenarioSpec builtin_baseline_scenario(int horizon_tf = 20);
ScenarioSpec builtin_stress_scenario(int horizon_tf = 20);
ScenarioSpec builtin_pandemic_scenario(int horizon_tf = 20);
ScenarioSpec builtin_scenario(const std::string& name, int horizon_tf = 20);

/// Which inputs are redrawn per replication. Under kRealizedOnly the
/// forecast is the scenario's deterministic path; under kForecastAndRealized it
/// also receives independent noise at the scenario sigmas.
enum class RandomizationScope { kRealizedOnly, kForecastAndRealized };

struct ScenarioPaths {
  std::vector<double> gdp_forecast;
  std::vector<double> unemp_forecast;
  std::vector<double> gdp_realized;
  std::vector<double> unemp_realized;
  std::vector<double> forecast_index;
  std::vector<double> realized_index;
};

/// Realised noise is drawn first, quarter by quarter, so the realised path
/// for a given seed does not depend on `scope`.
ScenarioPaths generate_scenario(const ScenarioSpec& spec, std::uint64_t seed,
                                const CompositeIndexParams& params = {},
                                RandomizationScope scope = RandomizationScope::kRealizedOnly);

/// Columns `t,gdp_forecast,unemp_forecast,gdp_realized,unemp_realized,
/// M_forecast,M_realized`.
void write_scenario_csv(std::ostream& out, const ScenarioPaths& paths);

/// Linear-Gaussian macro state model M_{t+1} = A M_t + w_t, y_t = H M_t + v_t
/// with w ~ N(0, Q), v ~ N(0, R), and the neutral anchor level M_star.
class MacroStateModel {
 public:
  MacroStateModel(Matrix a, Matrix q, Matrix h, Matrix r, Vector m_star);

  static MacroStateModel scalar(double rho, double q, double r, double m_star = 0.0,
                                double h = 1.0);

  const Matrix& A() const noexcept { return a_; }
  const Matrix& Q() const noexcept { return q_; }
  const Matrix& H() const noexcept { return h_; }
  const Matrix& R() const noexcept { return r_; }
  const Vector& m_star() const noexcept { return m_star_; }
  int state_dim() const noexcept { return static_cast<int>(a_.rows()); }
  int obs_dim() const noexcept { return static_cast<int>(h_.rows()); }

  /// Same model with a different process covariance.
  MacroStateModel with_process_cov(Matrix q) const;

  /// Detectability / stabilisability findings from construction; empty when
  /// both hold.
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  Matrix a_, q_, h_, r_;
  Vector m_star_;
  std::vector<std::string> warnings_;
};

/// PBH test: every eigenvalue of A on or outside the unit circle is observable
/// through H. Rank decisions use relative tolerance `tol`.
bool is_detectable(const Matrix& a, const Matrix& h, double tol = 1e-10);

/// PBH test on (A, B): every eigenvalue on or outside the unit circle is
/// reachable through B.
bool is_stabilizable(const Matrix& a, const Matrix& b, double tol = 1e-10);

/// Symmetric PSD square root via eigendecomposition; negative eigenvalues
/// from roundoff are clamped to zero.
Matrix psd_sqrt(const Matrix& s);

double spectral_radius(const Matrix& m);

/// Switches the process covariance to `q_after` from step `switch_step`
/// onwards (w_t uses Q for t < switch_step).
struct ProcessNoiseSchedule {
  int switch_step = 0;
  Matrix q_after;
};

/// M_0 = init and M_{t+1} = A M_t + w_t for t = 0..T-1; returns T + 1 states.
/// One standard normal per state coordinate is drawn at every step, so
/// schedules that zero Q consume the stream identically.
std::vector<Vector> simulate_truth(const MacroStateModel& model, std::uint64_t seed,
                                   int steps, const Vector& init,
                                   const std::optional<ProcessNoiseSchedule>& schedule = {});

/// Solves Sigma = A Sigma A^T + Q; requires spectral radius of A below 1.
Matrix stationary_covariance(const MacroStateModel& model);

}  // namespace lifetime_pd
