#pragma once

#include <string>
#include <vector>

#include "lifetime_pd/distribution.h"
#include "lifetime_pd/macro.h"

namespace lifetime_pd {

/// Posterior (or predicted) mean and covariance of the macro state.
class FilterState {
 public:
  /// Symmetrises `covariance`; throws InvalidArgument if its smallest
  /// eigenvalue is below -1e-10, otherwise clamps it to the PSD cone.
  FilterState(Vector mean, Matrix covariance, int time_index = 0);

  const Vector& mean() const noexcept { return mean_; }
  const Matrix& covariance() const noexcept { return covariance_; }
  int time_index() const noexcept { return time_index_; }
  int dim() const noexcept { return static_cast<int>(mean_.size()); }

 private:
  Vector mean_;
  Matrix covariance_;
  int time_index_;
};

/// Neutral anchor and its variance schedule: sigma_star_sq_in for t < T_F,
/// sigma_star_sq_out from T_F on.
struct AnchorConfig {
  Vector m_star;
  double sigma_star_sq_in = 0.25;
  double sigma_star_sq_out = 0.0;
  int forecast_horizon_tf = 20;

  double sigma_star_sq(int t) const {
    return t < forecast_horizon_tf ? sigma_star_sq_in : sigma_star_sq_out;
  }
  void validate(int state_dim) const;
};

/// y = H_eff M + v with v ~ N(0, R_eff). Rows whose R_eff row and column are
/// zero are treated as exact observations.
struct ObservationModel {
  Matrix h;
  Matrix r;

  int obs_dim() const noexcept { return static_cast<int>(h.rows()); }
  void validate(int state_dim) const;
};

/// H_eff = H, R_eff = R.
ObservationModel naive_observation(const MacroStateModel& model);

/// H_aug = [H; I], R_aug = diag(R, sigma_star_sq I).
ObservationModel anchored_observation(const MacroStateModel& model, double sigma_star_sq);

struct FilterStep {
  FilterState state;
  Vector innovation;
  Matrix gain;
};

/// mean' = A mean, Sigma' = A Sigma A^T + Q, time index + 1.
FilterState predict(const FilterState& state, const MacroStateModel& model);

/// Kalman update in Joseph form; the gain solves S X = H Sigma with
/// S = H Sigma H^T + R.
///
/// When some rows are exact (zero noise) and those rows of H have full column
/// rank, the state is pinned to their solution and the covariance is zeroed.
/// Otherwise the regular update is attempted and SingularInnovation is thrown
/// if S is numerically singular.
FilterStep update(const FilterState& state, const Vector& y, const ObservationModel& obs);

/// predict, then update with y = forecast.
FilterStep naive_step(const FilterState& state, const MacroStateModel& model,
                      const Vector& forecast);

/// predict, then update with the stacked observation (forecast, M_star) under
/// the anchor variance for quarter `t`.
FilterStep anchored_step(const FilterState& state, const MacroStateModel& model,
                         const Vector& forecast, const AnchorConfig& anchor, int t);

/// The same recursion in deviation coordinates xi = M - M_star:
/// xi' = A xi + w, y = H xi + v. `y_deviation` is the observed deviation; the
/// returned state is expressed in M coordinates again.
FilterStep deviation_step(const FilterState& state, const MacroStateModel& model,
                          const Vector& y_deviation, const AnchorConfig& anchor);

struct RiccatiSolution {
  Matrix filtered;   // Sigma_inf after the update
  Matrix predicted;  // fixed point of the predictor map
  Matrix gain;       // K_star
  double closed_loop_radius = 0.0;  // of (I - K_star H) A
  int iterations = 0;
};

/// Iterates the predictor Riccati map from Q until successive iterates differ
/// by less than `tol` in max norm. Throws NoConvergence after `max_iter`.
RiccatiSolution riccati_steady_state(const MacroStateModel& model,
                                     const ObservationModel& obs, double tol = 1e-12,
                                     int max_iter = 100000);

/// One application of Sigma -> A (Sigma - Sigma H^T S^-1 H Sigma) A^T + Q.
Matrix riccati_map(const MacroStateModel& model, const ObservationModel& obs,
                   const Matrix& predicted);

/// Detectability of (A, H_eff) and stabilisability of (A, Q^1/2), as
/// human-readable warnings.
std::vector<std::string> check_filter_assumptions(const MacroStateModel& model,
                                                  const ObservationModel& obs);

struct ErrorTrace {
  std::vector<Vector> errors;       // e_t = estimate_t - truth_t
  std::vector<double> squared_norms;
  double decay_ratio = 0.0;  // 0 when no ratio is defined
};

/// Decay ratio = max over t >= `decay_from` of ||e_{t+1}|| / ||e_t|| among
/// steps with ||e_t|| > 1e-14. Position in the sequences is the quarter t.
ErrorTrace error_trace(const std::vector<Vector>& truth,
                       const std::vector<Vector>& estimates, int decay_from);

}  // namespace lifetime_pd
