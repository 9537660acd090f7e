#include "lifetime_pd/filter.h"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "lifetime_pd/errors.h"

namespace lifetime_pd {

FilterState::FilterState(Vector mean, Matrix covariance, int time_index)
    : mean_(std::move(mean)), covariance_(std::move(covariance)), time_index_(time_index) {
  require(covariance_.rows() == mean_.size() && covariance_.cols() == mean_.size(),
          ErrorKind::kDimensionMismatch, "covariance does not match the mean");
  require(mean_.allFinite() && covariance_.allFinite(), ErrorKind::kInvalidArgument,
          "filter state is not finite");
  // Halve before adding so huge entries do not overflow; eval() avoids
  // reading the transpose while it is being overwritten.
  covariance_ = (0.5 * covariance_ + 0.5 * covariance_.transpose()).eval();
  if (covariance_.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> es(covariance_);
  const double lo = es.eigenvalues().minCoeff();
  require(lo >= -1e-10, ErrorKind::kInvalidArgument,
          "covariance has eigenvalue " + std::to_string(lo));
  if (lo < 0.0) {
    const Vector d = es.eigenvalues().cwiseMax(0.0);
    covariance_ = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    covariance_ = (0.5 * covariance_ + 0.5 * covariance_.transpose()).eval();
  }
}

void AnchorConfig::validate(int state_dim) const {
  require(m_star.size() == state_dim, ErrorKind::kDimensionMismatch,
          "anchor level has the wrong dimension");
  require(sigma_star_sq_in >= 0.0 && sigma_star_sq_out >= 0.0,
          ErrorKind::kInvalidArgument, "anchor variances must be nonnegative");
  require(forecast_horizon_tf >= 1, ErrorKind::kInvalidArgument,
          "forecast horizon must be at least one quarter");
}

void ObservationModel::validate(int state_dim) const {
  require(h.cols() == state_dim && h.rows() >= 1, ErrorKind::kDimensionMismatch,
          "observation map has the wrong shape");
  require(r.rows() == h.rows() && r.cols() == h.rows(), ErrorKind::kDimensionMismatch,
          "observation covariance has the wrong shape");
  require((r - r.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
          ErrorKind::kInvalidArgument, "observation covariance is not symmetric");
}

ObservationModel naive_observation(const MacroStateModel& model) {
  return {model.H(), model.R()};
}

ObservationModel anchored_observation(const MacroStateModel& model, double sigma_star_sq) {
  require(sigma_star_sq >= 0.0, ErrorKind::kInvalidArgument,
          "anchor variance must be nonnegative");
  const int r = model.state_dim();
  const int p = model.obs_dim();
  ObservationModel obs;
  obs.h.resize(p + r, r);
  obs.h.topRows(p) = model.H();
  obs.h.bottomRows(r) = Matrix::Identity(r, r);
  obs.r = Matrix::Zero(p + r, p + r);
  obs.r.topLeftCorner(p, p) = model.R();
  obs.r.bottomRightCorner(r, r) = sigma_star_sq * Matrix::Identity(r, r);
  return obs;
}

FilterState predict(const FilterState& state, const MacroStateModel& model) {
  require(state.dim() == model.state_dim(), ErrorKind::kDimensionMismatch,
          "state dimension differs from the model");
  const Matrix& a = model.A();
  return FilterState(a * state.mean(), a * state.covariance() * a.transpose() + model.Q(),
                     state.time_index() + 1);
}

namespace {

std::vector<int> exact_rows(const Matrix& r) {
  std::vector<int> rows;
  for (int i = 0; i < r.rows(); ++i) {
    if (r.row(i).cwiseAbs().maxCoeff() == 0.0 && r.col(i).cwiseAbs().maxCoeff() == 0.0) {
      rows.push_back(i);
    }
  }
  return rows;
}

}  // namespace

FilterStep update(const FilterState& state, const Vector& y, const ObservationModel& obs) {
  const int n = state.dim();
  obs.validate(n);
  const int p = obs.obs_dim();
  require(y.size() == p, ErrorKind::kDimensionMismatch,
          "observation has " + std::to_string(y.size()) + " entries, expected " +
              std::to_string(p));
  const Matrix& h = obs.h;
  const Matrix& sigma = state.covariance();
  const Vector innovation = y - h * state.mean();

  const std::vector<int> exact = exact_rows(obs.r);
  if (!exact.empty()) {
    Matrix he(static_cast<Eigen::Index>(exact.size()), n);
    Vector ye(static_cast<Eigen::Index>(exact.size()));
    for (std::size_t k = 0; k < exact.size(); ++k) {
      he.row(static_cast<Eigen::Index>(k)) = h.row(exact[k]);
      ye(static_cast<Eigen::Index>(k)) = y(exact[k]);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(he);
    qr.setThreshold(1e-10);
    if (qr.rank() == n) {
      // The exact rows determine the state: the estimate is their solution
      // and no uncertainty is left.
      const bool identity = he.rows() == n && he.isIdentity(0.0);
      Vector mean = identity ? ye : Vector(qr.solve(ye));
      Matrix gain = Matrix::Zero(n, p);
      const Matrix pinv = identity ? Matrix::Identity(n, n)
                                   : Matrix(qr.solve(Matrix::Identity(he.rows(), he.rows())));
      for (std::size_t k = 0; k < exact.size(); ++k) {
        gain.col(exact[k]) = pinv.col(static_cast<Eigen::Index>(k));
      }
      return {FilterState(std::move(mean), Matrix::Zero(n, n), state.time_index()),
              innovation, std::move(gain)};
    }
  }

  const Matrix s = h * sigma * h.transpose() + obs.r;
  const Matrix hs = h * sigma;
  Eigen::LDLT<Matrix> ldlt(s);
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  const bool singular = ldlt.info() != Eigen::Success ||
                        ldlt.vectorD().cwiseAbs().minCoeff() <= 1e-14 * scale ||
                        ldlt.rcond() < 1e-14;
  require(!singular, ErrorKind::kSingularInnovation,
          "innovation covariance is numerically singular");
  const Matrix gain = ldlt.solve(hs).transpose();
  const Matrix i_kh = Matrix::Identity(n, n) - gain * h;
  Matrix cov = i_kh * sigma * i_kh.transpose() + gain * obs.r * gain.transpose();
  Vector mean = state.mean() + gain * innovation;
  return {FilterState(std::move(mean), std::move(cov), state.time_index()), innovation,
          gain};
}

FilterStep naive_step(const FilterState& state, const MacroStateModel& model,
                      const Vector& forecast) {
  return update(predict(state, model), forecast, naive_observation(model));
}

FilterStep anchored_step(const FilterState& state, const MacroStateModel& model,
                         const Vector& forecast, const AnchorConfig& anchor, int t) {
  anchor.validate(model.state_dim());
  const int p = model.obs_dim();
  const int r = model.state_dim();
  require(forecast.size() == p, ErrorKind::kDimensionMismatch,
          "forecast has the wrong dimension");
  Vector y(p + r);
  y.head(p) = forecast;
  y.tail(r) = anchor.m_star;
  return update(predict(state, model), y,
                anchored_observation(model, anchor.sigma_star_sq(t)));
}

FilterStep deviation_step(const FilterState& state, const MacroStateModel& model,
                          const Vector& y_deviation, const AnchorConfig& anchor) {
  anchor.validate(model.state_dim());
  const FilterState xi(state.mean() - anchor.m_star, state.covariance(), state.time_index());
  FilterStep step = update(predict(xi, model), y_deviation, naive_observation(model));
  step.state = FilterState(step.state.mean() + anchor.m_star, step.state.covariance(),
                           step.state.time_index());
  return step;
}

Matrix riccati_map(const MacroStateModel& model, const ObservationModel& obs,
                   const Matrix& predicted) {
  const int n = model.state_dim();
  const FilterState prior(Vector::Zero(n), predicted);
  const FilterStep post = update(prior, Vector::Zero(obs.obs_dim()), obs);
  const Matrix& a = model.A();
  return a * post.state.covariance() * a.transpose() + model.Q();
}

RiccatiSolution riccati_steady_state(const MacroStateModel& model,
                                     const ObservationModel& obs, double tol,
                                     int max_iter) {
  require(tol > 0.0 && max_iter >= 1, ErrorKind::kInvalidArgument,
          "Riccati iteration needs tol > 0 and max_iter >= 1");
  const int n = model.state_dim();
  obs.validate(n);
  Matrix predicted = model.Q();
  for (int it = 1; it <= max_iter; ++it) {
    Matrix next = riccati_map(model, obs, predicted);
    require(next.allFinite(), ErrorKind::kNoConvergence,
            "Riccati iteration diverged after " + std::to_string(it) + " iterations");
    const double change = (next - predicted).cwiseAbs().maxCoeff();
    predicted = std::move(next);
    if (change < tol) {
      RiccatiSolution sol;
      const FilterStep post =
          update(FilterState(Vector::Zero(n), predicted), Vector::Zero(obs.obs_dim()), obs);
      sol.filtered = post.state.covariance();
      sol.predicted = predicted;
      sol.gain = post.gain;
      sol.closed_loop_radius =
          spectral_radius((Matrix::Identity(n, n) - sol.gain * obs.h) * model.A());
      sol.iterations = it;
      return sol;
    }
  }
  throw Error(ErrorKind::kNoConvergence,
              "Riccati iteration did not settle within " + std::to_string(max_iter) +
                  " iterations");
}

std::vector<std::string> check_filter_assumptions(const MacroStateModel& model,
                                                  const ObservationModel& obs) {
  std::vector<std::string> out;
  if (!is_detectable(model.A(), obs.h)) out.push_back("(A, H_eff) is not detectable");
  if (!is_stabilizable(model.A(), psd_sqrt(model.Q()))) {
    out.push_back("(A, Q^1/2) is not stabilisable");
  }
  return out;
}

ErrorTrace error_trace(const std::vector<Vector>& truth,
                       const std::vector<Vector>& estimates, int decay_from) {
  require(truth.size() == estimates.size(), ErrorKind::kLengthMismatch,
          "truth has " + std::to_string(truth.size()) + " steps, estimates have " +
              std::to_string(estimates.size()));
  ErrorTrace out;
  out.errors.reserve(truth.size());
  out.squared_norms.reserve(truth.size());
  for (std::size_t t = 0; t < truth.size(); ++t) {
    require(truth[t].size() == estimates[t].size(), ErrorKind::kDimensionMismatch,
            "state dimension changes along the trace");
    out.errors.push_back(estimates[t] - truth[t]);
    out.squared_norms.push_back(out.errors.back().squaredNorm());
  }
  for (std::size_t t = static_cast<std::size_t>(std::max(decay_from, 0));
       t + 1 < truth.size(); ++t) {
    const double now = std::sqrt(out.squared_norms[t]);
    if (now <= 1e-14) continue;
    out.decay_ratio = std::max(out.decay_ratio, std::sqrt(out.squared_norms[t + 1]) / now);
  }
  return out;
}

}  // namespace lifetime_pd
