#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "lifetime_pd/config.h"
#include "lifetime_pd/experiment.h"
#include "lifetime_pd/random.h"
#include "lifetime_pd/ratings.h"

namespace lifetime_pd::testing {

inline Matrix reference_ttc_entries() {
  Matrix p(4, 4);
  p << 0.975, 0.022, 0.002, 0.001,  //
      0.030, 0.935, 0.030, 0.005,   //
      0.010, 0.060, 0.915, 0.015,   //
      0.0, 0.0, 0.0, 1.0;
  return p;
}

inline TransitionMatrix reference_ttc() { return TransitionMatrix(reference_ttc_entries()); }

/// Listed sensitivities plus B -> A mirrored from A -> B.
inline SensitivityMatrix reference_betas() {
  Matrix b = Matrix::Zero(4, 4);
  b(0, 1) = 2.0;
  b(0, 3) = 3.0;
  b(1, 3) = 2.0;
  b(2, 3) = 1.2;
  b(1, 0) = 2.0;
  return SensitivityMatrix(b);
}

inline RatingDistribution reference_pi0() {
  Vector w(4);
  w << 0.45, 0.40, 0.15, 0.0;
  return RatingDistribution(w);
}

inline std::string reference_config_path() { return LPD_REFERENCE_CONFIG; }

inline RunConfig reference_config() { return load_config_file(reference_config_path()).run; }

// Hand-rolled generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(make_rng(seed)) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p) { return uniform(0.0, 1.0) < p; }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  Rng& engine() { return rng_; }

  /// Row-stochastic K x K with absorbing default row; roughly 20% of the
  /// off-diagonal entries are structural zeros.
  TransitionMatrix transition(int k, int default_index) {
    Matrix p = Matrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      if (i == default_index) {
        p(i, i) = 1.0;
        continue;
      }
      double total = 0.0;
      for (int j = 0; j < k; ++j) {
        const bool zero = j != i && coin(0.2);
        p(i, j) = zero ? 0.0 : -std::log(uniform(1e-12, 1.0));
        total += p(i, j);
      }
      p.row(i) /= total;
      // Push the row onto the simplex to the last bit.
      Eigen::Index jmax;
      p.row(i).maxCoeff(&jmax);
      double rest = 0.0;
      for (int j = 0; j < k; ++j) {
        if (j != jmax) rest += p(i, j);
      }
      p(i, jmax) = 1.0 - rest;
    }
    return TransitionMatrix(p, default_index);
  }

  SensitivityMatrix betas(int k, int default_index, double scale) {
    Matrix b(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) b(i, j) = i == default_index ? 0.0 : uniform(-scale, scale);
    }
    return SensitivityMatrix(b, default_index);
  }

  RatingDistribution distribution(int k, int default_index) {
    Vector w(k);
    for (int i = 0; i < k; ++i) w(i) = coin(0.15) ? 0.0 : -std::log(uniform(1e-12, 1.0));
    if (w.sum() == 0.0) w(0) = 1.0;
    w /= w.sum();
    Eigen::Index imax;
    w.maxCoeff(&imax);
    w(imax) = 0.0;
    w(imax) = 1.0 - w.sum();
    return RatingDistribution(w, default_index);
  }

 private:
  Rng rng_;
};

}  // namespace lifetime_pd::testing
