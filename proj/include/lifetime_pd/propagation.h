#pragma once

#include <ostream>
#include <vector>

#include "lifetime_pd/distribution.h"
#include "lifetime_pd/ratings.h"

namespace lifetime_pd {

/// Cumulative default probabilities Y_t for t = first_t, ..., first_t + n - 1.
/// `first_t` is 1 unless the initial default mass was requested.
struct PDTermStructure {
  std::vector<double> values;
  int first_t = 1;

  int horizon() const noexcept {
    return first_t + static_cast<int>(values.size()) - 1;
  }
  /// Y_t for the calendar quarter t.
  double at(int t) const { return values.at(static_cast<std::size_t>(t - first_t)); }
};

/// Closed interval [lo, hi] sampled every `step`, endpoints included.
struct MacroGrid {
  double lo = -3.0;
  double hi = 3.0;
  double step = 0.01;

  std::vector<double> points() const;
};

/// Drift above which a propagated row is renormalised.
inline constexpr double kRenormaliseDrift = 1e-13;
/// Drift above which propagation gives up with NumericalDrift.
inline constexpr double kMaxDrift = 1e-9;

/// pi * P. Mass drifting off the simplex by more than kRenormaliseDrift is
/// corrected by rescaling the non-default states only, so default mass is
/// never reduced.
RatingDistribution propagate_one(const RatingDistribution& pi, const TransitionMatrix& p);

/// Y_t = (pi0 P_0 ... P_{t-1}) e_K for t = 1..T, with Y_0 prepended when
/// `include_initial` is set.
PDTermStructure lifetime_pd(const RatingDistribution& pi0,
                            const std::vector<TransitionMatrix>& matrices,
                            bool include_initial = false);

/// Induced norm for matrices acting on probability rows from the left:
/// max_i sum_j |D_ij|.
double induced_norm_1to1(const Matrix& d);

/// b_t = e0 + L_G sum_{s<t} |delta_s|, t = 1..T.
std::vector<double> deviation_bound(double e0, double lipschitz_lg,
                                    const std::vector<double>& deltas);

/// Empirical Lipschitz constant of m -> G(P^TTC, m) in the 1->1 norm:
/// max over grid points m and d = +-perturbation of
/// ||G(m + d) - G(m)|| / |d|, times `safety`.
double estimate_lipschitz(const TransitionMatrix& ttc, const SensitivityMatrix& betas,
                          const MacroGrid& grid, double perturbation = 1e-5,
                          double safety = 1.1);

/// Columns `t,Y_t`.
void write_term_structure_csv(std::ostream& out, const PDTermStructure& pd);

}  // namespace lifetime_pd
