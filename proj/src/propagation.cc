#include "lifetime_pd/propagation.h"

#include <cmath>

#include "lifetime_pd/csv.h"
#include "lifetime_pd/errors.h"

namespace lifetime_pd {

RatingDistribution::RatingDistribution(Vector weights, int default_index)
    : weights_(std::move(weights)) {
  require(weights_.size() >= 2, ErrorKind::kInvalidArgument,
          "a rating distribution needs at least two states");
  default_index_ = default_index < 0 ? size() - 1 : default_index;
  require(default_index_ < size(), ErrorKind::kInvalidArgument,
          "default_index out of range");
  double total = 0.0;
  for (int i = 0; i < size(); ++i) {
    require(std::isfinite(weights_(i)) && weights_(i) >= 0.0,
            ErrorKind::kInvalidArgument,
            "weight " + std::to_string(i) + " is negative or not finite");
    total += weights_(i);
  }
  require(std::abs(total - 1.0) <= kSumTolerance, ErrorKind::kInvalidArgument,
          "weights sum to " + format_number(total) + ", not 1");
}

RatingDistribution RatingDistribution::point_mass(int size, int state,
                                                  int default_index) {
  require(state >= 0 && state < size, ErrorKind::kInvalidArgument,
          "point mass state out of range");
  Vector w = Vector::Zero(size);
  w(state) = 1.0;
  return RatingDistribution(std::move(w), default_index);
}

std::vector<double> MacroGrid::points() const {
  require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi && step > 0.0,
          ErrorKind::kInvalidArgument, "macro grid needs lo <= hi and step > 0");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long s = 0; s <= n; ++s) out.push_back(lo + static_cast<double>(s) * step);
  if (out.back() < hi) out.push_back(hi);
  return out;
}

RatingDistribution propagate_one(const RatingDistribution& pi, const TransitionMatrix& p) {
  require(pi.size() == p.size(), ErrorKind::kDimensionMismatch,
          "distribution has " + std::to_string(pi.size()) + " states, matrix has " +
              std::to_string(p.size()));
  require(pi.default_index() == p.default_index(), ErrorKind::kDimensionMismatch,
          "default_index differs between distribution and matrix");
  const int d = p.default_index();
  Vector next = (pi.weights().transpose() * p.entries()).transpose();
  // The default column of an absorbing chain can only gain mass.
  next(d) = std::max(next(d), pi.default_mass());
  const double total = next.sum();
  const double drift = std::abs(total - 1.0);
  require(drift <= kMaxDrift, ErrorKind::kNumericalDrift,
          "propagated mass drifted by " + format_number(drift));
  if (drift > kRenormaliseDrift) {
    const double alive = total - next(d);
    if (alive > 0.0) {
      const double scale = (1.0 - next(d)) / alive;
      for (int i = 0; i < next.size(); ++i) {
        if (i != d) next(i) *= scale;
      }
    }
  }
  return RatingDistribution(std::move(next), d);
}

PDTermStructure lifetime_pd(const RatingDistribution& pi0,
                            const std::vector<TransitionMatrix>& matrices,
                            bool include_initial) {
  PDTermStructure out;
  out.first_t = include_initial ? 0 : 1;
  out.values.reserve(matrices.size() + 1);
  if (include_initial) out.values.push_back(pi0.default_mass());
  RatingDistribution pi = pi0;
  for (const auto& p : matrices) {
    pi = propagate_one(pi, p);
    out.values.push_back(pi.default_mass());
  }
  return out;
}

double induced_norm_1to1(const Matrix& d) {
  if (d.size() == 0) return 0.0;
  return d.cwiseAbs().rowwise().sum().maxCoeff();
}

std::vector<double> deviation_bound(double e0, double lipschitz_lg,
                                    const std::vector<double>& deltas) {
  require(e0 >= 0.0 && lipschitz_lg >= 0.0, ErrorKind::kInvalidArgument,
          "deviation bound needs e0 >= 0 and L_G >= 0");
  std::vector<double> out;
  out.reserve(deltas.size());
  double acc = 0.0;
  for (double delta : deltas) {
    acc += std::abs(delta);
    out.push_back(e0 + lipschitz_lg * acc);
  }
  return out;
}

double estimate_lipschitz(const TransitionMatrix& ttc, const SensitivityMatrix& betas,
                          const MacroGrid& grid, double perturbation, double safety) {
  check_compatible(ttc, betas);
  require(perturbation > 0.0 && safety > 0.0, ErrorKind::kInvalidArgument,
          "perturbation and safety factor must be positive");
  double best = 0.0;
  for (double m : grid.points()) {
    const Matrix g = logit_overlay(ttc, betas, m).entries();
    for (double d : {perturbation, -perturbation}) {
      const Matrix g2 = logit_overlay(ttc, betas, m + d).entries();
      best = std::max(best, induced_norm_1to1(g2 - g) / perturbation);
    }
  }
  return safety * best;
}

void write_term_structure_csv(std::ostream& out, const PDTermStructure& pd) {
  write_csv_row(out, {"t", "Y_t"});
  for (std::size_t i = 0; i < pd.values.size(); ++i) {
    write_csv_row(out, {std::to_string(pd.first_t + static_cast<int>(i)),
                        format_number(pd.values[i])});
  }
}

}  // namespace lifetime_pd
