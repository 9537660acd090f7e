#pragma once

#include <Eigen/Dense>

namespace lifetime_pd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Probability row over K rating states; the last state is the absorbing
/// default state unless told otherwise.
class RatingDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;

  /// Throws InvalidArgument if a weight is negative or non-finite, or if the
  /// weights do not sum to 1 within kSumTolerance.
  explicit RatingDistribution(Vector weights, int default_index = -1);

  /// Unit mass on `state`.
  static RatingDistribution point_mass(int size, int state, int default_index = -1);

  const Vector& weights() const noexcept { return weights_; }
  int size() const noexcept { return static_cast<int>(weights_.size()); }
  int default_index() const noexcept { return default_index_; }
  double default_mass() const noexcept { return weights_(default_index_); }
  double operator[](int i) const { return weights_(i); }

 private:
  Vector weights_;
  int default_index_;
};

}  // namespace lifetime_pd
