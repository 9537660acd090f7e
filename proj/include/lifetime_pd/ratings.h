#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lifetime_pd/distribution.h"

namespace lifetime_pd {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Obligor migration counts i -> j over a sample period.
class MigrationCounts {
 public:
  /// Validates K >= 2, square shape, nonnegative entries and nonempty rows
  /// (EmptyCohortRow names the offending row). `default_index` < 0 selects
  /// the last state.
  explicit MigrationCounts(CountMatrix counts, int default_index = -1,
                           std::vector<std::string> labels = {});

  const CountMatrix& counts() const noexcept { return counts_; }
  int size() const noexcept { return static_cast<int>(counts_.rows()); }
  int default_index() const noexcept { return default_index_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

 private:
  CountMatrix counts_;
  int default_index_;
  std::vector<std::string> labels_;
};

/// Header row of state labels followed by K rows of K integers.
MigrationCounts read_migration_counts_csv(std::istream& in);
MigrationCounts read_migration_counts_csv(const std::filesystem::path& path);

/// Row-stochastic K x K migration matrix whose default row is the unit row.
class TransitionMatrix {
 public:
  static constexpr double kRowSumTolerance = 1e-12;

  explicit TransitionMatrix(Matrix entries, int default_index = -1);

  static TransitionMatrix identity(int size, int default_index = -1);

  const Matrix& entries() const noexcept { return entries_; }
  int size() const noexcept { return static_cast<int>(entries_.rows()); }
  int default_index() const noexcept { return default_index_; }
  double operator()(int i, int j) const { return entries_(i, j); }

 private:
  Matrix entries_;
  int default_index_;
};

/// Per-move macro sensitivities. The default row is identically zero.
class SensitivityMatrix {
 public:
  explicit SensitivityMatrix(Matrix betas, int default_index = -1);

  static SensitivityMatrix zero(int size, int default_index = -1);

  const Matrix& betas() const noexcept { return betas_; }
  int size() const noexcept { return static_cast<int>(betas_.rows()); }
  int default_index() const noexcept { return default_index_; }
  double operator()(int i, int j) const { return betas_(i, j); }

  SensitivityMatrix negated() const;

 private:
  Matrix betas_;
  int default_index_;
};

/// How the composite index sign relates to the betas. `kAsWritten` applies
/// exp(beta * m) literally; `kAdversePositive` negates every beta so that a
/// positive beta raises the move probability when the index falls.
enum class MacroOrientation { kAsWritten, kAdversePositive };

SensitivityMatrix oriented(const SensitivityMatrix& betas, MacroOrientation orientation);

inline constexpr double kDefaultExponentCap = 50.0;

/// Cohort estimator p_ij = N_ij / sum_j N_ij. The default row is replaced by
/// the absorbing unit row; when the counts carry off-default mass in that row
/// the call throws NonAbsorbingDefault unless `force_absorption` is set.
TransitionMatrix cohort_estimate(const MigrationCounts& counts,
                                 bool force_absorption = false);

/// Logit overlay: p_ij(m) proportional to p_ij^TTC * exp(beta_ij * m), each
/// non-default row renormalised by its compensated sum. Zero TTC entries stay
/// zero and the default row stays absorbing.
///
/// Throws OverflowGuard if |beta_ij * m| exceeds `exponent_cap` on a supported
/// entry, or if a row's unnormalised mass underflows to zero.
TransitionMatrix logit_overlay(const TransitionMatrix& ttc,
                               const SensitivityMatrix& betas, double m,
                               double exponent_cap = kDefaultExponentCap);

/// d/dm of phi(pi, m) = sum_i pi_i p_iK(m), using
/// d p_iK / dm = p_iK (beta_iK - sum_j beta_ij p_ij).
double overlay_default_sensitivity(const TransitionMatrix& ttc,
                                   const SensitivityMatrix& betas,
                                   const RatingDistribution& pi, double m,
                                   double exponent_cap = kDefaultExponentCap);

/// min over the grid on [m_lo, m_hi] and over non-default rows i of
/// p_iK(m) (beta_iK - sum_j beta_ij p_ij(m)). When positive it bounds
/// d phi / dm from below by (1 - pi_K) times the returned value.
double sensitivity_lower_bound(const TransitionMatrix& ttc,
                               const SensitivityMatrix& betas, double m_lo,
                               double m_hi, double step,
                               double exponent_cap = kDefaultExponentCap);

void check_compatible(const TransitionMatrix& ttc, const SensitivityMatrix& betas);

}  // namespace lifetime_pd
