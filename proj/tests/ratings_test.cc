#include "lifetime_pd/ratings.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "lifetime_pd/errors.h"
#include "test_util.h"

namespace lifetime_pd {
namespace {

using testing::Gen;
using testing::reference_betas;
using testing::reference_pi0;
using testing::reference_ttc;

// True when q is the correctly rounded double nearest n / d, decided in
// exact integer arithmetic: with q = mant 2^-s, |n/d - q| <= ulp/2 is
// 2 |n 2^s - mant d| <= d.
bool is_correctly_rounded_quotient(std::int64_t n, std::int64_t d, double q) {
  if (n == 0) return q == 0.0;
  int e = 0;
  const double frac = std::frexp(q, &e);  // q = frac 2^e, frac in [0.5, 1)
  const auto mant = static_cast<__int128>(std::ldexp(frac, 53));
  const int s = 53 - e;
  if (s < 0 || s > 100) return false;
  const __int128 diff = static_cast<__int128>(n) * (static_cast<__int128>(1) << s) -
                        mant * static_cast<__int128>(d);
  const __int128 abs_diff = diff < 0 ? -diff : diff;
  return 2 * abs_diff <= static_cast<__int128>(d);
}

TEST(CohortEstimate, DiagonalCountsGiveIdentity) {
  CountMatrix n = CountMatrix::Zero(3, 3);
  n.diagonal().setConstant(10);
  const TransitionMatrix p = cohort_estimate(MigrationCounts(n));
  EXPECT_TRUE(p.entries().isIdentity(0.0));
}

TEST(CohortEstimate, TwoStateRows) {
  CountMatrix n(2, 2);
  n << 9, 1, 0, 10;
  const TransitionMatrix p = cohort_estimate(MigrationCounts(n));
  EXPECT_EQ(p(0, 0), 0.9);
  EXPECT_EQ(p(0, 1), 0.1);
  EXPECT_EQ(p(1, 0), 0.0);
  EXPECT_EQ(p(1, 1), 1.0);
}

TEST(CohortEstimate, MatchesExactRationalDivision) {
  Gen gen(101);
  for (int trial = 0; trial < 200; ++trial) {
    CountMatrix n(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) n(i, j) = gen.integer(0, 5000);
      n(i, i) += 1;
    }
    n.row(3).setZero();
    n(3, 3) = gen.integer(1, 100);
    const TransitionMatrix p = cohort_estimate(MigrationCounts(n));
    for (int i = 0; i < 3; ++i) {
      const std::int64_t row = n.row(i).sum();
      double sum = 0.0;
      for (int j = 0; j < 4; ++j) {
        EXPECT_TRUE(is_correctly_rounded_quotient(n(i, j), row, p(i, j)))
            << "entry (" << i << ", " << j << ") = " << p(i, j) << " for " << n(i, j) << "/"
            << row;
        sum += p(i, j);
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
    EXPECT_EQ(p(3, 3), 1.0);
  }
}

TEST(CohortEstimate, RejectsEmptyRow) {
  CountMatrix n(3, 3);
  n << 5, 1, 0, 0, 0, 0, 0, 0, 3;
  try {
    MigrationCounts counts(n);
    FAIL() << "expected EmptyCohortRow";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyCohortRow);
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
}

TEST(CohortEstimate, NonAbsorbingDefaultNeedsForcing) {
  CountMatrix n(2, 2);
  n << 8, 2, 1, 9;
  const MigrationCounts counts(n);
  try {
    cohort_estimate(counts);
    FAIL() << "expected NonAbsorbingDefault";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonAbsorbingDefault);
  }
  const TransitionMatrix forced = cohort_estimate(counts, true);
  EXPECT_EQ(forced(1, 0), 0.0);
  EXPECT_EQ(forced(1, 1), 1.0);
  EXPECT_EQ(forced(0, 0), 0.8);
}

TEST(MigrationCounts, RejectsNegativeAndTiny) {
  CountMatrix neg(2, 2);
  neg << 1, -1, 0, 1;
  EXPECT_THROW(MigrationCounts{neg}, Error);
  EXPECT_THROW(MigrationCounts(CountMatrix::Ones(1, 1)), Error);
}

TEST(MigrationCounts, ReadsCsv) {
  std::istringstream in("A, B, D\n90, 8, 2\n5, 90, 5\n0, 0, 7\n");
  const MigrationCounts counts = read_migration_counts_csv(in);
  EXPECT_EQ(counts.size(), 3);
  EXPECT_EQ(counts.labels()[1], "B");
  EXPECT_EQ(counts.counts()(1, 2), 5);
  const TransitionMatrix p = cohort_estimate(counts);
  EXPECT_EQ(p(0, 0), 0.9);
}

TEST(MigrationCounts, CsvShapeErrors) {
  std::istringstream short_row("A,B\n1\n0,1\n");
  EXPECT_THROW(read_migration_counts_csv(short_row), Error);
  std::istringstream bad_cell("A,B\n1,x\n0,1\n");
  EXPECT_THROW(read_migration_counts_csv(bad_cell), Error);
  std::istringstream missing_row("A,B\n1,1\n");
  EXPECT_THROW(read_migration_counts_csv(missing_row), Error);
}

TEST(TransitionMatrix, ValidatesInvariants) {
  Matrix bad_sum(2, 2);
  bad_sum << 0.5, 0.4, 0.0, 1.0;
  EXPECT_THROW(TransitionMatrix{bad_sum}, Error);
  Matrix leaky(2, 2);
  leaky << 0.5, 0.5, 0.1, 0.9;
  try {
    TransitionMatrix m(leaky);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonAbsorbingDefault);
  }
}

TEST(SensitivityMatrix, DefaultRowMustBeZero) {
  Matrix b = Matrix::Zero(3, 3);
  b(2, 0) = 1.0;
  EXPECT_THROW(SensitivityMatrix{b}, Error);
}

TEST(LogitOverlay, ZeroMacroIsExactIdentity) {
  const TransitionMatrix ttc = reference_ttc();
  const TransitionMatrix g = logit_overlay(ttc, reference_betas(), 0.0);
  EXPECT_EQ(g.entries(), ttc.entries());
}

TEST(LogitOverlay, ZeroBetasAreExactIdentity) {
  const TransitionMatrix ttc = reference_ttc();
  for (double m : {-3.0, 0.7, 9.0}) {
    EXPECT_EQ(logit_overlay(ttc, SensitivityMatrix::zero(4), m).entries(), ttc.entries());
  }
}

TEST(LogitOverlay, ReferenceCalibrationAgainstExtendedPrecision) {
  const TransitionMatrix ttc = reference_ttc();
  const SensitivityMatrix b = reference_betas();
  const double m = -1.0;
  const TransitionMatrix g = logit_overlay(ttc, b, m);
  for (int i = 0; i < 3; ++i) {
    long double w[4];
    long double total = 0.0L;
    for (int j = 0; j < 4; ++j) {
      w[j] = static_cast<long double>(ttc(i, j)) *
             std::exp(static_cast<long double>(b(i, j)) * static_cast<long double>(m));
      total += w[j];
    }
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(g(i, j), static_cast<double>(w[j] / total), 1e-15) << i << "," << j;
    }
  }
  // A -> D weight 0.001 e^-3 relative to the row, computed by hand.
  const double a_row = 0.975 + 0.022 * std::exp(-2.0) + 0.002 + 0.001 * std::exp(-3.0);
  EXPECT_NEAR(g(0, 3), 0.001 * std::exp(-3.0) / a_row, 1e-16);
  EXPECT_EQ(g(3, 3), 1.0);
}

TEST(LogitOverlay, SupportIsPreserved) {
  Matrix p(3, 3);
  p << 0.9, 0.0, 0.1, 0.2, 0.7, 0.1, 0.0, 0.0, 1.0;
  Matrix b(3, 3);
  b << 0.0, 5.0, 2.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0;
  const TransitionMatrix g = logit_overlay(TransitionMatrix(p), SensitivityMatrix(b), 4.0);
  EXPECT_EQ(g(0, 1), 0.0);
  EXPECT_GT(g(0, 2), 0.1);
}

TEST(LogitOverlay, OverflowGuard) {
  try {
    logit_overlay(reference_ttc(), reference_betas(), 20.0);
    FAIL() << "expected OverflowGuard";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kOverflowGuard);
  }
  EXPECT_NO_THROW(logit_overlay(reference_ttc(), reference_betas(), 20.0, 100.0));
}

TEST(LogitOverlay, RejectsNonFiniteMacro) {
  EXPECT_THROW(logit_overlay(reference_ttc(), reference_betas(), std::nan("")), Error);
}

TEST(Orientation, AdversePositiveNegatesEveryBeta) {
  const SensitivityMatrix b = reference_betas();
  EXPECT_EQ(oriented(b, MacroOrientation::kAsWritten).betas(), b.betas());
  EXPECT_EQ(oriented(b, MacroOrientation::kAdversePositive).betas(), -b.betas());
  // Falling index raises default probability under the adverse-positive reading.
  const auto adverse = oriented(b, MacroOrientation::kAdversePositive);
  EXPECT_GT(logit_overlay(reference_ttc(), adverse, -1.0)(0, 3), reference_ttc()(0, 3));
}

TEST(DefaultSensitivity, TrivialCases) {
  const TransitionMatrix ttc = reference_ttc();
  EXPECT_EQ(overlay_default_sensitivity(ttc, SensitivityMatrix::zero(4), reference_pi0(), 0.5), 0.0);
  EXPECT_EQ(overlay_default_sensitivity(ttc, reference_betas(), RatingDistribution::point_mass(4, 3),
                                        0.5),
            0.0);
}

double phi(const TransitionMatrix& ttc, const SensitivityMatrix& b, const RatingDistribution& pi,
           double m) {
  return pi.weights().dot(logit_overlay(ttc, b, m).entries().col(ttc.default_index()));
}

TEST(DefaultSensitivity, MatchesCentralDifferenceAtReferenceCalibration) {
  const TransitionMatrix ttc = reference_ttc();
  const SensitivityMatrix b = reference_betas();
  const RatingDistribution pi = reference_pi0();
  const double h = 1e-6;
  const double fd = (phi(ttc, b, pi, h) - phi(ttc, b, pi, -h)) / (2 * h);
  EXPECT_NEAR(overlay_default_sensitivity(ttc, b, pi, 0.0), fd, 1e-8);
}

TEST(DefaultSensitivity, LowerBoundControlsFiniteDifferences) {
  const TransitionMatrix ttc = reference_ttc();
  const SensitivityMatrix b = reference_betas();
  const double c = sensitivity_lower_bound(ttc, b, -2.0, 2.0, 0.01);
  ASSERT_GT(c, 0.0);
  Gen gen(7);
  for (int trial = 0; trial < 500; ++trial) {
    const RatingDistribution pi = gen.distribution(4, 3);
    const double m = gen.uniform(-1.99, 1.99);
    double d = gen.uniform(-0.01, 0.01);
    if (std::abs(m + d) > 2.0) d = -d;
    if (d == 0.0) continue;
    const double jump = std::abs(phi(ttc, b, pi, m + d) - phi(ttc, b, pi, m));
    EXPECT_GE(jump, (1.0 - pi.default_mass()) * c * std::abs(d) * (1.0 - 1e-9));
  }
}

}  // namespace
}  // namespace lifetime_pd
