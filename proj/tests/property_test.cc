// Randomised invariants over hand-rolled generators.

#include <charconv>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "lifetime_pd/csv.h"
#include "lifetime_pd/propagation.h"
#include "lifetime_pd/random.h"
#include "lifetime_pd/ratings.h"
#include "test_util.h"

namespace lifetime_pd {
namespace {

using testing::Gen;

TEST(OverlayProperties, RowsStayOnSimplex) {
  Gen gen(1001);
  for (int trial = 0; trial < 2000; ++trial) {
    const int k = gen.integer(2, 8);
    const int d = k - 1;
    const TransitionMatrix g =
        logit_overlay(gen.transition(k, d), gen.betas(k, d, 3.0), gen.uniform(-3, 3));
    for (int i = 0; i < k; ++i) {
      EXPECT_NEAR(g.entries().row(i).sum(), 1.0, 1e-12);
      EXPECT_GE(g.entries().row(i).minCoeff(), 0.0);
    }
    EXPECT_EQ(g(d, d), 1.0);
  }
}

TEST(OverlayProperties, OddsRatiosScaleExponentially) {
  // p_ij / p_il = (p^TTC_ij / p^TTC_il) exp((beta_ij - beta_il) m).
  Gen gen(1002);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = gen.integer(3, 6);
    const TransitionMatrix ttc = gen.transition(k, k - 1);
    const SensitivityMatrix b = gen.betas(k, k - 1, 2.0);
    const double m = gen.uniform(-2, 2);
    const TransitionMatrix g = logit_overlay(ttc, b, m);
    for (int i = 0; i < k - 1; ++i) {
      for (int j = 0; j < k; ++j) {
        if (ttc(i, j) == 0.0 || ttc(i, i) == 0.0) continue;
        const double expected = ttc(i, j) / ttc(i, i) * std::exp((b(i, j) - b(i, i)) * m);
        EXPECT_NEAR(g(i, j) / g(i, i), expected, 1e-12 * std::max(1.0, expected));
      }
    }
  }
}

TEST(OverlayProperties, ComposesAdditivelyInMacro) {
  Gen gen(1003);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = gen.integer(2, 6);
    const TransitionMatrix ttc = gen.transition(k, k - 1);
    const SensitivityMatrix b = gen.betas(k, k - 1, 2.0);
    const double m1 = gen.uniform(-1.5, 1.5);
    const double m2 = gen.uniform(-1.5, 1.5);
    const Matrix twice = logit_overlay(logit_overlay(ttc, b, m1), b, m2).entries();
    const Matrix once = logit_overlay(ttc, b, m1 + m2).entries();
    EXPECT_LT((twice - once).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(SensitivityProperties, MatchesFiniteDifferences) {
  Gen gen(1004);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = gen.integer(2, 6);
    const TransitionMatrix ttc = gen.transition(k, k - 1);
    const SensitivityMatrix b = gen.betas(k, k - 1, 2.0);
    const RatingDistribution pi = gen.distribution(k, k - 1);
    const double m = gen.uniform(-2, 2);
    const double h = 1e-6;
    auto phi = [&](double x) {
      return pi.weights().dot(logit_overlay(ttc, b, x).entries().col(k - 1));
    };
    const double fd = (phi(m + h) - phi(m - h)) / (2 * h);
    EXPECT_NEAR(overlay_default_sensitivity(ttc, b, pi, m), fd, 1e-7);
  }
}

TEST(PropagationProperties, SimplexAndMonotoneDefault) {
  Gen gen(1005);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = gen.integer(2, 7);
    const TransitionMatrix ttc = gen.transition(k, k - 1);
    const SensitivityMatrix b = gen.betas(k, k - 1, 2.0);
    std::vector<TransitionMatrix> ms;
    const int n = gen.integer(1, 60);
    for (int t = 0; t < n; ++t) ms.push_back(logit_overlay(ttc, b, gen.uniform(-3, 3)));
    RatingDistribution pi = gen.distribution(k, k - 1);
    const double y0 = pi.default_mass();
    for (const auto& m : ms) {
      const double before = pi.default_mass();
      pi = propagate_one(pi, m);
      EXPECT_NEAR(pi.weights().sum(), 1.0, 1e-12);
      EXPECT_GE(pi.weights().minCoeff(), 0.0);
      EXPECT_GE(pi.default_mass(), before);
    }
    EXPECT_GE(pi.default_mass(), y0);
  }
}

TEST(PropagationProperties, AccumulationBoundOnRandomPortfolios) {
  Gen gen(1006);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = gen.integer(2, 5);
    Portfolio pf{gen.distribution(k, k - 1), gen.transition(k, k - 1), gen.betas(k, k - 1, 1.5)};
    const double lg = estimate_lipschitz(pf.ttc, pf.betas, {-3.0, 3.0, 0.01});
    const int n = 25;
    std::vector<double> macro(n), deltas(n);
    for (int t = 0; t < n; ++t) {
      macro[static_cast<std::size_t>(t)] = gen.uniform(-2, 2);
      deltas[static_cast<std::size_t>(t)] = gen.coin(0.5) ? gen.uniform(-1, 1) : 0.0;
    }
    const auto e = realized_deviation(pf, macro, deltas);
    const auto bound = deviation_bound(0.0, lg, deltas);
    for (int t = 0; t < n; ++t) {
      EXPECT_LE(e[static_cast<std::size_t>(t)], bound[static_cast<std::size_t>(t)] + 1e-15);
    }
  }
}

TEST(SeedProperties, DerivedSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {0ull, 1ull, 42ull}) {
    for (std::uint64_t a = 0; a < 20; ++a) {
      for (std::uint64_t b = 0; b < 20; ++b) seen.insert(derive_seed(master, {a, b}));
    }
  }
  EXPECT_EQ(seen.size(), 3u * 20u * 20u);
}

TEST(CsvProperties, NumbersRoundTrip) {
  Gen gen(1007);
  for (int trial = 0; trial < 5000; ++trial) {
    const double x = gen.normal() * std::pow(10.0, gen.integer(-300, 300));
    const std::string s = format_number(x);
    double back = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), back);
    ASSERT_EQ(res.ec, std::errc()) << s;
    EXPECT_EQ(back, x) << s;
  }
}

}  // namespace
}  // namespace lifetime_pd
