#include "lifetime_pd/config.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "lifetime_pd/errors.h"
#include "test_util.h"

namespace lifetime_pd {
namespace {

using testing::reference_betas;
using testing::reference_config_path;
using testing::reference_ttc_entries;

std::string reference_text() {
  std::ifstream in(reference_config_path());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  if (pos == std::string::npos) throw std::runtime_error("fixture text not found: " + from);
  return text.replace(pos, from.size(), to);
}

// Expects a ConfigError whose message contains every fragment.
void expect_config_error(const std::string& text, std::initializer_list<std::string> fragments) {
  try {
    load_config_string(text, "case.toml");
    FAIL() << "expected ConfigError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig) << e.what();
    for (const auto& f : fragments) {
      EXPECT_NE(std::string(e.what()).find(f), std::string::npos)
          << "'" << f << "' missing from: " << e.what();
    }
  }
}

int line_of(const std::string& text, const std::string& needle) {
  const auto pos = text.find(needle);
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

TEST(ReferenceConfig, EncodesCalibration) {
  const LoadedConfig cfg = load_config_file(reference_config_path());
  const RunConfig& run = cfg.run;
  EXPECT_EQ(cfg.state_labels, (std::vector<std::string>{"A", "B", "C", "D"}));
  EXPECT_EQ(run.portfolio.pi0.weights(), testing::reference_pi0().weights());
  EXPECT_EQ(run.portfolio.ttc.entries(), reference_ttc_entries());
  EXPECT_EQ(run.portfolio.betas.betas(), reference_betas().betas());
  EXPECT_EQ(run.model.A()(0, 0), 0.90);
  EXPECT_EQ(run.model.Q()(0, 0), 0.19);
  EXPECT_EQ(run.model.R()(0, 0), 0.25);
  EXPECT_EQ(run.anchor.m_star(0), 0.0);
  EXPECT_EQ(run.anchor.sigma_star_sq_in, 0.25);
  EXPECT_EQ(run.anchor.sigma_star_sq_out, 0.0);
  EXPECT_EQ(run.forecast_horizon_tf(), 20);
  EXPECT_EQ(run.horizon_t, 40);
  EXPECT_EQ(run.n_replications, 200);
  EXPECT_EQ(run.master_seed, 42u);
  ASSERT_EQ(run.scenarios.size(), 3u);
  EXPECT_EQ(run.scenarios[0].name, "baseline");
  EXPECT_EQ(run.scenarios[0].gdp_forecast, builtin_baseline_scenario().gdp_forecast);
  EXPECT_EQ(run.scenarios[1].gdp_forecast, builtin_stress_scenario().gdp_forecast);
  EXPECT_EQ(run.scenarios[1].unemp_forecast, builtin_stress_scenario().unemp_forecast);
  EXPECT_EQ(run.scenarios[2].gdp_forecast, builtin_pandemic_scenario().gdp_forecast);
  EXPECT_EQ(run.scenarios[2].unemp_forecast, builtin_pandemic_scenario().unemp_forecast);
  EXPECT_EQ(run.scenarios[2].noise_sigma_gdp, 0.2);
  ASSERT_TRUE(run.process_cov_after_horizon.has_value());
  EXPECT_EQ((*run.process_cov_after_horizon)(0, 0), 0.0);
  EXPECT_NE(cfg.content_hash, 0u);
}

TEST(ReferenceConfig, HashTracksBytes) {
  const std::string text = reference_text();
  EXPECT_EQ(load_config_string(text).content_hash, load_config_string(text).content_hash);
  EXPECT_NE(load_config_string(text).content_hash,
            load_config_string(text + "\n# edited\n").content_hash);
}

TEST(ConfigErrors, MissingFile) {
  try {
    load_config_file("/nonexistent/run.toml");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(ConfigErrors, ParseErrorNamesLine) {
  const std::string text = replace_once(reference_text(), "rho = 0.90", "rho = = 0.90");
  expect_config_error(text, {"case.toml:" + std::to_string(line_of(text, "rho = ="))});
}

TEST(ConfigErrors, WrongTypeNamesFieldAndLine) {
  const std::string text = replace_once(reference_text(), "obs_var = 0.25", "obs_var = \"big\"");
  expect_config_error(text, {"case.toml:" + std::to_string(line_of(text, "obs_var")),
                             "macro_model.obs_var", "expected a number"});
}

TEST(ConfigErrors, NonStochasticTtcRow) {
  const std::string text =
      replace_once(reference_text(), "[0.975, 0.022, 0.002, 0.001]", "[0.975, 0.022, 0.002, 0.101]");
  expect_config_error(text, {"ttc"});
}

TEST(ConfigErrors, UnknownState) {
  const std::string text =
      replace_once(reference_text(), "{ from = \"C\", to = \"D\"", "{ from = \"E\", to = \"D\"");
  expect_config_error(text, {"unknown state 'E'", "betas.entries"});
}

TEST(ConfigErrors, UnknownScenario) {
  const std::string text = replace_once(reference_text(), "[scenario.stress]", "[scenario.boom]");
  expect_config_error(text, {"scenario.boom", "unknown scenario"});
}

TEST(ConfigErrors, ConflictingForecastSources) {
  const std::string text = replace_once(reference_text(), "gdp_knots = [[1, -2.0], [20, 0.5]]",
                                        "gdp_knots = [[1, -2.0], [20, 0.5]]\ngdp_forecast = [1.0]");
  expect_config_error(text, {"scenario.stress"});
}

TEST(ConfigErrors, BadEnumValues) {
  expect_config_error(replace_once(reference_text(), "\"forecast-and-realized\"", "\"everything\""),
                      {"experiment.randomization_scope"});
  expect_config_error(replace_once(reference_text(), "\"as-written\"", "\"sideways\""),
                      {"betas.macro_orientation"});
}

TEST(ConfigErrors, SemanticValidationIsReported) {
  expect_config_error(replace_once(reference_text(), "horizon = 40", "horizon = 10"),
                      {"experiment", "shorter than T_F"});
  expect_config_error(replace_once(reference_text(), "process_var = 0.19", "process_var = -0.19"),
                      {"macro_model"});
}

TEST(ConfigOptions, OrientationFlipsBetas) {
  const RunConfig run =
      load_config_string(replace_once(reference_text(), "\"as-written\"", "\"adverse-positive\"")).run;
  EXPECT_EQ(run.portfolio.betas.betas(), -reference_betas().betas());
}

TEST(ConfigOptions, SymmetricUpgradesOff) {
  const RunConfig run = load_config_string(
                            replace_once(reference_text(), "symmetric_upgrades = true",
                                         "symmetric_upgrades = false"))
                            .run;
  EXPECT_EQ(run.portfolio.betas(1, 0), 0.0);
  EXPECT_EQ(run.portfolio.betas(0, 1), 2.0);
}

TEST(ConfigOptions, InitialCountsNormalised) {
  const RunConfig run = load_config_string(replace_once(
                            reference_text(), "[4500, 4000, 1500, 0]", "[1, 1, 2, 0]"))
                            .run;
  EXPECT_EQ(run.portfolio.pi0[2], 0.5);
}

TEST(SymmetricUpgrades, MirrorsOnlyUnsetUpgrades) {
  Matrix b = Matrix::Zero(4, 4);
  b(0, 1) = 2.0;
  b(0, 2) = 1.0;
  b(2, 0) = -0.5;
  b(0, 3) = 3.0;
  std::vector<std::vector<bool>> set(4, std::vector<bool>(4, false));
  set[0][1] = set[0][2] = set[2][0] = set[0][3] = true;
  const Matrix out = complete_symmetric_upgrades(b, set, 3);
  EXPECT_EQ(out(1, 0), 2.0);
  EXPECT_EQ(out(2, 0), -0.5);  // explicit value kept
  EXPECT_EQ(out(3, 0), 0.0);   // default row untouched
}

}  // namespace
}  // namespace lifetime_pd
