#include "lifetime_pd/config.h"

#include <fstream>
#include <optional>
#include <sstream>

#include <toml.hpp>

#include "lifetime_pd/errors.h"
#include "lifetime_pd/random.h"

namespace lifetime_pd {
namespace {

class Reader {
 public:
  Reader(const toml::table& root, std::string source)
      : root_(root), source_(std::move(source)) {}

  [[noreturn]] void fail(const toml::node* node, const std::string& field,
                         const std::string& message) const {
    std::string where = source_;
    if (node != nullptr && node->source().begin.line > 0) {
      where += ":" + std::to_string(node->source().begin.line);
    }
    throw Error(ErrorKind::kConfig, where + ": field '" + field + "': " + message);
  }

  const toml::table* table(const std::string& path, bool required) const {
    const toml::node* node = root_.at_path(path).node();
    if (node == nullptr) {
      if (required) fail(nullptr, path, "missing table");
      return nullptr;
    }
    const auto* t = node->as_table();
    if (t == nullptr) fail(node, path, "expected a table");
    return t;
  }

  const toml::node* find(const toml::table& t, const std::string& table_name,
                         const std::string& key, bool required) const {
    const toml::node* node = t.get(key);
    if (node == nullptr && required) fail(&t, table_name + "." + key, "missing value");
    return node;
  }

  double number(const toml::node& node, const std::string& field) const {
    if (auto v = node.value<double>()) return *v;
    fail(&node, field, "expected a number");
  }

  std::optional<double> opt_number(const toml::table& t, const std::string& table_name,
                                   const std::string& key) const {
    const toml::node* node = find(t, table_name, key, false);
    if (node == nullptr) return std::nullopt;
    return number(*node, table_name + "." + key);
  }

  double req_number(const toml::table& t, const std::string& table_name,
                    const std::string& key) const {
    return number(*find(t, table_name, key, true), table_name + "." + key);
  }

  std::int64_t integer(const toml::node& node, const std::string& field) const {
    if (const auto* i = node.as_integer()) return i->get();
    fail(&node, field, "expected an integer");
  }

  std::optional<std::int64_t> opt_integer(const toml::table& t, const std::string& table_name,
                                          const std::string& key) const {
    const toml::node* node = find(t, table_name, key, false);
    if (node == nullptr) return std::nullopt;
    return integer(*node, table_name + "." + key);
  }

  std::optional<std::string> opt_string(const toml::table& t, const std::string& table_name,
                                        const std::string& key) const {
    const toml::node* node = find(t, table_name, key, false);
    if (node == nullptr) return std::nullopt;
    if (const auto* s = node->as_string()) return s->get();
    fail(node, table_name + "." + key, "expected a string");
  }

  std::optional<bool> opt_bool(const toml::table& t, const std::string& table_name,
                               const std::string& key) const {
    const toml::node* node = find(t, table_name, key, false);
    if (node == nullptr) return std::nullopt;
    if (const auto* b = node->as_boolean()) return b->get();
    fail(node, table_name + "." + key, "expected true or false");
  }

  const toml::array& array(const toml::node& node, const std::string& field) const {
    const auto* a = node.as_array();
    if (a == nullptr) fail(&node, field, "expected an array");
    return *a;
  }

  std::vector<double> numbers(const toml::node& node, const std::string& field) const {
    std::vector<double> out;
    for (const auto& item : array(node, field)) out.push_back(number(item, field));
    return out;
  }

  std::vector<std::string> strings(const toml::node& node, const std::string& field) const {
    std::vector<std::string> out;
    for (const auto& item : array(node, field)) {
      const auto* s = item.as_string();
      if (s == nullptr) fail(&item, field, "expected an array of strings");
      out.push_back(s->get());
    }
    return out;
  }

  Matrix matrix(const toml::node& node, const std::string& field, int k) const {
    const auto& rows = array(node, field);
    if (static_cast<int>(rows.size()) != k) {
      fail(&node, field, "expected " + std::to_string(k) + " rows, found " +
                             std::to_string(rows.size()));
    }
    Matrix m(k, k);
    for (int i = 0; i < k; ++i) {
      const auto row = numbers(*rows.get(static_cast<std::size_t>(i)), field);
      if (static_cast<int>(row.size()) != k) {
        fail(rows.get(static_cast<std::size_t>(i)), field,
             "row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                 " entries, expected " + std::to_string(k));
      }
      for (int j = 0; j < k; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    return m;
  }

  // Runs `fn`, turning library validation errors into ConfigErrors at `node`.
  template <typename F>
  auto guarded(const toml::node* node, const std::string& field, F&& fn) const {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kConfig) throw;
      fail(node, field, e.what());
    }
  }

 private:
  const toml::table& root_;
  std::string source_;
};

int state_index(const Reader& rd, const toml::node* node, const std::string& field,
                const std::vector<std::string>& labels, const std::string& name) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == name) return static_cast<int>(i);
  }
  rd.fail(node, field, "unknown state '" + name + "'");
}

std::vector<double> scenario_path(const Reader& rd, const toml::table& t,
                                  const std::string& table_name, const std::string& prefix,
                                  int tf) {
  const std::string explicit_key = prefix + "_forecast";
  const std::string knots_key = prefix + "_knots";
  const std::string osc_key = prefix + "_oscillation";
  int given = 0;
  for (const auto* key : {&explicit_key, &knots_key, &osc_key}) {
    if (t.get(*key) != nullptr) ++given;
  }
  if (given != 1) {
    rd.fail(&t, table_name + "." + prefix,
            "give exactly one of " + explicit_key + ", " + knots_key + ", " + osc_key);
  }
  if (const toml::node* node = t.get(explicit_key)) {
    auto values = rd.numbers(*node, table_name + "." + explicit_key);
    if (static_cast<int>(values.size()) != tf) {
      rd.fail(node, table_name + "." + explicit_key,
              "expected " + std::to_string(tf) + " quarters, found " +
                  std::to_string(values.size()));
    }
    return values;
  }
  if (const toml::node* node = t.get(knots_key)) {
    const std::string field = table_name + "." + knots_key;
    std::vector<std::pair<double, double>> knots;
    for (const auto& item : rd.array(*node, field)) {
      const auto pair = rd.numbers(item, field);
      if (pair.size() != 2) rd.fail(&item, field, "each knot is [quarter, value]");
      knots.emplace_back(pair[0], pair[1]);
    }
    return rd.guarded(node, field, [&] { return piecewise_linear(knots, tf); });
  }
  const toml::node* node = t.get(osc_key);
  const std::string field = table_name + "." + osc_key;
  const auto* osc = node->as_table();
  if (osc == nullptr) rd.fail(node, field, "expected {mean, amplitude, period}");
  const double mean = rd.req_number(*osc, field, "mean");
  const double amplitude = rd.req_number(*osc, field, "amplitude");
  const double period = rd.req_number(*osc, field, "period");
  return rd.guarded(node, field, [&] { return sinusoid(mean, amplitude, period, tf); });
}

}  // namespace

Matrix complete_symmetric_upgrades(const Matrix& betas,
                                   const std::vector<std::vector<bool>>& set,
                                   int default_index) {
  Matrix out = betas;
  const auto k = static_cast<int>(betas.rows());
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (i == default_index || j == default_index) continue;
      if (set[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] &&
          !set[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]) {
        out(j, i) = betas(i, j);
      }
    }
  }
  return out;
}

LoadedConfig load_config_string(const std::string& text, const std::string& source_name) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorKind::kConfig, source_name + ":" +
                                        std::to_string(e.source().begin.line) + ": " +
                                        std::string(e.description()));
  }
  const Reader rd(root, source_name);

  // [portfolio]
  const toml::table& pf = *rd.table("portfolio", true);
  const toml::node* states_node = rd.find(pf, "portfolio", "states", true);
  const auto labels = rd.strings(*states_node, "portfolio.states");
  if (labels.size() < 2) rd.fail(states_node, "portfolio.states", "need at least two states");
  const int k = static_cast<int>(labels.size());
  int default_index = k - 1;
  if (auto name = rd.opt_string(pf, "portfolio", "default_state")) {
    default_index = state_index(rd, pf.get("default_state"), "portfolio.default_state",
                                labels, *name);
  }

  Vector pi0_weights;
  const toml::node* counts_node = pf.get("initial_counts");
  const toml::node* dist_node = pf.get("initial_distribution");
  if ((counts_node == nullptr) == (dist_node == nullptr)) {
    rd.fail(&pf, "portfolio", "give exactly one of initial_counts, initial_distribution");
  }
  if (counts_node != nullptr) {
    const auto counts = rd.numbers(*counts_node, "portfolio.initial_counts");
    if (static_cast<int>(counts.size()) != k) {
      rd.fail(counts_node, "portfolio.initial_counts", "expected one count per state");
    }
    double total = 0.0;
    for (double c : counts) {
      if (c < 0.0 || c != std::floor(c)) {
        rd.fail(counts_node, "portfolio.initial_counts", "counts must be nonnegative integers");
      }
      total += c;
    }
    if (total <= 0.0) rd.fail(counts_node, "portfolio.initial_counts", "portfolio is empty");
    pi0_weights = Eigen::Map<const Vector>(counts.data(), k) / total;
  } else {
    const auto w = rd.numbers(*dist_node, "portfolio.initial_distribution");
    if (static_cast<int>(w.size()) != k) {
      rd.fail(dist_node, "portfolio.initial_distribution", "expected one weight per state");
    }
    pi0_weights = Eigen::Map<const Vector>(w.data(), k);
  }
  const toml::node* pi_node = counts_node != nullptr ? counts_node : dist_node;
  RatingDistribution pi0 = rd.guarded(pi_node, "portfolio.initial_distribution", [&] {
    return RatingDistribution(pi0_weights, default_index);
  });
  const double cap = rd.opt_number(pf, "portfolio", "exponent_cap").value_or(kDefaultExponentCap);
  if (!(cap > 0.0)) rd.fail(pf.get("exponent_cap"), "portfolio.exponent_cap", "must be positive");

  // [ttc] or portfolio.counts_csv
  std::optional<TransitionMatrix> ttc;
  if (auto csv = rd.opt_string(pf, "portfolio", "counts_csv")) {
    std::filesystem::path p(*csv);
    if (p.is_relative() && source_name != "<string>") {
      p = std::filesystem::path(source_name).parent_path() / p;
    }
    const bool force = rd.opt_bool(pf, "portfolio", "force_absorption").value_or(false);
    ttc = rd.guarded(pf.get("counts_csv"), "portfolio.counts_csv", [&] {
      const MigrationCounts raw = read_migration_counts_csv(p);
      const MigrationCounts counts(raw.counts(), default_index, raw.labels());
      return cohort_estimate(counts, force);
    });
  }
  if (const toml::table* t = rd.table("ttc", ttc == std::nullopt)) {
    if (ttc) rd.fail(t, "ttc", "give either [ttc] or portfolio.counts_csv, not both");
    const toml::node* node = rd.find(*t, "ttc", "matrix", true);
    const Matrix m = rd.matrix(*node, "ttc.matrix", k);
    ttc = rd.guarded(node, "ttc.matrix", [&] { return TransitionMatrix(m, default_index); });
  }

  // [betas]
  const toml::table& bt = *rd.table("betas", true);
  Matrix betas = Matrix::Zero(k, k);
  std::vector<std::vector<bool>> set(static_cast<std::size_t>(k),
                                     std::vector<bool>(static_cast<std::size_t>(k), false));
  const toml::node* bnode = bt.get("matrix");
  const toml::node* enode = bt.get("entries");
  if ((bnode == nullptr) == (enode == nullptr)) {
    rd.fail(&bt, "betas", "give exactly one of matrix, entries");
  }
  if (bnode != nullptr) {
    betas = rd.matrix(*bnode, "betas.matrix", k);
    for (auto& row : set) row.assign(row.size(), true);
  } else {
    for (const auto& item : rd.array(*enode, "betas.entries")) {
      const auto* e = item.as_table();
      if (e == nullptr) rd.fail(&item, "betas.entries", "expected {from, to, value}");
      const auto from = rd.opt_string(*e, "betas.entries", "from");
      const auto to = rd.opt_string(*e, "betas.entries", "to");
      if (!from || !to) rd.fail(&item, "betas.entries", "entry needs from and to");
      const int i = state_index(rd, &item, "betas.entries.from", labels, *from);
      const int j = state_index(rd, &item, "betas.entries.to", labels, *to);
      if (set[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
        rd.fail(&item, "betas.entries", "duplicate entry " + *from + " -> " + *to);
      }
      betas(i, j) = rd.req_number(*e, "betas.entries", "value");
      set[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = true;
    }
  }
  if (rd.opt_bool(bt, "betas", "symmetric_upgrades").value_or(false)) {
    betas = complete_symmetric_upgrades(betas, set, default_index);
  }
  MacroOrientation orientation = MacroOrientation::kAsWritten;
  if (auto o = rd.opt_string(bt, "betas", "macro_orientation")) {
    if (*o == "adverse-positive") {
      orientation = MacroOrientation::kAdversePositive;
    } else if (*o != "as-written") {
      rd.fail(bt.get("macro_orientation"), "betas.macro_orientation",
              "expected as-written or adverse-positive");
    }
  }
  const SensitivityMatrix sens = rd.guarded(bnode != nullptr ? bnode : enode, "betas", [&] {
    return oriented(SensitivityMatrix(betas, default_index), orientation);
  });

  // [composite_index]
  CompositeIndexParams index;
  if (const toml::table* ci = rd.table("composite_index", false)) {
    index.gdp_mean = rd.opt_number(*ci, "composite_index", "gdp_mean").value_or(index.gdp_mean);
    index.gdp_std = rd.opt_number(*ci, "composite_index", "gdp_std").value_or(index.gdp_std);
    index.unemp_mean =
        rd.opt_number(*ci, "composite_index", "unemp_mean").value_or(index.unemp_mean);
    index.unemp_std = rd.opt_number(*ci, "composite_index", "unemp_std").value_or(index.unemp_std);
    rd.guarded(ci, "composite_index", [&] {
      index.validate();
      return 0;
    });
  }

  // [macro_model]
  const toml::table& mm = *rd.table("macro_model", true);
  const double rho = rd.req_number(mm, "macro_model", "rho");
  const double q = rd.req_number(mm, "macro_model", "process_var");
  const double r = rd.req_number(mm, "macro_model", "obs_var");
  const double m_star = rd.opt_number(mm, "macro_model", "m_star").value_or(0.0);
  const double h = rd.opt_number(mm, "macro_model", "obs_loading").value_or(1.0);
  MacroStateModel model = rd.guarded(&mm, "macro_model", [&] {
    return MacroStateModel::scalar(rho, q, r, m_star, h);
  });
  const auto q_after = rd.opt_number(mm, "macro_model", "process_var_after_horizon");
  if (q_after && *q_after < 0.0) {
    rd.fail(mm.get("process_var_after_horizon"), "macro_model.process_var_after_horizon",
            "must be nonnegative");
  }
  const auto prior_var = rd.opt_number(mm, "macro_model", "prior_var");
  if (prior_var && *prior_var < 0.0) {
    rd.fail(mm.get("prior_var"), "macro_model.prior_var", "must be nonnegative");
  }

  // [anchor]
  const toml::table& an = *rd.table("anchor", true);
  AnchorConfig anchor;
  anchor.m_star = Vector::Constant(1, m_star);
  anchor.sigma_star_sq_in = rd.req_number(an, "anchor", "sigma_star_sq_in");
  anchor.sigma_star_sq_out = rd.req_number(an, "anchor", "sigma_star_sq_out");
  const auto tf = rd.opt_integer(an, "anchor", "forecast_horizon");
  if (!tf) rd.fail(&an, "anchor.forecast_horizon", "missing value");
  anchor.forecast_horizon_tf = static_cast<int>(*tf);
  rd.guarded(&an, "anchor", [&] {
    anchor.validate(1);
    return 0;
  });

  RunConfig run(Portfolio{pi0, *ttc, sens, cap}, model, anchor);
  run.index_params = index;
  if (q_after) run.process_cov_after_horizon = Matrix::Constant(1, 1, *q_after);
  if (prior_var) run.prior_cov = Matrix::Constant(1, 1, *prior_var);

  // [scenario.<name>]
  const toml::table* sc = rd.table("scenario", true);
  for (const auto& [key, node] : *sc) {
    const std::string name(key.str());
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      rd.fail(&node, "scenario." + name, "unknown scenario; expected baseline, stress or pandemic");
    }
  }
  for (const auto& name : scenario_names()) {
    const toml::node* node = sc->get(name);
    if (node == nullptr) continue;
    const std::string tname = "scenario." + name;
    const auto* t = node->as_table();
    if (t == nullptr) rd.fail(node, tname, "expected a table");
    ScenarioSpec spec;
    spec.name = name;
    spec.gdp_forecast = scenario_path(rd, *t, tname, "gdp", anchor.forecast_horizon_tf);
    spec.unemp_forecast = scenario_path(rd, *t, tname, "unemp", anchor.forecast_horizon_tf);
    spec.noise_sigma_gdp = rd.opt_number(*t, tname, "noise_sigma_gdp").value_or(0.0);
    spec.noise_sigma_unemp = rd.opt_number(*t, tname, "noise_sigma_unemp").value_or(0.0);
    if (const toml::node* ov = t->get("overrides")) {
      for (const auto& item : rd.array(*ov, tname + ".overrides")) {
        const auto* o = item.as_table();
        if (o == nullptr) rd.fail(&item, tname + ".overrides", "expected {t, gdp, unemp}");
        const auto quarter = rd.opt_integer(*o, tname + ".overrides", "t");
        if (!quarter) rd.fail(&item, tname + ".overrides.t", "missing value");
        MacroShock shock;
        shock.gdp = rd.opt_number(*o, tname + ".overrides", "gdp").value_or(0.0);
        shock.unemp = rd.opt_number(*o, tname + ".overrides", "unemp").value_or(0.0);
        if (spec.realized_overrides.count(static_cast<int>(*quarter)) > 0) {
          rd.fail(&item, tname + ".overrides", "duplicate quarter");
        }
        spec.realized_overrides[static_cast<int>(*quarter)] = shock;
      }
    }
    rd.guarded(node, tname, [&] {
      spec.validate();
      return 0;
    });
    run.scenarios.push_back(std::move(spec));
  }
  if (run.scenarios.empty()) rd.fail(sc, "scenario", "no scenarios defined");

  // [experiment]
  if (const toml::table* ex = rd.table("experiment", false)) {
    if (auto v = rd.opt_integer(*ex, "experiment", "horizon")) run.horizon_t = static_cast<int>(*v);
    if (auto v = rd.opt_integer(*ex, "experiment", "report_quarter")) {
      run.report_quarter = static_cast<int>(*v);
    }
    if (auto v = rd.opt_integer(*ex, "experiment", "replications")) {
      run.n_replications = static_cast<int>(*v);
    }
    if (auto v = rd.opt_integer(*ex, "experiment", "master_seed")) {
      if (*v < 0) rd.fail(ex->get("master_seed"), "experiment.master_seed", "must be nonnegative");
      run.master_seed = static_cast<std::uint64_t>(*v);
    }
    if (auto v = rd.opt_string(*ex, "experiment", "randomization_scope")) {
      if (*v == "realized-only") {
        run.scope = RandomizationScope::kRealizedOnly;
      } else if (*v == "forecast-and-realized") {
        run.scope = RandomizationScope::kForecastAndRealized;
      } else {
        rd.fail(ex->get("randomization_scope"), "experiment.randomization_scope",
                "expected realized-only or forecast-and-realized");
      }
    }
    if (auto v = rd.opt_string(*ex, "experiment", "truth")) {
      if (*v == "latent-ar1") {
        run.truth = TruthMode::kLatentAr1;
      } else if (*v == "realized") {
        run.truth = TruthMode::kRealized;
      } else {
        rd.fail(ex->get("truth"), "experiment.truth", "expected latent-ar1 or realized");
      }
    }
    if (const toml::node* mnode = ex->get("methods")) {
      run.methods.clear();
      for (const auto& m : rd.strings(*mnode, "experiment.methods")) {
        run.methods.push_back(rd.guarded(mnode, "experiment.methods", [&] { return parse_method(m); }));
      }
    }
    rd.guarded(ex, "experiment", [&] {
      run.validate();
      return 0;
    });
  } else {
    rd.guarded(nullptr, "experiment", [&] {
      run.validate();
      return 0;
    });
  }

  LoadedConfig out{std::move(run), labels, source_name, fnv1a(text)};
  return out;
}

LoadedConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kConfig, path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config_string(buf.str(), path.string());
}

}  // namespace lifetime_pd
