#include "lifetime_pd/cli.h"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "lifetime_pd/config.h"
#include "lifetime_pd/csv.h"
#include "lifetime_pd/errors.h"
#include "lifetime_pd/experiment.h"
#include "lifetime_pd/filter.h"
#include "lifetime_pd/random.h"

namespace lifetime_pd {
namespace {

std::string subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::kRun: return "run";
    case Subcommand::kScenarios: return "scenarios";
    case Subcommand::kRiccati: return "riccati";
    case Subcommand::kDemoInstability: return "demo-instability";
    case Subcommand::kCheckBounds: return "check-bounds";
  }
  return "unknown";
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::ofstream f(dir / name, std::ios::binary);
  require(f.good(), ErrorKind::kInvalidArgument, "cannot write " + (dir / name).string());
  return f;
}

// Applies command-line overrides and filters to the loaded configuration.
RunConfig apply_overrides(const LoadedConfig& loaded, const CliInvocation& inv) {
  RunConfig run = loaded.run;
  if (inv.seed) run.master_seed = *inv.seed;
  if (inv.reps) run.n_replications = *inv.reps;
  run.threads = inv.threads;
  if (inv.method != "all") {
    const Method m = parse_method(inv.method);
    run.methods = {m};
  }
  if (inv.scenario != "all") {
    std::vector<ScenarioSpec> kept;
    for (const auto& s : run.scenarios) {
      if (s.name == inv.scenario) kept.push_back(s);
    }
    require(!kept.empty(), ErrorKind::kUsage,
            "scenario '" + inv.scenario + "' is not defined in the config");
    run.scenarios = std::move(kept);
  }
  run.validate();
  return run;
}

void write_manifest(const std::filesystem::path& dir, const CliInvocation& inv,
                    const LoadedConfig& loaded, const RunConfig& run) {
  std::ofstream f = open_output(dir, "manifest.txt");
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << loaded.content_hash;
  f << "tool lpd " << kToolVersion << '\n';
  f << "subcommand " << subcommand_name(inv.subcommand) << '\n';
  f << "config " << inv.config_path.generic_string() << '\n';
  f << "config_fnv1a " << hash.str() << '\n';
  f << "master_seed " << run.master_seed << '\n';
  f << "replications " << run.n_replications << '\n';
  f << "method " << inv.method << '\n';
  f << "scenario " << inv.scenario << '\n';
  f << "emit_traces " << (inv.emit_traces ? "true" : "false") << '\n';
  f << "rerun lpd " << subcommand_name(inv.subcommand) << " --config "
    << inv.config_path.generic_string() << " --seed " << run.master_seed << " --reps "
    << run.n_replications << " --method " << inv.method << " --scenario " << inv.scenario
    << (inv.emit_traces ? " --emit-traces" : "") << '\n';
}

int do_run(const CliInvocation& inv, const LoadedConfig& loaded, std::ostream& out) {
  const RunConfig run = apply_overrides(loaded, inv);
  std::filesystem::create_directories(inv.output_dir);
  const MonteCarloResult mc = monte_carlo(run);
  {
    std::ofstream f = open_output(inv.output_dir, "summary.csv");
    write_summary_csv(f, mc.rows);
  }
  for (std::size_t s = 0; s < run.scenarios.size(); ++s) {
    std::ofstream f = open_output(inv.output_dir, "macro_" + run.scenarios[s].name + ".csv");
    write_scenario_csv(f, mc.first_paths[s]);
  }
  for (const auto& cell : mc.cells) {
    const std::string stem = cell.scenario + "_" + to_string(cell.method);
    {
      std::ofstream f = open_output(inv.output_dir, "pd_" + stem + ".csv");
      write_term_structure_csv(f, cell.mean_pd);
    }
    if (cell.method != Method::kRaw) {
      std::ofstream f = open_output(inv.output_dir, "filter_trace_" + stem + ".csv");
      write_filter_trace_csv(f, cell.first_run.trace, cell.method);
    }
    if (inv.emit_traces) {
      std::ofstream f = open_output(inv.output_dir, "paths_" + stem + ".csv");
      write_pd_paths_csv(f, cell);
    }
  }
  write_manifest(inv.output_dir, inv, loaded, run);

  out << "lifetime PD Monte Carlo: " << run.n_replications << " replications, seed "
      << run.master_seed << ", Y_T at quarter " << run.summary_quarter() << "\n";
  out << std::left << std::setw(10) << "scenario" << std::setw(10) << "method"
      << std::setw(16) << "mean_var_Yt" << std::setw(12) << "mean_YT" << std::setw(14)
      << "std_YT" << "macro_rmse\n";
  for (const auto& r : mc.rows) {
    out << std::left << std::setw(10) << r.scenario << std::setw(10) << to_string(r.method)
        << std::setw(16) << std::setprecision(6) << r.mean_var_yt << std::setw(12)
        << r.mean_yt << std::setw(14) << r.std_yt << r.macro_rmse << '\n';
  }
  out << "outputs written to " << inv.output_dir.string() << '\n';
  return 0;
}

int do_scenarios(const CliInvocation& inv, const LoadedConfig& loaded, std::ostream& out) {
  const RunConfig run = apply_overrides(loaded, inv);
  std::filesystem::create_directories(inv.output_dir);
  for (const auto& spec : run.scenarios) {
    const auto seed = replication_seed(run.master_seed, spec.name, 0);
    const ReplicationInputs in = make_replication_inputs(spec, run, seed);
    std::ofstream f = open_output(inv.output_dir, "macro_" + spec.name + ".csv");
    write_scenario_csv(f, in.paths);
    out << "wrote macro_" << spec.name << ".csv\n";
  }
  write_manifest(inv.output_dir, inv, loaded, run);
  return 0;
}

void print_riccati(std::ostream& out, const std::string& label, const RiccatiSolution& sol) {
  out << label << ": Sigma_inf = " << format_number(sol.filtered(0, 0))
      << ", predicted = " << format_number(sol.predicted(0, 0)) << ", K_star = [";
  for (Eigen::Index j = 0; j < sol.gain.cols(); ++j) {
    out << (j > 0 ? ", " : "") << format_number(sol.gain(0, j));
  }
  out << "], closed-loop radius = " << format_number(sol.closed_loop_radius)
      << ", iterations = " << sol.iterations << '\n';
}

int do_riccati(const CliInvocation& inv, const LoadedConfig& loaded, std::ostream& out) {
  const RunConfig run = apply_overrides(loaded, inv);
  const MacroStateModel& model = run.model;
  for (const auto& w : model.warnings()) out << "warning: " << w << '\n';
  print_riccati(out, "naive", riccati_steady_state(model, naive_observation(model)));
  print_riccati(out, "anchored (in window)",
                riccati_steady_state(model, anchored_observation(model, run.anchor.sigma_star_sq_in)));
  const MacroStateModel after =
      run.process_cov_after_horizon ? model.with_process_cov(*run.process_cov_after_horizon)
                                    : model;
  print_riccati(out, "anchored (past T_F)",
                riccati_steady_state(after, anchored_observation(after, run.anchor.sigma_star_sq_out)));
  return 0;
}

int do_demo_instability(const CliInvocation& inv, const LoadedConfig& loaded,
                        std::ostream& out) {
  const RunConfig run = apply_overrides(loaded, inv);
  InstabilityConfig demo;
  if (inv.seed) demo.seed = *inv.seed;
  if (inv.reps) demo.n_paths = *inv.reps;
  const InstabilityResult res = instability_demo(run, demo);
  std::filesystem::create_directories(inv.output_dir);
  {
    std::ofstream f = open_output(inv.output_dir, "instability.csv");
    write_csv_row(f, {"block_start", "raw_frequency", "anchored_frequency"});
    for (std::size_t b = 0; b < res.block_start.size(); ++b) {
      write_csv_row(f, {std::to_string(res.block_start[b]), format_number(res.raw_frequency[b]),
                        format_number(res.anchored_frequency[b])});
    }
  }
  write_manifest(inv.output_dir, inv, loaded, run);
  out << "epsilon " << demo.epsilon << ", p " << demo.probability << ", alpha_probe "
      << format_number(res.alpha_probe) << '\n';
  out << "block_start raw anchored\n";
  for (std::size_t b = 0; b < res.block_start.size(); ++b) {
    out << res.block_start[b] << ' ' << res.raw_frequency[b] << ' '
        << res.anchored_frequency[b] << '\n';
  }
  return 0;
}

int do_check_bounds(const CliInvocation& inv, const LoadedConfig& loaded, std::ostream& out) {
  const RunConfig run = apply_overrides(loaded, inv);
  BoundCheckConfig check;
  if (inv.seed) check.seed = *inv.seed;
  if (inv.reps) check.n_paths = *inv.reps;
  const BoundCheckResult res = bound_check(run, check);
  std::filesystem::create_directories(inv.output_dir);
  {
    std::ofstream f = open_output(inv.output_dir, "bound_check.csv");
    write_csv_row(f, {"paths", "lipschitz", "fraction_holding", "min_slack", "max_ratio"});
    write_csv_row(f, {std::to_string(check.n_paths), format_number(res.lipschitz),
                      format_number(res.fraction_holding), format_number(res.min_slack),
                      format_number(res.max_ratio)});
  }
  write_manifest(inv.output_dir, inv, loaded, run);
  out << "L_G " << format_number(res.lipschitz) << ", paths " << check.n_paths
      << ", fraction holding " << res.fraction_holding << ", min slack "
      << format_number(res.min_slack) << ", max e_t/b_t " << format_number(res.max_ratio)
      << '\n';
  return 0;
}

}  // namespace

CliInvocation parse_and_validate(const std::vector<std::string>& args) {
  CliInvocation inv;
  CLI::App app{"Lifetime PD term structures under raw, naive and anchored macro filtering",
               "lpd"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config;
  std::string out_dir = inv.output_dir.string();
  std::uint64_t seed = 0;
  int reps = 0;
  app.add_option("--config", config, "Run configuration (TOML)")->required();
  app.add_option("--out", out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed override");
  auto* reps_opt =
      app.add_option("--reps", reps, "Replication (or path) count override")->check(CLI::PositiveNumber);
  app.add_option("--method", inv.method, "raw, naive, anchored or all")
      ->check(CLI::IsMember({"raw", "naive", "anchored", "all"}));
  app.add_option("--scenario", inv.scenario, "baseline, stress, pandemic or all")
      ->check(CLI::IsMember({"baseline", "stress", "pandemic", "all"}));
  app.add_option("--threads", inv.threads, "Worker threads (default: all cores)");
  app.add_flag("--emit-traces", inv.emit_traces, "Write per-replication PD paths");

  const std::vector<std::pair<std::string, Subcommand>> subs{
      {"run", Subcommand::kRun},
      {"scenarios", Subcommand::kScenarios},
      {"riccati", Subcommand::kRiccati},
      {"demo-instability", Subcommand::kDemoInstability},
      {"check-bounds", Subcommand::kCheckBounds}};
  const std::vector<std::string> help{
      "Monte Carlo comparison; writes summary, PD, macro and filter CSVs",
      "Generate scenario paths only",
      "Steady-state Riccati solutions and closed-loop radii",
      "Exceedance frequencies under injected forecast errors",
      "Check the deviation accumulation bound on sampled paths"};
  std::vector<CLI::App*> sub_apps;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    sub_apps.push_back(app.add_subcommand(subs[i].first, help[i]));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    inv.help_requested = true;
    inv.help_text = app.help();
    return inv;
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorKind::kUsage, e.what());
  }
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (sub_apps[i]->parsed()) inv.subcommand = subs[i].second;
  }
  inv.config_path = config;
  inv.output_dir = out_dir;
  if (seed_opt->count() > 0) inv.seed = seed;
  if (reps_opt->count() > 0) inv.reps = reps;
  require(std::filesystem::is_regular_file(inv.config_path), ErrorKind::kConfig,
          inv.config_path.string() + ": config file not found");
  return inv;
}

int execute(const CliInvocation& inv, std::ostream& out) {
  if (inv.help_requested) {
    out << inv.help_text;
    return 0;
  }
  const LoadedConfig loaded = load_config_file(inv.config_path);
  switch (inv.subcommand) {
    case Subcommand::kRun: return do_run(inv, loaded, out);
    case Subcommand::kScenarios: return do_scenarios(inv, loaded, out);
    case Subcommand::kRiccati: return do_riccati(inv, loaded, out);
    case Subcommand::kDemoInstability: return do_demo_instability(inv, loaded, out);
    case Subcommand::kCheckBounds: return do_check_bounds(inv, loaded, out);
  }
  return 1;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    return execute(parse_and_validate(args), out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::kUsage: return 2;
      case ErrorKind::kConfig: return 3;
      default: return 1;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace lifetime_pd
