#include "timely/cli/app.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "timely/cli/config_io.hpp"
#include "timely/cli/manifest.hpp"
#include "timely/cli/sweep.hpp"
#include "timely/cli/verify.hpp"
#include "timely/errors.hpp"
#include "timely/simulator.hpp"

namespace timely::cli {

using nlohmann::json;

namespace {

json policy_json(const OptimalPolicy& p) {
  return json{{"tau_star", p.tau_star},
              {"beta_star", p.beta_star},
              {"tau_unconstrained", p.tau_unconstrained},
              {"tau_constrained", p.tau_constrained},
              {"binding", p.binding},
              {"residual", p.residual},
              {"iterations", p.iterations},
              {"warnings", p.warnings}};
}

void emit_manifest(const RunManifest& manifest, const std::string& path) {
  if (!path.empty()) {
    write_manifest(manifest, path);
  }
}

struct SolveArgs {
  std::string config;
  std::string manifest;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const auto doc = load_config(a.config);
  const auto policy = solve(doc.config, doc.solver);
  const auto manifest = make_manifest("solve", doc);
  auto j = policy_json(policy);
  j["config"] = to_json(doc.config);
  j["manifest"] = to_json(manifest);
  out << j.dump(2) << '\n';
  emit_manifest(manifest, a.manifest);
  return kExitOk;
}

struct SimulateArgs {
  std::string config;
  std::optional<double> tau;
  std::int64_t epochs = 1'000'000;
  std::uint64_t seed = 1;
  std::string mode = "grouped";
  bool track_paths = false;
  int batches = 50;
  std::string trace;
  std::string manifest;
};

std::string g12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const auto doc = load_config(a.config);
  const AnalyticContext ctx(doc.config, doc.solver.series_tol);

  SimulationOptions opt;
  opt.epochs = a.epochs;
  opt.seed = a.seed;
  opt.mode = wait_mode_from_string(a.mode);
  opt.track_paths = a.track_paths;
  opt.batches = a.batches;

  std::optional<OptimalPolicy> policy;
  try {
    policy = solve(doc.config, doc.solver);
  } catch (const SolverError& e) {
    if (!a.tau) {
      throw;
    }
    err << "warning: solver failed, beta_star unavailable: " << e.what() << '\n';
  }
  opt.tau = a.tau ? *a.tau : policy->tau_star;

  std::ofstream trace;
  if (!a.trace.empty()) {
    trace.open(a.trace);
    if (!trace) {
      throw ConfigError({a.trace + ": cannot write trace"});
    }
    trace << "epoch,wait,service_total,length";
    for (int k = 1; k <= doc.config.k; ++k) {
      trace << ",attempts_" << k;
    }
    for (int k = 1; k <= doc.config.k; ++k) {
      trace << ",mse_contrib_" << k;
    }
    trace << '\n';
    opt.on_epoch = [&trace](const EpochRecord& r) {
      trace << r.index << ',' << g12(r.wait) << ',' << g12(r.service_total) << ',' << g12(r.length);
      for (const int n : r.attempts) {
        trace << ',' << n;
      }
      for (const double m : r.mse_contrib) {
        trace << ',' << g12(m);
      }
      trace << '\n';
    };
  }

  const auto stats = run(doc.config, opt);
  const auto manifest = make_manifest("simulate", doc, {a.seed});
  const double analytic_at_tau = policy_mse(ctx, opt.tau);

  json j{{"tau", opt.tau},
         {"mode", std::string(to_string(opt.mode))},
         {"epochs", stats.epochs},
         {"seed", a.seed},
         {"sum_mse", stats.sum_mse},
         {"sum_mse_stderr", stats.sum_mse_stderr},
         {"per_process_mse", stats.per_process_mse},
         {"sampling_freq", stats.sampling_freq},
         {"sampling_freq_stderr", stats.sampling_freq_stderr},
         {"mean_epoch_service", stats.mean_epoch_service},
         {"mean_epoch_service_stderr", stats.mean_epoch_service_stderr},
         {"mean_epoch_length", stats.mean_epoch_length},
         {"mean_epoch_length_stderr", stats.mean_epoch_length_stderr},
         {"samples_taken", stats.samples_taken},
         {"total_time", stats.total_time},
         {"analytic_mse_at_tau", analytic_at_tau},
         {"z_score_at_tau", (stats.sum_mse - analytic_at_tau) / stats.sum_mse_stderr}};
  if (stats.path_sum_mse) {
    j["path_sum_mse"] = *stats.path_sum_mse;
    j["path_sum_mse_stderr"] = *stats.path_sum_mse_stderr;
  }
  if (policy) {
    j["beta_star"] = policy->beta_star;
    j["z_score"] = (stats.sum_mse - policy->beta_star) / stats.sum_mse_stderr;
  } else {
    j["beta_star"] = nullptr;
    j["z_score"] = nullptr;
  }
  j["config"] = to_json(doc.config);
  j["manifest"] = to_json(manifest);
  out << j.dump(2) << '\n';
  emit_manifest(manifest, a.manifest);
  return kExitOk;
}

struct SweepArgs {
  std::string spec;
  std::string out;
  std::string manifest;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const auto spec = load_sweep(a.spec);
  const auto rows = run_sweep(spec);
  std::ofstream csv(a.out);
  if (!csv) {
    throw ConfigError({a.out + ": cannot write CSV"});
  }
  write_csv(csv, rows);
  csv.close();
  auto manifest = make_manifest("sweep", spec.base);
  emit_manifest(manifest, a.manifest.empty() ? a.out + ".manifest.json" : a.manifest);
  out << "wrote " << rows.size() << " rows to " << a.out << '\n';
  return kExitOk;
}

struct VerifyArgs {
  std::string config;
  std::int64_t draws = 1'000'000;
  std::uint64_t seed = 1;
  std::vector<double> taus;
  std::string manifest;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const auto doc = load_config(a.config);
  const AnalyticContext ctx(doc.config, doc.solver.series_tol);
  VerifyOptions opt;
  opt.draws = a.draws;
  opt.seed = a.seed;
  opt.taus = a.taus;
  for (const double t : opt.taus) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw DomainError("--tau values must be finite and nonnegative, got " + std::to_string(t));
    }
  }
  const auto report = run_verify(ctx, opt);
  print_report(out, report);
  const auto manifest = make_manifest("verify", doc, {a.seed});
  out << "manifest " << to_json(manifest).dump() << '\n';
  emit_manifest(manifest, a.manifest);
  return report.passed() ? kExitOk : kExitVerify;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal threshold sampling of Ornstein-Uhlenbeck processes over an erasure channel", "timely"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Optimal threshold policy for a config file");
  solve_cmd->add_option("config", solve_args.config, "Config JSON")->required();
  solve_cmd->add_option("--manifest", solve_args.manifest, "Also write the run manifest here");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo of the threshold policy");
  sim_cmd->add_option("config", sim_args.config, "Config JSON")->required();
  sim_cmd->add_option("--tau", sim_args.tau, "Threshold (default: optimal)");
  sim_cmd->add_option("--epochs", sim_args.epochs, "Measured epochs")->capture_default_str();
  sim_cmd->add_option("--seed", sim_args.seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--mode", sim_args.mode, "Wait placement: grouped or split")->capture_default_str();
  sim_cmd->add_flag("--track-paths", sim_args.track_paths, "Also simulate OU paths and their estimation error");
  sim_cmd->add_option("--batches", sim_args.batches, "Batches for standard errors")->capture_default_str();
  sim_cmd->add_option("--trace", sim_args.trace, "Per-epoch CSV trace");
  sim_cmd->add_option("--manifest", sim_args.manifest, "Also write the run manifest here");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Solve over a range of one parameter");
  sweep_cmd->add_option("spec", sweep_args.spec, "Sweep spec JSON")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "Output CSV")->required();
  sweep_cmd->add_option("--manifest", sweep_args.manifest, "Manifest path (default: <out>.manifest.json)");

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand("verify", "Check the closed forms against Monte Carlo oracles");
  verify_cmd->add_option("config", verify_args.config, "Config JSON")->required();
  verify_cmd->add_option("--draws", verify_args.draws, "Monte Carlo draws per check")->capture_default_str();
  verify_cmd->add_option("--seed", verify_args.seed, "Random seed")->capture_default_str();
  verify_cmd->add_option("--tau", verify_args.taus, "Thresholds to check at (default: mean epoch service)");
  verify_cmd->add_option("--manifest", verify_args.manifest, "Also write the run manifest here");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("timely");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) {
    argv.push_back(s.data());
  }

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*solve_cmd) {
      return cmd_solve(solve_args, out);
    }
    if (*sim_cmd) {
      return cmd_simulate(sim_args, out, err);
    }
    if (*sweep_cmd) {
      return cmd_sweep(sweep_args, out);
    }
    if (*verify_cmd) {
      return cmd_verify(verify_args, out);
    }
  } catch (const ConfigError& e) {
    for (const auto& v : e.violations()) {
      err << "error: " << v << '\n';
    }
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    if (e.has_iterate()) {
      err << "  best iterate: beta=" << e.best_beta() << " tau=" << e.best_tau() << " |p|=" << e.best_residual()
          << '\n';
    }
    return kExitSolver;
  }
  return kExitConfig;
}

}  // namespace timely::cli
