#include "chronos/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "chronos/io.hpp"
#include "chronos/problems.hpp"
#include "chronos/sampler.hpp"
#include "chronos/simulator.hpp"
#include "chronos/solver.hpp"

namespace chronos {
namespace {

/// Bad input: reported on stderr, exit status 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string model;
  std::string policy;
  std::size_t beliefs = 5000;
  std::optional<double> epsilon;
  std::size_t max_iters = 500;
  std::uint64_t seed = kDefaultSeed;
  std::size_t observation_bins = 100;
  std::size_t episodes = 1000;
  std::size_t epochs = 200;
  std::size_t mesh_resolution = 20;
  std::size_t threads = 1;
  std::optional<double> initial_alpha;
  bool reference_beliefs = false;
  std::string output;
  std::string trace;
  std::string trajectory;
};

bool is_builtin(const std::string& name) { return name == "bus" || name == "maintenance"; }

PosmdpModel resolve_model(const RunConfig& cfg) {
  if (cfg.model == "bus") return build_bus_problem();
  if (cfg.model == "maintenance") return build_maintenance_problem(cfg.observation_bins);
  return load_model_file(cfg.model);
}

Policy read_policy(const PosmdpModel& model, const std::string& path) {
  try {
    Policy p = load_policy(model, read_file(path));
    check_policy_matches(model, p);
    return p;
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string output_path(const RunConfig& cfg, const char* fallback) {
  return cfg.output.empty() ? std::string(fallback) : cfg.output;
}

std::string trace_line(const IterationRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%5zu  |V|=%-4zu backups=%-6zu residual=%.6g  min_gain=%.3g  %.3fs", r.iteration,
                r.vectors, r.backups, r.residual, r.min_improvement, r.seconds);
  return buf;
}

ValueFunction starting_values(const RunConfig& cfg, const PosmdpModel& model, const SampleBank& bank,
                              std::ostream& err) {
  if (cfg.initial_alpha) return constant_value_function(model.n_states(), *cfg.initial_alpha);
  try {
    return initial_value_function(model, bank);
  } catch (const InitializationError& e) {
    if (cfg.model != "maintenance") throw UsageError(e.what());
    err << "note: lower-bound start is undefined for this model; using constant alpha "
        << format_double(kMaintenanceInitialAlpha) << "\n";
    return constant_value_function(model.n_states(), kMaintenanceInitialAlpha);
  }
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const PosmdpModel model = resolve_model(cfg);
  SampleBank bank = collect(model, cfg.beliefs, cfg.seed);
  if (cfg.reference_beliefs) {
    if (cfg.model != "maintenance") throw UsageError("--reference-beliefs is only defined for maintenance");
    std::vector<Belief> extra;
    for (const auto& r : maintenance_reference_beliefs()) extra.emplace_back(r.belief);
    add_beliefs(bank, extra);
  }
  const ValueFunction v0 = starting_values(cfg, model, bank, err);

  SolveOptions opts;
  opts.epsilon = cfg.epsilon;
  opts.max_iters = cfg.max_iters;
  opts.seed = cfg.seed;
  opts.threads = cfg.threads;
  const SolveResult result = solve(model, bank, v0, opts);

  std::ostringstream trace;
  trace << "model " << model.name() << "  |B|=" << bank.beliefs.size() << "  |C|=" << bank.times.size()
        << "  epsilon=" << result.epsilon << "\n";
  for (const auto& r : result.trace) trace << trace_line(r) << "\n";
  trace << (result.converged ? "converged" : "not converged") << " with " << result.value.vectors.size()
        << " vectors\n";
  out << trace.str();
  if (!cfg.trace.empty()) write_file(cfg.trace, trace.str());

  const Policy policy{model_hash(model), result.value, result.trace, result.converged, result.epsilon};
  const std::string path = output_path(cfg, "policy.json");
  write_file(path, dump_policy(model, policy));
  out << "policy written to " << path << "\n";
  if (!result.converged) {
    err << "solver stopped after " << result.trace.size() << " iterations without reaching epsilon\n";
    return 2;
  }
  return 0;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const PosmdpModel model = resolve_model(cfg);
  const Policy policy = read_policy(model, cfg.policy);
  const Estimate e = evaluate(model, policy.value, cfg.episodes, cfg.epochs, cfg.seed);
  out << "episodes " << e.episodes << "  epochs " << cfg.epochs << "\n";
  out << "mean discounted return " << format_double(e.mean);
  if (e.standard_error) out << "  SE " << format_double(*e.standard_error);
  out << "\n";
  if (!cfg.trajectory.empty()) {
    Rng rng(cfg.seed);
    const Belief xi0(std::vector<double>(model.initial_belief().begin(), model.initial_belief().end()));
    const History h = rollout(model, policy.value, xi0, cfg.epochs, rng);
    std::ostringstream csv;
    write_trajectory_csv(csv, model, h);
    write_file(cfg.trajectory, csv.str());
  }
  return 0;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  const PosmdpModel model = is_builtin(cfg.model) ? resolve_model(cfg) : parse_model(read_file(cfg.model));
  const ValidationReport report = validate(model);
  for (const auto& v : report.violations) out << v.code << ": " << v.message << "\n";
  out << report.violations.size() << " violations\n";
  return report.ok() ? 0 : 1;
}

int cmd_collect(const RunConfig& cfg, std::ostream& out) {
  const PosmdpModel model = resolve_model(cfg);
  const SampleBank bank = collect(model, cfg.beliefs, cfg.seed);
  const std::string path = output_path(cfg, "bank.json");
  write_file(path, dump_bank(model, bank));
  out << "|B|=" << bank.beliefs.size() << "  |C|=" << bank.times.size() << "  written to " << path << "\n";
  return 0;
}

int cmd_export_model(const RunConfig& cfg, std::ostream& out) {
  const PosmdpModel model = resolve_model(cfg);
  const std::string text = dump_model(model);
  if (cfg.output.empty())
    out << text;
  else
    write_file(cfg.output, text);
  return 0;
}

/// Calls visit(counts) for every composition of `total` into `parts` parts,
/// first coordinate descending.
void compositions(std::size_t parts, std::size_t total, const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> c(parts, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == parts) {
      c[i] = left;
      visit(c);
      return;
    }
    for (std::size_t k = left + 1; k-- > 0;) {
      c[i] = k;
      rec(i + 1, left - k);
    }
  };
  rec(0, total);
}

int cmd_export_mesh(const RunConfig& cfg, std::ostream& out) {
  const PosmdpModel model = resolve_model(cfg);
  const auto& factor = model.data().mixed_observable;
  if (!factor) throw UsageError("model declares no mixed_observable block; mesh export needs it");
  if (cfg.mesh_resolution == 0) throw UsageError("--mesh-resolution must be positive");
  const Policy policy = read_policy(model, cfg.policy);
  const std::size_t nh = factor->hidden.size();
  const double r = static_cast<double>(cfg.mesh_resolution);

  std::ostringstream csv;
  csv << "observable";
  for (std::size_t h = 0; h < nh; ++h) csv << ",belief_" << h + 1;
  csv << ",action,value\n";
  std::size_t rows = 0;
  for (std::size_t i = 0; i < factor->observable.size(); ++i) {
    compositions(nh, cfg.mesh_resolution, [&](const std::vector<std::size_t>& c) {
      std::vector<double> p(model.n_states(), 0.0);
      std::vector<double> hidden(nh);
      for (std::size_t h = 0; h < nh; ++h) hidden[h] = p[i * nh + h] = static_cast<double>(c[h]) / r;
      const Belief xi(std::move(p));
      csv << factor->observable[i];
      for (double x : hidden) csv << ',' << format_double(x);
      csv << ',' << model.data().actions[policy.value.action_at(xi)] << ','
          << format_double(policy.value.value_at(xi)) << '\n';
      ++rows;
    });
  }
  const std::string path = output_path(cfg, "mesh.csv");
  write_file(path, csv.str());
  out << rows << " mesh rows written to " << path << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Point-based planning for partially observable semi-Markov decision processes", "chronos"};
  app.require_subcommand(1);

  const auto model_arg = [&](CLI::App* sub) {
    sub->add_option("model", cfg.model, "model JSON file, or a built-in name: bus, maintenance")->required();
    sub->add_option("--observation-bins", cfg.observation_bins, "observation bins for the maintenance model")
        ->check(CLI::Range(2, 100000));
  };
  const auto seed_opt = [&](CLI::App* sub) { sub->add_option("--seed", cfg.seed, "random seed (default 7)"); };
  const auto positive = CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max());

  CLI::App* solve_cmd = app.add_subcommand("solve", "collect beliefs and run the solver; writes a policy");
  model_arg(solve_cmd);
  seed_opt(solve_cmd);
  solve_cmd->add_option("--beliefs", cfg.beliefs, "belief set size")->check(positive);
  solve_cmd->add_option("--epsilon", cfg.epsilon, "convergence threshold (default 1e-4 max|R|)")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--max-iters", cfg.max_iters, "iteration cap")->check(positive);
  solve_cmd->add_option("--initial-alpha", cfg.initial_alpha, "constant starting alpha entry");
  solve_cmd->add_option("--threads", cfg.threads, "worker threads per backup")->check(positive);
  solve_cmd->add_flag("--reference-beliefs", cfg.reference_beliefs,
                      "add the maintenance reference beliefs to the belief set");
  solve_cmd->add_option("--output,-o", cfg.output, "policy file (default policy.json)");
  solve_cmd->add_option("--trace", cfg.trace, "also write the iteration trace here");

  CLI::App* sim_cmd = app.add_subcommand("simulate", "estimate the discounted return of a policy");
  model_arg(sim_cmd);
  sim_cmd->add_option("policy", cfg.policy, "policy file")->required();
  seed_opt(sim_cmd);
  sim_cmd->add_option("--episodes", cfg.episodes, "independent episodes")->check(positive);
  sim_cmd->add_option("--epochs", cfg.epochs, "decision epochs per episode")->check(positive);
  sim_cmd->add_option("--trajectory", cfg.trajectory, "write one trajectory as CSV");

  CLI::App* val_cmd = app.add_subcommand("validate", "check a model against the modelling assumptions");
  model_arg(val_cmd);

  CLI::App* mesh_cmd = app.add_subcommand("export-mesh", "policy action and value over a simplex mesh");
  model_arg(mesh_cmd);
  mesh_cmd->add_option("policy", cfg.policy, "policy file")->required();
  mesh_cmd->add_option("--mesh-resolution", cfg.mesh_resolution, "lattice divisions per simplex edge")
      ->check(positive);
  mesh_cmd->add_option("--output,-o", cfg.output, "CSV file (default mesh.csv)");

  CLI::App* col_cmd = app.add_subcommand("collect", "explore the model and write the sample bank");
  model_arg(col_cmd);
  seed_opt(col_cmd);
  col_cmd->add_option("--beliefs", cfg.beliefs, "belief set size")->check(positive);
  col_cmd->add_option("--output,-o", cfg.output, "bank file (default bank.json)");

  CLI::App* exp_cmd = app.add_subcommand("export-model", "write a model as JSON");
  model_arg(exp_cmd);
  exp_cmd->add_option("--output,-o", cfg.output, "target file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(cfg, out, err);
    if (sim_cmd->parsed()) return cmd_simulate(cfg, out);
    if (val_cmd->parsed()) return cmd_validate(cfg, out);
    if (mesh_cmd->parsed()) return cmd_export_mesh(cfg, out);
    if (col_cmd->parsed()) return cmd_collect(cfg, out);
    if (exp_cmd->parsed()) return cmd_export_model(cfg, out);
  } catch (const ValidationFailed& e) {
    err << "error: " << cfg.model << ": " << e.what() << "\n";
    for (const auto& v : e.report.violations) err << "  " << v.code << ": " << v.message << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace chronos
