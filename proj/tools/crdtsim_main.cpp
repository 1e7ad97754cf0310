#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "crdt/simulator.hpp"

namespace {

using crdt::sim::ConvergenceReport;
using crdt::sim::FuzzConfig;
using crdt::sim::FuzzSummary;
using crdt::sim::RunOptions;
using crdt::sim::RunResult;
using crdt::sim::Scenario;
using crdt::sim::ScenarioError;

int cmd_run(const std::string& path, const std::string& trace_path,
            std::optional<uint64_t> seed) {
  Scenario sc = Scenario::load_file(path);
  if (seed.has_value()) sc.seed = *seed;
  RunOptions opts;
  opts.check_commutes = sc.model == crdt::sim::SyncModel::Op;
  RunResult rr = crdt::sim::run(sc, opts);
  if (!trace_path.empty()) {
    std::ofstream out(trace_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write trace file: " << trace_path << "\n";
      return 2;
    }
    out << rr.trace.text();
  }
  for (const auto& [replica, value] : rr.queries) {
    std::cout << replica << "\t" << value << "\n";
  }
  if (rr.convergence_checked) {
    if (rr.convergence.ok) {
      std::cout << "converged\tok\n";
    } else {
      std::cout << "converged\tFAILED\t" << rr.convergence.detail << "\n";
      return 1;
    }
  } else {
    std::cout << "converged\tskipped (no trailing full sync)\n";
  }
  if (!rr.commute_failures.empty()) {
    std::cout << "commutativity\tFAILED\t" << rr.commute_failures.front()
              << "\n";
    return 1;
  }
  return 0;
}

int cmd_oracle(const std::string& path) {
  Scenario sc = Scenario::load_file(path);
  RunResult rr = crdt::sim::run(sc);
  std::cout << crdt::sim::oracle_verdict(sc, rr.history) << "\n";
  return 0;
}

int cmd_fuzz(const FuzzConfig& cfg) {
  FuzzSummary sum = crdt::sim::fuzz(cfg);
  std::cout << "runs\t" << sum.runs << "\n"
            << "updates\t" << sum.updates << "\n"
            << "messages\t" << sum.messages << "\n"
            << "dropped\t" << sum.dropped << "\n"
            << "duplicated\t" << sum.duplicated << "\n"
            << "bytes\t" << sum.bytes << "\n";
  if (!sum.ok) {
    std::cout << "FAILED\tseed=" << sum.failing_seed << "\t" << sum.failure
              << "\n";
    std::cout << sum.scenario_dump << "\n";
    return 1;
  }
  std::cout << "ok\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"replicated data type simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string trace_path;
  std::optional<uint64_t> seed_override;
  auto* run_cmd = app.add_subcommand("run", "execute a scenario file");
  run_cmd->add_option("scenario", scenario_path, "scenario JSON file")
      ->required();
  run_cmd->add_option("--trace", trace_path, "write the trace to this file");
  run_cmd->add_option("--seed", seed_override, "override the scenario seed");

  std::string oracle_path;
  auto* oracle_cmd =
      app.add_subcommand("oracle", "print the oracle evaluation only");
  oracle_cmd->add_option("scenario", oracle_path, "scenario JSON file")
      ->required();

  FuzzConfig cfg;
  std::string model_name = "state";
  auto* fuzz_cmd =
      app.add_subcommand("fuzz", "run randomized convergence checks");
  fuzz_cmd->add_option("--type", cfg.type, "data type tag")->required();
  fuzz_cmd->add_option("--model", model_name, "state|op|delta");
  fuzz_cmd->add_option("--replicas", cfg.replicas, "replica count (2..4)");
  fuzz_cmd->add_option("--ops", cfg.ops, "max updates per run");
  fuzz_cmd->add_option("--runs", cfg.runs, "number of runs");
  fuzz_cmd->add_option("--seed", cfg.seed, "base seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(scenario_path, trace_path, seed_override);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_path);
    if (fuzz_cmd->parsed()) {
      auto m = crdt::sim::parse_sync_model(model_name);
      if (!m) {
        std::cerr << "unknown model '" << model_name << "'\n";
        return 2;
      }
      cfg.model = *m;
      return cmd_fuzz(cfg);
    }
  } catch (const ScenarioError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
