// cfstp: batch experiments, the exact oracle, the validator and helpers.
//
// Exit codes: 0 success, 1 validation or configuration failure, 2 internal
// invariant breach.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cfstp/dyndcop.hpp"
#include "cfstp/exact.hpp"
#include "cfstp/experiment.hpp"
#include "cfstp/io.hpp"
#include "cfstp/scenario.hpp"
#include "cfstp/simulation.hpp"

using namespace cfstp;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kBreach = 2;

void print_report(const ValidationReport& report) {
  for (const auto& v : report.violations) {
    std::cout << to_string(v.kind) << " task=" << v.task << " tick=" << v.tick;
    if (v.agent) std::cout << " agent=" << *v.agent;
    std::cout << " " << v.detail << '\n';
  }
  std::cout << (report.feasible() ? "feasible" : "infeasible") << " (" << report.violations.size()
            << " violations)\n";
}

int cmd_run(const std::string& config_path, std::size_t threads, bool quiet) {
  auto config = ExperimentConfig::from_json(read_file(config_path));
  if (threads) config.threads = threads;
  Progress progress;
  if (!quiet)
    progress = [](std::size_t done, std::size_t total) {
      std::fprintf(stderr, "\r%zu/%zu runs", done, total);
      if (done == total) std::fprintf(stderr, "\n");
    };
  const auto summary = run_experiment(config, progress);
  std::cout << "wrote " << summary.rows.size() << " runs to " << config.output.string() << '\n';
  std::cout << aggregate_csv(summary.aggregate);
  return kOk;
}

int cmd_oracle(const std::string& instance_path, std::int64_t budget, const std::string& out) {
  const auto inst = load_instance(instance_path);
  const auto solution = solve_optimal(inst, OptimalOptions{budget});
  std::cout << "completed " << solution.completed_count() << " of " << inst.task_count() << '\n';
  if (!out.empty())
    save_solution(out, solution);
  else
    std::cout << solution_to_json(solution);
  return kOk;
}

int cmd_validate(const std::string& instance_path, const std::string& solution_path) {
  const auto inst = load_instance(instance_path);
  const auto solution = load_solution(solution_path);
  const auto report = validate(inst, solution);
  print_report(report);
  return report.feasible() ? kOk : kFailure;
}

int cmd_synth(std::size_t count, std::uint64_t seed, const std::string& out) {
  const auto records = synthesize_records(count, seed);
  save_records(out, records);
  std::cout << "wrote " << records.size() << " records to " << out << '\n';
  return kOk;
}

int cmd_slice(const std::string& records_path, std::size_t agents, std::size_t ratio, std::size_t problem,
              const std::string& dist, std::uint64_t seed, double speed, const std::string& out) {
  std::vector<IncidentRecord> records;
  if (records_path.rfind("synthetic:", 0) == 0)
    records = synthesize_records(std::stoull(records_path.substr(10)), seed);
  else
    records = load_records(records_path).records;
  SliceOptions opts;
  opts.values = parse_value_kind(dist);
  opts.seed = seed;
  opts.speed = speed;
  auto problems = slice_problems(records, agents, ratio, problem + 1, opts);
  save_instance(out, problems.back().instance);
  std::cout << "problem " << problem << " uses records " << problems.back().first_record + 1 << "-"
            << problems.back().last_record << '\n';
  return kOk;
}

int cmd_solve(const std::string& instance_path, const std::string& algorithm, std::uint64_t seed,
              double lambda, std::optional<std::size_t> iterations, const std::string& trace_path,
              const std::string& solution_path) {
  const auto inst = load_instance(instance_path);
  RunOptions opts;
  opts.algorithm = parse_algorithm(algorithm);
  opts.seed = seed;
  opts.trace = !trace_path.empty();
  opts.dsa.iterations = iterations;
  if (lambda > 0.0) {
    std::vector<double> arrivals;
    for (const auto& t : inst.tasks()) arrivals.push_back(static_cast<double>(t.deadline));
    opts.degradation = degradation_schedule(inst, arrivals, lambda, seed);
  }
  const auto result = run(inst, opts);
  const auto report = validate(inst, result.solution);
  std::cout << "algorithm " << to_string(opts.algorithm) << '\n'
            << "completed " << result.metrics.completed << " of " << result.metrics.tasks << " ("
            << result.metrics.completed_pct << "%)\n"
            << "messages " << result.metrics.messages << '\n'
            << "bytes " << result.metrics.bytes << '\n'
            << "ncccs " << result.metrics.ncccs << '\n'
            << "removed_agents " << result.removed_agents << '\n'
            << "cpu_ms " << result.metrics.cpu_ms << '\n';
  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    write_trace(out, result.trace);
  }
  if (!solution_path.empty()) save_solution(solution_path, result.solution);
  if (!report.feasible()) {
    print_report(report);
    return kBreach;
  }
  return kOk;
}

int cmd_snapshot(const std::string& instance_path, Tick tick) {
  const auto inst = load_instance(instance_path);
  const auto world = WorldState::initial(inst);
  write_edge_list(std::cout, build_snapshot(inst, world, tick));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coalition formation with spatial and temporal constraints"};
  app.require_subcommand(1);

  std::string config_path;
  std::size_t threads = 0;
  bool quiet = false;
  auto* run_cmd = app.add_subcommand("run", "run a batch experiment from a JSON config");
  run_cmd->add_option("--config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--threads", threads, "worker threads (overrides the config)");
  run_cmd->add_flag("--quiet", quiet, "no progress output");

  std::string instance_path, solution_path, out;
  std::int64_t budget = OptimalOptions{}.budget;
  auto* oracle_cmd = app.add_subcommand("oracle", "exact solver for micro-instances");
  oracle_cmd->add_option("--instance", instance_path)->required()->check(CLI::ExistingFile);
  oracle_cmd->add_option("--budget", budget, "refuse |A|*|V|*t_max above this");
  oracle_cmd->add_option("--out", out, "write the solution here instead of stdout");

  auto* validate_cmd = app.add_subcommand("validate", "check a solution against an instance");
  validate_cmd->add_option("--instance", instance_path)->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--solution", solution_path)->required()->check(CLI::ExistingFile);

  std::size_t count = 0;
  std::uint64_t seed = 1;
  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic incident records");
  synth_cmd->add_option("--count", count)->required();
  synth_cmd->add_option("--seed", seed);
  synth_cmd->add_option("--out", out)->required();

  std::string records_path, dist = "UC_NDCS";
  std::size_t agents = 150, ratio = 1, problem = 0;
  double speed = 10.0;
  auto* slice_cmd = app.add_subcommand("slice", "export one sliced problem as an instance file");
  slice_cmd->add_option("--records", records_path, "CSV path or synthetic:N")->required();
  slice_cmd->add_option("--agents", agents);
  slice_cmd->add_option("--ratio", ratio);
  slice_cmd->add_option("--problem", problem, "0-based problem index");
  slice_cmd->add_option("--values", dist, "NDCS, AgentBased, UC_NDCS or UC_AgentBased");
  slice_cmd->add_option("--seed", seed);
  slice_cmd->add_option("--speed", speed, "metres per tick");
  slice_cmd->add_option("--out", out)->required();

  std::string algorithm = "dcts", trace_path;
  double lambda = 0.0;
  std::optional<std::size_t> iterations;
  auto* solve_cmd = app.add_subcommand("solve", "run one algorithm on one instance");
  solve_cmd->add_option("--instance", instance_path)->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--algorithm", algorithm, "dcts or dsa-sdp");
  solve_cmd->add_option("--seed", seed);
  solve_cmd->add_option("--lambda", lambda, "degradation rate; 0 disables");
  solve_cmd->add_option("--dsa-iterations", iterations, "DSA-SDP iterations per tick");
  solve_cmd->add_option("--trace", trace_path, "write the message trace here");
  solve_cmd->add_option("--solution", solution_path, "write the realized solution here");

  Tick tick = 0;
  auto* snapshot_cmd = app.add_subcommand("snapshot", "print the initial factor graph as an edge list");
  snapshot_cmd->add_option("--instance", instance_path)->required()->check(CLI::ExistingFile);
  snapshot_cmd->add_option("--tick", tick);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kFailure;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, threads, quiet);
    if (*oracle_cmd) return cmd_oracle(instance_path, budget, out);
    if (*validate_cmd) return cmd_validate(instance_path, solution_path);
    if (*synth_cmd) return cmd_synth(count, seed, out);
    if (*slice_cmd) return cmd_slice(records_path, agents, ratio, problem, dist, seed, speed, out);
    if (*solve_cmd) return cmd_solve(instance_path, algorithm, seed, lambda, iterations, trace_path, solution_path);
    if (*snapshot_cmd) return cmd_snapshot(instance_path, tick);
  } catch (const InvariantError& e) {
    std::cerr << "invariant breach: " << e.what() << '\n';
    return kBreach;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
