#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfstp/scenario.hpp"
#include "cfstp/simulation.hpp"

namespace cfstp {

struct ExperimentConfig {
  std::size_t agents = 150;
  std::vector<std::size_t> ratios{1, 5, 10, 15, 20};
  std::size_t problems = 100;
  std::vector<Algorithm> algorithms{Algorithm::Dcts, Algorithm::DsaSdp};
  ValueKind value_dist = ValueKind::UcNDCS;
  // Unset: mean incidents per hour of the records. 0 disables degradation.
  std::optional<double> degradation_lambda;
  std::uint64_t seed = 1;
  // A CSV path, "synthetic" (exactly as many records as needed) or
  // "synthetic:N".
  std::string records = "synthetic";
  std::filesystem::path output = "results";
  double speed = 10.0;
  WorkStart work_start = WorkStart::OnArrival;
  dsa::SdpParams sdp;
  std::optional<std::size_t> dsa_iterations;
  std::size_t bootstrap_resamples = 10'000;
  std::size_t threads = 0;  // 0: hardware concurrency
  bool validate = true;     // check every returned solution
  bool trace = false;       // write per-run message traces

  // Throws ConfigError on unknown keys or out-of-range values.
  static ExperimentConfig from_json(std::string_view text);
  std::string to_json() const;
  void check() const;
  std::size_t records_needed() const;
};

struct RunRow {
  std::size_t problem_id = 0;
  Algorithm algorithm = Algorithm::Dcts;
  std::size_t ratio = 1;
  std::uint64_t seed = 0;
  ValueKind value_dist = ValueKind::UcNDCS;
  RunMetrics metrics;
  std::size_t removed_agents = 0;
  std::uint64_t violations = 0;
};

struct Interval {
  double median = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

double median(std::vector<double> values);
// numpy-style linear interpolation; q in [0, 1].
double quantile(std::vector<double> values, double q);
// Median with a 95% bootstrap percentile interval.
Interval bootstrap_median(std::span<const double> values, std::size_t resamples, std::uint64_t seed);

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"messages", "bytes", "ncccs", "completed_pct", "cpu_ms"};
  return names;
}
double metric_value(const RunMetrics& m, std::string_view name);

struct AggregateRow {
  std::size_t ratio = 0;
  Algorithm algorithm = Algorithm::Dcts;
  std::string metric;
  Interval value;
};

struct RatioRow {
  std::size_t ratio = 0;
  std::string metric;
  Interval value;
  std::size_t pairs = 0;  // problems with a non-zero denominator
};

std::vector<IncidentRecord> resolve_records(const ExperimentConfig& config);

// Seeds used for problem p of a ratio: shared by every algorithm so the
// algorithms face the same degradation.
std::uint64_t run_seed(const ExperimentConfig& config, std::size_t ratio, std::size_t problem);

using Progress = std::function<void(std::size_t done, std::size_t total)>;

// All (ratio, problem, algorithm) runs, sorted by (ratio, problem, algorithm).
std::vector<RunRow> run_rows(const ExperimentConfig& config, std::span<const IncidentRecord> records,
                             const Progress& progress = {});

std::vector<AggregateRow> aggregate(std::span<const RunRow> rows, std::size_t resamples, std::uint64_t seed);
// Per problem DSA-SDP / D-CTS ratios, summarized by median and interval.
std::vector<RatioRow> ratio_table(std::span<const RunRow> rows, std::size_t resamples, std::uint64_t seed);

std::string runs_csv(std::span<const RunRow> rows);
std::string aggregate_csv(std::span<const AggregateRow> rows);
std::string ratios_csv(std::span<const RatioRow> rows);

struct ExperimentSummary {
  std::vector<RunRow> rows;
  std::vector<AggregateRow> aggregate;
  std::vector<RatioRow> ratios;
  double lambda = 0.0;
};

// Writes runs.csv, aggregate.csv, ratios.csv and metadata.json to
// config.output. Problems that fail validation raise InvariantError after
// the files are written.
ExperimentSummary run_experiment(const ExperimentConfig& config, const Progress& progress = {});

}  // namespace cfstp
