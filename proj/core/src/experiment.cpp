#include "cfstp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cfstp/io.hpp"

namespace cfstp {

using nlohmann::json;

namespace {

const std::set<std::string> kConfigKeys{
    "agents", "ratios", "problems", "algorithms", "value_dist", "degradation_lambda", "seed", "records",
    "output", "speed", "work_start", "sdp", "dsa_iterations", "bootstrap_resamples", "threads", "validate",
    "trace"};

std::string fmt(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(std::string_view text) {
  ExperimentConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : j.items())
      if (!kConfigKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
    c.agents = j.value("agents", c.agents);
    if (j.contains("ratios")) c.ratios = j.at("ratios").get<std::vector<std::size_t>>();
    c.problems = j.value("problems", c.problems);
    if (j.contains("algorithms")) {
      c.algorithms.clear();
      for (const auto& a : j.at("algorithms")) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    if (j.contains("value_dist")) c.value_dist = parse_value_kind(j.at("value_dist").get<std::string>());
    if (j.contains("degradation_lambda") && !j.at("degradation_lambda").is_null())
      c.degradation_lambda = j.at("degradation_lambda").get<double>();
    c.seed = j.value("seed", c.seed);
    c.records = j.value("records", c.records);
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    c.speed = j.value("speed", c.speed);
    if (j.contains("work_start")) c.work_start = parse_work_start(j.at("work_start").get<std::string>());
    if (j.contains("sdp")) {
      const auto& s = j.at("sdp");
      for (const auto& [key, _] : s.items())
        if (key != "pA" && key != "pB" && key != "pC" && key != "pD")
          throw ConfigError("unknown sdp key '" + key + "'");
      c.sdp.pA = s.value("pA", c.sdp.pA);
      c.sdp.pB = s.value("pB", c.sdp.pB);
      c.sdp.pC = s.value("pC", c.sdp.pC);
      c.sdp.pD = s.value("pD", c.sdp.pD);
    }
    if (j.contains("dsa_iterations") && !j.at("dsa_iterations").is_null())
      c.dsa_iterations = j.at("dsa_iterations").get<std::size_t>();
    c.bootstrap_resamples = j.value("bootstrap_resamples", c.bootstrap_resamples);
    c.threads = j.value("threads", c.threads);
    c.validate = j.value("validate", c.validate);
    c.trace = j.value("trace", c.trace);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  c.check();
  return c;
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["agents"] = agents;
  j["ratios"] = ratios;
  j["problems"] = problems;
  j["algorithms"] = json::array();
  for (auto a : algorithms) j["algorithms"].push_back(std::string(to_string(a)));
  j["value_dist"] = std::string(to_string(value_dist));
  j["degradation_lambda"] = degradation_lambda ? json(*degradation_lambda) : json(nullptr);
  j["seed"] = seed;
  j["records"] = records;
  j["output"] = output.string();
  j["speed"] = speed;
  j["work_start"] = std::string(to_string(work_start));
  j["sdp"] = {{"pA", sdp.pA}, {"pB", sdp.pB}, {"pC", sdp.pC}, {"pD", sdp.pD}};
  j["dsa_iterations"] = dsa_iterations ? json(*dsa_iterations) : json(nullptr);
  j["bootstrap_resamples"] = bootstrap_resamples;
  j["threads"] = threads;
  j["validate"] = validate;
  j["trace"] = trace;
  return j.dump(1) + "\n";
}

void ExperimentConfig::check() const {
  if (agents == 0) throw ConfigError("agents must be positive");
  if (problems == 0) throw ConfigError("problems must be positive");
  if (ratios.empty()) throw ConfigError("ratios must not be empty");
  for (auto k : ratios)
    if (k < 1 || k > 20) throw ConfigError("ratio " + std::to_string(k) + " outside 1..20");
  if (algorithms.empty()) throw ConfigError("algorithms must not be empty");
  if (!(speed > 0.0)) throw ConfigError("speed must be positive");
  if (degradation_lambda && *degradation_lambda < 0.0) throw ConfigError("degradation_lambda must be >= 0");
  for (double p : {sdp.pA, sdp.pB, sdp.pC, sdp.pD})
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("sdp probabilities must lie in [0, 1]");
  if (bootstrap_resamples == 0) throw ConfigError("bootstrap_resamples must be positive");
  if (dsa_iterations && *dsa_iterations == 0) throw ConfigError("dsa_iterations must be positive");
}

std::size_t ExperimentConfig::records_needed() const {
  const std::size_t k = *std::max_element(ratios.begin(), ratios.end());
  return agents * k * problems;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

Interval bootstrap_median(std::span<const double> values, std::size_t resamples, std::uint64_t seed) {
  Interval out;
  if (values.empty()) return out;
  out.median = median({values.begin(), values.end()});
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> stats;
  stats.reserve(resamples);
  std::vector<double> sample(values.size());
  for (std::size_t r = 0; r < resamples; ++r) {
    for (auto& x : sample) x = values[pick(rng)];
    stats.push_back(median(sample));
  }
  out.lo = quantile(stats, 0.025);
  out.hi = quantile(stats, 0.975);
  return out;
}

double metric_value(const RunMetrics& m, std::string_view name) {
  if (name == "messages") return static_cast<double>(m.messages);
  if (name == "bytes") return static_cast<double>(m.bytes);
  if (name == "ncccs") return static_cast<double>(m.ncccs);
  if (name == "completed_pct") return m.completed_pct;
  if (name == "cpu_ms") return m.cpu_ms;
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

std::vector<IncidentRecord> resolve_records(const ExperimentConfig& config) {
  const std::string& src = config.records;
  if (src == "synthetic") return synthesize_records(config.records_needed(), config.seed);
  if (src.rfind("synthetic:", 0) == 0) {
    std::size_t n = 0;
    try {
      n = std::stoull(src.substr(10));
    } catch (const std::exception&) {
      throw ConfigError("bad record source '" + src + "'");
    }
    return synthesize_records(n, config.seed);
  }
  return load_records(src).records;
}

std::uint64_t run_seed(const ExperimentConfig& config, std::size_t ratio, std::size_t problem) {
  return derive_seed(config.seed, {0x52A, ratio, problem});
}

namespace {

double resolve_lambda(const ExperimentConfig& config, std::span<const IncidentRecord> records) {
  return config.degradation_lambda ? *config.degradation_lambda : mean_incidents_per_hour(records);
}

}  // namespace

std::vector<RunRow> run_rows(const ExperimentConfig& config, std::span<const IncidentRecord> records,
                             const Progress& progress) {
  config.check();
  if (records.size() < config.records_needed())
    throw ConfigError("record source has " + std::to_string(records.size()) + " records, " +
                      std::to_string(config.records_needed()) + " needed");
  const double lambda = resolve_lambda(config, records);
  std::vector<double> arrivals;
  arrivals.reserve(records.size());
  for (const auto& r : records) arrivals.push_back(r.attendance_s);

  const std::size_t total = config.ratios.size() * config.problems * config.algorithms.size();
  std::vector<RunRow> rows;
  rows.reserve(total);
  std::size_t finished = 0;
  std::mutex progress_mutex;

  for (auto k : config.ratios) {
    SliceOptions slice;
    slice.values = config.value_dist;
    slice.seed = derive_seed(config.seed, {0x511CE, k});
    slice.speed = config.speed;
    slice.work_start = config.work_start;
    const auto problems = slice_problems(records, config.agents, k, config.problems, slice);

    const std::size_t jobs = problems.size() * config.algorithms.size();
    std::vector<RunRow> local(jobs);
    std::vector<std::string> failures(jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t job = next.fetch_add(1);
        if (job >= jobs) return;
        const auto& problem = problems[job / config.algorithms.size()];
        const Algorithm alg = config.algorithms[job % config.algorithms.size()];
        RunOptions opts;
        opts.algorithm = alg;
        opts.seed = run_seed(config, k, problem.id);
        opts.trace = config.trace;
        opts.dsa.params = config.sdp;
        opts.dsa.iterations = config.dsa_iterations;
        if (lambda > 0.0) opts.degradation = degradation_schedule(problem.instance, arrivals, lambda, opts.seed);
        RunResult result = run(problem.instance, opts);
        RunRow row{problem.id, alg, k, opts.seed, config.value_dist, result.metrics, result.removed_agents, 0};
        if (config.validate) row.violations = validate(problem.instance, result.solution).violations.size();
        if (config.trace) {
          std::filesystem::create_directories(config.output / "traces");
          std::ostringstream name;
          name << "k" << k << "_p" << problem.id << "_" << to_string(alg) << ".txt";
          std::ostringstream body;
          write_trace(body, result.trace);
          write_file(config.output / "traces" / name.str(), body.str());
        }
        local[job] = row;
        if (progress) {
          std::lock_guard lock(progress_mutex);
          progress(++finished, total);
        }
      }
    };
    std::size_t threads = config.threads ? config.threads : std::max(1U, std::thread::hardware_concurrency());
    threads = std::min(threads, jobs);
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    rows.insert(rows.end(), local.begin(), local.end());
  }
  return rows;
}

std::vector<AggregateRow> aggregate(std::span<const RunRow> rows, std::size_t resamples, std::uint64_t seed) {
  std::map<std::pair<std::size_t, Algorithm>, std::vector<const RunRow*>> groups;
  for (const auto& r : rows) groups[{r.ratio, r.algorithm}].push_back(&r);
  std::vector<AggregateRow> out;
  for (const auto& [key, members] : groups) {
    for (std::size_t m = 0; m < metric_names().size(); ++m) {
      const auto& name = metric_names()[m];
      std::vector<double> xs;
      for (const auto* r : members) xs.push_back(metric_value(r->metrics, name));
      const auto iv = bootstrap_median(
          xs, resamples, derive_seed(seed, {0xB007, key.first, static_cast<std::uint64_t>(key.second), m}));
      out.push_back({key.first, key.second, name, iv});
    }
  }
  return out;
}

std::vector<RatioRow> ratio_table(std::span<const RunRow> rows, std::size_t resamples, std::uint64_t seed) {
  std::map<std::pair<std::size_t, std::size_t>, std::pair<const RunRow*, const RunRow*>> pairs;
  std::set<std::size_t> ratios;
  for (const auto& r : rows) {
    auto& p = pairs[{r.ratio, r.problem_id}];
    (r.algorithm == Algorithm::DsaSdp ? p.first : p.second) = &r;
    ratios.insert(r.ratio);
  }
  std::vector<RatioRow> out;
  for (auto k : ratios) {
    for (std::size_t m = 0; m < metric_names().size(); ++m) {
      const auto& name = metric_names()[m];
      std::vector<double> xs;
      for (const auto& [key, p] : pairs) {
        if (key.first != k || !p.first || !p.second) continue;
        const double den = metric_value(p.second->metrics, name);
        if (den == 0.0) continue;
        xs.push_back(metric_value(p.first->metrics, name) / den);
      }
      if (xs.empty()) continue;
      out.push_back({k, name, bootstrap_median(xs, resamples, derive_seed(seed, {0x2A7, k, m})), xs.size()});
    }
  }
  return out;
}

std::string runs_csv(std::span<const RunRow> rows) {
  std::ostringstream out;
  out << "problem_id,algorithm,ratio,seed,value_dist,messages,bytes,ncccs,completed_pct,cpu_ms\n";
  for (const auto& r : rows)
    out << r.problem_id << ',' << to_string(r.algorithm) << ',' << r.ratio << ',' << r.seed << ','
        << to_string(r.value_dist) << ',' << r.metrics.messages << ',' << r.metrics.bytes << ','
        << r.metrics.ncccs << ',' << fmt(r.metrics.completed_pct, 6) << ',' << fmt(r.metrics.cpu_ms, 3) << '\n';
  return out.str();
}

std::string aggregate_csv(std::span<const AggregateRow> rows) {
  std::ostringstream out;
  out << "ratio,algorithm,metric,median,ci_lo,ci_hi\n";
  for (const auto& r : rows)
    out << r.ratio << ',' << to_string(r.algorithm) << ',' << r.metric << ',' << fmt(r.value.median, 6) << ','
        << fmt(r.value.lo, 6) << ',' << fmt(r.value.hi, 6) << '\n';
  return out.str();
}

std::string ratios_csv(std::span<const RatioRow> rows) {
  std::ostringstream out;
  out << "ratio,metric,dsa_over_dcts_median,ci_lo,ci_hi\n";
  for (const auto& r : rows)
    out << r.ratio << ',' << r.metric << ',' << fmt(r.value.median, 6) << ',' << fmt(r.value.lo, 6) << ','
        << fmt(r.value.hi, 6) << '\n';
  return out.str();
}

ExperimentSummary run_experiment(const ExperimentConfig& config, const Progress& progress) {
  config.check();
  const auto records = resolve_records(config);
  if (records.size() < config.records_needed())
    throw ConfigError("record source has " + std::to_string(records.size()) + " records, " +
                      std::to_string(config.records_needed()) + " needed");
  ExperimentSummary summary;
  summary.lambda = resolve_lambda(config, records);
  summary.rows = run_rows(config, records, progress);
  summary.aggregate = aggregate(summary.rows, config.bootstrap_resamples, config.seed);
  summary.ratios = ratio_table(summary.rows, config.bootstrap_resamples, config.seed);

  std::filesystem::create_directories(config.output);
  write_file(config.output / "runs.csv", runs_csv(summary.rows));
  write_file(config.output / "aggregate.csv", aggregate_csv(summary.aggregate));
  write_file(config.output / "ratios.csv", ratios_csv(summary.ratios));

  double mean_arrival = 0.0;
  for (const auto& r : records) mean_arrival += r.attendance_s;
  if (!records.empty()) mean_arrival /= static_cast<double>(records.size());
  json meta;
  meta["config"] = json::parse(config.to_json());
  meta["records_available"] = records.size();
  meta["records_used"] = config.records_needed();
  meta["degradation"] = {{"lambda", summary.lambda},
                         {"lambda_source", config.degradation_lambda ? "config" : "mean incidents per hour"},
                         {"mean_arrival_s", mean_arrival},
                         {"cdf", "PoissonCDF(floor(lambda * t / mean_arrival); lambda)"},
                         {"removals", "increments F(t) - F(t-1) for t >= 1"}};
  meta["model"] = {{"time_unit", "1 second"},
                   {"travel", "haversine, ceil(distance / speed)"},
                   {"speed_m_per_tick", config.speed},
                   {"work_start", std::string(to_string(config.work_start))},
                   {"agent_start", "station of record (agent index mod |V|) within each problem"},
                   {"workload", "U(10, 300)"},
                   {"work_tolerance", kWorkTolerance}};
  meta["dcts"] = {{"phase1_order", "deadline, travel time, task id"},
                  {"skip_covered_tasks", true},
                  {"timeout", "one delivery round"},
                  {"uncompletable", "committed agents plus every neighbor agent cannot finish"}};
  meta["dsa_sdp"] = {{"pA", config.sdp.pA},
                     {"pB", config.sdp.pB},
                     {"pC", config.sdp.pC},
                     {"pD", config.sdp.pD},
                     {"iterations", config.dsa_iterations ? json(*config.dsa_iterations) : json("open tasks")},
                     {"commit", "final choices whose coalition can finish"}};
  meta["aggregate"] = {{"ci", "bootstrap percentile 95%"}, {"resamples", config.bootstrap_resamples}};
  std::uint64_t violations = 0;
  for (const auto& r : summary.rows) violations += r.violations;
  meta["violations"] = violations;
  write_file(config.output / "metadata.json", meta.dump(1) + "\n");
  if (violations > 0)
    throw InvariantError(std::to_string(violations) + " constraint violations in returned solutions");
  return summary;
}

}  // namespace cfstp
