// Acceptance suite. One invocation per criterion; each prints one
// "criterion N: PASS|FAIL ..." line (criterion 7 prints 7a, 7b, 7c) and
// exits non-zero when any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "brute_force.hpp"
#include "cfstp/experiment.hpp"
#include "cfstp/io.hpp"
#include "cfstp/simulation.hpp"
#include "gen.hpp"

using namespace cfstp;
using namespace cfstp::testing;

namespace {

// Pinned thresholds.
constexpr std::size_t kFeasibilityInstances = 10'000;
constexpr std::size_t kMicroInstances = 200;
constexpr std::int64_t kMicroBudget = 120;  // 3 agents * 4 tasks * t_max 10
constexpr double kMinOptimalShare = 0.20;
constexpr std::size_t kTracedRuns = 100;
constexpr std::size_t kDctsMinBytes = 9, kDctsMaxBytes = 13, kDsaBytes = 8;
constexpr double kMaxSpearman = -0.9;
constexpr double kMessageRatioLo = 10.0, kMessageRatioHi = 100.0;
constexpr double kNcccRatioMin = 10.0;
constexpr double kLoadRatioLo = 0.3, kLoadRatioHi = 1.2;
constexpr std::size_t kPermutationInstances = 200;
constexpr double kScaleSeconds = 60.0;

// The sweep behind criteria 6 and 7.
constexpr std::size_t kSweepAgents = 150;
const std::vector<std::size_t> kSweepRatios{1, 2, 5, 10, 15, 20};
const std::vector<std::size_t> kTrendRatios{1, 5, 10, 15, 20};
const std::vector<std::size_t> kEfficiencyRatios{2, 5};
const std::vector<ValueKind> kSweepKinds{ValueKind::UcNDCS, ValueKind::UcAgentBased};
constexpr std::uint64_t kSweepSeed = 1;

const ValueKind kAllKinds[] = {ValueKind::NDCS, ValueKind::AgentBased, ValueKind::UcNDCS, ValueKind::UcAgentBased};
const Algorithm kBoth[] = {Algorithm::Dcts, Algorithm::DsaSdp};

struct Line {
  std::string id;
  bool pass = false;
  std::string detail;
};

std::string fixed(double x, int digits = 2) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << x;
  return s.str();
}

// Instance i of the randomized family: |A| in 1..10, k in 1..5 and the four
// sampled value kinds, cycled so every combination is covered evenly.
Instance family_instance(std::size_t i) {
  const auto kind = kAllKinds[i % 4];
  const std::size_t agents = 1 + (i / 4) % 10;
  const std::size_t ratio = 1 + (i / 40) % 5;
  return compact_instance(0xACCE55 + i, agents, ratio, kind);
}

RunOptions options(Algorithm alg, std::uint64_t seed) {
  RunOptions o;
  o.algorithm = alg;
  o.seed = seed;
  return o;
}

std::vector<Line> criterion1(std::size_t n) {
  std::size_t runs = 0, bad = 0;
  std::string first;
  for (std::size_t i = 0; i < n; ++i) {
    const auto inst = family_instance(i);
    for (auto alg : kBoth) {
      const auto r = run(inst, options(alg, i));
      ++runs;
      const auto report = validate(inst, r.solution);
      if (!report.feasible()) {
        if (bad++ == 0)
          first = " first: instance " + std::to_string(i) + " " + std::string(to_string(alg)) + " " +
                  std::string(to_string(report.violations[0].kind));
      }
    }
  }
  return {{"1", bad == 0, std::to_string(runs) + " runs, " + std::to_string(bad) + " infeasible" + first}};
}

std::vector<Line> criterion2() {
  std::size_t used = 0, disagree = 0, dominated = 0, dcts_optimal = 0;
  const MicroShape shape{3, 4, 10, 4.0};
  for (std::uint64_t seed = 0; used < kMicroInstances; ++seed) {
    const auto inst = micro_instance(0x313C20 + seed, shape);
    if (static_cast<std::int64_t>(inst.agent_count() * inst.task_count()) * std::max<Tick>(inst.t_max(), 1) >
        kMicroBudget)
      continue;
    ++used;
    const auto opt = solve_optimal(inst, OptimalOptions{kMicroBudget});
    const auto best = opt.completed_count();
    if (!validate(inst, opt).feasible() || BruteForce(inst).max_completed() != best) ++disagree;
    const auto d = run(inst, options(Algorithm::Dcts, seed)).solution.completed_count();
    const auto s = run(inst, options(Algorithm::DsaSdp, seed)).solution.completed_count();
    if (d > best || s > best) ++dominated;
    if (d == best) ++dcts_optimal;
  }
  const double share = static_cast<double>(dcts_optimal) / static_cast<double>(used);
  const bool pass = disagree == 0 && dominated == 0 && share >= kMinOptimalShare;
  return {{"2", pass,
           std::to_string(used) + " micro-instances, enumerator disagreements " + std::to_string(disagree) +
               ", heuristic above optimum " + std::to_string(dominated) + ", D-CTS optimal on " +
               fixed(100.0 * share, 1) + "% (need >= " + fixed(100.0 * kMinOptimalShare, 0) + "%)"}};
}

std::vector<Line> criterion3(std::size_t n) {
  std::size_t runs = 0, non_monotone = 0, overran = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto inst = family_instance(i);
    for (auto alg : kBoth) {
      const auto r = run(inst, options(alg, i));
      ++runs;
      if (!std::is_sorted(r.completed_per_tick.begin(), r.completed_per_tick.end())) ++non_monotone;
      if (r.last_tick > inst.t_max()) ++overran;
    }
  }
  return {{"3", non_monotone == 0 && overran == 0,
           std::to_string(runs) + " runs, " + std::to_string(non_monotone) + " non-monotone, " +
               std::to_string(overran) + " past t_max"}};
}

std::vector<Line> criterion4(std::size_t n) {
  std::size_t over = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto inst = family_instance(i);
    const auto r = run(inst, options(Algorithm::Dcts, i));
    const auto a = inst.agent_count(), v = inst.task_count();
    const auto bound = a * static_cast<std::uint64_t>(inst.t_max()) + v * a;
    if (r.metrics.messages > bound) ++over;
    if (bound > 0) worst = std::max(worst, static_cast<double>(r.metrics.messages) / static_cast<double>(bound));
  }
  return {{"4", over == 0,
           std::to_string(n) + " D-CTS runs, " + std::to_string(over) + " above |A|*t_max + |V|*|A| (max ratio " +
               fixed(worst, 3) + ")"}};
}

std::vector<Line> criterion5() {
  std::size_t runs = 0, bad = 0, dsa_msgs = 0, dcts_msgs = 0, mismatched = 0;
  for (std::size_t i = 0; runs < kTracedRuns; ++i) {
    const auto inst = family_instance(i * 97 + 13);
    for (auto alg : kBoth) {
      auto o = options(alg, i);
      o.trace = true;
      const auto r = run(inst, o);
      ++runs;
      std::uint64_t bytes = 0;
      for (const auto& t : r.trace) {
        bytes += t.bytes;
        if (alg == Algorithm::DsaSdp) {
          ++dsa_msgs;
          if (t.bytes != kDsaBytes) ++bad;
        } else {
          ++dcts_msgs;
          if (t.bytes < kDctsMinBytes || t.bytes > kDctsMaxBytes) ++bad;
        }
      }
      if (bytes != r.metrics.bytes || r.trace.size() != r.metrics.messages) ++mismatched;
    }
  }
  return {{"5", bad == 0 && mismatched == 0 && dsa_msgs > 0 && dcts_msgs > 0,
           std::to_string(runs) + " traced runs, " + std::to_string(dcts_msgs) + " D-CTS and " +
               std::to_string(dsa_msgs) + " DSA-SDP messages, " + std::to_string(bad) + " off-size, " +
               std::to_string(mismatched) + " runs whose trace disagrees with the totals"}};
}

// ---- sweep for criteria 6 and 7

std::string sweep_fingerprint(std::size_t problems) {
  std::ostringstream s;
  s << "# sweep agents=" << kSweepAgents << " problems=" << problems << " seed=" << kSweepSeed << " ratios=";
  for (auto k : kSweepRatios) s << k << ' ';
  return s.str();
}

ExperimentConfig sweep_config(ValueKind kind, std::size_t problems) {
  ExperimentConfig c;
  c.agents = kSweepAgents;
  c.ratios = kSweepRatios;
  c.problems = problems;
  c.value_dist = kind;
  c.seed = kSweepSeed;
  c.records = "synthetic";
  c.validate = true;
  return c;
}

std::vector<RunRow> parse_rows(std::istream& in) {
  std::vector<RunRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("problem_id", 0) == 0) continue;
    std::istringstream f(line);
    std::vector<std::string> cells;
    for (std::string cell; std::getline(f, cell, ',');) cells.push_back(cell);
    if (cells.size() != 11) throw ParseError("bad sweep cache row: " + line);
    RunRow r;
    r.problem_id = std::stoull(cells[0]);
    r.algorithm = parse_algorithm(cells[1]);
    r.ratio = std::stoull(cells[2]);
    r.seed = std::stoull(cells[3]);
    r.value_dist = parse_value_kind(cells[4]);
    r.metrics.messages = std::stoull(cells[5]);
    r.metrics.bytes = std::stoull(cells[6]);
    r.metrics.ncccs = std::stoull(cells[7]);
    r.metrics.completed_pct = std::stod(cells[8]);
    r.metrics.cpu_ms = std::stod(cells[9]);
    r.violations = std::stoull(cells[10]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<RunRow> sweep(const std::filesystem::path& cache, std::size_t problems, bool force) {
  const auto fingerprint = sweep_fingerprint(problems);
  if (!force && std::filesystem::exists(cache)) {
    std::ifstream in(cache);
    std::string first;
    std::getline(in, first);
    if (first == fingerprint) return parse_rows(in);
  }
  std::vector<RunRow> rows;
  for (auto kind : kSweepKinds) {
    const auto config = sweep_config(kind, problems);
    const auto records = resolve_records(config);
    auto part = run_rows(config, records, [&](std::size_t done, std::size_t total) {
      if (done % 40 == 0 || done == total)
        std::cerr << "sweep " << to_string(kind) << ": " << done << "/" << total << "\n";
    });
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::ostringstream out;
  out << fingerprint << "\n";
  out << "problem_id,algorithm,ratio,seed,value_dist,messages,bytes,ncccs,completed_pct,cpu_ms,violations\n";
  for (const auto& r : rows)
    out << r.problem_id << ',' << to_string(r.algorithm) << ',' << r.ratio << ',' << r.seed << ','
        << to_string(r.value_dist) << ',' << r.metrics.messages << ',' << r.metrics.bytes << ','
        << r.metrics.ncccs << ',' << fixed(r.metrics.completed_pct, 6) << ',' << fixed(r.metrics.cpu_ms, 3)
        << ',' << r.violations << '\n';
  if (!cache.parent_path().empty()) std::filesystem::create_directories(cache.parent_path());
  write_file(cache, out.str());
  return rows;
}

std::vector<double> ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    for (std::size_t m = i; m <= j; ++m) r[idx[m]] = (static_cast<double>(i + j) / 2.0) + 1.0;
    i = j + 1;
  }
  return r;
}

// Spearman's rho (Pearson on average ranks). A constant series has no
// defined correlation and is reported as 0.
double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<Line> criterion6(const std::vector<RunRow>& rows) {
  bool pass = true;
  std::ostringstream detail;
  std::size_t violations = 0;
  for (const auto& r : rows) violations += r.violations;
  for (auto kind : kSweepKinds)
    for (auto alg : kBoth) {
      std::vector<double> ks, meds;
      for (auto k : kTrendRatios) {
        std::vector<double> xs;
        for (const auto& r : rows)
          if (r.value_dist == kind && r.algorithm == alg && r.ratio == k) xs.push_back(r.metrics.completed_pct);
        ks.push_back(static_cast<double>(k));
        meds.push_back(median(xs));
      }
      const double rho = spearman(ks, meds);
      pass = pass && rho <= kMaxSpearman;
      detail << to_string(kind) << "/" << to_string(alg) << " rho=" << fixed(rho, 2) << " [";
      for (std::size_t i = 0; i < meds.size(); ++i) detail << (i ? " " : "") << fixed(meds[i], 1);
      detail << "]; ";
    }
  detail << "violations " << violations;
  return {{"6", pass && violations == 0, detail.str()}};
}

std::vector<Line> criterion7(const std::vector<RunRow>& rows) {
  struct Check {
    std::string id, metric;
    double lo, hi;
  };
  const std::vector<Check> checks{{"7a", "messages", kMessageRatioLo, kMessageRatioHi},
                                  {"7b", "ncccs", kNcccRatioMin, INFINITY},
                                  {"7c", "bytes", kLoadRatioLo, kLoadRatioHi}};
  std::vector<Line> out;
  for (const auto& c : checks) {
    bool pass = true;
    std::ostringstream detail;
    detail << "DSA-SDP/D-CTS " << c.metric << " median ratio in "
           << (std::isinf(c.hi) ? "(" + fixed(c.lo, 1) + ", inf)" : "[" + fixed(c.lo, 1) + ", " + fixed(c.hi, 1) + "]")
           << ":";
    for (auto kind : kSweepKinds) {
      std::vector<RunRow> subset;
      for (const auto& r : rows)
        if (r.value_dist == kind) subset.push_back(r);
      for (auto k : kEfficiencyRatios) {
        // Per-problem ratios, as in the ratio table.
        std::map<std::size_t, std::pair<double, double>> pairs;
        for (const auto& r : subset)
          if (r.ratio == k)
            (r.algorithm == Algorithm::DsaSdp ? pairs[r.problem_id].first : pairs[r.problem_id].second) =
                metric_value(r.metrics, c.metric);
        std::vector<double> ratios;
        for (const auto& [p, v] : pairs)
          if (v.second > 0) ratios.push_back(v.first / v.second);
        const double m = median(ratios);
        const bool ok = !ratios.empty() && m >= c.lo && (std::isinf(c.hi) ? m > c.lo : m <= c.hi);
        pass = pass && ok;
        detail << " " << to_string(kind) << " k=" << k << " " << fixed(m, 2);
      }
    }
    out.push_back({c.id, pass, detail.str()});
  }
  return out;
}

std::vector<Line> criterion8() {
  // Repeated batch runs agree on every file apart from cpu_ms.
  auto config = [](const std::filesystem::path& out, std::size_t threads) {
    ExperimentConfig c;
    c.agents = 6;
    c.ratios = {1, 3};
    c.problems = 4;
    c.records = "synthetic";
    c.bootstrap_resamples = 500;
    c.output = out;
    c.threads = threads;
    return c;
  };
  const auto base = std::filesystem::temp_directory_path() / "cfstp_acceptance_c8";
  std::filesystem::remove_all(base);
  run_experiment(config(base / "a", 1));
  run_experiment(config(base / "b", 3));
  auto strip = [](const std::string& csv, bool runs) {
    std::string out;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);) {
      if (runs)
        out += line.substr(0, line.rfind(',')) + '\n';
      else if (line.find(",cpu_ms,") == std::string::npos)
        out += line + '\n';
    }
    return out;
  };
  std::size_t file_diffs = 0;
  file_diffs += strip(read_file(base / "a" / "runs.csv"), true) != strip(read_file(base / "b" / "runs.csv"), true);
  for (const char* f : {"aggregate.csv", "ratios.csv"})
    file_diffs += strip(read_file(base / "a" / f), false) != strip(read_file(base / "b" / f), false);

  // Traces repeat exactly; node-step order leaves solutions and NCCCs alone.
  std::size_t trace_diffs = 0, order_diffs = 0;
  for (std::size_t i = 0; i < kPermutationInstances; ++i) {
    const auto inst = family_instance(i * 31 + 7);
    Gen g(i);
    std::vector<std::size_t> perm(inst.agent_count() + inst.task_count());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t j = perm.size(); j > 1; --j)
      std::swap(perm[j - 1], perm[static_cast<std::size_t>(g.range(0, static_cast<std::int64_t>(j) - 1))]);
    std::reverse(perm.begin(), perm.end());
    for (auto alg : kBoth) {
      auto o = options(alg, i);
      o.trace = true;
      const auto a = run(inst, o);
      const auto b = run(inst, o);
      if (a.trace != b.trace || solution_to_json(a.solution) != solution_to_json(b.solution)) ++trace_diffs;
      o.step_order = perm;
      const auto c = run(inst, o);
      if (solution_to_json(a.solution) != solution_to_json(c.solution) || a.metrics.ncccs != c.metrics.ncccs)
        ++order_diffs;
    }
  }
  return {{"8", file_diffs == 0 && trace_diffs == 0 && order_diffs == 0,
           "batch files differing " + std::to_string(file_diffs) + ", repeated runs differing " +
               std::to_string(trace_diffs) + ", step-order permutations changing the result " +
               std::to_string(order_diffs) + " (of " + std::to_string(2 * kPermutationInstances) + ")"}};
}

std::vector<Line> criterion9() {
  const auto records = synthesize_records(kSweepAgents * 20, kSweepSeed);
  SliceOptions slice;
  slice.values = ValueKind::UcNDCS;
  slice.seed = kSweepSeed;
  const auto problem = slice_problems(records, kSweepAgents, 20, 1, slice).front();
  std::vector<double> arrivals;
  for (const auto& r : records) arrivals.push_back(r.attendance_s);
  auto o = options(Algorithm::Dcts, kSweepSeed);
  o.degradation = degradation_schedule(problem.instance, arrivals, mean_incidents_per_hour(records), kSweepSeed);
  const auto started = std::chrono::steady_clock::now();
  const auto r = run(problem.instance, o);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const bool feasible = validate(problem.instance, r.solution).feasible();
  return {{"9", seconds <= kScaleSeconds && feasible,
           "D-CTS on |A| = 150, |V| = 3000 took " + fixed(seconds, 3) + " s (limit " + fixed(kScaleSeconds, 0) +
               " s), completed " + fixed(r.metrics.completed_pct, 1) + "%, " + (feasible ? "feasible" : "INFEASIBLE")}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CFSTP acceptance suite"};
  std::string which = "all";
  std::string cache = "sweep_cache.csv";
  std::size_t instances = kFeasibilityInstances;
  std::size_t problems = 20;
  bool refresh = false;
  app.add_option("--criterion", which, "1..9, sweep or all");
  app.add_option("--cache", cache, "sweep result cache for criteria 6 and 7");
  app.add_option("--instances", instances, "randomized instances for criteria 1, 3 and 4");
  app.add_option("--problems", problems, "problems per sweep cell");
  app.add_flag("--refresh", refresh, "recompute the sweep even if the cache matches");
  CLI11_PARSE(app, argc, argv);

  std::vector<Line> lines;
  auto want = [&](const std::string& id) { return which == "all" || which == id; };
  try {
    if (which == "sweep") {
      const auto rows = sweep(cache, problems, true);
      std::cout << "sweep: " << rows.size() << " runs cached in " << cache << "\n";
      return 0;
    }
    if (want("1")) for (auto& l : criterion1(instances)) lines.push_back(l);
    if (want("2")) for (auto& l : criterion2()) lines.push_back(l);
    if (want("3")) for (auto& l : criterion3(instances)) lines.push_back(l);
    if (want("4")) for (auto& l : criterion4(instances)) lines.push_back(l);
    if (want("5")) for (auto& l : criterion5()) lines.push_back(l);
    if (want("6") || want("7")) {
      const auto rows = sweep(cache, problems, refresh);
      if (want("6")) for (auto& l : criterion6(rows)) lines.push_back(l);
      if (want("7")) for (auto& l : criterion7(rows)) lines.push_back(l);
    }
    if (want("8")) for (auto& l : criterion8()) lines.push_back(l);
    if (want("9")) for (auto& l : criterion9()) lines.push_back(l);
  } catch (const std::exception& e) {
    std::cout << "criterion " << which << ": FAIL error: " << e.what() << "\n";
    return 1;
  }
  if (lines.empty()) {
    std::cerr << "unknown criterion '" << which << "'\n";
    return 2;
  }
  bool all = true;
  for (const auto& l : lines) {
    std::cout << "criterion " << l.id << ": " << (l.pass ? "PASS" : "FAIL") << "  " << l.detail << "\n";
    all = all && l.pass;
  }
  return all ? 0 : 1;
}
