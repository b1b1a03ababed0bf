#include "cfstp/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cfstp {

using nlohmann::json;

namespace {

constexpr const char* kInstanceFormat = "cfstp-instance/1";
constexpr const char* kSolutionFormat = "cfstp-solution/1";

void expect_format(const json& j, const char* format) {
  if (!j.is_object() || j.value("format", std::string{}) != format)
    throw ParseError(std::string("expected a ") + format + " document");
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed document: ") + e.what());
  }
}

}  // namespace

std::string instance_to_json(const Instance& inst) {
  json j;
  j["format"] = kInstanceFormat;
  j["locations"] = json::array();
  for (const auto& l : inst.locations()) j["locations"].push_back({{"lat", l.lat}, {"lon", l.lon}});
  j["tasks"] = json::array();
  for (const auto& t : inst.tasks())
    j["tasks"].push_back({{"location", t.location}, {"deadline", t.deadline}, {"workload", t.workload}});
  j["agents"] = json::array();
  for (const auto& a : inst.agents()) j["agents"].push_back({{"location", a.initial_location}, {"speed", a.speed}});
  j["travel"] = {{"metric", std::string(to_string(inst.travel().metric))}};
  j["work_start"] = std::string(to_string(inst.work_start()));
  const auto& spec = inst.value_spec();
  json values{{"kind", std::string(to_string(spec.kind))}, {"seed", spec.seed}};
  if (spec.kind == ValueKind::Table) {
    values["default_rate"] = spec.default_rate;
    values["table"] = json::array();
    for (const auto& e : spec.table)
      values["table"].push_back({{"agents", e.agents}, {"task", e.task}, {"value", e.value}});
  }
  j["values"] = std::move(values);
  return j.dump(1) + "\n";
}

Instance instance_from_json(std::string_view text) {
  return guarded([&] {
    const json j = json::parse(text);
    expect_format(j, kInstanceFormat);
    std::vector<Location> locations;
    for (const auto& l : j.at("locations")) locations.push_back({l.at("lat").get<double>(), l.at("lon").get<double>()});
    std::vector<Task> tasks;
    for (const auto& t : j.at("tasks"))
      tasks.push_back({t.at("location").get<LocationId>(), t.at("deadline").get<Tick>(), t.at("workload").get<double>()});
    std::vector<Agent> agents;
    for (const auto& a : j.at("agents"))
      agents.push_back({a.at("location").get<LocationId>(), a.at("speed").get<double>()});
    TravelModel travel{parse_metric(j.at("travel").at("metric").get<std::string>())};
    const WorkStart start = parse_work_start(j.value("work_start", std::string("on_arrival")));
    const auto& jv = j.at("values");
    ValueModelSpec spec;
    spec.kind = parse_value_kind(jv.at("kind").get<std::string>());
    spec.seed = jv.value("seed", std::uint64_t{0});
    spec.default_rate = jv.value("default_rate", 0.0);
    if (jv.contains("table"))
      for (const auto& e : jv.at("table"))
        spec.table.push_back({e.at("agents").get<std::vector<AgentId>>(), e.at("task").get<TaskId>(),
                              e.at("value").get<double>()});
    return Instance(std::move(locations), std::move(tasks), std::move(agents), travel, std::move(spec), start);
  });
}

std::string solution_to_json(const Solution& solution) {
  json j;
  j["format"] = kSolutionFormat;
  j["assignments"] = json::array();
  for (const auto& w : solution.assignments)
    j["assignments"].push_back({{"task", w.task}, {"tick", w.tick}, {"coalition", w.coalition.members()}});
  j["completed"] = solution.completed;
  return j.dump(1) + "\n";
}

Solution solution_from_json(std::string_view text) {
  return guarded([&] {
    const json j = json::parse(text);
    expect_format(j, kSolutionFormat);
    Solution s;
    for (const auto& w : j.at("assignments")) {
      WorkAssignment a;
      a.task = w.at("task").get<TaskId>();
      a.tick = w.at("tick").get<Tick>();
      for (auto m : w.at("coalition").get<std::vector<AgentId>>()) a.coalition.insert(m);
      s.assignments.push_back(std::move(a));
    }
    s.completed = j.at("completed").get<std::vector<TaskId>>();
    return s;
  });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

Instance load_instance(const std::filesystem::path& path) { return instance_from_json(read_file(path)); }
void save_instance(const std::filesystem::path& path, const Instance& inst) { write_file(path, instance_to_json(inst)); }
Solution load_solution(const std::filesystem::path& path) { return solution_from_json(read_file(path)); }
void save_solution(const std::filesystem::path& path, const Solution& s) { write_file(path, solution_to_json(s)); }

}  // namespace cfstp
