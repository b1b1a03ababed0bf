#include "cfstp/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <boost/math/distributions/poisson.hpp>

#include "cfstp/random.hpp"

namespace cfstp {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_row(std::size_t row, const std::string& what) {
  throw ParseError("row " + std::to_string(row) + ": " + what);
}

std::int64_t parse_int(std::string_view s, std::size_t row, const char* field) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) bad_row(row, std::string("malformed ") + field);
  return v;
}

double parse_double(std::string_view s, std::size_t row, const char* field) {
  // from_chars for double is missing on some toolchains; strtod on a copy.
  std::string copy(s);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size() || !std::isfinite(v))
    bad_row(row, std::string("malformed ") + field);
  return v;
}

}  // namespace

RecordSet read_records(std::istream& in) {
  RecordSet out;
  std::string line;
  std::size_t row = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++row;
    const auto text = trim(line);
    if (!header) {
      if (text.empty()) continue;
      if (text != kRecordHeader) throw ParseError("row " + std::to_string(row) + ": unexpected header");
      header = true;
      continue;
    }
    if (text.empty()) continue;
    auto fields = split(text);
    if (fields.size() != 7)
      bad_row(row, "expected 7 fields, found " + std::to_string(fields.size()));
    for (auto& f : fields) f = trim(f);

    IncidentRecord r;
    r.index = parse_int(fields[0], row, "index");
    r.timestamp = parse_int(fields[1], row, "timestamp");
    if (fields[2].empty() || fields[3].empty() || fields[5].empty() || fields[6].empty()) {
      out.rejected.push_back({row, "missing coordinates"});
      continue;
    }
    r.lat = parse_double(fields[2], row, "lat");
    r.lon = parse_double(fields[3], row, "lon");
    if (fields[4].empty()) {
      out.rejected.push_back({row, "missing attendance time"});
      continue;
    }
    r.attendance_s = parse_double(fields[4], row, "attendance_s");
    r.station_lat = parse_double(fields[5], row, "station_lat");
    r.station_lon = parse_double(fields[6], row, "station_lon");
    if (r.attendance_s <= 0.0) {
      out.rejected.push_back({row, "non-positive attendance time"});
      continue;
    }
    if (std::abs(r.lat) > 90.0 || std::abs(r.lon) > 180.0 || std::abs(r.station_lat) > 90.0 ||
        std::abs(r.station_lon) > 180.0) {
      out.rejected.push_back({row, "coordinates out of range"});
      continue;
    }
    out.records.push_back(r);
  }
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const IncidentRecord& a, const IncidentRecord& b) { return a.index < b.index; });
  return out;
}

RecordSet load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open record file " + path.string());
  return read_records(in);
}

void write_records(std::ostream& out, std::span<const IncidentRecord> records) {
  out << kRecordHeader << '\n';
  std::ostringstream line;
  line << std::setprecision(17);
  for (const auto& r : records) {
    line.str({});
    line << r.index << ',' << r.timestamp << ',' << r.lat << ',' << r.lon << ',' << r.attendance_s << ','
         << r.station_lat << ',' << r.station_lon << '\n';
    out << line.str();
  }
}

void save_records(const std::filesystem::path& path, std::span<const IncidentRecord> records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write record file " + path.string());
  write_records(out, records);
}

const std::vector<Location>& synthetic_stations() {
  static const std::vector<Location> stations = [] {
    const BoundingBox box;
    Rng rng(derive_seed(0x57A710E5ULL, {kStationCount}));
    std::uniform_real_distribution<double> lat(box.lat_min, box.lat_max);
    std::uniform_real_distribution<double> lon(box.lon_min, box.lon_max);
    std::vector<Location> out(kStationCount);
    for (auto& s : out) {
      s.lat = lat(rng);
      s.lon = lon(rng);
    }
    return out;
  }();
  return stations;
}

std::vector<IncidentRecord> synthesize_records(std::size_t count, std::uint64_t seed) {
  const BoundingBox box;
  const auto& stations = synthetic_stations();
  Rng rng(derive_seed(seed, {0x5E7}));
  std::uniform_real_distribution<double> lat(box.lat_min, box.lat_max);
  std::uniform_real_distribution<double> lon(box.lon_min, box.lon_max);
  std::lognormal_distribution<double> attendance(std::log(kMedianAttendance), kAttendanceSigma);
  std::exponential_distribution<double> gap(kIncidentsPerHour / 3600.0);

  std::vector<IncidentRecord> out;
  out.reserve(count);
  double clock = 1'230'768'000.0;  // 2009-01-01T00:00:00Z
  for (std::size_t i = 0; i < count; ++i) {
    IncidentRecord r;
    r.index = static_cast<std::int64_t>(i) + 1;
    clock += gap(rng);
    r.timestamp = static_cast<std::int64_t>(clock);
    r.lat = lat(rng);
    r.lon = lon(rng);
    r.attendance_s = std::max(1.0, std::round(attendance(rng)));
    const Location here{r.lat, r.lon};
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < stations.size(); ++s) {
      const double d = haversine_metres(here, stations[s]);
      if (d < best_d) {
        best_d = d;
        best = s;
      }
    }
    r.station_lat = stations[best].lat;
    r.station_lon = stations[best].lon;
    out.push_back(r);
  }
  return out;
}

double mean_incidents_per_hour(std::span<const IncidentRecord> records) {
  if (records.size() < 2) return 0.0;
  auto [lo, hi] = std::minmax_element(records.begin(), records.end(),
                                      [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  const double hours = static_cast<double>(hi->timestamp - lo->timestamp) / 3600.0;
  if (hours <= 0.0) return 0.0;
  return static_cast<double>(records.size() - 1) / hours;
}

std::vector<Problem> slice_problems(std::span<const IncidentRecord> records, std::size_t agents,
                                    std::size_t ratio, std::size_t count, const SliceOptions& options) {
  if (count == 0) return {};
  if (agents == 0) throw ConfigError("slice_problems needs at least one agent");
  if (ratio < 1 || ratio > 20) throw ConfigError("task-to-agent ratio must be in 1..20");
  const std::size_t tasks = agents * ratio;
  const std::size_t needed = tasks * count;
  if (records.size() < needed)
    throw ConfigError("need " + std::to_string(needed) + " records for " + std::to_string(count) +
                      " problems, have " + std::to_string(records.size()) + " (short by " +
                      std::to_string(needed - records.size()) + ")");

  std::vector<Problem> out;
  out.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    const std::size_t first = p * tasks;
    std::vector<Location> locations;
    locations.reserve(tasks + agents);
    std::vector<Task> ts;
    ts.reserve(tasks);
    Rng rng(derive_seed(options.seed, {0x3071, p}));
    std::uniform_real_distribution<double> workload(options.workload_min, options.workload_max);
    for (std::size_t i = 0; i < tasks; ++i) {
      const auto& r = records[first + i];
      locations.push_back({r.lat, r.lon});
      ts.push_back(Task{static_cast<LocationId>(i), static_cast<Tick>(std::llround(r.attendance_s)), workload(rng)});
    }
    std::vector<Agent> as;
    as.reserve(agents);
    for (std::size_t a = 0; a < agents; ++a) {
      const auto& r = records[first + (a % tasks)];
      locations.push_back({r.station_lat, r.station_lon});
      as.push_back(Agent{static_cast<LocationId>(tasks + a), options.speed});
    }
    ValueModelSpec values;
    values.kind = options.values;
    values.seed = derive_seed(options.seed, {0x7A1, p});
    out.push_back(Problem{p, first, first + tasks,
                          Instance(std::move(locations), std::move(ts), std::move(as),
                                   TravelModel{DistanceMetric::Haversine}, std::move(values),
                                   options.work_start)});
  }
  return out;
}

std::uint64_t DegradationSchedule::total() const {
  return std::accumulate(removals.begin(), removals.end(), std::uint64_t{0});
}

std::vector<double> removal_cdf(Tick horizon, double lambda, double mean_arrival) {
  std::vector<double> f(static_cast<std::size_t>(std::max<Tick>(horizon, 0)) + 1, 0.0);
  if (!(lambda > 0.0) || !(mean_arrival > 0.0)) return f;
  const boost::math::poisson_distribution<double> dist(lambda);
  for (std::size_t t = 0; t < f.size(); ++t) {
    const double x = std::floor(lambda * static_cast<double>(t) / mean_arrival);
    f[t] = boost::math::cdf(dist, x);
  }
  return f;
}

DegradationSchedule degradation_schedule(const Instance& inst, std::span<const double> arrivals,
                                         double lambda, std::uint64_t seed) {
  DegradationSchedule s;
  s.lambda = lambda;
  s.removals.assign(static_cast<std::size_t>(inst.t_max()) + 1, 0);
  if (!(lambda > 0.0) || arrivals.empty()) return s;
  s.mean_arrival = std::accumulate(arrivals.begin(), arrivals.end(), 0.0) / static_cast<double>(arrivals.size());
  const auto cdf = removal_cdf(inst.t_max(), lambda, s.mean_arrival);
  Rng rng(derive_seed(seed, {0xDE6}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t a = 0; a < inst.agent_count(); ++a) {
    // Only the increments F(t) - F(t-1), t >= 1, remove agents; the mass
    // F(0) already present at the start is not a removal.
    const double x = cdf[0] + u(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
    if (it != cdf.end()) ++s.removals[static_cast<std::size_t>(it - cdf.begin())];
  }
  return s;
}

}  // namespace cfstp
