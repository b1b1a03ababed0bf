#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cfstp/model.hpp"

namespace cfstp {

// One row of the incident file. Index is 1-based and chronological.
struct IncidentRecord {
  std::int64_t index = 0;
  std::int64_t timestamp = 0;  // seconds since the epoch
  double lat = 0.0;
  double lon = 0.0;
  double attendance_s = 0.0;
  double station_lat = 0.0;
  double station_lon = 0.0;

  friend bool operator==(const IncidentRecord&, const IncidentRecord&) = default;
};

inline constexpr const char* kRecordHeader = "index,timestamp,lat,lon,attendance_s,station_lat,station_lon";

struct RejectedRow {
  std::size_t row = 0;  // 1-based line number in the file
  std::string reason;
};

struct RecordSet {
  std::vector<IncidentRecord> records;
  std::vector<RejectedRow> rejected;
};

// Rows with missing coordinates or non-positive attendance are rejected and
// reported; unparseable rows and a wrong header throw ParseError.
RecordSet read_records(std::istream& in);
RecordSet load_records(const std::filesystem::path& path);
void write_records(std::ostream& out, std::span<const IncidentRecord> records);
void save_records(const std::filesystem::path& path, std::span<const IncidentRecord> records);

// Greater London bounding box used by the synthetic generator.
struct BoundingBox {
  double lat_min = 51.286;
  double lat_max = 51.692;
  double lon_min = -0.510;
  double lon_max = 0.334;
};

inline constexpr std::size_t kStationCount = 103;
inline constexpr double kMedianAttendance = 300.0;
inline constexpr double kAttendanceSigma = 0.4;
inline constexpr double kIncidentsPerHour = 3.6;

// The fixed synthetic station points (same for every seed).
const std::vector<Location>& synthetic_stations();

// Log-normal attendance (median 300 s), uniform incident positions, nearest
// station, exponential inter-arrival times. Pure in (count, seed).
std::vector<IncidentRecord> synthesize_records(std::size_t count, std::uint64_t seed);

// Incidents per hour over the records' time span.
double mean_incidents_per_hour(std::span<const IncidentRecord> records);

struct SliceOptions {
  ValueKind values = ValueKind::UcNDCS;
  std::uint64_t seed = 0;
  double speed = 10.0;  // metres per tick
  double workload_min = 10.0;
  double workload_max = 300.0;
  WorkStart work_start = WorkStart::OnArrival;
};

struct Problem {
  std::size_t id = 0;
  std::size_t first_record = 0;  // 0-based, inclusive
  std::size_t last_record = 0;   // 0-based, exclusive
  Instance instance;
};

// `count` consecutive blocks of |A| * k records. Tasks sit at the incidents
// with deadline = attendance seconds; agent i starts at the station of the
// block's record i mod |V|.
std::vector<Problem> slice_problems(std::span<const IncidentRecord> records, std::size_t agents,
                                    std::size_t ratio, std::size_t count, const SliceOptions& options);

// Removal counts per tick. An agent leaves at tick t >= 1 with probability
// F(t) - F(t-1), F(t) = PoissonCDF(floor(lambda * t / mean(arrivals)); lambda),
// so the expected total is |A| * (F(t_max) - F(0)).
struct DegradationSchedule {
  double lambda = 0.0;
  double mean_arrival = 0.0;
  std::vector<std::uint32_t> removals;  // index = tick

  std::uint32_t at(Tick t) const {
    return t >= 0 && static_cast<std::size_t>(t) < removals.size() ? removals[static_cast<std::size_t>(t)] : 0;
  }
  std::uint64_t total() const;
};

// Cumulative removal probability F(t) for t = 0..horizon.
std::vector<double> removal_cdf(Tick horizon, double lambda, double mean_arrival);

DegradationSchedule degradation_schedule(const Instance& inst, std::span<const double> arrivals,
                                         double lambda, std::uint64_t seed);

}  // namespace cfstp
