#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace eviz {

using Timestamp = std::chrono::sys_seconds;

enum class Unit { kW, percent_rh, m_per_s, celsius };

std::string_view unit_name(Unit u) noexcept;
Unit parse_unit(std::string_view text);  // throws UnknownUnit

/// ISO-8601 UTC timestamp: `YYYY-MM-DDTHH:MM:SS` with optional `Z`, a space
/// instead of `T` is accepted. Fractional seconds are rejected.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);          // 2023-07-01T00:00:00Z
std::string format_timestamp_compact(Timestamp t);  // 20230701T000000Z

/// One channel sampled on a regular grid.
///
/// `values` may contain NaN right after parsing (missing cells or missing
/// rows). After `fill_gaps` every value is finite; samples that belong to a
/// gap too long to interpolate are flagged in `unrecoverable`.
struct TimeSeries {
  std::string channel_id;
  Unit unit = Unit::kW;
  double sample_period = 60.0;  // seconds
  Timestamp start_time{};
  std::vector<double> values;
  std::vector<std::uint8_t> unrecoverable;  // empty or values.size()

  std::size_t size() const noexcept { return values.size(); }
  double sample_rate() const noexcept { return 1.0 / sample_period; }
  Timestamp time_at(std::size_t index) const;
  bool is_unrecoverable(std::size_t index) const noexcept {
    return !unrecoverable.empty() && unrecoverable[index] != 0;
  }
};

struct Window {
  std::string parent_channel;
  std::size_t start_index = 0;
  Timestamp start_time{};
  double sample_period = 60.0;
  std::vector<double> samples;
  bool normalized = false;
};

/// Column layout of an ingest CSV. Columns absent from `units` default to
/// `default_unit`, unless the header carries a bracketed unit such as
/// `humidity[percent_rh]`.
struct ColumnSpec {
  std::string timestamp_column = "timestamp";
  double sample_period = 60.0;
  Unit default_unit = Unit::kW;
  std::map<std::string, Unit> units;
};

std::vector<TimeSeries> parse_csv(std::istream& in, const ColumnSpec& schema);
std::vector<TimeSeries> parse_csv_file(const std::string& path,
                                       const ColumnSpec& schema);

/// Writes series sharing one time axis in the format `parse_csv` reads.
/// Units are emitted in the bracketed header form.
void write_csv(std::ostream& out, const std::vector<TimeSeries>& series);

/// Linear interpolation across missing runs of at most `max_gap` seconds.
/// Longer runs are interpolated too (so values stay finite) but marked
/// unrecoverable; `make_windows` drops every window touching them. Leading
/// and trailing missing runs have no anchor on one side and are always
/// unrecoverable.
TimeSeries fill_gaps(const TimeSeries& ts, double max_gap);

std::vector<Window> make_windows(const TimeSeries& ts, double length,
                                 double stride);

Window normalize_minmax(const Window& w);

struct IngestConfig {
  ColumnSpec columns;
  double window_length = 24 * 3600.0;
  double stride = 24 * 3600.0;
  double max_gap = 15 * 60.0;
};

/// parse -> fill_gaps -> make_windows -> normalize_minmax for every channel.
std::vector<Window> ingest_windows(std::istream& in, const IngestConfig& cfg);

}  // namespace eviz
