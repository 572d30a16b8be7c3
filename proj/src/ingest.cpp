#include "eviz/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "eviz/error.hpp"

namespace eviz {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(pos)));
      return out;
    }
    out.push_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Empty cells and literal NaN mark a missing sample.
bool parse_cell(std::string_view s, double& out) {
  if (s.empty() || s == "NaN" || s == "nan" || s == "NA") {
    out = kNaN;
    return true;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

struct Row {
  Timestamp time;
  std::size_t line;
  std::vector<double> cells;
};

}  // namespace

std::string_view unit_name(Unit u) noexcept {
  switch (u) {
    case Unit::kW: return "kW";
    case Unit::percent_rh: return "percent_rh";
    case Unit::m_per_s: return "m_per_s";
    case Unit::celsius: return "celsius";
  }
  return "kW";
}

Unit parse_unit(std::string_view text) {
  for (Unit u : {Unit::kW, Unit::percent_rh, Unit::m_per_s, Unit::celsius}) {
    if (text == unit_name(u)) return u;
  }
  throw Error(Errc::UnknownUnit, "unknown unit '" + std::string(text) + "'");
}

Timestamp parse_timestamp(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  const bool shape_ok = text.size() == 19 && text[4] == '-' && text[7] == '-' &&
                        (text[10] == 'T' || text[10] == ' ') && text[13] == ':' &&
                        text[16] == ':';
  if (!shape_ok || !parse_int(text.substr(0, 4), y) ||
      !parse_int(text.substr(5, 2), mo) || !parse_int(text.substr(8, 2), d) ||
      !parse_int(text.substr(11, 2), h) || !parse_int(text.substr(14, 2), mi) ||
      !parse_int(text.substr(17, 2), s)) {
    throw Error(Errc::InvalidArgument, "bad timestamp '" + std::string(text) + "'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw Error(Errc::InvalidArgument, "bad timestamp '" + std::string(text) + "'");
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

namespace {

struct Civil {
  int y;
  unsigned mo, d;
  long h, mi, s;
};

Civil to_civil(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const auto secs = (t - day_point).count();
  return {int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()),
          secs / 3600, (secs / 60) % 60, secs % 60};
}

}  // namespace

std::string format_timestamp(Timestamp t) {
  const Civil c = to_civil(t);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", c.y, c.mo,
                c.d, c.h, c.mi, c.s);
  return buf;
}

std::string format_timestamp_compact(Timestamp t) {
  const Civil c = to_civil(t);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d%02u%02uT%02ld%02ld%02ldZ", c.y, c.mo, c.d,
                c.h, c.mi, c.s);
  return buf;
}

Timestamp TimeSeries::time_at(std::size_t index) const {
  const auto offset = std::llround(static_cast<double>(index) * sample_period);
  return start_time + std::chrono::seconds{offset};
}

std::vector<TimeSeries> parse_csv(std::istream& in, const ColumnSpec& schema) {
  if (!(schema.sample_period > 0)) {
    throw Error(Errc::InvalidArgument, "sample_period must be positive");
  }
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw Error(Errc::MalformedRow, "line 1: missing header");
  }
  ++line_no;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_fields(line);
  if (header.size() < 2 || header[0] != schema.timestamp_column) {
    throw Error(Errc::MalformedRow,
                "line 1: header must start with '" + schema.timestamp_column +
                    "' followed by at least one channel column");
  }

  std::vector<TimeSeries> series;
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string_view name = header[c];
    TimeSeries ts;
    ts.sample_period = schema.sample_period;
    ts.unit = schema.default_unit;
    if (const auto open = name.find('['); open != std::string_view::npos) {
      if (name.back() != ']') {
        throw Error(Errc::MalformedRow, "line 1: bad column '" + std::string(name) + "'");
      }
      ts.unit = parse_unit(name.substr(open + 1, name.size() - open - 2));
      name = trim(name.substr(0, open));
    } else if (auto it = schema.units.find(std::string(name)); it != schema.units.end()) {
      ts.unit = it->second;
    }
    if (name.empty()) throw Error(Errc::MalformedRow, "line 1: empty column name");
    ts.channel_id = std::string(name);
    series.push_back(std::move(ts));
  }

  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    const auto where = "line " + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw Error(Errc::MalformedRow, where + ": expected " +
                                          std::to_string(header.size()) + " fields, got " +
                                          std::to_string(fields.size()));
    }
    Row row;
    row.line = line_no;
    try {
      row.time = parse_timestamp(fields[0]);
    } catch (const Error& e) {
      throw Error(Errc::MalformedRow, where + ": " + e.what());
    }
    row.cells.resize(series.size());
    for (std::size_t c = 0; c < series.size(); ++c) {
      if (!parse_cell(fields[c + 1], row.cells[c])) {
        throw Error(Errc::MalformedRow,
                    where + ": bad value '" + std::string(fields[c + 1]) + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::MalformedRow, "no data rows");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.time < b.time; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].time == rows[i - 1].time) {
      throw Error(Errc::NonMonotonicTimestamps,
                  "duplicate timestamp " + format_timestamp(rows[i].time) + " at line " +
                      std::to_string(rows[i].line));
    }
  }

  const Timestamp start = rows.front().time;
  std::vector<std::size_t> index(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double offset = static_cast<double>((rows[i].time - start).count());
    const double k = std::round(offset / schema.sample_period);
    if (std::abs(k * schema.sample_period - offset) > 1e-6) {
      throw Error(Errc::MalformedRow, "line " + std::to_string(rows[i].line) +
                                          ": timestamp is off the sampling grid");
    }
    index[i] = static_cast<std::size_t>(k);
  }
  const std::size_t length = index.back() + 1;
  for (std::size_t c = 0; c < series.size(); ++c) {
    series[c].start_time = start;
    series[c].values.assign(length, kNaN);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      series[c].values[index[i]] = rows[i].cells[c];
    }
  }
  return series;
}

std::vector<TimeSeries> parse_csv_file(const std::string& path,
                                       const ColumnSpec& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
  return parse_csv(in, schema);
}

void write_csv(std::ostream& out, const std::vector<TimeSeries>& series) {
  if (series.empty()) throw Error(Errc::InvalidArgument, "no series to write");
  const auto& first = series.front();
  for (const auto& ts : series) {
    if (ts.size() != first.size() || ts.start_time != first.start_time ||
        ts.sample_period != first.sample_period) {
      throw Error(Errc::InvalidArgument, "series do not share a time axis");
    }
  }
  out << "timestamp";
  for (const auto& ts : series) out << ',' << ts.channel_id << '[' << unit_name(ts.unit) << ']';
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < first.size(); ++i) {
    out << format_timestamp(first.time_at(i));
    for (const auto& ts : series) {
      out << ',';
      if (std::isfinite(ts.values[i])) {
        std::snprintf(buf, sizeof buf, "%.17g", ts.values[i]);
        out << buf;
      }
    }
    out << '\n';
  }
}

TimeSeries fill_gaps(const TimeSeries& ts, double max_gap) {
  TimeSeries out = ts;
  const std::size_t n = out.size();
  if (out.unrecoverable.empty()) out.unrecoverable.assign(n, 0);
  const auto max_missing = static_cast<std::size_t>(
      std::floor(max_gap / ts.sample_period + 1e-9));

  std::size_t i = 0;
  while (i < n) {
    if (!std::isnan(out.values[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && std::isnan(out.values[j])) ++j;
    const bool anchored = i > 0 && j < n;
    const bool recoverable = anchored && (j - i) <= max_missing;
    // Without an anchor on one side, hold the nearest observed value so the
    // samples stay finite; they are unrecoverable either way.
    const double left = i > 0 ? out.values[i - 1] : (j < n ? out.values[j] : 0.0);
    const double right = j < n ? out.values[j] : left;
    const double span = static_cast<double>(j - i + 1);
    for (std::size_t k = i; k < j; ++k) {
      const double frac = static_cast<double>(k - i + 1) / span;
      out.values[k] = anchored ? left + (right - left) * frac : left;
      if (!recoverable) out.unrecoverable[k] = 1;
    }
    i = j;
  }
  if (std::none_of(out.unrecoverable.begin(), out.unrecoverable.end(),
                   [](std::uint8_t b) { return b != 0; })) {
    out.unrecoverable.clear();
  }
  return out;
}

std::vector<Window> make_windows(const TimeSeries& ts, double length, double stride) {
  if (!(length >= ts.sample_period) || !(stride >= ts.sample_period)) {
    throw Error(Errc::InvalidArgument,
                "window length and stride must be at least one sample period");
  }
  const auto window_samples =
      static_cast<std::size_t>(std::floor(length / ts.sample_period + 1e-9));
  const auto stride_samples =
      static_cast<std::size_t>(std::floor(stride / ts.sample_period + 1e-9));
  if (window_samples > ts.size()) {
    throw Error(Errc::WindowLongerThanSeries,
                "window of " + std::to_string(window_samples) + " samples exceeds series '" +
                    ts.channel_id + "' of " + std::to_string(ts.size()));
  }

  std::vector<Window> windows;
  for (std::size_t start = 0; start + window_samples <= ts.size(); start += stride_samples) {
    bool dropped = false;
    for (std::size_t k = start; k < start + window_samples && !dropped; ++k) {
      dropped = ts.is_unrecoverable(k);
    }
    if (dropped) continue;
    Window w;
    w.parent_channel = ts.channel_id;
    w.start_index = start;
    w.start_time = ts.time_at(start);
    w.sample_period = ts.sample_period;
    w.samples.assign(ts.values.begin() + static_cast<std::ptrdiff_t>(start),
                     ts.values.begin() + static_cast<std::ptrdiff_t>(start + window_samples));
    windows.push_back(std::move(w));
  }
  return windows;
}

Window normalize_minmax(const Window& w) {
  Window out = w;
  out.normalized = true;
  if (out.samples.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(out.samples.begin(), out.samples.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  for (double& v : out.samples) v = range > 0 ? (v - lo) / range : 0.5;
  return out;
}

std::vector<Window> ingest_windows(std::istream& in, const IngestConfig& cfg) {
  std::vector<Window> out;
  for (const auto& raw : parse_csv(in, cfg.columns)) {
    const auto filled = fill_gaps(raw, cfg.max_gap);
    for (auto& w : make_windows(filled, cfg.window_length, cfg.stride)) {
      out.push_back(normalize_minmax(w));
    }
  }
  return out;
}

}  // namespace eviz
