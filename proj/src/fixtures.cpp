#include "eviz/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <numbers>

#include "eviz/error.hpp"
#include "eviz/rng.hpp"

namespace eviz {

using ojson = nlohmann::ordered_json;

namespace {

std::string clock_time(Timestamp t) {
  return format_timestamp(t).substr(11, 5);  // HH:MM
}

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string describe(const AnomalyRecord& a) {
  const std::string range = clock_time(a.start_time) + " to " + clock_time(a.end_time);
  switch (a.kind) {
    case AnomalyKind::spike:
      return "a power spike of " + fixed(a.magnitude, 2) + " kW from " + range;
    case AnomalyKind::level_shift:
      return "a sustained level shift of " + fixed(a.magnitude, 2) + " kW from " + range;
    case AnomalyKind::dropout:
      return "a supply dropout from " + range;
    case AnomalyKind::gap:
      return "missing sensor data from " + range;
  }
  return {};
}

}  // namespace

std::string_view anomaly_kind_name(AnomalyKind k) noexcept {
  switch (k) {
    case AnomalyKind::spike: return "spike";
    case AnomalyKind::level_shift: return "level_shift";
    case AnomalyKind::dropout: return "dropout";
    case AnomalyKind::gap: return "gap";
  }
  return "spike";
}

AnomalyKind parse_anomaly_kind(std::string_view name) {
  for (auto k : {AnomalyKind::spike, AnomalyKind::level_shift, AnomalyKind::dropout,
                 AnomalyKind::gap}) {
    if (anomaly_kind_name(k) == name) return k;
  }
  throw Error(Errc::InvalidArgument, "unknown anomaly kind '" + std::string(name) + "'");
}

GeneratedSeries generate(const SyntheticSpec& spec) {
  if (spec.length == 0 || !(spec.sample_period > 0) || !(spec.duty_period > 0)) {
    throw Error(Errc::InvalidArgument, "synthetic series needs positive length and periods");
  }
  GeneratedSeries out;
  TimeSeries& ts = out.series;
  ts.channel_id = spec.channel_id;
  ts.unit = spec.unit;
  ts.start_time = spec.start_time;
  ts.sample_period = spec.sample_period;
  ts.values.resize(spec.length);

  Rng rng(spec.seed);
  constexpr double kDay = 86400.0;
  for (std::size_t i = 0; i < spec.length; ++i) {
    const double t = static_cast<double>(i) * spec.sample_period;
    double v = spec.baseline;
    v += spec.daily_amplitude * 0.5 *
         (1.0 + std::sin(2.0 * std::numbers::pi * t / kDay + spec.daily_phase));
    if (spec.duty_fraction > 0) {
      const double phase = std::fmod(t + spec.duty_offset, spec.duty_period) / spec.duty_period;
      if (phase < spec.duty_fraction) v += spec.duty_amplitude;
    }
    if (spec.noise_sigma > 0) v = std::max(0.0, v + spec.noise_sigma * rng.normal());
    ts.values[i] = v;
  }

  for (const auto& a : spec.anomalies) {
    if (a.duration == 0 || a.start + a.duration > spec.length) {
      throw Error(Errc::InvalidArgument, "anomaly falls outside the series");
    }
    for (std::size_t i = a.start; i < a.start + a.duration; ++i) {
      switch (a.kind) {
        case AnomalyKind::spike:
        case AnomalyKind::level_shift: ts.values[i] += a.magnitude; break;
        case AnomalyKind::dropout: ts.values[i] = 0.0; break;
        case AnomalyKind::gap: ts.values[i] = std::numeric_limits<double>::quiet_NaN(); break;
      }
    }
    out.anomalies.push_back({spec.channel_id, a.kind, a.start, a.start + a.duration,
                             ts.time_at(a.start), ts.time_at(a.start + a.duration),
                             a.magnitude});
  }
  return out;
}

std::string_view appliance_name(Appliance a) noexcept {
  switch (a) {
    case Appliance::desktop: return "desktop";
    case Appliance::microwave: return "microwave";
    case Appliance::refrigerator: return "refrigerator";
    case Appliance::water_dispenser: return "water_dispenser";
    case Appliance::coffee_machine: return "coffee_machine";
    case Appliance::kettle: return "kettle";
    case Appliance::printer: return "printer";
  }
  return "desktop";
}

Appliance parse_appliance(std::string_view name) {
  for (Appliance a : kAllAppliances) {
    if (appliance_name(a) == name) return a;
  }
  throw Error(Errc::InvalidArgument, "unknown appliance '" + std::string(name) + "'");
}

SyntheticSpec archetype(Appliance a, std::size_t days, Timestamp start, std::uint64_t seed) {
  SyntheticSpec s;
  s.channel_id = std::string(appliance_name(a));
  s.start_time = start;
  s.length = days * 1440;
  s.seed = seed;
  // Amplitudes in kW. Phases put office-hour peaks around midday.
  const double midday = -std::numbers::pi / 2.0;
  switch (a) {
    case Appliance::desktop:
      s.baseline = 0.01;
      s.daily_amplitude = 0.08;
      s.daily_phase = midday;
      s.duty_period = 86400;
      s.duty_fraction = 0.375;
      s.duty_amplitude = 0.10;
      s.duty_offset = -8 * 3600.0 + 86400;
      break;
    case Appliance::microwave:
      s.baseline = 0.002;
      s.duty_period = 6 * 3600.0;
      s.duty_fraction = 0.02;
      s.duty_amplitude = 1.1;
      s.duty_offset = 1800;
      break;
    case Appliance::refrigerator:
      s.baseline = 0.02;
      s.daily_amplitude = 0.01;
      s.duty_period = 40 * 60.0;
      s.duty_fraction = 0.4;
      s.duty_amplitude = 0.12;
      break;
    case Appliance::water_dispenser:
      s.baseline = 0.01;
      s.daily_amplitude = 0.02;
      s.daily_phase = midday;
      s.duty_period = 90 * 60.0;
      s.duty_fraction = 0.15;
      s.duty_amplitude = 0.5;
      break;
    case Appliance::coffee_machine:
      s.baseline = 0.003;
      s.duty_period = 3 * 3600.0;
      s.duty_fraction = 0.04;
      s.duty_amplitude = 1.2;
      s.duty_offset = 600;
      break;
    case Appliance::kettle:
      s.duty_period = 4 * 3600.0;
      s.duty_fraction = 0.03;
      s.duty_amplitude = 2.0;
      s.duty_offset = 1200;
      break;
    case Appliance::printer:
      s.baseline = 0.01;
      s.daily_amplitude = 0.005;
      s.daily_phase = midday;
      s.duty_period = 2 * 3600.0;
      s.duty_fraction = 0.05;
      s.duty_amplitude = 0.4;
      s.duty_offset = 2400;
      break;
  }
  return s;
}

std::vector<GeneratedSeries> make_corpus(const CorpusSpec& spec) {
  if (spec.days == 0) throw Error(Errc::InvalidArgument, "corpus needs at least one day");
  std::vector<GeneratedSeries> out;
  Rng placement(spec.seed);
  constexpr std::size_t kDaySamples = 1440;
  constexpr std::size_t kEdge = 120;  // keep anomalies two hours off day boundaries
  for (std::size_t idx = 0; idx < spec.appliances.size(); ++idx) {
    SyntheticSpec s = archetype(spec.appliances[idx], spec.days, spec.start,
                                spec.seed * 1000003ULL + idx);
    s.noise_sigma = spec.noise_sigma;
    for (std::size_t day = 0; day < spec.days; ++day) {
      for (std::size_t k = 0; k < spec.anomalies_per_day; ++k) {
        const auto kind_pick = placement.below(3);
        AnomalySpec a;
        a.kind = kind_pick == 0 ? AnomalyKind::spike
                 : kind_pick == 1 ? AnomalyKind::level_shift
                                  : AnomalyKind::dropout;
        a.duration = a.kind == AnomalyKind::spike ? 1 + placement.below(3)
                     : a.kind == AnomalyKind::level_shift ? 60 + placement.below(120)
                                                          : 30 + placement.below(60);
        a.magnitude = a.kind == AnomalyKind::spike ? 3.0 + placement.uniform() * 2.0
                      : a.kind == AnomalyKind::level_shift ? 0.3 + placement.uniform() * 0.4
                                                           : 0.0;
        const std::size_t span = kDaySamples - 2 * kEdge - a.duration;
        a.start = day * kDaySamples + kEdge + placement.below(span);
        s.anomalies.push_back(a);
      }
    }
    std::sort(s.anomalies.begin(), s.anomalies.end(),
              [](const AnomalySpec& x, const AnomalySpec& y) { return x.start < y.start; });
    out.push_back(generate(s));
  }
  return out;
}

std::string ground_truth_to_jsonl(const std::vector<AnomalyRecord>& records) {
  std::string out;
  for (const auto& a : records) {
    ojson j;
    j["channel"] = a.channel;
    j["kind"] = anomaly_kind_name(a.kind);
    j["start_index"] = a.start_index;
    j["end_index"] = a.end_index;
    j["start_time"] = format_timestamp(a.start_time);
    j["end_time"] = format_timestamp(a.end_time);
    j["magnitude"] = a.magnitude;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<AnomalyRecord> read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  std::vector<AnomalyRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = ojson::parse(line);
      AnomalyRecord a;
      a.channel = j.at("channel").get<std::string>();
      a.kind = parse_anomaly_kind(j.at("kind").get<std::string>());
      a.start_index = j.at("start_index").get<std::size_t>();
      a.end_index = j.at("end_index").get<std::size_t>();
      a.start_time = parse_timestamp(j.at("start_time").get<std::string>());
      a.end_time = parse_timestamp(j.at("end_time").get<std::string>());
      a.magnitude = j.at("magnitude").get<double>();
      out.push_back(std::move(a));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::SchemaMismatch,
                  "ground truth line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<AnomalyRecord> anomalies_in_window(const std::vector<AnomalyRecord>& truth,
                                               const std::string& channel,
                                               Timestamp window_start, double seconds) {
  const Timestamp window_end =
      window_start + std::chrono::seconds{static_cast<long long>(std::llround(seconds))};
  std::vector<AnomalyRecord> out;
  for (const auto& a : truth) {
    if (a.channel == channel && a.start_time < window_end && a.end_time > window_start) {
      out.push_back(a);
    }
  }
  return out;
}

std::string synthetic_answer(AnalysisType type, const WindowMeta& meta,
                             const std::vector<AnomalyRecord>& anomalies) {
  const std::string day = meta.window_start.substr(0, 10);
  const std::string& ch = meta.channel;
  std::string events;
  for (std::size_t i = 0; i < anomalies.size(); ++i) {
    if (i) events += i + 1 == anomalies.size() ? " and " : ", ";
    events += describe(anomalies[i]);
  }
  switch (type) {
    case AnalysisType::Monitoring:
      if (anomalies.empty()) {
        return "The " + ch + " follows its regular daily cycle on " + day +
               " with no irregular events.";
      }
      return "The " + ch + " follows its regular daily cycle on " + day + " except for " +
             events + ".";
    case AnalysisType::AnomalyDetection:
      if (anomalies.empty()) return "No anomalies detected in the " + ch + " data on " + day + ".";
      return "Detected " + std::to_string(anomalies.size()) + " anomal" +
             (anomalies.size() == 1 ? "y" : "ies") + " in the " + ch + " data on " + day +
             ": " + events + ".";
    case AnalysisType::Recommendation:
      if (anomalies.empty()) {
        return "Keep the current operating schedule for the " + ch +
               " and shift discretionary use to off-peak hours.";
      }
      return "Inspect the " + ch + " for " + events +
             ", check its power supply and schedule maintenance before peak hours.";
  }
  return {};
}

Localization localize(const Scalogram& s, std::size_t sample, std::size_t hf_rows) {
  if (hf_rows == 0 || hf_rows > s.rows || sample >= s.cols) {
    throw Error(Errc::InvalidArgument, "localization rows or sample out of range");
  }
  std::vector<double> column(s.cols, 0.0);
  for (std::size_t r = 0; r < hf_rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) column[c] += s.power_at(r, c);
  }
  const std::size_t near = s.coi_halfwidth[hf_rows - 1];
  const std::size_t far = 4 * near;
  const auto dist = [sample](std::size_t c) { return c > sample ? c - sample : sample - c; };

  Localization out;
  std::vector<double> off;
  for (std::size_t c = 0; c < s.cols; ++c) {
    if (dist(c) <= near) out.peak = std::max(out.peak, column[c]);
    if (dist(c) > far && s.valid(hf_rows - 1, c)) off.push_back(column[c]);
  }
  if (off.empty()) throw Error(Errc::InvalidArgument, "no off-anomaly columns to compare");
  std::sort(off.begin(), off.end());
  out.off_median = off.size() % 2 ? off[off.size() / 2]
                                  : 0.5 * (off[off.size() / 2 - 1] + off[off.size() / 2]);
  out.ratio = out.off_median > 0 ? out.peak / out.off_median
                                 : std::numeric_limits<double>::infinity();
  return out;
}

SpikeFixture spike_localization_fixture() {
  SpikeFixture f;
  f.series = archetype(Appliance::refrigerator, 1, parse_timestamp("2023-07-01T00:00:00Z"), 11);
  f.series.noise_sigma = 0.01;
  f.series.anomalies = {{AnomalyKind::spike, 700, 2, 2.0}};
  return f;
}

}  // namespace eviz
