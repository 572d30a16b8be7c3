#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "eviz/dataset.hpp"
#include "eviz/ingest.hpp"
#include "eviz/wavelet.hpp"

namespace eviz {

enum class AnomalyKind {
  spike,        // adds magnitude over the range
  level_shift,  // adds magnitude over a long range
  dropout,      // forces the range to zero
  gap,          // removes the samples (NaN, empty CSV cells)
};

std::string_view anomaly_kind_name(AnomalyKind k) noexcept;
AnomalyKind parse_anomaly_kind(std::string_view name);

struct AnomalySpec {
  AnomalyKind kind = AnomalyKind::spike;
  std::size_t start = 0;     // sample index
  std::size_t duration = 1;  // samples
  double magnitude = 0.0;
};

/// Daily sinusoid plus a duty-cycle square wave plus white noise.
struct SyntheticSpec {
  std::string channel_id = "appliance";
  Unit unit = Unit::kW;
  Timestamp start_time{};
  double sample_period = 60.0;
  std::size_t length = 1440;

  double baseline = 0.0;
  double daily_amplitude = 0.0;  // peak-to-peak of the 24 h sinusoid
  double daily_phase = 0.0;      // radians
  double duty_period = 3600.0;   // seconds
  double duty_fraction = 0.0;    // 0 disables the square wave
  double duty_amplitude = 0.0;
  double duty_offset = 0.0;      // seconds

  double noise_sigma = 0.0;
  std::vector<AnomalySpec> anomalies;
  std::uint64_t seed = 0;
};

/// Ground-truth entry; sample range is [start_index, end_index).
struct AnomalyRecord {
  std::string channel;
  AnomalyKind kind = AnomalyKind::spike;
  std::size_t start_index = 0;
  std::size_t end_index = 0;
  Timestamp start_time{};
  Timestamp end_time{};
  double magnitude = 0.0;

  friend bool operator==(const AnomalyRecord&, const AnomalyRecord&) = default;
};

struct GeneratedSeries {
  TimeSeries series;
  std::vector<AnomalyRecord> anomalies;
};

/// Pure function of `spec`: same spec, same samples and anomaly list.
/// Values are clamped at zero after noise is added.
GeneratedSeries generate(const SyntheticSpec& spec);

/// Appliance archetypes from the monitored facility.
enum class Appliance {
  desktop,
  microwave,
  refrigerator,
  water_dispenser,
  coffee_machine,
  kettle,
  printer,
};

inline constexpr Appliance kAllAppliances[] = {
    Appliance::desktop,        Appliance::microwave, Appliance::refrigerator,
    Appliance::water_dispenser, Appliance::coffee_machine, Appliance::kettle,
    Appliance::printer};

std::string_view appliance_name(Appliance a) noexcept;
Appliance parse_appliance(std::string_view name);

/// Base pattern for an appliance, no anomalies, `days` days at 1 min.
SyntheticSpec archetype(Appliance a, std::size_t days, Timestamp start, std::uint64_t seed);

struct CorpusSpec {
  std::vector<Appliance> appliances{std::begin(kAllAppliances), std::end(kAllAppliances)};
  std::size_t days = 2;
  Timestamp start{};
  double noise_sigma = 0.01;
  std::size_t anomalies_per_day = 1;
  std::uint64_t seed = 7;
};

/// One series per appliance with seeded spike, level-shift and dropout
/// anomalies placed away from day boundaries.
std::vector<GeneratedSeries> make_corpus(const CorpusSpec& spec);

std::string ground_truth_to_jsonl(const std::vector<AnomalyRecord>& records);
std::vector<AnomalyRecord> read_ground_truth(const std::filesystem::path& path);

/// Anomalies of `channel` overlapping [window_start, window_start + seconds).
std::vector<AnomalyRecord> anomalies_in_window(const std::vector<AnomalyRecord>& truth,
                                               const std::string& channel,
                                               Timestamp window_start, double seconds);

/// Templated reference answer built from injected-anomaly metadata.
std::string synthetic_answer(AnalysisType type, const WindowMeta& meta,
                             const std::vector<AnomalyRecord>& anomalies);

/// High-frequency power around `sample` versus the median elsewhere.
struct Localization {
  double peak = 0;        // max summed power within the near radius of sample
  double off_median = 0;  // median summed power outside the far radius
  double ratio = 0;
};

/// Sums power over the `hf_rows` smallest scales per column. The near radius
/// is the cone-of-influence half-width of the largest of those scales; the
/// far radius is four times that. Off-anomaly columns must also lie outside
/// the cone of influence.
Localization localize(const Scalogram& s, std::size_t sample, std::size_t hf_rows);

/// One-day refrigerator series with a single short spike, used to check that
/// transients stand out in the small-scale rows of the scalogram.
struct SpikeFixture {
  SyntheticSpec series;
  std::size_t high_frequency_rows = 8;  // smallest scales of the default grid
};
SpikeFixture spike_localization_fixture();

/// Minimum peak / off-anomaly-median ratio the spike fixture must reach.
inline constexpr double kSpikeLocalizationFactor = 10.0;

}  // namespace eviz
