#include <doctest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "eviz/error.hpp"
#include "eviz/fixtures.hpp"
#include "eviz/ingest.hpp"

using namespace eviz;

namespace {

std::vector<TimeSeries> parse(const std::string& text, ColumnSpec spec = {}) {
  std::istringstream in(text);
  return parse_csv(in, spec);
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::InvalidArgument;
}

TimeSeries series(std::vector<double> v, double period = 60.0) {
  TimeSeries ts;
  ts.channel_id = "c";
  ts.sample_period = period;
  ts.start_time = parse_timestamp("2023-07-01T00:00:00Z");
  ts.values = std::move(v);
  return ts;
}

}  // namespace

TEST_CASE("timestamps") {
  const auto t = parse_timestamp("2023-07-01T12:34:56Z");
  CHECK(format_timestamp(t) == "2023-07-01T12:34:56Z");
  CHECK(format_timestamp_compact(t) == "20230701T123456Z");
  CHECK(parse_timestamp("2023-07-01 12:34:56") == t);
  CHECK(parse_timestamp("2024-02-29T00:00:00Z").time_since_epoch().count() == 1709164800);
  CHECK_THROWS_AS(parse_timestamp("2023-07-01T12:34:56.5Z"), Error);
  CHECK_THROWS_AS(parse_timestamp("2023-13-01T00:00:00Z"), Error);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), Error);
}

TEST_CASE("units") {
  CHECK(parse_unit("kW") == Unit::kW);
  CHECK(parse_unit("percent_rh") == Unit::percent_rh);
  CHECK(unit_name(Unit::m_per_s) == "m_per_s");
  CHECK(code_of([] { parse_unit("furlongs"); }) == Errc::UnknownUnit);
}

TEST_CASE("parse a small csv") {
  const auto s = parse(
      "timestamp,kettle[kW],humidity[percent_rh]\n"
      "2023-07-01T00:00:00Z,0.1,40\n"
      "2023-07-01T00:01:00Z,0.2,41\n"
      "2023-07-01T00:02:00Z,0.3,42\n");
  REQUIRE(s.size() == 2);
  CHECK(s[0].channel_id == "kettle");
  CHECK(s[0].unit == Unit::kW);
  CHECK(s[1].unit == Unit::percent_rh);
  CHECK(s[0].values == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(s[0].start_time == parse_timestamp("2023-07-01T00:00:00Z"));
  CHECK(s[0].time_at(2) == parse_timestamp("2023-07-01T00:02:00Z"));
}

TEST_CASE("csv errors") {
  CHECK(code_of([] { parse(""); }) == Errc::MalformedRow);
  CHECK(code_of([] { parse("timestamp,a\n"); }) == Errc::MalformedRow);
  CHECK(code_of([] {
          parse("timestamp,a\n2023-07-01T00:00:00Z,1\n2023-07-01T00:00:00Z,2\n");
        }) == Errc::NonMonotonicTimestamps);
  CHECK(code_of([] { parse("timestamp,a\n2023-07-01T00:00:00Z,1,3\n"); }) == Errc::MalformedRow);
  CHECK(code_of([] { parse("timestamp,a\n2023-07-01T00:00:00Z,abc\n"); }) == Errc::MalformedRow);
  CHECK(code_of([] { parse("timestamp,a\n2023-07-01T00:00:30Z,1\n2023-07-01T00:01:00Z,1\n"
                           "2023-07-01T00:01:45Z,1\n"); }) == Errc::MalformedRow);
  CHECK(code_of([] { parse("timestamp,a[parsecs]\n2023-07-01T00:00:00Z,1\n"); }) ==
        Errc::UnknownUnit);
  CHECK(code_of([] { parse_csv_file("/nonexistent/file.csv", {}); }) == Errc::Io);
}

TEST_CASE("missing cells and rows become NaN") {
  const auto s = parse(
      "timestamp,a\n"
      "2023-07-01T00:00:00Z,1\n"
      "2023-07-01T00:01:00Z,\n"
      "2023-07-01T00:03:00Z,4\n");
  REQUIRE(s[0].size() == 4);
  CHECK(std::isnan(s[0].values[1]));
  CHECK(std::isnan(s[0].values[2]));
  const auto filled = fill_gaps(s[0], 15 * 60);
  CHECK(filled.values == std::vector<double>{1, 2, 3, 4});
  CHECK_FALSE(filled.is_unrecoverable(1));
}

TEST_CASE("seven appliances for one day") {
  CorpusSpec spec;
  spec.days = 1;
  spec.start = parse_timestamp("2023-07-01T00:00:00Z");
  std::vector<TimeSeries> all;
  for (auto& g : make_corpus(spec)) all.push_back(g.series);
  std::ostringstream out;
  write_csv(out, all);
  const auto back = parse(out.str());
  REQUIRE(back.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(back[i].size() == 1440);
    CHECK(back[i].channel_id == all[i].channel_id);
    CHECK(back[i].values == all[i].values);
  }
}

TEST_CASE("gap filling") {
  auto mid = series({2.0, NAN, 4.0});
  CHECK(fill_gaps(mid, 900).values == std::vector<double>{2, 3, 4});

  const auto clean = series({1, 5, 2, 8});
  const auto same = fill_gaps(clean, 900);
  CHECK(same.values == clean.values);
  CHECK_FALSE(same.is_unrecoverable(0));

  // 20 missing minutes is longer than the 15 min limit
  std::vector<double> v(60, 1.0);
  for (std::size_t i = 20; i < 40; ++i) v[i] = NAN;
  v[10] = 7.0;
  const auto long_gap = fill_gaps(series(v), 900);
  for (double x : long_gap.values) CHECK(std::isfinite(x));
  CHECK(long_gap.values[10] == 7.0);
  CHECK(long_gap.is_unrecoverable(25));
  CHECK_FALSE(long_gap.is_unrecoverable(19));
  const auto w = make_windows(long_gap, 10 * 60, 10 * 60);
  REQUIRE(w.size() == 4);
  CHECK(w[0].start_index == 0);
  CHECK(w[1].start_index == 10);
  CHECK(w[2].start_index == 40);
  CHECK(w[3].start_index == 50);

  // leading run has no left anchor
  const auto lead = fill_gaps(series({NAN, 3.0, 4.0}), 900);
  CHECK(lead.is_unrecoverable(0));
  CHECK(std::isfinite(lead.values[0]));
}

TEST_CASE("windowing") {
  const auto day2 = series(std::vector<double>(2880, 1.0));
  CHECK(make_windows(day2, 86400, 86400).size() == 2);
  const auto day15 = series(std::vector<double>(2160, 1.0));
  CHECK(make_windows(day15, 86400, 86400).size() == 1);
  const auto day1 = series(std::vector<double>(1440, 1.0));
  const auto w = make_windows(day1, 86400, 86400);
  REQUIRE(w.size() == 1);
  CHECK(w[0].samples.size() == 1440);
  CHECK(code_of([&] { make_windows(day15, 3 * 86400, 86400); }) == Errc::WindowLongerThanSeries);

  std::vector<double> ramp(500);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = double(i);
  const auto ws = make_windows(series(ramp), 60 * 60, 60 * 60);
  std::vector<double> joined;
  for (const auto& x : ws) joined.insert(joined.end(), x.samples.begin(), x.samples.end());
  CHECK(std::equal(joined.begin(), joined.end(), ramp.begin()));
  CHECK(ws[1].start_time == day1.start_time + std::chrono::seconds(3600));

  CHECK(make_windows(series(ramp), 60 * 60, 30 * 60).size() == 15);
}

TEST_CASE("min-max normalization") {
  Window w;
  w.samples = {2, 4, 6};
  CHECK(normalize_minmax(w).samples == std::vector<double>{0, 0.5, 1});
  w.samples = {5, 5, 5};
  CHECK(normalize_minmax(w).samples == std::vector<double>{0.5, 0.5, 0.5});
  w.samples = {0, 0.25, 1, 0.5};
  CHECK(normalize_minmax(w).samples == w.samples);
  w.samples = {3.7, -1.2, 9.9, 0.4};
  const auto once = normalize_minmax(w);
  CHECK(once.normalized);
  CHECK(normalize_minmax(once).samples == once.samples);
}

TEST_CASE("full ingest pipeline") {
  std::ostringstream csv;
  csv << "timestamp,a[kW]\n";
  for (int i = 0; i < 2880; ++i) {
    csv << format_timestamp(parse_timestamp("2023-07-01T00:00:00Z") + std::chrono::minutes(i))
        << ',' << (i % 97 == 5 ? std::string("") : std::to_string(std::sin(i * 0.01) + 2)) << '\n';
  }
  std::istringstream a(csv.str()), b(csv.str());
  const auto wa = ingest_windows(a, {});
  const auto wb = ingest_windows(b, {});
  REQUIRE(wa.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(wa[i].samples == wb[i].samples);
    CHECK(*std::min_element(wa[i].samples.begin(), wa[i].samples.end()) == 0.0);
    CHECK(*std::max_element(wa[i].samples.begin(), wa[i].samples.end()) == 1.0);
  }
}
