#include "eviz/recurrence.hpp"

#include <algorithm>
#include <cmath>

#include "byteio.hpp"
#include "eviz/error.hpp"

namespace eviz {

namespace {

void require_states(const StateSet& states) {
  if (states.size() < 2) {
    throw Error(Errc::InvalidArgument, "recurrence needs at least two state vectors");
  }
}

double rate_of(std::size_t ones, std::size_t n) {
  return static_cast<double>(ones) / static_cast<double>(n * n);
}

std::vector<double> upper_distances(const StateSet& states) {
  const std::size_t n = states.size();
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d.push_back(euclidean_distance(states[i], states[j]));
  }
  return d;
}

}  // namespace

StateSet::StateSet(std::size_t dimension, std::vector<double> flat)
    : dimension_(dimension), flat_(std::move(flat)) {
  if (dimension_ == 0 || flat_.size() % dimension_ != 0) {
    throw Error(Errc::InvalidArgument, "state data is not a whole number of vectors");
  }
}

StateSet embed(std::span<const double> samples, const EmbeddingSpec& spec) {
  if (spec.dimension == 0 || spec.delay == 0) {
    throw Error(Errc::InvalidArgument, "embedding dimension and delay must be >= 1");
  }
  const std::size_t reach = (spec.dimension - 1) * spec.delay;
  if (reach >= samples.size()) {
    throw Error(Errc::EmbeddingTooLong,
                "(m-1)*tau = " + std::to_string(reach) + " does not fit a window of " +
                    std::to_string(samples.size()));
  }
  const std::size_t count = samples.size() - reach;
  std::vector<double> flat;
  flat.reserve(count * spec.dimension);
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t d = 0; d < spec.dimension; ++d) flat.push_back(samples[k + d * spec.delay]);
  }
  return StateSet(spec.dimension, std::move(flat));
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

double recurrence_rate(const StateSet& states, double epsilon) {
  require_states(states);
  const std::size_t n = states.size();
  std::size_t ones = n;
  for (double d : upper_distances(states)) ones += d <= epsilon ? 2 : 0;
  return rate_of(ones, n);
}

double solve_epsilon(const StateSet& states, double target_rate) {
  require_states(states);
  if (!(target_rate > 0.0 && target_rate <= 1.0)) {
    throw Error(Errc::DegenerateThreshold,
                "target recurrence rate must lie in (0, 1]");
  }
  const std::size_t n = states.size();
  auto distances = upper_distances(states);
  std::sort(distances.begin(), distances.end());

  // Smallest pair count c with rate(N + 2c) >= target.
  std::size_t pairs = 0;
  while (pairs < distances.size() && rate_of(n + 2 * pairs, n) < target_rate) ++pairs;
  if (rate_of(n + 2 * pairs, n) < target_rate) {
    throw Error(Errc::DegenerateThreshold, "target recurrence rate is unreachable");
  }
  return pairs == 0 ? 0.0 : distances[pairs - 1];
}

RecurrenceMatrix recurrence_matrix(const StateSet& states, const ThresholdPolicy& threshold,
                                   const EmbeddingSpec& embedding) {
  require_states(states);
  double epsilon = 0.0;
  if (const auto* fixed = std::get_if<FixedEpsilon>(&threshold)) {
    if (!(fixed->epsilon >= 0.0)) {
      throw Error(Errc::DegenerateThreshold, "epsilon must be a nonnegative number");
    }
    epsilon = fixed->epsilon;
  } else {
    epsilon = solve_epsilon(states, std::get<TargetRate>(threshold).rate);
  }

  RecurrenceMatrix m;
  m.n = states.size();
  m.epsilon = epsilon;
  m.embedding = embedding;
  m.bits.assign(m.n * m.n, 0);
  std::size_t ones = 0;
  for (std::size_t i = 0; i < m.n; ++i) {
    m.bits[i * m.n + i] = 1;
    ++ones;
    for (std::size_t j = i + 1; j < m.n; ++j) {
      if (euclidean_distance(states[i], states[j]) <= epsilon) {
        m.bits[i * m.n + j] = 1;
        m.bits[j * m.n + i] = 1;
        ones += 2;
      }
    }
  }
  m.recurrence_rate = rate_of(ones, m.n);
  return m;
}

std::vector<std::uint8_t> encode_recurrence_dump(const RecurrenceMatrix& m) {
  std::vector<std::uint32_t> runs;
  std::uint8_t current = 0;
  std::uint32_t length = 0;
  for (std::uint8_t bit : m.bits) {
    if (bit != current) {
      runs.push_back(length);
      current = bit;
      length = 0;
    }
    ++length;
  }
  runs.push_back(length);

  detail::ByteWriter w;
  w.bytes("EVRP", 4);
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(m.n));
  w.f64(m.epsilon);
  w.f64(m.recurrence_rate);
  w.u32(static_cast<std::uint32_t>(m.embedding.dimension));
  w.u32(static_cast<std::uint32_t>(m.embedding.delay));
  w.u32(static_cast<std::uint32_t>(runs.size()));
  for (auto r : runs) w.u32(r);
  return w.take();
}

RecurrenceMatrix decode_recurrence_dump(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic("EVRP");
  if (r.u32() != 1) throw Error(Errc::SchemaMismatch, "unsupported recurrence dump version");
  RecurrenceMatrix m;
  m.n = r.u32();
  m.epsilon = r.f64();
  m.recurrence_rate = r.f64();
  m.embedding.dimension = r.u32();
  m.embedding.delay = r.u32();
  const std::uint32_t run_count = r.u32();
  m.bits.reserve(m.n * m.n);
  std::uint8_t current = 0;
  for (std::uint32_t i = 0; i < run_count; ++i) {
    const std::uint32_t len = r.u32();
    if (m.bits.size() + len > m.n * m.n) throw Error(Errc::SchemaMismatch, "run overflow");
    m.bits.insert(m.bits.end(), len, current);
    current ^= 1;
  }
  if (m.bits.size() != m.n * m.n || !r.done()) {
    throw Error(Errc::SchemaMismatch, "recurrence dump size mismatch");
  }
  return m;
}

void write_recurrence_dump(const RecurrenceMatrix& m, const std::string& path) {
  detail::write_file(path, encode_recurrence_dump(m));
}

}  // namespace eviz
