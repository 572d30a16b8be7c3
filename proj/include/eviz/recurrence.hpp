#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace eviz {

struct EmbeddingSpec {
  std::size_t dimension = 1;  // m
  std::size_t delay = 1;      // tau, in samples
};

/// Delay-embedded state vectors stored contiguously, `dimension` values each.
class StateSet {
 public:
  StateSet() = default;
  StateSet(std::size_t dimension, std::vector<double> flat);

  std::size_t size() const noexcept { return dimension_ ? flat_.size() / dimension_ : 0; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::span<const double> operator[](std::size_t k) const {
    return {flat_.data() + k * dimension_, dimension_};
  }
  const std::vector<double>& flat() const noexcept { return flat_; }

 private:
  std::size_t dimension_ = 0;
  std::vector<double> flat_;
};

/// Vector k = (x[k], x[k+tau], ..., x[k+(m-1)tau]); N-(m-1)tau vectors.
StateSet embed(std::span<const double> samples, const EmbeddingSpec& spec);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

struct FixedEpsilon {
  double epsilon;
};
struct TargetRate {
  double rate;
};
using ThresholdPolicy = std::variant<FixedEpsilon, TargetRate>;

struct RecurrenceMatrix {
  std::size_t n = 0;
  std::vector<std::uint8_t> bits;  // row-major n*n, 0 or 1
  double epsilon = 0;
  double recurrence_rate = 0;
  EmbeddingSpec embedding;

  bool at(std::size_t i, std::size_t j) const { return bits[i * n + j] != 0; }
};

/// bits[i][j] = 1 iff dist(state_i, state_j) <= epsilon. Ties count as
/// recurrent, so a solved epsilon always includes the pair that set it.
RecurrenceMatrix recurrence_matrix(const StateSet& states, const ThresholdPolicy& threshold,
                                   const EmbeddingSpec& embedding = {});

/// Smallest pairwise distance epsilon whose recurrence rate (diagonal
/// included, over all N^2 cells) reaches `target_rate`.
double solve_epsilon(const StateSet& states, double target_rate);

double recurrence_rate(const StateSet& states, double epsilon);

// Run-length-encoded dump. Little-endian layout:
//   char[4] "EVRP", u32 version (1), u32 n, f64 epsilon, f64 rate,
//   u32 dimension, u32 delay, u32 run_count, u32 runs[run_count]
// Runs alternate 0s and 1s over the row-major bit stream, starting with 0s
// (a leading run may be empty).
std::vector<std::uint8_t> encode_recurrence_dump(const RecurrenceMatrix& m);
RecurrenceMatrix decode_recurrence_dump(std::span<const std::uint8_t> bytes);
void write_recurrence_dump(const RecurrenceMatrix& m, const std::string& path);

}  // namespace eviz
