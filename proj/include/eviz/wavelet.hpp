#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace eviz {

struct MorletParams {
  double omega0 = 6.0;  // central angular frequency, rad per unit of wavelet time
  // Subtracts exp(-omega0^2/2) from the carrier so the wavelet has exactly zero
  // mean. Off by default to match the plain Gabor-style definition.
  bool admissibility_correction = false;
};

/// pi^(-1/4) * exp(i*omega0*t) * exp(-t^2/2)
std::complex<double> morlet(double t, const MorletParams& params = {});

enum class ScaleSpacing { log, linear };

/// Scales are measured in samples: scale a stretches the mother wavelet so
/// that one unit of wavelet time spans a samples.
struct ScaleGrid {
  std::vector<double> scales;  // strictly increasing, > 0
  ScaleSpacing spacing = ScaleSpacing::log;

  std::size_t count() const noexcept { return scales.size(); }
};

ScaleGrid make_scale_grid(double min_scale, double max_scale, std::size_t count,
                          ScaleSpacing spacing = ScaleSpacing::log);

/// Default grid for a window of `window_samples` samples: `count` log-spaced
/// scales whose inverse-scale pseudo-frequencies run from fs/4 down to
/// 2/(window duration), i.e. scales 4 .. window_samples/2.
ScaleGrid default_scale_grid(std::size_t window_samples, std::size_t count = 64);

enum class FrequencyMode {
  inverse_scale,    // f = fs / a
  center_corrected  // f = (omega0 / 2pi) * fs / a
};

double scale_to_frequency(double scale, double sample_rate, const MorletParams& params,
                          FrequencyMode mode = FrequencyMode::inverse_scale);

/// Time-scale decomposition of one window.
///
/// Grids are row-major with one row per scale (row 0 = smallest scale) and
/// one column per sample. `coi_halfwidth[i]` is the number of columns at each
/// edge of row i that sit inside the cone of influence.
struct Scalogram {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> power;
  std::vector<double> coeffs_real;
  std::vector<double> coeffs_imag;
  ScaleGrid scale_grid;
  double sample_rate = 1.0;
  std::vector<double> frequency_map;
  std::vector<std::size_t> coi_halfwidth;

  double power_at(std::size_t row, std::size_t col) const { return power[row * cols + col]; }
  std::complex<double> coeff_at(std::size_t row, std::size_t col) const {
    return {coeffs_real[row * cols + col], coeffs_imag[row * cols + col]};
  }
  /// False inside the cone of influence of row `row`.
  bool valid(std::size_t row, std::size_t col) const;
};

enum class CwtMethod { fft, direct };

struct CwtOptions {
  MorletParams morlet;
  CwtMethod method = CwtMethod::fft;
  FrequencyMode frequency_mode = FrequencyMode::inverse_scale;
};

/// C(a, b) = (1/sqrt(a)) * sum_n x[n] * conj(psi((n - b)/a)) * dt with dt =
/// 1/fs, evaluated for every scale a of the grid and every sample b.
///
/// `direct` evaluates the sum literally. `fft` evaluates the same finite sum
/// as a linear convolution, zero-padded to the next power of two >= 2N-1, so
/// the two agree to rounding error over the whole grid.
Scalogram cwt(std::span<const double> samples, double sample_rate, const ScaleGrid& grid,
              const CwtOptions& options = {});

/// Fills `power` with re^2 + im^2 of the coefficient grids.
Scalogram scalogram_power(Scalogram s);

/// Half-width, in samples, of the cone of influence at `scale`: ceil(sqrt(2)*a).
std::size_t cone_of_influence(double scale);

// Binary debugging dump. Little-endian layout:
//   char[4] "EVSG", u32 version (1), u32 rows, u32 cols, f64 sample_rate,
//   f64 scales[rows], f32 power[rows*cols] (row-major)
std::vector<std::uint8_t> encode_scalogram_dump(const Scalogram& s);
void write_scalogram_dump(const Scalogram& s, const std::string& path);

struct ScalogramDump {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double sample_rate = 0;
  std::vector<double> scales;
  std::vector<float> power;
};
ScalogramDump decode_scalogram_dump(std::span<const std::uint8_t> bytes);

}  // namespace eviz
