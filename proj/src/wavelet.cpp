#include "eviz/wavelet.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "byteio.hpp"
#include "eviz/error.hpp"

namespace eviz {

namespace {

const double kMorletNorm = std::pow(std::numbers::pi, -0.25);

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// FFTW's planner keeps global state; plan creation and destruction must be
// serialized. Execution on distinct buffers is thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftBuffer {
 public:
  explicit FftBuffer(std::size_t n)
      : n_(n), data_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data_) throw std::bad_alloc();
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_1d(static_cast<int>(n), data_, data_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_1d(static_cast<int>(n), data_, data_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftBuffer() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(backward_);
    }
    fftw_free(data_);
  }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(data_); }
  std::size_t size() const { return n_; }
  void forward() { fftw_execute(forward_); }
  void backward() { fftw_execute(backward_); }

 private:
  std::size_t n_;
  fftw_complex* data_;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

void validate(std::span<const double> samples, double sample_rate, const ScaleGrid& grid) {
  if (samples.empty()) throw Error(Errc::EmptyWindow, "cwt of an empty window");
  if (samples.size() < 8) {
    throw Error(Errc::EmptyWindow, "cwt needs at least 8 samples, got " +
                                       std::to_string(samples.size()));
  }
  if (!(sample_rate > 0)) throw Error(Errc::InvalidArgument, "sample rate must be positive");
  if (grid.scales.empty()) throw Error(Errc::InvalidArgument, "empty scale grid");
  for (std::size_t i = 0; i < grid.scales.size(); ++i) {
    if (!(grid.scales[i] >= 1.0)) {
      throw Error(Errc::DegenerateScale,
                  "scale " + std::to_string(grid.scales[i]) + " is below one sample");
    }
    if (i > 0 && !(grid.scales[i] > grid.scales[i - 1])) {
      throw Error(Errc::InvalidArgument, "scales must be strictly increasing");
    }
  }
}

// conj(psi(m / a)) for m = -(n-1) .. n-1, stored at index m + n - 1.
std::vector<std::complex<double>> conj_kernel(std::size_t n, double scale,
                                              const MorletParams& params) {
  std::vector<std::complex<double>> k(2 * n - 1);
  const auto offset = static_cast<std::ptrdiff_t>(n) - 1;
  for (std::ptrdiff_t m = -offset; m <= offset; ++m) {
    k[static_cast<std::size_t>(m + offset)] =
        std::conj(morlet(static_cast<double>(m) / scale, params));
  }
  return k;
}

void cwt_direct(std::span<const double> x, const ScaleGrid& grid, const MorletParams& params,
                double dt, Scalogram& out) {
  const std::size_t n = x.size();
  const auto offset = static_cast<std::ptrdiff_t>(n) - 1;
  for (std::size_t row = 0; row < grid.count(); ++row) {
    const double a = grid.scales[row];
    const auto kernel = conj_kernel(n, a, params);
    const double weight = dt / std::sqrt(a);
    for (std::size_t b = 0; b < n; ++b) {
      std::complex<double> acc{0.0, 0.0};
      for (std::size_t i = 0; i < n; ++i) {
        const auto m = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(b);
        acc += x[i] * kernel[static_cast<std::size_t>(m + offset)];
      }
      out.coeffs_real[row * n + b] = weight * acc.real();
      out.coeffs_imag[row * n + b] = weight * acc.imag();
    }
  }
}

void cwt_fft(std::span<const double> x, const ScaleGrid& grid, const MorletParams& params,
             double dt, Scalogram& out) {
  const std::size_t n = x.size();
  const std::size_t len = next_pow2(2 * n - 1);
  FftBuffer work(len);
  auto* buf = work.data();

  for (std::size_t i = 0; i < len; ++i) buf[i] = i < n ? x[i] : 0.0;
  work.forward();
  const std::vector<std::complex<double>> signal_spectrum(buf, buf + len);

  // C(b) = sum_i x[i] g[i - b] with g[m] = conj(psi(m/a)) is the linear
  // convolution of x with h[k] = g[-k]; h is laid out circularly.
  const auto offset = static_cast<std::ptrdiff_t>(n) - 1;
  for (std::size_t row = 0; row < grid.count(); ++row) {
    const double a = grid.scales[row];
    const auto kernel = conj_kernel(n, a, params);
    for (std::size_t i = 0; i < len; ++i) buf[i] = 0.0;
    for (std::ptrdiff_t k = -offset; k <= offset; ++k) {
      const auto slot = static_cast<std::size_t>((k + static_cast<std::ptrdiff_t>(len)) %
                                                 static_cast<std::ptrdiff_t>(len));
      buf[slot] = kernel[static_cast<std::size_t>(-k + offset)];
    }
    work.forward();
    for (std::size_t i = 0; i < len; ++i) buf[i] *= signal_spectrum[i];
    work.backward();
    const double weight = dt / std::sqrt(a) / static_cast<double>(len);
    for (std::size_t b = 0; b < n; ++b) {
      out.coeffs_real[row * n + b] = weight * buf[b].real();
      out.coeffs_imag[row * n + b] = weight * buf[b].imag();
    }
  }
}

}  // namespace

std::complex<double> morlet(double t, const MorletParams& params) {
  const double envelope = kMorletNorm * std::exp(-0.5 * t * t);
  std::complex<double> carrier{std::cos(params.omega0 * t), std::sin(params.omega0 * t)};
  if (params.admissibility_correction) {
    carrier -= std::exp(-0.5 * params.omega0 * params.omega0);
  }
  return envelope * carrier;
}

ScaleGrid make_scale_grid(double min_scale, double max_scale, std::size_t count,
                          ScaleSpacing spacing) {
  if (count == 0 || !(min_scale > 0) || !(max_scale >= min_scale) ||
      (count > 1 && !(max_scale > min_scale))) {
    throw Error(Errc::InvalidArgument, "invalid scale grid bounds");
  }
  ScaleGrid grid;
  grid.spacing = spacing;
  grid.scales.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / double(count - 1);
    grid.scales[i] = spacing == ScaleSpacing::log
                         ? min_scale * std::pow(max_scale / min_scale, frac)
                         : min_scale + (max_scale - min_scale) * frac;
  }
  grid.scales.back() = count == 1 ? min_scale : max_scale;
  return grid;
}

ScaleGrid default_scale_grid(std::size_t window_samples, std::size_t count) {
  constexpr double kMinScale = 4.0;  // fs/4
  double max_scale = static_cast<double>(window_samples) / 2.0;
  if (max_scale <= kMinScale) max_scale = 2.0 * kMinScale;
  return make_scale_grid(kMinScale, max_scale, count, ScaleSpacing::log);
}

double scale_to_frequency(double scale, double sample_rate, const MorletParams& params,
                          FrequencyMode mode) {
  if (!(scale > 0) || !(sample_rate > 0)) {
    throw Error(Errc::InvalidArgument, "scale and sample rate must be positive");
  }
  const double f = sample_rate / scale;
  return mode == FrequencyMode::inverse_scale ? f : params.omega0 / (2.0 * std::numbers::pi) * f;
}

std::size_t cone_of_influence(double scale) {
  return static_cast<std::size_t>(std::ceil(std::numbers::sqrt2 * scale));
}

bool Scalogram::valid(std::size_t row, std::size_t col) const {
  const std::size_t half = coi_halfwidth.empty() ? 0 : coi_halfwidth[row];
  return col >= half && col + half < cols;
}

Scalogram cwt(std::span<const double> samples, double sample_rate, const ScaleGrid& grid,
              const CwtOptions& options) {
  validate(samples, sample_rate, grid);
  Scalogram out;
  out.rows = grid.count();
  out.cols = samples.size();
  out.scale_grid = grid;
  out.sample_rate = sample_rate;
  out.coeffs_real.assign(out.rows * out.cols, 0.0);
  out.coeffs_imag.assign(out.rows * out.cols, 0.0);
  for (double a : grid.scales) {
    out.frequency_map.push_back(
        scale_to_frequency(a, sample_rate, options.morlet, options.frequency_mode));
    out.coi_halfwidth.push_back(cone_of_influence(a));
  }

  const double dt = 1.0 / sample_rate;
  if (options.method == CwtMethod::direct) {
    cwt_direct(samples, grid, options.morlet, dt, out);
  } else {
    cwt_fft(samples, grid, options.morlet, dt, out);
  }
  return scalogram_power(std::move(out));
}

Scalogram scalogram_power(Scalogram s) {
  if (s.coeffs_real.size() != s.coeffs_imag.size()) {
    throw Error(Errc::InvalidArgument, "coefficient grids differ in size");
  }
  s.power.resize(s.coeffs_real.size());
  for (std::size_t i = 0; i < s.power.size(); ++i) {
    s.power[i] = s.coeffs_real[i] * s.coeffs_real[i] + s.coeffs_imag[i] * s.coeffs_imag[i];
  }
  return s;
}

std::vector<std::uint8_t> encode_scalogram_dump(const Scalogram& s) {
  detail::ByteWriter w;
  w.bytes("EVSG", 4);
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(s.rows));
  w.u32(static_cast<std::uint32_t>(s.cols));
  w.f64(s.sample_rate);
  for (double a : s.scale_grid.scales) w.f64(a);
  for (double p : s.power) w.f32(static_cast<float>(p));
  return w.take();
}

void write_scalogram_dump(const Scalogram& s, const std::string& path) {
  detail::write_file(path, encode_scalogram_dump(s));
}

ScalogramDump decode_scalogram_dump(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic("EVSG");
  if (r.u32() != 1) throw Error(Errc::SchemaMismatch, "unsupported scalogram dump version");
  ScalogramDump d;
  d.rows = r.u32();
  d.cols = r.u32();
  d.sample_rate = r.f64();
  d.scales.resize(d.rows);
  for (auto& a : d.scales) a = r.f64();
  d.power.resize(d.rows * d.cols);
  for (auto& p : d.power) p = r.f32();
  if (!r.done()) throw Error(Errc::SchemaMismatch, "trailing bytes in scalogram dump");
  return d;
}

}  // namespace eviz
