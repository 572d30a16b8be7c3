#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "eviz/error.hpp"
#include "eviz/wavelet.hpp"
#include "oracles.hpp"

using namespace eviz;

namespace {

std::vector<double> random_signal(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  std::vector<double> x(n);
  for (auto& v : x) v = d(gen);
  return x;
}

std::size_t argmax_row(const Scalogram& s) {
  std::size_t best = 0;
  double best_total = -1;
  for (std::size_t r = 0; r < s.rows; ++r) {
    double total = 0;
    for (std::size_t c = 0; c < s.cols; ++c) total += s.power_at(r, c);
    if (total > best_total) {
      best_total = total;
      best = r;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("morlet values") {
  const auto v0 = morlet(0.0);
  CHECK(v0.real() == doctest::Approx(0.751125544464942482858703).epsilon(1e-15));
  CHECK(v0.imag() == 0.0);

  // 40-digit evaluation of pi^-1/4 e^-1/2 (cos 6 + i sin 6).
  const auto v1 = morlet(1.0);
  CHECK(std::abs(v1.real() - 0.4374350244374875439059081) < 1e-15);
  CHECK(std::abs(v1.imag() - -0.1272963004398479246800914) < 1e-15);

  for (double t : {0.3, 1.7, 4.2, 9.0}) CHECK(std::abs(morlet(t)) == std::abs(morlet(-t)));

  MorletParams corrected{6.0, true};
  double mean_re = 0;
  for (int i = -4000; i <= 4000; ++i) mean_re += morlet(i * 0.005, corrected).real() * 0.005;
  CHECK(std::abs(mean_re) < 1e-12);
}

TEST_CASE("scale to frequency") {
  MorletParams p;
  CHECK(scale_to_frequency(2.0, 1.0, p) == 0.5);
  CHECK(scale_to_frequency(1.0, 250.0, p) == 250.0);
  CHECK(scale_to_frequency(2.0, 1.0, p, FrequencyMode::center_corrected) ==
        doctest::Approx(0.4774648292756860073066513).epsilon(1e-14));
  for (int i = 0; i < 12; ++i) {
    for (int j = -4; j < 8; ++j) {
      const double a = std::ldexp(1.0, i), fs = std::ldexp(1.0, j);
      CHECK(scale_to_frequency(a, fs, p) == std::ldexp(1.0, j - i));
    }
  }
  CHECK_THROWS_AS(scale_to_frequency(0.0, 1.0, p), Error);
}

TEST_CASE("scale grids") {
  const auto g = default_scale_grid(1440);
  REQUIRE(g.count() == 64);
  CHECK(g.scales.front() == 4.0);
  CHECK(g.scales.back() == 720.0);
  // fs/4 down to 2/duration
  CHECK(scale_to_frequency(g.scales.front(), 1.0 / 60, {}) == doctest::Approx(1.0 / 240));
  CHECK(scale_to_frequency(g.scales.back(), 1.0 / 60, {}) == doctest::Approx(2.0 / 86400));
  for (std::size_t i = 1; i < g.count(); ++i) {
    CHECK(g.scales[i] > g.scales[i - 1]);
    CHECK(g.scales[i] / g.scales[i - 1] == doctest::Approx(g.scales[1] / g.scales[0]));
  }
  const auto lin = make_scale_grid(2, 10, 5, ScaleSpacing::linear);
  CHECK(lin.scales == std::vector<double>{2, 4, 6, 8, 10});
  CHECK_THROWS_AS(make_scale_grid(4, 2, 3), Error);
}

TEST_CASE("cwt validation") {
  std::vector<double> x(64, 1.0);
  try {
    cwt(x, 1.0, make_scale_grid(0.5, 8, 4));
    FAIL("expected DegenerateScale");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateScale);
  }
  try {
    cwt(std::vector<double>{}, 1.0, make_scale_grid(1, 8, 4));
    FAIL("expected EmptyWindow");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyWindow);
  }
  try {
    cwt(std::vector<double>(7, 0.0), 1.0, make_scale_grid(1, 8, 4));
    FAIL("expected EmptyWindow");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyWindow);
  }
}

TEST_CASE("cwt of zero signal is zero") {
  std::vector<double> x(100, 0.0);
  for (auto method : {CwtMethod::direct, CwtMethod::fft}) {
    const auto s = cwt(x, 1.0, make_scale_grid(1, 40, 8), {{}, method});
    CHECK(std::all_of(s.power.begin(), s.power.end(), [](double p) { return p == 0.0; }));
  }
}

TEST_CASE("direct cwt matches the literal double sum") {
  const auto x = random_signal(96, 3);
  const auto grid = make_scale_grid(1.5, 30, 7);
  const auto s = cwt(x, 2.0, grid, {{}, CwtMethod::direct});
  const auto ref = oracle::cwt(x, 2.0, grid.scales, 6.0);
  double worst = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const std::complex<double> got{s.coeffs_real[i], s.coeffs_imag[i]};
    worst = std::max(worst, std::abs(got - ref[i]) / (1.0 + std::abs(ref[i])));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("fft and direct agree") {
  const auto grid = default_scale_grid(256);
  for (unsigned seed = 0; seed < 4; ++seed) {
    const auto x = random_signal(256, 100 + seed);
    const auto a = cwt(x, 1.0, grid, {{}, CwtMethod::fft});
    const auto b = cwt(x, 1.0, grid, {{}, CwtMethod::direct});
    double num = 0, den = 0;
    for (std::size_t r = 0; r < a.rows; ++r) {
      for (std::size_t c = 26; c < 230; ++c) {
        const auto d = a.coeff_at(r, c) - b.coeff_at(r, c);
        num += std::norm(d);
        den += std::norm(b.coeff_at(r, c));
      }
    }
    CHECK(std::sqrt(num / den) < 1e-3);
    // the padded convolution is exact, not merely close
    CHECK(std::sqrt(num / den) < 1e-12);
  }
}

TEST_CASE("power is re^2 + im^2") {
  Scalogram s;
  s.rows = 1;
  s.cols = 1;
  s.coeffs_real = {3.0};
  s.coeffs_imag = {4.0};
  CHECK(scalogram_power(s).power == std::vector<double>{25.0});

  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-3, 3);
  s.rows = 7;
  s.cols = 9;
  s.coeffs_real.resize(63);
  s.coeffs_imag.resize(63);
  for (auto& v : s.coeffs_real) v = u(gen);
  for (auto& v : s.coeffs_imag) v = u(gen);
  const auto p = scalogram_power(s);
  for (std::size_t i = 0; i < 63; ++i) {
    CHECK(p.power[i] == s.coeffs_real[i] * s.coeffs_real[i] + s.coeffs_imag[i] * s.coeffs_imag[i]);
    CHECK(p.power[i] >= 0);
  }
}

TEST_CASE("linearity") {
  const auto x = random_signal(200, 11), y = random_signal(200, 12);
  const double alpha = 1.75, beta = -0.4;
  std::vector<double> z(200);
  for (std::size_t i = 0; i < 200; ++i) z[i] = alpha * x[i] + beta * y[i];
  const auto grid = default_scale_grid(200, 24);
  const CwtOptions direct{{}, CwtMethod::direct};
  const auto cx = cwt(x, 1.0, grid, direct), cy = cwt(y, 1.0, grid, direct),
             cz = cwt(z, 1.0, grid, direct);
  for (std::size_t i = 0; i < cz.power.size(); ++i) {
    const std::complex<double> lhs{cz.coeffs_real[i], cz.coeffs_imag[i]};
    const std::complex<double> a{cx.coeffs_real[i], cx.coeffs_imag[i]};
    const std::complex<double> b{cy.coeffs_real[i], cy.coeffs_imag[i]};
    const auto rhs = alpha * a + beta * b;
    CHECK(std::abs(lhs - rhs) <= 1e-9 * (std::abs(alpha * a) + std::abs(beta * b)) + 1e-300);
  }
}

TEST_CASE("time-shift covariance") {
  const std::size_t n = 512, k = 37;
  const auto base = random_signal(n + k, 21);
  const std::vector<double> x(base.begin(), base.begin() + n);
  const std::vector<double> y(base.begin() + k, base.end());  // y[i] = x[i + k]
  const auto grid = make_scale_grid(2, 24, 12);
  for (auto method : {CwtMethod::direct, CwtMethod::fft}) {
    const auto cx = cwt(x, 1.0, grid, {{}, method}), cy = cwt(y, 1.0, grid, {{}, method});
    for (std::size_t r = 0; r < grid.count(); ++r) {
      const auto support = static_cast<std::size_t>(std::ceil(8 * grid.scales[r]));
      double max_abs = 0;
      for (std::size_t c = 0; c < n; ++c) max_abs = std::max(max_abs, std::abs(cx.coeff_at(r, c)));
      for (std::size_t b = support; b + k + support < n; ++b) {
        const auto d = cy.coeff_at(r, b) - cx.coeff_at(r, b + k);
        CHECK(std::abs(d) <= 1e-6 * max_abs);
      }
    }
  }
}

TEST_CASE("power is invariant to global phase of a complex signal") {
  // A complex input z = u + iv transforms as C(u) + iC(v).
  const auto u = random_signal(160, 31), v = random_signal(160, 32);
  const auto grid = default_scale_grid(160, 16);
  const auto power_of = [&](const std::vector<double>& re, const std::vector<double>& im) {
    const auto a = cwt(re, 1.0, grid, {{}, CwtMethod::direct});
    const auto b = cwt(im, 1.0, grid, {{}, CwtMethod::direct});
    std::vector<double> p(a.power.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = std::norm(std::complex<double>(a.coeffs_real[i] - b.coeffs_imag[i],
                                            a.coeffs_imag[i] + b.coeffs_real[i]));
    }
    return p;
  };
  const auto p0 = power_of(u, v);
  for (double phi : {0.4, 2.0, -2.9}) {
    std::vector<double> re(160), im(160);
    for (std::size_t i = 0; i < 160; ++i) {
      re[i] = std::cos(phi) * u[i] - std::sin(phi) * v[i];
      im[i] = std::sin(phi) * u[i] + std::cos(phi) * v[i];
    }
    const auto p1 = power_of(re, im);
    for (std::size_t i = 0; i < p0.size(); ++i) CHECK(p1[i] == doctest::Approx(p0[i]).epsilon(1e-9));
  }
}

TEST_CASE("sinusoid peaks at its pseudo-frequency row") {
  const std::size_t n = 1024;
  const auto grid = default_scale_grid(n);
  const MorletParams p;
  for (std::size_t row : {8u, 16u, 24u, 32u, 40u}) {
    const double f0 = scale_to_frequency(grid.scales[row], 1.0, p, FrequencyMode::center_corrected);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2 * std::numbers::pi * f0 * double(i));
    const auto s = cwt(x, 1.0, grid, {p, CwtMethod::fft, FrequencyMode::center_corrected});
    CHECK(argmax_row(s) == row);
  }
}

TEST_CASE("cone of influence") {
  CHECK(cone_of_influence(1.0) == 2);
  CHECK(cone_of_influence(4.0) == 6);
  const auto s = cwt(random_signal(64, 1), 1.0, make_scale_grid(2, 8, 2));
  CHECK(s.coi_halfwidth == std::vector<std::size_t>{3, 12});
  CHECK_FALSE(s.valid(0, 2));
  CHECK(s.valid(0, 3));
  CHECK(s.valid(0, 60));
  CHECK_FALSE(s.valid(0, 61));
  CHECK_FALSE(s.valid(1, 11));
  CHECK(s.valid(1, 12));
}

TEST_CASE("scalogram dump round trip") {
  const auto s = cwt(random_signal(50, 9), 0.5, make_scale_grid(1, 10, 5));
  const auto bytes = encode_scalogram_dump(s);
  CHECK(bytes.size() == 4 + 4 * 3 + 8 + 8 * 5 + 4 * 250);
  const auto d = decode_scalogram_dump(bytes);
  CHECK(d.rows == 5);
  CHECK(d.cols == 50);
  CHECK(d.sample_rate == 0.5);
  CHECK(d.scales == s.scale_grid.scales);
  for (std::size_t i = 0; i < d.power.size(); ++i) CHECK(d.power[i] == float(s.power[i]));
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_scalogram_dump(bad), Error);
}
