#include <doctest.h>

#include <algorithm>
#include <random>

#include "eviz/error.hpp"
#include "eviz/recurrence.hpp"
#include "oracles.hpp"

using namespace eviz;

namespace {

std::vector<double> random_walk(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  std::vector<double> x(n);
  double v = 0;
  for (auto& s : x) s = v += d(gen);
  return x;
}

}  // namespace

TEST_CASE("embedding") {
  const std::vector<double> x{1, 2, 3, 4};
  const auto id = embed(x, {1, 1});
  CHECK(id.size() == 4);
  CHECK(id.flat() == x);

  const auto e = embed(x, {2, 1});
  REQUIRE(e.size() == 3);
  CHECK(std::vector<double>(e[0].begin(), e[0].end()) == std::vector<double>{1, 2});
  CHECK(std::vector<double>(e[1].begin(), e[1].end()) == std::vector<double>{2, 3});
  CHECK(std::vector<double>(e[2].begin(), e[2].end()) == std::vector<double>{3, 4});

  CHECK(embed(std::vector<double>(1440, 0.0), {3, 10}).size() == 1420);

  try {
    embed(x, {3, 2});
    FAIL("expected EmbeddingTooLong");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::EmbeddingTooLong);
  }
}

TEST_CASE("constant series recurs everywhere") {
  const auto s = embed(std::vector<double>(20, 0.3), {2, 3});
  const auto m = recurrence_matrix(s, FixedEpsilon{1e-9});
  CHECK(std::all_of(m.bits.begin(), m.bits.end(), [](auto b) { return b == 1; }));
  CHECK(m.recurrence_rate == 1.0);
  CHECK(solve_epsilon(s, 0.25) == 0.0);
  CHECK(solve_epsilon(s, 1.0) == 0.0);
}

TEST_CASE("two far states") {
  const StateSet s(2, {0, 0, 3, 4});
  const auto m = recurrence_matrix(s, FixedEpsilon{4});
  CHECK(m.bits == std::vector<std::uint8_t>{1, 0, 0, 1});
  CHECK(m.recurrence_rate == 0.5);
  CHECK(recurrence_matrix(s, FixedEpsilon{5}).recurrence_rate == 1.0);  // ties recur
}

TEST_CASE("threshold errors") {
  const StateSet s(1, {0, 1, 2});
  for (double bad : {0.0, -0.1, 1.5}) {
    try {
      solve_epsilon(s, bad);
      FAIL("expected DegenerateThreshold");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DegenerateThreshold);
    }
  }
  CHECK_THROWS_AS(recurrence_matrix(s, FixedEpsilon{-1}), Error);
  CHECK_THROWS_AS(recurrence_matrix(s, FixedEpsilon{std::nan("")}), Error);
}

TEST_CASE("matches the brute-force oracle") {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 16 + gen() % 80;
    const std::size_t m = 1 + gen() % 3, tau = 1 + gen() % 4;
    const auto x = random_walk(n, 500 + trial);
    const double eps = 0.2 + double(gen() % 100) / 40.0;
    const auto rm = recurrence_matrix(embed(x, {m, tau}), FixedEpsilon{eps}, {m, tau});
    const auto ref = oracle::recurrence(x, m, tau, eps);
    CHECK(rm.bits == ref);
    CHECK(rm.recurrence_rate == oracle::rate(ref));
    CHECK(rm.embedding.dimension == m);
  }
}

TEST_CASE("structural properties") {
  const auto s = embed(random_walk(70, 8), {2, 2});
  double prev_rate = 0;
  for (double eps : {0.0, 0.1, 0.5, 1.0, 2.0, 4.0, 100.0}) {
    const auto m = recurrence_matrix(s, FixedEpsilon{eps});
    for (std::size_t i = 0; i < m.n; ++i) {
      CHECK(m.at(i, i));
      for (std::size_t j = 0; j < m.n; ++j) CHECK(m.at(i, j) == m.at(j, i));
    }
    CHECK(m.recurrence_rate >= prev_rate);
    CHECK(m.recurrence_rate == recurrence_rate(s, eps));
    prev_rate = m.recurrence_rate;
  }
  CHECK(prev_rate == 1.0);
}

TEST_CASE("scaling states and epsilon together") {
  const auto x = random_walk(60, 4);
  const auto m0 = recurrence_matrix(embed(x, {2, 1}), FixedEpsilon{1.3});
  for (double c : {4.0, 0.125}) {
    std::vector<double> y(x);
    for (auto& v : y) v *= c;
    CHECK(recurrence_matrix(embed(y, {2, 1}), FixedEpsilon{1.3 * c}).bits == m0.bits);
  }
}

TEST_CASE("target rate on a random walk") {
  const auto s = embed(random_walk(64, 77), {1, 1});
  const auto m = recurrence_matrix(s, TargetRate{0.10});
  CHECK(std::abs(m.recurrence_rate - 0.10) <= 2.0 / 64);
  CHECK(m.recurrence_rate >= 0.10);
}

TEST_CASE("solved epsilon is the minimal sorted distance") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> flat(32 * 3);
  for (auto& v : flat) v = u(gen);
  const StateSet s(3, flat);
  const double eps = solve_epsilon(s, 0.25);
  CHECK(recurrence_rate(s, eps) >= 0.25);

  std::vector<double> d;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) d.push_back(euclidean_distance(s[i], s[j]));
  std::sort(d.begin(), d.end());
  const auto it = std::lower_bound(d.begin(), d.end(), eps);
  REQUIRE(it != d.end());
  CHECK(*it == eps);
  REQUIRE(it != d.begin());
  CHECK(recurrence_rate(s, *(it - 1)) < 0.25);

  // all pairs but one: epsilon is the second-largest distance
  const double n = double(s.size());
  CHECK(solve_epsilon(s, (n * n - 2) / (n * n)) == d[d.size() - 2]);
}

TEST_CASE("recurrence dump round trip") {
  const auto s = embed(random_walk(40, 3), {2, 3});
  const auto m = recurrence_matrix(s, TargetRate{0.2}, {2, 3});
  const auto d = decode_recurrence_dump(encode_recurrence_dump(m));
  CHECK(d.n == m.n);
  CHECK(d.bits == m.bits);
  CHECK(d.epsilon == m.epsilon);
  CHECK(d.recurrence_rate == m.recurrence_rate);
  CHECK(d.embedding.dimension == 2);
  CHECK(d.embedding.delay == 3);
}
