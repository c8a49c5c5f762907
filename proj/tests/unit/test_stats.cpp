#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "potions/random.hpp"
#include "potions/stats.hpp"

using namespace potions;

namespace {

std::vector<double> random_samples(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = std::floor(scale * uniform01(rng));
  return v;
}

}  // namespace

TEST_CASE("emd_1d examples") {
  const std::vector<double> a{4, 1, 3};
  CHECK(emd_1d(a, a) == 0.0);
  CHECK(emd_1d(std::vector<double>{0}, std::vector<double>{5}) == 5.0);
  const std::vector<double> f{1, 2, 3}, g{2, 3, 4};
  CHECK(std::abs(emd_1d(f, g) - 1.0) < 1e-12);
  CHECK(std::abs(oracle::transport_lp(f, g) - 1.0) < 1e-12);
  CHECK_THROWS_AS(emd_1d(std::vector<double>{}, g), StatsError);
}

TEST_CASE("emd_1d matches the transport LP on small instances") {
  // Supports drawn from a small grid so ties and shared points are common.
  Rng rng(123);
  for (std::size_t m = 1; m <= 8; ++m) {
    for (std::size_t k = 1; k <= 8; ++k) {
      for (int rep = 0; rep < 6; ++rep) {
        const auto f = random_samples(rng, m, 6);
        const auto g = random_samples(rng, k, 6);
        REQUIRE(std::abs(emd_1d(f, g) - oracle::transport_lp(f, g)) < 1e-9);
      }
    }
  }
}

TEST_CASE("emd_1d metric axioms") {
  Rng rng(7);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + uniform_below(rng, 12);
    const auto x = random_samples(rng, n, 50);
    const auto y = random_samples(rng, n, 50);
    const auto z = random_samples(rng, n, 50);
    const double xy = emd_1d(x, y), yx = emd_1d(y, x);
    REQUIRE(xy >= 0.0);
    REQUIRE(std::abs(xy - yx) < 1e-12);
    REQUIRE(emd_1d(x, x) == 0.0);
    auto xs = x, ys = y;
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    REQUIRE((xy == 0.0) == (xs == ys));
    REQUIRE(xy <= emd_1d(x, z) + emd_1d(z, y) + 1e-9);
  }
}

TEST_CASE("emd_1d equals sorted mean absolute difference for equal sizes") {
  Rng rng(8);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + uniform_below(rng, 40);
    auto x = random_samples(rng, n, 1000), y = random_samples(rng, n, 1000);
    const double d = emd_1d(x, y);
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i] - y[i]);
    REQUIRE(std::abs(d - s / static_cast<double>(n)) < 1e-9);
  }
}

TEST_CASE("emd_1d translation") {
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    auto x = random_samples(rng, 1 + uniform_below(rng, 10), 100);
    auto y = random_samples(rng, 1 + uniform_below(rng, 10), 100);
    const double shift = std::floor(50 * uniform01(rng));
    const double d = emd_1d(x, y);
    auto xs = x, ys = y;
    for (double& v : xs) v += shift;
    for (double& v : ys) v += shift;
    REQUIRE(std::abs(emd_1d(xs, ys) - d) < 1e-9);

    // Disjoint, ordered supports: y entirely above x.
    auto lo = x, hi = x;
    for (double& v : hi) v += 200;
    const double base = emd_1d(lo, hi);
    for (double& v : hi) v += shift;
    REQUIRE(std::abs(emd_1d(lo, hi) - base - shift) < 1e-9);
  }
}

TEST_CASE("emd on distributions ignores censored counts") {
  EmpiricalDistribution f{{1, 2, 3}, 4}, g{{2, 3, 4}, 0};
  CHECK(std::abs(emd_1d(f, g) - 1.0) < 1e-12);
}

TEST_CASE("summarize") {
  const Summary s = summarize({{4, 1, 3, 2}, 2});
  CHECK(s.mean == 2.5);
  CHECK(s.median == 2.5);
  CHECK(s.min == 1);
  CHECK(s.max == 4);
  CHECK(s.q1 == doctest::Approx(1.75));
  CHECK(s.q3 == doctest::Approx(3.25));
  CHECK(s.count == 4);
  CHECK(s.censored_count == 2);

  const Summary one = summarize({{7}, 0});
  for (double v : {one.mean, one.median, one.q1, one.q3, one.min, one.max}) CHECK(v == 7.0);
  CHECK_THROWS_AS(summarize({{}, 3}), StatsError);

  std::mt19937_64 eng(5);
  std::exponential_distribution<double> expo(1.0);
  EmpiricalDistribution d;
  for (int i = 0; i < 10000; ++i) d.samples.push_back(expo(eng));
  CHECK(std::abs(summarize(d).mean - 1.0) < 3 * 1.0 / std::sqrt(10000.0));
}
