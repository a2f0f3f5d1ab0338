#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "grm/stats.hpp"

using namespace grm;

namespace {

std::vector<double> draw(const TruncatedPowerLaw& d, std::size_t n, std::uint64_t seed) {
  RandomSource rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = sample_tpl(d, rng);
  return v;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Trapezoid on a log grid; independent of the library's quadrature.
double oracle_integral(double alpha, double beta, double a, double b) {
  const int n = 200000;
  const double la = std::log(a), lb = std::log(b);
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = std::exp(la + (lb - la) * i / n);
    const double f = std::pow(x, -alpha) * std::exp(-x / beta) * x;  // dx = x dlogx
    s += (i == 0 || i == n) ? f / 2 : f;
  }
  return s * (lb - la) / n;
}

}  // namespace

TEST_CASE("random source is reproducible and derive is pure") {
  RandomSource a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  RandomSource c(42);
  const auto d1 = c.derive(3);
  c.next_u64();
  auto d2 = c.derive(3);
  auto d1c = d1;
  CHECK(d1c.next_u64() == d2.next_u64());
  CHECK(RandomSource(42).derive(1).seed() != RandomSource(42).derive(2).seed());
}

TEST_CASE("uniform01 and below stay in range") {
  RandomSource rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    CHECK(rng.below(7) < 7u);
  }
  CHECK_THROWS_AS(rng.below(0), ContractError);
}

TEST_CASE("tpl validation") {
  CHECK_THROWS_AS((TruncatedPowerLaw{1.0, 1.0, 1.0}.validate()), ParameterError);
  CHECK_THROWS_AS((TruncatedPowerLaw{2.0, 0.0, 1.0}.validate()), ParameterError);
  CHECK_THROWS_AS((TruncatedPowerLaw{2.0, 1.0, 0.0}.validate()), ParameterError);
  RandomSource rng(1);
  CHECK_THROWS_AS(sample_tpl(TruncatedPowerLaw{0.5, 1.0, 1.0}, rng), ParameterError);
}

TEST_CASE("sample_tpl never goes below x_min (property)") {
  RandomSource gen(99);
  for (int trial = 0; trial < 50; ++trial) {
    TruncatedPowerLaw d{1.05 + 4.0 * gen.uniform01(), 0.5 + 200.0 * gen.uniform01(),
                        0.1 + 10.0 * gen.uniform01()};
    for (double x : draw(d, 2000, 1000 + trial)) REQUIRE(x >= d.x_min);
  }
}

TEST_CASE("sample_tpl mean matches the analytic mean") {
  // mpmath quadrature: 4.85257 and 4.78957.
  const auto a = draw({2.24, 30.4, 2.0}, 1000000, 11);
  const auto b = draw({2.42, 54.6, 2.0}, 1000000, 12);
  CHECK(mean(a) == doctest::Approx(4.85257).epsilon(0.01));
  CHECK(mean(b) == doctest::Approx(4.78957).epsilon(0.01));
  CHECK(tpl_mean({2.24, 30.4, 2.0}) == doctest::Approx(4.85257).epsilon(1e-4));
  CHECK(tpl_mean({2.42, 54.6, 2.0}) == doctest::Approx(4.78957).epsilon(1e-4));
}

TEST_CASE("huge cutoff is indistinguishable from a pure power law") {
  const double alpha = 2.5;
  const auto v = draw({alpha, 1e9, 1.0}, 20000, 5);
  const double ks =
      ks_statistic(v, [&](double x) { return x < 1.0 ? 0.0 : 1.0 - std::pow(x, 1.0 - alpha); });
  CHECK(ks < 1.36 / std::sqrt(20000.0));
}

TEST_CASE("tpl integrals against an independent oracle") {
  for (auto [alpha, beta, a, b] : {std::tuple{2.0, 30.0, 1.0, 50.0}, std::tuple{1.5, 10.0, 2.0, 400.0},
                                   std::tuple{3.2, 100.0, 0.5, 7.0}, std::tuple{1.01, 5.0, 1.0, 300.0}}) {
    const TruncatedPowerLaw d{alpha, beta, a};
    CHECK(tpl_partial_integral(d, a, b) == doctest::Approx(oracle_integral(alpha, beta, a, b)).epsilon(1e-6));
  }
  const TruncatedPowerLaw d{2.0, 30.0, 1.0};
  CHECK(tpl_cdf(d, 1.0) == doctest::Approx(0.0));
  CHECK(tpl_cdf(d, 1e6) == doctest::Approx(1.0));
  for (double p : {0.1, 0.5, 0.9, 0.999}) CHECK(tpl_cdf(d, tpl_quantile(d, p)) == doctest::Approx(p).epsilon(1e-8));
}

TEST_CASE("sample_gaussian") {
  RandomSource rng(3);
  CHECK(sample_gaussian(kDay, 0.0, rng) == kDay);
  CHECK_THROWS_AS(sample_gaussian(0.0, -1.0, rng), ParameterError);
  const int n = 1000000;
  double s = 0, s2 = 0;
  int inside = 0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_gaussian(0.0, 1.0, rng);
    s += x;
    s2 += x * x;
    const double y = sample_gaussian(5.0, 4.0, rng);
    inside += (y >= 1.0 && y <= 9.0);
  }
  const double m = s / n;
  CHECK(std::abs(m) < 0.005);
  CHECK(std::abs(s2 / n - m * m - 1.0) < 0.01);
  CHECK(static_cast<double>(inside) / n == doctest::Approx(0.9545).epsilon(0.005));
}

TEST_CASE("sample_uniform") {
  RandomSource rng(4);
  CHECK(sample_uniform(0.0, 0.0, rng) == 0.0);
  CHECK_THROWS_AS(sample_uniform(1.0, 0.0, rng), ParameterError);
  const double T = 60 * kDay;
  std::vector<double> u(1000000);
  double s = 0;
  for (auto& x : u) {
    s += sample_uniform(0.0, T, rng);
    x = sample_uniform(0.0, 1.0, rng);
  }
  CHECK(s / 1e6 == doctest::Approx(T / 2).epsilon(0.01));
  CHECK(ks_statistic(u, [](double x) { return std::clamp(x, 0.0, 1.0); }) < 0.005);
}

TEST_CASE("fit_tpl round trips") {
  SUBCASE("alpha 2, beta 30, x_min 1") {
    const auto fit = fit_tpl(draw({2.0, 30.0, 1.0}, 100000, 21), 1.0);
    CHECK(fit.dist.alpha == doctest::Approx(2.0).epsilon(0.05));
    CHECK(fit.dist.beta == doctest::Approx(30.0).epsilon(0.15));
    CHECK_FALSE(fit.degenerate);
  }
  SUBCASE("group size law") {
    const auto fit = fit_tpl(draw({2.24, 30.4, 2.0}, 100000, 22), 2.0);
    CHECK(std::abs(fit.dist.alpha - 2.24) < 0.1);
  }
}

TEST_CASE("fit_tpl degenerate and error paths") {
  std::vector<double> constant(500, 3.0);
  try {
    const auto fit = fit_tpl(constant, 3.0);
    CHECK(fit.degenerate);
    CHECK(fit.dist.alpha == doctest::Approx(kFitAlphaMax).epsilon(1e-4));
  } catch (const FitError&) {
  }
  CHECK_THROWS_AS(fit_tpl(std::vector<double>(99, 5.0), 1.0), InsufficientDataError);
  std::vector<double> below(200, 5.0);
  below[7] = 0.5;
  CHECK_THROWS_AS(fit_tpl(below, 1.0), ParameterError);
}

TEST_CASE("fit_tpl_rounded removes the rounding bias") {
  RandomSource rng(31);
  std::vector<double> v(50000);
  for (auto& x : v) x = std::round(sample_tpl({2.24, 30.0, 2.0}, rng));
  const auto cont = fit_tpl(v, 2.0);
  const auto rounded = fit_tpl_rounded(v, 2.0);
  CHECK(std::abs(rounded.dist.alpha - 2.24) < 0.05);
  CHECK(std::abs(cont.dist.alpha - 2.24) > std::abs(rounded.dist.alpha - 2.24));
  v[0] = 2.5;
  CHECK_THROWS_AS(fit_tpl_rounded(v, 2.0), ParameterError);
}

TEST_CASE("ks_statistic") {
  const TruncatedPowerLaw d{2.0, 30.0, 1.0};
  CHECK(ks_statistic(std::vector<double>{tpl_quantile(d, 0.5)}, d) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_THROWS_AS(ks_statistic(std::vector<double>{}, d), InsufficientDataError);

  const std::size_t n = 1000;
  std::vector<double> grid;
  for (std::size_t i = 0; i < n; ++i) grid.push_back(tpl_quantile(d, (i + 0.5) / n));
  CHECK(ks_statistic(grid, d) <= 1.0 / n + 1e-9);

  const auto same = draw(d, 10000, 41);
  const double m = mean(same);
  RandomSource rng(42);
  std::vector<double> expo(10000);
  for (auto& x : expo) x = 1.0 - (m - 1.0) * std::log(1.0 - rng.uniform01());
  CHECK(ks_statistic(expo, d) > ks_statistic(same, d));
}

TEST_CASE("shifted exponential fit") {
  RandomSource rng(51);
  std::vector<double> v(100000);
  for (auto& x : v) x = 10.0 - std::log(1.0 - rng.uniform01()) / 0.25;
  const auto e = fit_exponential(v, 10.0);
  CHECK(e.rate == doctest::Approx(0.25).epsilon(0.02));
  CHECK(ks_statistic(v, [&](double x) { return e.cdf(x); }) < 0.01);
  CHECK_THROWS_AS(fit_exponential(std::vector<double>{1.0}, 1.0), InsufficientDataError);
}
