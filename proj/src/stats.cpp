#include "grm/stats.hpp"

#include <algorithm>
#include <map>
#include <array>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace grm {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double RandomSource::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomSource::below(std::uint64_t n) {
  if (n == 0) throw ContractError("RandomSource::below: n must be positive");
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % n;
  }
}

double RandomSource::standard_normal() {
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RandomSource RandomSource::derive(std::uint64_t stream) const {
  return RandomSource(mix64(seed_ ^ mix64(stream ^ 0xD1B54A32D192ED03ULL)));
}

void TruncatedPowerLaw::validate() const {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw ParameterError("truncated power law: alpha must be > 1 (got " + std::to_string(alpha) +
                         ")");
  }
  if (!(beta > 0.0)) {
    throw ParameterError("truncated power law: beta must be > 0 (got " + std::to_string(beta) +
                         ")");
  }
  if (!(x_min > 0.0) || !std::isfinite(x_min)) {
    throw ParameterError("truncated power law: x_min must be > 0 (got " + std::to_string(x_min) +
                         ")");
  }
}

double sample_tpl(const TruncatedPowerLaw& dist, RandomSource& rng) {
  dist.validate();
  // Pareto proposal on [x_min, ∞), accepted with probability exp(-(x - x_min)/beta).
  const double inv_shape = -1.0 / (dist.alpha - 1.0);
  while (true) {
    const double u = 1.0 - rng.uniform01();  // (0, 1]
    const double x = dist.x_min * std::pow(u, inv_shape);
    const double accept = std::exp(-(x - dist.x_min) / dist.beta);
    if (rng.uniform01() < accept) return x;
  }
}

double sample_gaussian(double mu, double sigma2, RandomSource& rng) {
  if (!(sigma2 >= 0.0)) throw ParameterError("gaussian: variance must be >= 0");
  if (sigma2 == 0.0) return mu;
  return mu + std::sqrt(sigma2) * rng.standard_normal();
}

double sample_uniform(double a, double b, RandomSource& rng) {
  if (a > b) throw ParameterError("uniform: lower bound exceeds upper bound");
  if (a == b) return a;
  return a + (b - a) * rng.uniform01();
}

namespace {

constexpr std::array<double, 8> kGlNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
constexpr double kPanelWidth = 0.125;

// ∫_a^b x^-exponent exp(-x/beta) dx, integrated in s = ln x where the
// integrand exp((1-exponent)s - e^s/beta) is smooth.
double integral_pow_exp(double exponent, double beta, double a, double b) {
  if (!(b > a)) return 0.0;
  if (std::isinf(b)) b = a + 80.0 * beta;
  const double s_lo = std::log(a);
  const double s_hi = std::log(b);
  const double width = s_hi - s_lo;
  const int panels = std::max(1, static_cast<int>(std::ceil(width / kPanelWidth)));
  const double h = width / panels;
  const double c = 1.0 - exponent;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = s_lo + (p + 0.5) * h;
    double acc = 0.0;
    for (std::size_t k = 0; k < kGlNodes.size(); ++k) {
      const double s = mid + 0.5 * h * kGlNodes[k];
      acc += kGlWeights[k] * std::exp(c * s - std::exp(s) / beta);
    }
    total += 0.5 * h * acc;
  }
  return total;
}

}  // namespace

double tpl_partial_integral(const TruncatedPowerLaw& dist, double a, double b) {
  return integral_pow_exp(dist.alpha, dist.beta, std::max(a, dist.x_min), b);
}

double tpl_normalizer(const TruncatedPowerLaw& dist) {
  return integral_pow_exp(dist.alpha, dist.beta, dist.x_min,
                          std::numeric_limits<double>::infinity());
}

double tpl_cdf(const TruncatedPowerLaw& dist, double x) {
  if (x <= dist.x_min) return 0.0;
  const double upper = integral_pow_exp(dist.alpha, dist.beta, x,
                                        std::numeric_limits<double>::infinity());
  return std::clamp(1.0 - upper / tpl_normalizer(dist), 0.0, 1.0);
}

double tpl_quantile(const TruncatedPowerLaw& dist, double p) {
  dist.validate();
  if (!(p >= 0.0 && p < 1.0)) throw ParameterError("tpl_quantile: p must lie in [0, 1)");
  if (p == 0.0) return dist.x_min;
  double lo = std::log(dist.x_min);
  double hi = std::log(dist.x_min + 200.0 * dist.beta);
  for (int i = 0; i < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (tpl_cdf(dist, std::exp(mid)) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

double tpl_mean(const TruncatedPowerLaw& dist) {
  dist.validate();
  const double inf = std::numeric_limits<double>::infinity();
  return integral_pow_exp(dist.alpha - 1.0, dist.beta, dist.x_min, inf) / tpl_normalizer(dist);
}

double tpl_log_likelihood(const TruncatedPowerLaw& dist, std::span<const double> samples) {
  if (samples.empty()) throw InsufficientDataError("log-likelihood of an empty sample");
  double sum_log = 0.0;
  double sum_x = 0.0;
  for (double x : samples) {
    sum_log += std::log(x);
    sum_x += x;
  }
  const double n = static_cast<double>(samples.size());
  return -dist.alpha * sum_log / n - sum_x / n / dist.beta - std::log(tpl_normalizer(dist));
}

namespace {

// Maximizes a TPL likelihood over the fitting box; `neg_ll` is the negative
// mean log-likelihood.
template <typename F>
TplFit maximize_tpl(F&& neg_ll, double x_min, double max_x, std::size_t n, const char* who) {
  int evaluations = 0;
  auto counted = [&](double alpha, double beta) {
    ++evaluations;
    return neg_ll(alpha, beta);
  };

  constexpr int kBits = 40;
  constexpr std::uintmax_t kMaxIter = 300;
  bool converged = true;

  // The log-likelihood is concave in (alpha, 1/beta), so the profile over
  // beta is unimodal and nested 1-D Brent searches find the box optimum.
  auto best_alpha_for = [&](double beta) {
    std::uintmax_t iters = kMaxIter;
    auto r = boost::math::tools::brent_find_minima(
        [&](double a) { return counted(a, beta); }, kFitAlphaMin, kFitAlphaMax, kBits, iters);
    if (iters >= kMaxIter) converged = false;
    return r;
  };

  const double log_beta_lo = std::log(x_min);
  const double log_beta_hi = std::log(10.0 * max_x);
  std::uintmax_t outer_iters = kMaxIter;
  auto outer = boost::math::tools::brent_find_minima(
      [&](double log_beta) { return best_alpha_for(std::exp(log_beta)).second; }, log_beta_lo,
      log_beta_hi, kBits, outer_iters);
  if (outer_iters >= kMaxIter) converged = false;

  const double beta = std::exp(outer.first);
  const auto inner = best_alpha_for(beta);
  if (!converged || !std::isfinite(inner.second)) {
    throw FitError(std::string(who) + ": optimizer did not converge (evaluations=" +
                       std::to_string(evaluations) + ")",
                   evaluations);
  }

  TplFit fit;
  fit.dist = TruncatedPowerLaw{inner.first, beta, x_min};
  fit.log_likelihood = -inner.second * static_cast<double>(n);
  fit.samples = n;
  fit.evaluations = evaluations;
  constexpr double kEdge = 1e-6;
  fit.degenerate = inner.first > kFitAlphaMax - kEdge;
  fit.at_bound = fit.degenerate || inner.first < kFitAlphaMin + kEdge ||
                 outer.first < log_beta_lo + kEdge || outer.first > log_beta_hi - kEdge;
  return fit;
}

void check_fit_input(std::span<const double> samples, double x_min, const char* who) {
  if (!(x_min > 0.0)) throw ParameterError(std::string(who) + ": x_min must be > 0");
  if (samples.size() < kFitMinSamples) {
    throw InsufficientDataError(std::string(who) + ": need at least " +
                                std::to_string(kFitMinSamples) + " samples, got " +
                                std::to_string(samples.size()));
  }
  for (double x : samples) {
    if (!(x >= x_min)) {
      throw ParameterError(std::string(who) + ": sample " + std::to_string(x) +
                           " is below x_min " + std::to_string(x_min));
    }
  }
}

}  // namespace

TplFit fit_tpl(std::span<const double> samples, double x_min) {
  check_fit_input(samples, x_min, "fit_tpl");
  double sum_log = 0.0;
  double sum_x = 0.0;
  double max_x = 0.0;
  for (double x : samples) {
    sum_log += std::log(x);
    sum_x += x;
    max_x = std::max(max_x, x);
  }
  const double n = static_cast<double>(samples.size());
  const double mean_log = sum_log / n;
  const double mean_x = sum_x / n;
  return maximize_tpl(
      [&](double alpha, double beta) {
        const double z =
            integral_pow_exp(alpha, beta, x_min, std::numeric_limits<double>::infinity());
        return alpha * mean_log + mean_x / beta + std::log(z);
      },
      x_min, max_x, samples.size(), "fit_tpl");
}

TplFit fit_tpl_rounded(std::span<const double> samples, double x_min) {
  check_fit_input(samples, x_min, "fit_tpl_rounded");
  std::map<double, std::size_t> counts;
  for (double k : samples) {
    if (k != std::round(k)) {
      throw ParameterError("fit_tpl_rounded: sample " + std::to_string(k) + " is not an integer");
    }
    ++counts[k];
  }
  const double max_x = counts.rbegin()->first + 0.5;
  const double n = static_cast<double>(samples.size());
  return maximize_tpl(
      [&](double alpha, double beta) {
        const double z =
            integral_pow_exp(alpha, beta, x_min, std::numeric_limits<double>::infinity());
        double ll = 0.0;
        for (const auto& [k, c] : counts) {
          const double lo = std::max(x_min, k - 0.5);
          const double mass = integral_pow_exp(alpha, beta, lo, k + 0.5) / z;
          ll += static_cast<double>(c) * std::log(std::max(mass, 1e-300));
        }
        return -ll / n;
      },
      x_min, max_x, samples.size(), "fit_tpl_rounded");
}

double ShiftedExponential::cdf(double x) const {
  if (x <= x_min) return 0.0;
  return -std::expm1(-rate * (x - x_min));
}

ShiftedExponential fit_exponential(std::span<const double> samples, double x_min) {
  double excess = 0.0;
  std::size_t n = 0;
  for (double x : samples) {
    if (x < x_min) continue;
    excess += x - x_min;
    ++n;
  }
  if (n == 0 || !(excess > 0.0)) {
    throw InsufficientDataError("fit_exponential: no samples above x_min");
  }
  return ShiftedExponential{static_cast<double>(n) / excess, x_min};
}

namespace {

double ks_from_sorted_cdf(const std::vector<double>& cdf_values) {
  const double n = static_cast<double>(cdf_values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < cdf_values.size(); ++i) {
    const double f = cdf_values[i];
    d = std::max(d, std::max(f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f));
  }
  return d;
}

std::vector<double> sorted_copy(std::span<const double> samples) {
  if (samples.empty()) throw InsufficientDataError("ks_statistic: empty sample");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  const auto s = sorted_copy(samples);
  std::vector<double> f(s.size());
  std::transform(s.begin(), s.end(), f.begin(), cdf);
  return ks_from_sorted_cdf(f);
}

double ks_statistic(std::span<const double> samples, const TruncatedPowerLaw& dist) {
  dist.validate();
  const auto s = sorted_copy(samples);
  const double z = tpl_normalizer(dist);
  std::vector<double> f(s.size());
  double acc = 0.0;
  double prev = dist.x_min;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] > prev) {
      acc += integral_pow_exp(dist.alpha, dist.beta, prev, s[i]);
      prev = s[i];
    }
    f[i] = std::clamp(acc / z, 0.0, 1.0);
  }
  return ks_from_sorted_cdf(f);
}

}  // namespace grm
