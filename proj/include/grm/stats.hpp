#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "grm/core.hpp"

namespace grm {

/// Seeded 64-bit random stream. The raw generator is std::mt19937_64, whose
/// output sequence is fixed by the C++ standard; every floating-point draw is
/// derived from raw bits by this class, never by std:: distributions, so a
/// seed gives the same samples on every platform.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal variate (Box-Muller, one variate per call).
  double standard_normal();

  /// An independent stream keyed by (this stream's seed, `stream`). Does not
  /// consume state from this stream.
  RandomSource derive(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; used for seed derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Density p(x) ∝ x^-alpha · exp(-x/beta) on [x_min, ∞).
struct TruncatedPowerLaw {
  double alpha = 2.0;
  double beta = 1.0;
  double x_min = 1.0;

  /// Throws ParameterError unless alpha > 1, beta > 0, x_min > 0.
  void validate() const;
};

double sample_tpl(const TruncatedPowerLaw& dist, RandomSource& rng);
double sample_gaussian(double mu, double sigma2, RandomSource& rng);
double sample_uniform(double a, double b, RandomSource& rng);

/// ∫_a^b x^-alpha exp(-x/beta) dx for x_min <= a <= b (b may be +inf).
double tpl_partial_integral(const TruncatedPowerLaw& dist, double a, double b);
/// Normalizing constant ∫_{x_min}^∞ x^-alpha exp(-x/beta) dx.
double tpl_normalizer(const TruncatedPowerLaw& dist);
double tpl_cdf(const TruncatedPowerLaw& dist, double x);
/// Inverse CDF by bisection in log-space; p in [0, 1).
double tpl_quantile(const TruncatedPowerLaw& dist, double p);
/// Mean of the distribution, by quadrature.
double tpl_mean(const TruncatedPowerLaw& dist);

/// Per-sample average log-likelihood.
double tpl_log_likelihood(const TruncatedPowerLaw& dist, std::span<const double> samples);

struct TplFit {
  TruncatedPowerLaw dist;
  double log_likelihood = 0.0;  // total over samples
  std::size_t samples = 0;
  int evaluations = 0;
  /// The optimum sits on the alpha upper bound (e.g. zero-variance input).
  bool degenerate = false;
  /// The optimum sits on some bound of the search box.
  bool at_bound = false;
};

/// Raised when the optimizer does not converge.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, int evaluations)
      : std::runtime_error(what), evaluations_(evaluations) {}
  int evaluations() const noexcept { return evaluations_; }

 private:
  int evaluations_;
};

inline constexpr double kFitAlphaMin = 1.01;
inline constexpr double kFitAlphaMax = 6.0;
inline constexpr std::size_t kFitMinSamples = 100;

/// Maximum-likelihood truncated power law over alpha in [1.01, 6] and beta in
/// [x_min, 10·max(samples)]. Requires at least 100 samples, all >= x_min.
TplFit fit_tpl(std::span<const double> samples, double x_min);

/// Maximum-likelihood fit for integer data produced by rounding TPL draws to
/// the nearest integer (values at x_min cover [x_min, x_min + 0.5)).
TplFit fit_tpl_rounded(std::span<const double> samples, double x_min);

inline TruncatedPowerLaw mle_fit_tpl(std::span<const double> samples, double x_min) {
  return fit_tpl(samples, x_min).dist;
}

/// Shifted exponential on [x_min, ∞): p(x) = rate · exp(-rate (x - x_min)).
struct ShiftedExponential {
  double rate = 1.0;
  double x_min = 0.0;
  double cdf(double x) const;
};

/// MLE of the shifted exponential; requires at least one sample above x_min.
ShiftedExponential fit_exponential(std::span<const double> samples, double x_min);

/// Kolmogorov-Smirnov distance between the samples' ECDF and `cdf`.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);
/// As above against a truncated power law; integrates the density once across
/// the sorted samples instead of per point.
double ks_statistic(std::span<const double> samples, const TruncatedPowerLaw& dist);

}  // namespace grm
