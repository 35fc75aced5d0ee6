#include "lda/math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace lda {

namespace {

// Below this the asymptotic series is not yet accurate to double precision.
constexpr double kAsymptoticThreshold = 10.0;

double digamma_asymptotic(double x) {
  // ln x - 1/(2x) - sum_k B_2k / (2k x^2k)
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 -
                                               inv2 * (691.0 / 32760 - inv2 * (1.0 / 12)))))));
  return std::log(x) - 0.5 * inv - series;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double digamma(double x) {
  if (!(x > 0.0) || std::isinf(x)) {
    throw DomainError("digamma: argument must be positive and finite, got " + std::to_string(x));
  }
  if (x >= kAsymptoticThreshold) return digamma_asymptotic(x);

  // psi(x) = psi(x + n) - sum_{i<n} 1/(x+i). The 1/x term dominates for tiny
  // x, so it is subtracted last to keep the rounding of the small terms out of
  // the large magnitude.
  const int shift = static_cast<int>(std::ceil(kAsymptoticThreshold - x));
  double small_terms = 0.0;
  for (int i = shift - 1; i >= 1; --i) small_terms += 1.0 / (x + i);
  return (digamma_asymptotic(x + shift) - small_terms) - 1.0 / x;
}

void dirichlet_log_expectation(std::span<const double> params, std::span<double> out) {
  if (out.size() != params.size()) {
    throw std::invalid_argument("dirichlet_log_expectation: output size mismatch");
  }
  double total = 0.0;
  for (double p : params) {
    if (!(p > 0.0)) throw DomainError("dirichlet_log_expectation: parameters must be positive");
    total += p;
  }
  const double psi_total = digamma(total);
  for (std::size_t k = 0; k < params.size(); ++k) out[k] = digamma(params[k]) - psi_total;
}

std::vector<double> dirichlet_log_expectation(std::span<const double> params) {
  std::vector<double> out(params.size());
  dirichlet_log_expectation(params, out);
  return out;
}

double log_sum_exp(std::span<const double> log_weights) {
  double max = -std::numeric_limits<double>::infinity();
  for (double w : log_weights) {
    if (std::isnan(w)) throw DomainError("log_sum_exp: NaN log-weight");
    max = std::max(max, w);
  }
  if (std::isinf(max)) return max;
  double sum = 0.0;
  for (double w : log_weights) sum += std::exp(w - max);
  return max + std::log(sum);
}

void normalize_exp_inplace(std::span<double> log_weights) {
  double max = -std::numeric_limits<double>::infinity();
  for (double w : log_weights) {
    if (std::isnan(w) || w == std::numeric_limits<double>::infinity()) {
      throw DomainError("normalize_exp: log-weights must be finite or -inf");
    }
    max = std::max(max, w);
  }
  if (std::isinf(max)) throw DomainError("normalize_exp: all log-weights are -inf");
  double sum = 0.0;
  for (double& w : log_weights) {
    w = std::exp(w - max);
    sum += w;
  }
  for (double& w : log_weights) w /= sum;
}

std::vector<double> normalize_exp(std::span<const double> log_weights) {
  std::vector<double> out(log_weights.begin(), log_weights.end());
  normalize_exp_inplace(out);
  return out;
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  // Rejection sampling on the top of the range keeps the draw unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

double Rng::normal() {
  // Marsaglia polar method; the second variate is discarded so the generator
  // carries no hidden cache.
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double Rng::log_gamma_variate(double shape) {
  if (!(shape > 0.0)) throw DomainError("gamma variate: shape must be positive");
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a)
    const double u = 1.0 - uniform();  // (0, 1]
    return log_gamma_variate(shape + 1.0) + std::log(u) / shape;
  }
  // Marsaglia & Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

double Rng::gamma(double shape, double scale) {
  return std::exp(log_gamma_variate(shape)) * scale;
}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

std::size_t sample_categorical(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || std::isinf(w)) {
      throw DomainError("sample_categorical: weights must be finite and nonnegative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("sample_categorical: weights sum to zero");

  const double target = rng.uniform() * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    cumulative += weights[k];
    last_positive = k;
    if (target < cumulative) return k;
  }
  // Rounding can leave target == cumulative at the end of the scan.
  return last_positive;
}

std::vector<double> sample_dirichlet(std::span<const double> concentration, Rng& rng) {
  std::vector<double> draw(concentration.size());
  for (std::size_t k = 0; k < concentration.size(); ++k) {
    draw[k] = rng.log_gamma_variate(concentration[k]);
  }
  normalize_exp_inplace(draw);
  return draw;
}

std::vector<double> sample_symmetric_dirichlet(std::size_t dim, double concentration, Rng& rng) {
  const std::vector<double> params(dim, concentration);
  return sample_dirichlet(params, rng);
}

}  // namespace lda
