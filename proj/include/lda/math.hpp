#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace lda {

// Raised for arguments outside a function's mathematical domain
// (nonpositive digamma argument, all-zero categorical weights, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Digamma function, absolute error below 1e-10 for x >= 1e-6.
/// Throws DomainError for x <= 0 or NaN.
double digamma(double x);

/// E[log X_k] for X ~ Dirichlet(params): digamma(params_k) - digamma(sum).
std::vector<double> dirichlet_log_expectation(std::span<const double> params);

/// Same as above, writing into `out` (must have params.size() entries).
void dirichlet_log_expectation(std::span<const double> params, std::span<double> out);

double log_sum_exp(std::span<const double> log_weights);

/// Converts log-weights to probabilities in place, shifting by the maximum
/// first. Throws DomainError if no entry is finite (all -inf) or any is NaN.
void normalize_exp_inplace(std::span<double> log_weights);

std::vector<double> normalize_exp(std::span<const double> log_weights);

/// Seeded pseudo-random source. Draws are built from the raw 64-bit output of
/// std::mt19937_64, whose sequence is fixed by the standard, so a seed gives
/// the same stream on every platform. The distributions are implemented here
/// rather than taken from <random>, whose algorithms are unspecified.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer on [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  double normal();

  /// log of a Gamma(shape, 1) draw. Working in log space keeps very small
  /// shapes (alpha = 0.01) from underflowing to zero.
  double log_gamma_variate(double shape);

  double gamma(double shape, double scale);

  /// Independent generator keyed on (seed, stream). Does not touch this
  /// generator's state, so the result is independent of call order.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Draws index k with probability weights[k] / sum(weights). Weights need not
/// be normalized. Consumes exactly one uniform draw.
std::size_t sample_categorical(std::span<const double> weights, Rng& rng);

/// Symmetric or general Dirichlet draw via normalized Gamma variates.
std::vector<double> sample_dirichlet(std::span<const double> concentration, Rng& rng);
std::vector<double> sample_symmetric_dirichlet(std::size_t dim, double concentration, Rng& rng);

}  // namespace lda
