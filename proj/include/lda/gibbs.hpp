#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "lda/corpus.hpp"
#include "lda/math.hpp"
#include "lda/matrix.hpp"
#include "lda/report.hpp"

namespace lda::gibbs {

// A count table went negative: the caller did not decrement before asking
// for conditional weights, or the state no longer matches its corpus.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Config {
  std::size_t topics = 100;
  double alpha = 0.01;
  double beta = 0.01;
  std::size_t max_sweeps = 1000;
  double z_change_threshold = 0.20;
  std::uint64_t seed = 0;

  void validate() const;
};

// Token-level topic assignments and the count tables derived from them.
// Tokens of a document are the expansion of its sparse entries: term ids
// ascending, repeats contiguous.
struct State {
  std::size_t topics = 0;
  std::size_t vocabulary_size = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::vector<std::uint32_t>> z;
  Matrix<std::int32_t> doc_topic;   // n_mk, M x K
  Matrix<std::int32_t> topic_term;  // n_kv, K x V
  std::vector<std::int64_t> topic_total;  // n_k
};

State init_state(const Corpus& corpus, const Config& config, Rng& rng);

/// Unnormalized full conditional of one token of term `term` in document `doc`,
/// with that token already removed from the counts:
///   (n_kv + beta) / (n_k + V beta) * (n_mk + alpha)
void conditional_weights(const State& state, std::size_t doc, TermId term, std::span<double> out);
std::vector<double> conditional_weights(const State& state, std::size_t doc, TermId term);

/// One pass over every token in document order. Returns the fraction of tokens
/// whose topic changed (0 for an empty corpus).
double sweep(State& state, const Corpus& corpus, Rng& rng);

Matrix<double> estimate_phi(const State& state);
Matrix<double> estimate_theta(const State& state);

struct Result {
  Matrix<double> phi;
  Matrix<double> theta;
  TrainReport report;
  State state;
};

/// Sweeps until the changed fraction drops below the threshold or max_sweeps.
/// Estimates come from the final state. Checkpoints receive log(phi).
Result train(const Corpus& corpus, const Config& config, const Checkpoint* checkpoint = nullptr);

}  // namespace lda::gibbs
