#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lda/corpus.hpp"
#include "lda/matrix.hpp"
#include "lda/report.hpp"
#include "lda/vb.hpp"

namespace lda::online_vb {

struct Config {
  std::size_t topics = 100;
  double alpha = 0.01;
  double beta = 0.01;
  std::size_t batch_size = 100;
  double tau0 = 1024.0;
  double kappa = 0.7;
  // Total documents the stream represents; 0 means the size of the corpus
  // handed to train().
  std::size_t corpus_size = 0;
  vb::EStepConfig e_step;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: LDA_TRIO_THREADS
  // Test hook: replaces the schedule with a constant step size in [0, 1].
  std::optional<double> rho_override;

  void validate() const;
};

struct State {
  vb::CorpusTopics topics;
  std::size_t updates = 0;  // number of lambda updates (batches) applied
};

/// (tau0 + t)^(-kappa). The n-th batch (1-based) uses t = n.
double rho(std::size_t t, double tau0, double kappa);

/// beta + (corpus_size / batch_count) * stats: the optimal lambda if the
/// corpus consisted of the batch repeated to full size.
Matrix<double> lambda_tilde(const Matrix<double>& batch_stats, std::size_t batch_count, std::size_t corpus_size,
                            double beta);

State init_state(std::size_t topics, std::size_t vocabulary_size, std::uint64_t seed);

struct BatchReport {
  double rho = 0.0;
  std::size_t documents = 0;
  std::size_t e_step_iterations = 0;
};

struct BatchResult {
  std::vector<vb::DocTopics> doc_topics;
  BatchReport report;
};

/// E-step on each batch document against the current lambda, then
/// lambda <- (1 - rho) lambda + rho lambda_tilde and one more update counted.
/// `first_index` is the stream position of batch[0]; it keys per-document
/// random streams. `corpus_size` must be resolved (nonzero).
BatchResult update(State& state, std::span<const Document> batch, const Config& config,
                   std::size_t corpus_size, std::size_t first_index = 0);

struct Result {
  vb::CorpusTopics topics;
  State state;
  TrainReport report;
};

/// Single pass: consecutive batches of batch_size documents (the last one may
/// be partial), one update each.
Result train(const Corpus& corpus, const Config& config, const Checkpoint* checkpoint = nullptr);

}  // namespace lda::online_vb
