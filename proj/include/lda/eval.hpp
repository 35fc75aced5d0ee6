#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lda/corpus.hpp"
#include "lda/matrix.hpp"
#include "lda/vb.hpp"

namespace lda::eval {

// Perplexity here is computed from the per-document ELBO, so it is an upper
// bound on the true held-out perplexity; comparisons between models are
// bound against bound.
struct EvalResult {
  double perplexity = 0.0;
  double per_word_bound = 0.0;  // nats per token
  std::uint64_t total_tokens = 0;
  std::vector<double> per_doc_bounds;
};

/// Fits (psi, gamma) for every held-out document against fixed topics and
/// returns exp(-sum of per-document bounds / total tokens). Throws
/// std::invalid_argument when the held-out set has no tokens.
EvalResult held_out_perplexity(const Corpus& held, const vb::CorpusTopics& topics, double alpha,
                               const vb::EStepConfig& e_step, std::uint64_t seed = 0);

/// Same, given E[log phi] directly (log(phi) for a point estimate).
EvalResult held_out_perplexity_log_topics(const Corpus& held, const Matrix<double>& log_topics, double alpha,
                                          const vb::EStepConfig& e_step, std::uint64_t seed = 0);

struct Alignment {
  double mean_cosine = 0.0;
  // matching[i] is the truth row paired with estimated row i.
  std::vector<std::size_t> matching;
  std::vector<double> cosines;  // per estimated row
};

/// Greedy matching on the K x K cosine matrix: repeatedly take the largest
/// remaining entry and retire its row and column. Not an optimal assignment.
Alignment align_topics(const Matrix<double>& estimated, const Matrix<double>& truth);

}  // namespace lda::eval
