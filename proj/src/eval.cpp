#include "lda/eval.hpp"

#include <cmath>
#include <stdexcept>

#include "lda/report.hpp"

namespace lda::eval {

EvalResult held_out_perplexity_log_topics(const Corpus& held, const Matrix<double>& log_topics, double alpha,
                                          const vb::EStepConfig& e_step, std::uint64_t seed) {
  if (log_topics.cols() != held.vocabulary_size()) {
    throw std::invalid_argument("held_out_perplexity: model has " + std::to_string(log_topics.cols()) +
                                " terms but the held-out vocabulary has " + std::to_string(held.vocabulary_size()));
  }
  EvalResult result;
  result.total_tokens = held.total_tokens();
  if (result.total_tokens == 0) throw std::invalid_argument("held_out_perplexity: held-out set has no tokens");

  const Rng streams(seed);
  result.per_doc_bounds.resize(held.size());
  vb::run_e_steps(
      held.documents(), log_topics, alpha, e_step, threads_from_environment(),
      [&](std::size_t m) { return streams.split(m); }, {},
      [&](std::size_t m, vb::EStepResult& e) {
        result.per_doc_bounds[m] = vb::document_elbo(held.document(m), e.posterior, log_topics, alpha);
      });

  double total = 0.0;
  for (double b : result.per_doc_bounds) total += b;
  result.per_word_bound = total / static_cast<double>(result.total_tokens);
  result.perplexity = std::exp(-result.per_word_bound);
  return result;
}

EvalResult held_out_perplexity(const Corpus& held, const vb::CorpusTopics& topics, double alpha,
                               const vb::EStepConfig& e_step, std::uint64_t seed) {
  for (double x : topics.lambda.values()) {
    if (!(x > 0.0)) throw DomainError("held_out_perplexity: lambda entries must be positive");
  }
  return held_out_perplexity_log_topics(held, vb::log_expectation(topics.lambda), alpha, e_step, seed);
}

Alignment align_topics(const Matrix<double>& estimated, const Matrix<double>& truth) {
  if (estimated.rows() != truth.rows() || estimated.cols() != truth.cols()) {
    throw std::invalid_argument("align_topics: shape mismatch");
  }
  const std::size_t k_topics = estimated.rows();
  auto norm = [](std::span<const double> row) {
    double s = 0.0;
    for (double x : row) s += x * x;
    return std::sqrt(s);
  };

  Matrix<double> cosine(k_topics, k_topics);
  for (std::size_t i = 0; i < k_topics; ++i) {
    const double ni = norm(estimated.row(i));
    for (std::size_t j = 0; j < k_topics; ++j) {
      const double nj = norm(truth.row(j));
      double dot = 0.0;
      for (std::size_t v = 0; v < estimated.cols(); ++v) dot += estimated(i, v) * truth(j, v);
      cosine(i, j) = (ni > 0.0 && nj > 0.0) ? dot / (ni * nj) : 0.0;
    }
  }

  Alignment out;
  out.matching.assign(k_topics, 0);
  out.cosines.assign(k_topics, 0.0);
  std::vector<bool> row_used(k_topics, false);
  std::vector<bool> col_used(k_topics, false);
  for (std::size_t step = 0; step < k_topics; ++step) {
    std::size_t best_i = 0;
    std::size_t best_j = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < k_topics; ++i) {
      if (row_used[i]) continue;
      for (std::size_t j = 0; j < k_topics; ++j) {
        if (!col_used[j] && cosine(i, j) > best) {
          best = cosine(i, j);
          best_i = i;
          best_j = j;
        }
      }
    }
    row_used[best_i] = true;
    col_used[best_j] = true;
    out.matching[best_i] = best_j;
    out.cosines[best_i] = best;
    out.mean_cosine += best;
  }
  if (k_topics > 0) out.mean_cosine /= static_cast<double>(k_topics);
  return out;
}

}  // namespace lda::eval
