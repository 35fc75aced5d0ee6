#include "lda/online_vb.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lda::online_vb {

void Config::validate() const {
  if (topics < 1) throw std::invalid_argument("online-vb: topics must be >= 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("online-vb: alpha and beta must be positive");
  if (batch_size < 1) throw std::invalid_argument("online-vb: batch size must be >= 1");
  if (!(tau0 >= 0.0)) throw std::invalid_argument("online-vb: tau0 must be >= 0");
  if (!(kappa > 0.5 && kappa <= 1.0)) throw std::invalid_argument("online-vb: kappa must lie in (0.5, 1]");
  if (rho_override && !(*rho_override >= 0.0 && *rho_override <= 1.0)) {
    throw std::invalid_argument("online-vb: rho override must lie in [0, 1]");
  }
  e_step.validate();
}

double rho(std::size_t t, double tau0, double kappa) {
  const double base = tau0 + static_cast<double>(t);
  if (!(base > 0.0)) throw DomainError("rho: tau0 + t must be positive");
  return std::pow(base, -kappa);
}

Matrix<double> lambda_tilde(const Matrix<double>& batch_stats, std::size_t batch_count, std::size_t corpus_size,
                            double beta) {
  if (batch_count < 1) throw std::invalid_argument("lambda_tilde: batch_count must be >= 1");
  const double scale = static_cast<double>(corpus_size) / static_cast<double>(batch_count);
  Matrix<double> out(batch_stats.rows(), batch_stats.cols());
  for (std::size_t i = 0; i < out.values().size(); ++i) out.values()[i] = beta + scale * batch_stats.values()[i];
  return out;
}

State init_state(std::size_t topics, std::size_t vocabulary_size, std::uint64_t seed) {
  Rng rng(seed);
  return State{vb::init_lambda(topics, vocabulary_size, rng), 0};
}

BatchResult update(State& state, std::span<const Document> batch, const Config& config, std::size_t corpus_size,
                   std::size_t first_index) {
  if (batch.empty()) throw std::invalid_argument("online-vb update: empty batch");
  if (corpus_size < 1) throw std::invalid_argument("online-vb update: corpus size must be >= 1");
  auto& lambda = state.topics.lambda;
  const Matrix<double> log_topics = vb::log_expectation(lambda);
  const std::size_t threads = config.threads > 0 ? config.threads : threads_from_environment();
  const Rng doc_streams(config.seed);

  BatchResult result;
  result.doc_topics.resize(batch.size());
  Matrix<double> stats(lambda.rows(), lambda.cols());
  vb::run_e_steps(
      batch, log_topics, config.alpha, config.e_step, threads,
      [&](std::size_t i) { return doc_streams.split(first_index + i); }, {},
      [&](std::size_t i, vb::EStepResult& e) {
        vb::accumulate_statistics(batch[i], e.posterior.responsibilities, stats);
        result.report.e_step_iterations += e.iterations;
        result.doc_topics[i] = std::move(e.posterior.topics);
      });

  const Matrix<double> target = lambda_tilde(stats, batch.size(), corpus_size, config.beta);
  const double step = config.rho_override ? *config.rho_override : rho(state.updates + 1, config.tau0, config.kappa);
  for (std::size_t i = 0; i < lambda.values().size(); ++i) {
    lambda.values()[i] = (1.0 - step) * lambda.values()[i] + step * target.values()[i];
  }
  ++state.updates;
  result.report.rho = step;
  result.report.documents = batch.size();
  return result;
}

Result train(const Corpus& corpus, const Config& config, const Checkpoint* checkpoint) {
  config.validate();
  warn_empty_documents(corpus.empty_documents(), "online-vb");
  const std::size_t corpus_size = config.corpus_size > 0 ? config.corpus_size : std::max<std::size_t>(corpus.size(), 1);

  Stopwatch clock;
  Result result{{}, init_state(config.topics, corpus.vocabulary_size(), config.seed), {}};
  result.report.statistic_name = "rho";
  const auto& docs = corpus.documents();
  for (std::size_t begin = 0; begin < docs.size(); begin += config.batch_size) {
    const std::size_t end = std::min(docs.size(), begin + config.batch_size);
    const auto batch = update(result.state, std::span(docs).subspan(begin, end - begin), config, corpus_size, begin);

    IterationRecord record;
    record.index = result.state.updates;
    record.documents_processed = end;
    record.statistic = batch.report.rho;
    const bool last = end == docs.size();
    record.wall_seconds = clock.elapsed();
    if (checkpoint != nullptr && checkpoint->due(record.index, last)) {
      run_checkpoint(checkpoint, vb::log_expectation(result.state.topics.lambda), last, record, clock);
    }
    result.report.iterations.push_back(record);
  }
  result.report.converged = true;
  result.topics = result.state.topics;
  result.report.wall_seconds = clock.elapsed();
  return result;
}

}  // namespace lda::online_vb
