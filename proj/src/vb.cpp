#include "lda/vb.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

namespace lda::vb {

void EStepConfig::validate() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("e-step tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("e-step max iterations must be >= 1");
}

void Config::validate() const {
  if (topics < 1) throw std::invalid_argument("vb: topics must be >= 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("vb: alpha and beta must be positive");
  e_step.validate();
  if (!(elbo_tolerance > 0.0)) throw std::invalid_argument("vb: ELBO tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("vb: max iterations must be >= 1");
}

CorpusTopics init_lambda(std::size_t topics, std::size_t vocabulary_size, Rng& rng) {
  if (topics < 1 || vocabulary_size < 1) throw std::invalid_argument("init_lambda: sizes must be >= 1");
  CorpusTopics out{Matrix<double>(topics, vocabulary_size)};
  for (double& x : out.lambda.values()) x = rng.gamma(100.0, 0.01);
  return out;
}

Matrix<double> log_expectation(const Matrix<double>& lambda) {
  Matrix<double> out(lambda.rows(), lambda.cols());
  for (std::size_t k = 0; k < lambda.rows(); ++k) dirichlet_log_expectation(lambda.row(k), out.row(k));
  return out;
}

double mean_relative_change(std::span<const double> old_values, std::span<const double> new_values) {
  if (old_values.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < old_values.size(); ++k) {
    total += std::fabs(new_values[k] - old_values[k]) / old_values[k];
  }
  return total / static_cast<double>(old_values.size());
}

EStepResult e_step_document(const Document& doc, const Matrix<double>& log_topics, double alpha,
                            const EStepConfig& config, Rng& rng, std::span<const double> initial_gamma) {
  const std::size_t k_topics = log_topics.rows();
  const auto& entries = doc.entries();
  if (!entries.empty() && entries.back().term >= log_topics.cols()) {
    throw std::invalid_argument("e_step_document: term id " + std::to_string(entries.back().term) +
                                " outside vocabulary of size " + std::to_string(log_topics.cols()));
  }

  EStepResult result;
  auto& gamma = result.posterior.topics.gamma;
  auto& psi = result.posterior.responsibilities.psi;
  psi = Matrix<double>(entries.size(), k_topics);

  if (doc.empty()) {
    gamma.assign(k_topics, alpha);
    result.converged = true;
    return result;
  }

  const double tokens = static_cast<double>(doc.token_count());
  if (!initial_gamma.empty()) {
    if (initial_gamma.size() != k_topics) throw std::invalid_argument("e_step_document: initial gamma size");
    gamma.assign(initial_gamma.begin(), initial_gamma.end());
  } else if (config.random_init) {
    gamma.resize(k_topics);
    for (double& g : gamma) g = alpha + tokens / static_cast<double>(k_topics) * rng.gamma(100.0, 0.01);
  } else {
    gamma.assign(k_topics, alpha + tokens / static_cast<double>(k_topics));
  }

  std::vector<double> log_theta(k_topics);
  std::vector<double> next_gamma(k_topics);
  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    dirichlet_log_expectation(gamma, log_theta);
    std::fill(next_gamma.begin(), next_gamma.end(), alpha);
    for (std::size_t j = 0; j < entries.size(); ++j) {
      const auto row = psi.row(j);
      const TermId v = entries[j].term;
      for (std::size_t k = 0; k < k_topics; ++k) row[k] = log_theta[k] + log_topics(k, v);
      normalize_exp_inplace(row);
      const double n = entries[j].count;
      for (std::size_t k = 0; k < k_topics; ++k) next_gamma[k] += n * row[k];
    }
    const double change = mean_relative_change(gamma, next_gamma);
    gamma.swap(next_gamma);
    result.iterations = it;
    if (change < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

void accumulate_statistics(const Document& doc, const Responsibilities& responsibilities, Matrix<double>& stats) {
  const auto& entries = doc.entries();
  for (std::size_t j = 0; j < entries.size(); ++j) {
    const double n = entries[j].count;
    const auto row = responsibilities.psi.row(j);
    for (std::size_t k = 0; k < row.size(); ++k) stats(k, entries[j].term) += n * row[k];
  }
}

CorpusTopics m_step(const Matrix<double>& stats, double beta) {
  CorpusTopics out{Matrix<double>(stats.rows(), stats.cols())};
  for (std::size_t i = 0; i < stats.values().size(); ++i) {
    out.lambda.values()[i] = beta + stats.values()[i];
  }
  return out;
}

namespace {

// Dirichlet(prior) log-density expectation minus the entropy-side term of
// Dirichlet(posterior), both under q = Dirichlet(posterior):
//   E[log p] - E[log q]
double dirichlet_kl_terms(double prior, std::span<const double> posterior, std::span<const double> log_expect) {
  const auto dim = static_cast<double>(posterior.size());
  double value = std::lgamma(dim * prior) - dim * std::lgamma(prior);
  double posterior_sum = 0.0;
  for (std::size_t i = 0; i < posterior.size(); ++i) {
    value += (prior - posterior[i]) * log_expect[i] + std::lgamma(posterior[i]);
    posterior_sum += posterior[i];
  }
  return value - std::lgamma(posterior_sum);
}

}  // namespace

double document_assignment_elbo(const Document& doc, const DocumentPosterior& posterior, double alpha) {
  const auto& gamma = posterior.topics.gamma;
  const auto log_theta = dirichlet_log_expectation(gamma);
  double value = dirichlet_kl_terms(alpha, gamma, log_theta);
  const auto& entries = doc.entries();
  for (std::size_t j = 0; j < entries.size(); ++j) {
    const auto row = posterior.responsibilities.psi.row(j);
    double term = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] > 0.0) term += row[k] * (log_theta[k] - std::log(row[k]));
    }
    value += entries[j].count * term;
  }
  return value;
}

double document_word_elbo(const Document& doc, const Responsibilities& responsibilities,
                          const Matrix<double>& log_topics) {
  double value = 0.0;
  const auto& entries = doc.entries();
  for (std::size_t j = 0; j < entries.size(); ++j) {
    const auto row = responsibilities.psi.row(j);
    double term = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) term += row[k] * log_topics(k, entries[j].term);
    value += entries[j].count * term;
  }
  return value;
}

double document_elbo(const Document& doc, const DocumentPosterior& posterior, const Matrix<double>& log_topics,
                     double alpha) {
  return document_assignment_elbo(doc, posterior, alpha) +
         document_word_elbo(doc, posterior.responsibilities, log_topics);
}

double topic_elbo(const Matrix<double>& lambda, const Matrix<double>& log_topics, double beta) {
  double value = 0.0;
  for (std::size_t k = 0; k < lambda.rows(); ++k) value += dirichlet_kl_terms(beta, lambda.row(k), log_topics.row(k));
  return value;
}

double elbo(const Corpus& corpus, std::span<const DocumentPosterior> posteriors, const CorpusTopics& topics,
            double alpha, double beta) {
  if (posteriors.size() != corpus.size()) throw std::invalid_argument("elbo: one posterior per document required");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("elbo: alpha and beta must be positive");
  for (double x : topics.lambda.values()) {
    if (!(x > 0.0)) throw DomainError("elbo: lambda entries must be positive");
  }
  const auto log_topics = log_expectation(topics.lambda);
  double value = topic_elbo(topics.lambda, log_topics, beta);
  for (std::size_t m = 0; m < corpus.size(); ++m) {
    for (double g : posteriors[m].topics.gamma) {
      if (!(g > 0.0)) throw DomainError("elbo: gamma entries must be positive");
    }
    value += document_elbo(corpus.document(m), posteriors[m], log_topics, alpha);
  }
  return value;
}

void run_e_steps(std::span<const Document> docs, const Matrix<double>& log_topics, double alpha,
                 const EStepConfig& config, std::size_t threads, const std::function<Rng(std::size_t)>& rng_for,
                 const std::function<std::span<const double>(std::size_t)>& initial_gamma,
                 const std::function<void(std::size_t, EStepResult&)>& consume) {
  auto run_one = [&](std::size_t m) {
    Rng rng = rng_for(m);
    return e_step_document(docs[m], log_topics, alpha, config, rng,
                           initial_gamma ? initial_gamma(m) : std::span<const double>{});
  };

  if (threads <= 1) {
    for (std::size_t m = 0; m < docs.size(); ++m) {
      EStepResult result = run_one(m);
      consume(m, result);
    }
    return;
  }

  // Blocks bound the memory held by not-yet-consumed responsibilities.
  const std::size_t block = 64 * threads;
  std::vector<EStepResult> results;
  for (std::size_t begin = 0; begin < docs.size(); begin += block) {
    const std::size_t end = std::min(docs.size(), begin + block);
    results.assign(end - begin, EStepResult{});
    std::atomic<std::size_t> next{begin};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
      std::vector<std::jthread> workers;
      for (std::size_t t = 0; t < std::min(threads, end - begin); ++t) {
        workers.emplace_back([&] {
          for (std::size_t m = next++; m < end && !failed; m = next++) {
            try {
              results[m - begin] = run_one(m);
            } catch (...) {
              if (!failed.exchange(true)) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (std::size_t m = begin; m < end; ++m) consume(m, results[m - begin]);
  }
}

Result train(const Corpus& corpus, const Config& config, const Checkpoint* checkpoint) {
  config.validate();
  warn_empty_documents(corpus.empty_documents(), "vb");
  const std::size_t threads = config.threads > 0 ? config.threads : threads_from_environment();
  const std::size_t v_size = corpus.vocabulary_size();
  const Rng doc_streams(config.seed);

  Stopwatch clock;
  Rng rng(config.seed);
  Result result{init_lambda(config.topics, v_size, rng), {}, {}};
  result.report.statistic_name = "elbo";
  result.doc_topics.resize(corpus.size());

  Matrix<double> log_topics = log_expectation(result.topics.lambda);
  Matrix<double> stats(config.topics, v_size);
  double previous = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    stats.fill(0.0);
    double assignment_terms = 0.0;
    run_e_steps(
        corpus.documents(), log_topics, config.alpha, config.e_step, threads,
        [&](std::size_t m) { return doc_streams.split(m).split(it); },
        [&](std::size_t m) -> std::span<const double> {
          if (config.warm_start && it > 1) return result.doc_topics[m].gamma;
          return {};
        },
        [&](std::size_t m, EStepResult& e) {
          const Document& doc = corpus.document(m);
          accumulate_statistics(doc, e.posterior.responsibilities, stats);
          assignment_terms += document_assignment_elbo(doc, e.posterior, config.alpha);
          result.doc_topics[m] = std::move(e.posterior.topics);
        });

    result.topics = m_step(stats, config.beta);
    log_topics = log_expectation(result.topics.lambda);

    // Word terms summed through the sufficient statistics equal the
    // per-document sum of n_v psi_vk E[log phi_kv] under the new lambda.
    double word_terms = 0.0;
    for (std::size_t i = 0; i < stats.values().size(); ++i) word_terms += stats.values()[i] * log_topics.values()[i];
    const double value = assignment_terms + word_terms + topic_elbo(result.topics.lambda, log_topics, config.beta);

    IterationRecord record;
    record.index = it;
    record.documents_processed = corpus.size() * it;
    record.statistic = value;
    if (it > 1) result.report.converged = (value - previous) / std::fabs(previous) < config.elbo_tolerance;
    const bool last = result.report.converged || it == config.max_iterations;
    record.wall_seconds = clock.elapsed();
    run_checkpoint(checkpoint, log_topics, last, record, clock);
    result.report.iterations.push_back(record);
    previous = value;
    if (last) break;
  }
  result.report.wall_seconds = clock.elapsed();
  return result;
}

}  // namespace lda::vb
