#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lda/corpus.hpp"
#include "lda/math.hpp"
#include "lda/matrix.hpp"
#include "lda/report.hpp"

namespace lda::vb {

struct EStepConfig {
  double tolerance = 0.001;  // mean relative change of gamma
  std::size_t max_iterations = 100;
  bool random_init = false;  // seeded random gamma start instead of alpha + N/K

  void validate() const;
};

struct Config {
  std::size_t topics = 100;
  double alpha = 0.01;
  double beta = 0.01;
  EStepConfig e_step;
  double elbo_tolerance = 0.001;  // relative ELBO improvement
  std::size_t max_iterations = 100;
  std::uint64_t seed = 0;
  // Start each document's E-step from its gamma of the previous outer
  // iteration. Keeps the ELBO sequence monotone; see README.
  bool warm_start = true;
  std::size_t threads = 0;  // 0: LDA_TRIO_THREADS

  void validate() const;
};

// Variational Dirichlet parameters of the topics, K x V, all entries > 0.
struct CorpusTopics {
  Matrix<double> lambda;

  std::size_t topics() const noexcept { return lambda.rows(); }
  std::size_t vocabulary_size() const noexcept { return lambda.cols(); }
};

// Variational Dirichlet parameters of one document's topic proportions.
struct DocTopics {
  std::vector<double> gamma;
};

// psi, one row per distinct term of the document (in entry order), K columns.
struct Responsibilities {
  Matrix<double> psi;
};

struct DocumentPosterior {
  DocTopics topics;
  Responsibilities responsibilities;
};

struct EStepResult {
  DocumentPosterior posterior;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Gamma(shape 100, scale 0.01) entries: mean 1, variance 0.01.
CorpusTopics init_lambda(std::size_t topics, std::size_t vocabulary_size, Rng& rng);

/// E_q[log phi] row by row.
Matrix<double> log_expectation(const Matrix<double>& lambda);

/// Mean over k of |new_k - old_k| / old_k.
double mean_relative_change(std::span<const double> old_values, std::span<const double> new_values);

/// Coordinate ascent on (psi, gamma) for one document with the topics fixed.
/// `initial_gamma`, when non-empty, replaces the default start.
EStepResult e_step_document(const Document& doc, const Matrix<double>& log_topics, double alpha,
                            const EStepConfig& config, Rng& rng,
                            std::span<const double> initial_gamma = {});

/// stats[k][v] += n_v * psi[v][k]
void accumulate_statistics(const Document& doc, const Responsibilities& responsibilities,
                           Matrix<double>& stats);

/// lambda = beta + stats
CorpusTopics m_step(const Matrix<double>& stats, double beta);

/// Per-document ELBO terms that do not involve the topics:
/// E[log p(z|theta)] - E[log q(z)] + E[log p(theta|alpha)] - E[log q(theta)].
double document_assignment_elbo(const Document& doc, const DocumentPosterior& posterior, double alpha);

/// E[log p(w|z, phi)] for one document.
double document_word_elbo(const Document& doc, const Responsibilities& responsibilities,
                          const Matrix<double>& log_topics);

/// Full per-document contribution (assignment + word terms).
double document_elbo(const Document& doc, const DocumentPosterior& posterior,
                     const Matrix<double>& log_topics, double alpha);

/// E[log p(phi|beta)] - E[log q(phi|lambda)].
double topic_elbo(const Matrix<double>& lambda, const Matrix<double>& log_topics, double beta);

/// ELBO of the whole corpus; `posteriors` is indexed like corpus.documents().
double elbo(const Corpus& corpus, std::span<const DocumentPosterior> posteriors,
            const CorpusTopics& topics, double alpha, double beta);

/// Runs independent E-steps over `docs`, up to `threads` at a time, and hands
/// each result to `consume` strictly in document order, so any reduction done
/// there is identical for every thread count.
void run_e_steps(std::span<const Document> docs, const Matrix<double>& log_topics, double alpha,
                 const EStepConfig& config, std::size_t threads,
                 const std::function<Rng(std::size_t)>& rng_for,
                 const std::function<std::span<const double>(std::size_t)>& initial_gamma,
                 const std::function<void(std::size_t, EStepResult&)>& consume);

struct Result {
  CorpusTopics topics;
  std::vector<DocTopics> doc_topics;
  TrainReport report;
};

/// E-step over all documents, M-step, ELBO; repeats until the relative ELBO
/// improvement is below elbo_tolerance or max_iterations passes were made.
Result train(const Corpus& corpus, const Config& config, const Checkpoint* checkpoint = nullptr);

}  // namespace lda::vb
