#include "lda/gibbs.hpp"

#include <cmath>
#include <string>

namespace lda::gibbs {

void Config::validate() const {
  if (topics < 1) throw std::invalid_argument("gibbs: topics must be >= 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("gibbs: alpha and beta must be positive");
  if (max_sweeps < 1) throw std::invalid_argument("gibbs: max_sweeps must be >= 1");
  if (!(z_change_threshold >= 0.0 && z_change_threshold <= 1.0)) {
    throw std::invalid_argument("gibbs: z_change_threshold must lie in [0, 1]");
  }
}

State init_state(const Corpus& corpus, const Config& config, Rng& rng) {
  config.validate();
  const std::size_t k_topics = config.topics;
  State state;
  state.topics = k_topics;
  state.vocabulary_size = corpus.vocabulary_size();
  state.alpha = config.alpha;
  state.beta = config.beta;
  state.z.resize(corpus.size());
  state.doc_topic = Matrix<std::int32_t>(corpus.size(), k_topics);
  state.topic_term = Matrix<std::int32_t>(k_topics, state.vocabulary_size);
  state.topic_total.assign(k_topics, 0);

  for (std::size_t m = 0; m < corpus.size(); ++m) {
    auto& z = state.z[m];
    z.reserve(corpus.document(m).token_count());
    for (const auto& [term, count] : corpus.document(m).entries()) {
      for (std::uint32_t i = 0; i < count; ++i) {
        const auto k = static_cast<std::uint32_t>(rng.uniform_index(k_topics));
        z.push_back(k);
        ++state.doc_topic(m, k);
        ++state.topic_term(k, term);
        ++state.topic_total[k];
      }
    }
  }
  return state;
}

void conditional_weights(const State& state, std::size_t doc, TermId term, std::span<double> out) {
  const double v_beta = static_cast<double>(state.vocabulary_size) * state.beta;
  for (std::size_t k = 0; k < state.topics; ++k) {
    const std::int32_t n_kv = state.topic_term(k, term);
    const std::int64_t n_k = state.topic_total[k];
    const std::int32_t n_mk = state.doc_topic(doc, k);
    if (n_kv < 0 || n_k < 0 || n_mk < 0) {
      throw ConsistencyError("gibbs: negative count for topic " + std::to_string(k) + " in document " +
                             std::to_string(doc));
    }
    out[k] = (n_kv + state.beta) / (static_cast<double>(n_k) + v_beta) * (n_mk + state.alpha);
  }
}

std::vector<double> conditional_weights(const State& state, std::size_t doc, TermId term) {
  std::vector<double> out(state.topics);
  conditional_weights(state, doc, term, out);
  return out;
}

double sweep(State& state, const Corpus& corpus, Rng& rng) {
  std::vector<double> weights(state.topics);
  std::uint64_t changed = 0;
  std::uint64_t total = 0;
  for (std::size_t m = 0; m < corpus.size(); ++m) {
    auto& z = state.z[m];
    std::size_t n = 0;
    for (const auto& [term, count] : corpus.document(m).entries()) {
      for (std::uint32_t i = 0; i < count; ++i, ++n) {
        const std::uint32_t old_topic = z[n];
        --state.doc_topic(m, old_topic);
        --state.topic_term(old_topic, term);
        --state.topic_total[old_topic];

        conditional_weights(state, m, term, weights);
        const auto new_topic = static_cast<std::uint32_t>(sample_categorical(weights, rng));

        ++state.doc_topic(m, new_topic);
        ++state.topic_term(new_topic, term);
        ++state.topic_total[new_topic];
        z[n] = new_topic;
        if (new_topic != old_topic) ++changed;
      }
    }
    total += n;
  }
  return total == 0 ? 0.0 : static_cast<double>(changed) / static_cast<double>(total);
}

Matrix<double> estimate_phi(const State& state) {
  Matrix<double> phi(state.topics, state.vocabulary_size);
  const double v_beta = static_cast<double>(state.vocabulary_size) * state.beta;
  for (std::size_t k = 0; k < state.topics; ++k) {
    const double denom = static_cast<double>(state.topic_total[k]) + v_beta;
    for (std::size_t v = 0; v < state.vocabulary_size; ++v) {
      phi(k, v) = (state.topic_term(k, v) + state.beta) / denom;
    }
  }
  return phi;
}

Matrix<double> estimate_theta(const State& state) {
  Matrix<double> theta(state.z.size(), state.topics);
  const double k_alpha = static_cast<double>(state.topics) * state.alpha;
  for (std::size_t m = 0; m < state.z.size(); ++m) {
    const double denom = static_cast<double>(state.z[m].size()) + k_alpha;
    for (std::size_t k = 0; k < state.topics; ++k) {
      theta(m, k) = (state.doc_topic(m, k) + state.alpha) / denom;
    }
  }
  return theta;
}

namespace {

Matrix<double> log_of(const Matrix<double>& phi) {
  Matrix<double> out(phi.rows(), phi.cols());
  for (std::size_t i = 0; i < phi.values().size(); ++i) out.values()[i] = std::log(phi.values()[i]);
  return out;
}

}  // namespace

Result train(const Corpus& corpus, const Config& config, const Checkpoint* checkpoint) {
  config.validate();
  warn_empty_documents(corpus.empty_documents(), "gibbs");
  Rng rng(config.seed);
  Stopwatch clock;
  State state = init_state(corpus, config, rng);

  TrainReport report;
  report.statistic_name = "z_change";
  for (std::size_t s = 1; s <= config.max_sweeps; ++s) {
    const double changed = sweep(state, corpus, rng);
    IterationRecord record;
    record.index = s;
    record.documents_processed = corpus.size() * s;
    record.statistic = changed;
    report.converged = changed < config.z_change_threshold;
    const bool last = report.converged || s == config.max_sweeps;
    record.wall_seconds = clock.elapsed();
    if (checkpoint != nullptr && checkpoint->due(s, last)) {
      run_checkpoint(checkpoint, log_of(estimate_phi(state)), last, record, clock);
    }
    report.iterations.push_back(record);
    if (last) break;
  }
  Result result{estimate_phi(state), estimate_theta(state), std::move(report), std::move(state)};
  result.report.wall_seconds = clock.elapsed();
  return result;
}

}  // namespace lda::gibbs
