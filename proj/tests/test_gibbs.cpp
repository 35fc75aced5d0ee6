#include <doctest.h>

#include <cmath>

#include "lda/gibbs.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace lda;

namespace {

oracle::TokenCorpus tokens_of(const Corpus& corpus) {
  oracle::TokenCorpus out;
  out.vocabulary_size = corpus.vocabulary_size();
  for (const auto& doc : corpus.documents()) {
    auto& words = out.words.emplace_back();
    for (const auto& [term, count] : doc.entries()) words.insert(words.end(), count, term);
  }
  return out;
}

void check_tables_match_brute_force(const gibbs::State& state, const Corpus& corpus) {
  const auto tables = oracle::count_tables(tokens_of(corpus), state.z, state.topics);
  for (std::size_t m = 0; m < corpus.size(); ++m) {
    long row_total = 0;
    for (std::size_t k = 0; k < state.topics; ++k) {
      REQUIRE(state.doc_topic(m, k) == tables.doc_topic[m][k]);
      row_total += state.doc_topic(m, k);
    }
    REQUIRE(row_total == static_cast<long>(corpus.document(m).token_count()));
  }
  long grand_total = 0;
  for (std::size_t k = 0; k < state.topics; ++k) {
    long row_total = 0;
    for (std::size_t v = 0; v < state.vocabulary_size; ++v) {
      REQUIRE(state.topic_term(k, v) == tables.topic_term[k][v]);
      row_total += state.topic_term(k, v);
    }
    REQUIRE(row_total == state.topic_total[k]);
    grand_total += state.topic_total[k];
  }
  REQUIRE(grand_total == static_cast<long>(corpus.total_tokens()));
}

gibbs::Config config_with(std::size_t topics, double alpha, double beta) {
  gibbs::Config c;
  c.topics = topics;
  c.alpha = alpha;
  c.beta = beta;
  return c;
}

}  // namespace

TEST_CASE("init_state") {
  SUBCASE("K = 1 puts every token in topic 0") {
    const Corpus corpus = lda::testing::make_corpus(3, {{2, 0, 1}, {0, 4, 0}});
    Rng rng(1);
    const auto state = gibbs::init_state(corpus, config_with(1, 0.1, 0.1), rng);
    for (const auto& doc : state.z) {
      for (auto k : doc) CHECK(k == 0);
    }
    CHECK(state.doc_topic(0, 0) == 3);
    CHECK(state.doc_topic(1, 0) == 4);
  }
  SUBCASE("empty corpus") {
    Rng rng(1);
    const auto state = gibbs::init_state(Corpus(), config_with(4, 0.1, 0.1), rng);
    CHECK(state.z.empty());
    CHECK(state.topic_total == std::vector<std::int64_t>(4, 0));
  }
  SUBCASE("tables are consistent with z across 100 seeds") {
    Rng gen(2);
    const Corpus corpus = lda::testing::random_corpus(8, 10, 20, gen);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      check_tables_match_brute_force(gibbs::init_state(corpus, config_with(4, 0.1, 0.1), rng), corpus);
    }
  }
}

TEST_CASE("conditional_weights") {
  // Token of term v = 0 in document 0, already excluded from the counts.
  gibbs::State state;
  state.topics = 2;
  state.vocabulary_size = 3;
  state.alpha = 1.0;
  state.beta = 1.0;
  state.doc_topic = Matrix<std::int32_t>(1, 2);
  state.topic_term = Matrix<std::int32_t>(2, 3);
  state.topic_total = {6, 4};
  state.topic_term(0, 0) = 3;
  state.topic_term(1, 0) = 1;
  state.doc_topic(0, 0) = 2;
  state.doc_topic(0, 1) = 5;

  SUBCASE("hand-substituted example") {
    const auto w = gibbs::conditional_weights(state, 0, 0);
    CHECK(w[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(12.0 / 7.0).epsilon(1e-15));
  }
  SUBCASE("all-zero counts are uniform alpha / V") {
    state.topic_term.fill(0);
    state.doc_topic.fill(0);
    state.topic_total = {0, 0};
    state.alpha = 0.3;
    state.beta = 0.7;
    for (double x : gibbs::conditional_weights(state, 0, 1)) CHECK(x == doctest::Approx(0.3 / 3.0));
  }
  SUBCASE("large beta leaves only the document factor") {
    state.beta = 1e9;
    const auto w = gibbs::conditional_weights(state, 0, 0);
    CHECK(w[0] / w[1] == doctest::Approx(3.0 / 6.0).epsilon(1e-6));
  }
  SUBCASE("negative counts are reported") {
    state.doc_topic(0, 1) = -1;
    CHECK_THROWS_AS(gibbs::conditional_weights(state, 0, 0), gibbs::ConsistencyError);
  }
  SUBCASE("detailed balance smoke test: draws follow the normalized weights") {
    state.alpha = 0.5;
    state.beta = 0.2;
    const auto w = gibbs::conditional_weights(state, 0, 0);
    const double total = w[0] + w[1];
    Rng rng(9);
    int zeros = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) zeros += sample_categorical(w, rng) == 0 ? 1 : 0;
    const double e0 = w[0] / total * n;
    const double e1 = w[1] / total * n;
    const double chi2 = (zeros - e0) * (zeros - e0) / e0 + ((n - zeros) - e1) * ((n - zeros) - e1) / e1;
    CHECK(chi2 < 10.828);
  }
}

TEST_CASE("conditional weights are strictly positive") {
  Rng gen(4);
  const Corpus corpus = lda::testing::random_corpus(6, 8, 20, gen, false);
  Rng rng(5);
  auto state = gibbs::init_state(corpus, config_with(3, 0.01, 0.01), rng);
  for (std::size_t m = 0; m < corpus.size(); ++m) {
    for (TermId v = 0; v < 8; ++v) {
      for (double x : gibbs::conditional_weights(state, m, v)) CHECK(x > 0.0);
    }
  }
}

TEST_CASE("sweep matches the straight-line oracle token for token") {
  const Corpus corpus = lda::testing::make_corpus(3, {{2, 0, 1}, {0, 2, 1}});
  const auto tokens = tokens_of(corpus);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    auto state = gibbs::init_state(corpus, config_with(2, 1.0, 1.0), rng);
    auto oracle_z = state.z;
    Rng oracle_rng = rng;
    for (int s = 0; s < 3; ++s) {
      gibbs::sweep(state, corpus, rng);
      oracle::gibbs_sweep(tokens, oracle_z, 2, 1.0, 1.0, oracle_rng);
      REQUIRE(state.z == oracle_z);
      check_tables_match_brute_force(state, corpus);
    }
  }
}

TEST_CASE("sweep edge cases and conservation") {
  SUBCASE("zero-token corpus") {
    const Corpus corpus = lda::testing::make_corpus(3, {{0, 0, 0}, {0, 0, 0}});
    Rng rng(1);
    auto state = gibbs::init_state(corpus, config_with(3, 0.1, 0.1), rng);
    CHECK(gibbs::sweep(state, corpus, rng) == 0.0);
  }
  SUBCASE("K = 1 never changes") {
    Rng gen(3);
    const Corpus corpus = lda::testing::random_corpus(5, 6, 10, gen);
    Rng rng(1);
    auto state = gibbs::init_state(corpus, config_with(1, 0.1, 0.1), rng);
    for (int i = 0; i < 5; ++i) CHECK(gibbs::sweep(state, corpus, rng) == 0.0);
  }
  SUBCASE("tables stay consistent after every sweep") {
    Rng gen(12);
    for (int trial = 0; trial < 20; ++trial) {
      const Corpus corpus = lda::testing::random_corpus(1 + gen.uniform_index(10), 1 + gen.uniform_index(15), 30, gen);
      Rng rng(trial);
      auto state = gibbs::init_state(corpus, config_with(1 + gen.uniform_index(5), 0.05, 0.05), rng);
      for (int s = 0; s < 5; ++s) {
        const double changed = gibbs::sweep(state, corpus, rng);
        CHECK(changed >= 0.0);
        CHECK(changed <= 1.0);
        check_tables_match_brute_force(state, corpus);
      }
    }
  }
  SUBCASE("fixed seed is reproducible") {
    Rng gen(13);
    const Corpus corpus = lda::testing::random_corpus(10, 12, 30, gen);
    Rng a(5);
    Rng b(5);
    auto sa = gibbs::init_state(corpus, config_with(4, 0.1, 0.1), a);
    auto sb = gibbs::init_state(corpus, config_with(4, 0.1, 0.1), b);
    for (int s = 0; s < 3; ++s) CHECK(gibbs::sweep(sa, corpus, a) == gibbs::sweep(sb, corpus, b));
    CHECK(sa.z == sb.z);
  }
}

TEST_CASE("point estimates") {
  SUBCASE("phi for 'cat cat dog' with K = 1, beta = 1") {
    const Corpus corpus = lda::testing::make_corpus(2, {{2, 1}});
    Rng rng(1);
    const auto state = gibbs::init_state(corpus, config_with(1, 1.0, 1.0), rng);
    const auto phi = gibbs::estimate_phi(state);
    CHECK(phi(0, 0) == doctest::Approx(0.6));
    CHECK(phi(0, 1) == doctest::Approx(0.4));
  }
  SUBCASE("all-zero counts give uniform rows") {
    const Corpus corpus = lda::testing::make_corpus(4, {{0, 0, 0, 0}});
    Rng rng(1);
    const auto state = gibbs::init_state(corpus, config_with(3, 0.5, 0.5), rng);
    const auto phi = gibbs::estimate_phi(state);
    for (double x : phi.values()) CHECK(x == doctest::Approx(0.25));
    const auto theta = gibbs::estimate_theta(state);
    for (double x : theta.values()) CHECK(x == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("theta for a document entirely in topic 2") {
    gibbs::State state;
    state.topics = 3;
    state.vocabulary_size = 1;
    state.alpha = 0.5;
    state.beta = 0.1;
    state.z = {{2, 2, 2, 2}};
    state.doc_topic = Matrix<std::int32_t>(1, 3);
    state.doc_topic(0, 2) = 4;
    state.topic_term = Matrix<std::int32_t>(3, 1);
    state.topic_term(2, 0) = 4;
    state.topic_total = {0, 0, 4};
    const auto theta = gibbs::estimate_theta(state);
    CHECK(theta(0, 0) == doctest::Approx(0.5 / 5.5));
    CHECK(theta(0, 1) == doctest::Approx(0.5 / 5.5));
    CHECK(theta(0, 2) == doctest::Approx(4.5 / 5.5));
  }
  SUBCASE("rows sum to one for random states") {
    Rng gen(31);
    for (int trial = 0; trial < 100; ++trial) {
      const Corpus corpus = lda::testing::random_corpus(1 + gen.uniform_index(6), 1 + gen.uniform_index(10), 20, gen);
      Rng rng(trial);
      const auto state = gibbs::init_state(corpus, config_with(1 + gen.uniform_index(5), 0.01, 0.01), rng);
      for (const auto& matrix : {gibbs::estimate_phi(state), gibbs::estimate_theta(state)}) {
        for (std::size_t r = 0; r < matrix.rows(); ++r) {
          double total = 0.0;
          for (double x : matrix.row(r)) total += x;
          CHECK(std::fabs(total - 1.0) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("gibbs::train") {
  Rng gen(40);
  const Corpus corpus = lda::testing::random_corpus(20, 15, 30, gen);
  SUBCASE("max_sweeps = 1 records exactly one sweep") {
    auto c = config_with(3, 0.1, 0.1);
    c.max_sweeps = 1;
    c.z_change_threshold = 0.0;
    const auto r = gibbs::train(corpus, c);
    CHECK(r.report.iterations.size() == 1);
  }
  SUBCASE("K = 1 converges after the first sweep") {
    const auto r = gibbs::train(corpus, config_with(1, 0.1, 0.1));
    REQUIRE(r.report.iterations.size() == 1);
    CHECK(r.report.iterations[0].statistic == 0.0);
    CHECK(r.report.converged);
  }
  SUBCASE("invalid configuration") {
    auto c = config_with(0, 0.1, 0.1);
    CHECK_THROWS_AS(gibbs::train(corpus, c), std::invalid_argument);
    c = config_with(2, 0.1, 0.1);
    c.max_sweeps = 0;
    CHECK_THROWS_AS(gibbs::train(corpus, c), std::invalid_argument);
  }
  SUBCASE("checkpoints run on schedule and the clock is monotone") {
    auto c = config_with(3, 0.1, 0.1);
    c.max_sweeps = 7;
    c.z_change_threshold = 0.0;
    int calls = 0;
    Checkpoint cp{3, [&](const Matrix<double>&) { return static_cast<double>(++calls); }};
    const auto r = gibbs::train(corpus, c, &cp);
    CHECK(calls == 3);  // sweeps 3, 6 and the last one
    CHECK(r.report.iterations[2].perplexity.has_value());
    CHECK_FALSE(r.report.iterations[3].perplexity.has_value());
    CHECK(r.report.iterations[6].perplexity.has_value());
    for (std::size_t i = 1; i < r.report.iterations.size(); ++i) {
      CHECK(r.report.iterations[i].wall_seconds >= r.report.iterations[i - 1].wall_seconds);
    }
  }
}
