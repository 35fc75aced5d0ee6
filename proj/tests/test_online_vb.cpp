#include <doctest.h>

#include <cmath>

#include "lda/online_vb.hpp"
#include "test_helpers.hpp"

using namespace lda;

namespace {

online_vb::Config small_config(std::size_t topics, std::size_t batch, std::uint64_t seed = 0) {
  online_vb::Config c;
  c.topics = topics;
  c.alpha = 0.1;
  c.beta = 0.05;
  c.batch_size = batch;
  c.tau0 = 1.0;
  c.kappa = 0.7;
  c.seed = seed;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("rho schedule") {
  CHECK(online_vb::rho(1, 0.0, 0.7) == 1.0);
  CHECK(online_vb::rho(0, 1024.0, 0.7) == doctest::Approx(0.0078125).epsilon(1e-12));
  CHECK(online_vb::rho(4, 0.0, 0.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(online_vb::rho(0, 0.0, 0.7), DomainError);
  CHECK_THROWS_AS(online_vb::rho(0, -3.0, 0.7), DomainError);

  for (double kappa : {0.51, 0.7, 1.0}) {
    double prev = 2.0;
    for (std::size_t t = 1; t < 2000; ++t) {
      const double r = online_vb::rho(t, 1.0, kappa);
      CHECK(r > 0.0);
      CHECK(r < prev);
      prev = r;
    }
  }

  // Partial sums of rho keep growing while those of rho^2 level off.
  auto partial = [](std::size_t n, double power) {
    double s = 0.0;
    for (std::size_t t = 1; t <= n; ++t) s += std::pow(online_vb::rho(t, 1.0, 0.7), power);
    return s;
  };
  CHECK(partial(1000000, 1.0) - partial(100000, 1.0) > 100.0);
  CHECK(partial(1000000, 2.0) - partial(100000, 2.0) < 0.1);
}

TEST_CASE("lambda_tilde") {
  Matrix<double> stats(1, 2);
  stats(0, 0) = 1.0;
  const auto t = online_vb::lambda_tilde(stats, 1, 1000, 0.01);
  CHECK(t(0, 0) == doctest::Approx(1000.01));
  CHECK(t(0, 1) == doctest::Approx(0.01));

  const auto zero = online_vb::lambda_tilde(Matrix<double>(2, 3), 5, 100, 0.2);
  for (double x : zero.values()) CHECK(x == 0.2);

  // A batch of B copies of the corpus, scaled by M / (B M), gives beta + stats.
  Rng rng(7);
  Matrix<double> one(3, 4);
  for (double& x : one.values()) x = rng.uniform() * 10.0;
  for (std::size_t copies : {1U, 3U, 8U}) {
    Matrix<double> repeated = one;
    for (double& x : repeated.values()) x *= static_cast<double>(copies);
    const auto lt = online_vb::lambda_tilde(repeated, copies * 6, 6, 0.1);
    for (std::size_t i = 0; i < lt.values().size(); ++i) {
      CHECK(lt.values()[i] == doctest::Approx(0.1 + one.values()[i]).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(online_vb::lambda_tilde(stats, 0, 10, 0.1), std::invalid_argument);
}

TEST_CASE("online_vb::update") {
  Rng gen(30);
  const Corpus corpus = lda::testing::random_corpus(12, 9, 25, gen, false);
  const auto& docs = corpus.documents();

  SUBCASE("rho = 1 replaces lambda with lambda_tilde") {
    auto c = small_config(3, 4);
    c.rho_override = 1.0;
    auto state = online_vb::init_state(3, 9, 1);
    const auto log_topics = vb::log_expectation(state.topics.lambda);
    Matrix<double> stats(3, 9);
    for (std::size_t m = 0; m < 4; ++m) {
      Rng r(0);
      const auto e = vb::e_step_document(docs[m], log_topics, c.alpha, c.e_step, r);
      vb::accumulate_statistics(docs[m], e.posterior.responsibilities, stats);
    }
    const auto expected = online_vb::lambda_tilde(stats, 4, 12, c.beta);
    online_vb::update(state, std::span(docs).first(4), c, 12);
    for (std::size_t i = 0; i < expected.values().size(); ++i) {
      CHECK(state.topics.lambda.values()[i] == doctest::Approx(expected.values()[i]).epsilon(1e-12));
    }
    CHECK(state.updates == 1);
  }
  SUBCASE("rho = 0 leaves lambda unchanged") {
    auto c = small_config(3, 4);
    c.rho_override = 0.0;
    auto state = online_vb::init_state(3, 9, 2);
    const auto before = state.topics.lambda;
    online_vb::update(state, std::span(docs).first(4), c, 12);
    CHECK(state.topics.lambda == before);
  }
  SUBCASE("full-corpus batch with rho = 1 is one batch VB step") {
    auto c = small_config(3, 12);
    c.rho_override = 1.0;
    auto state = online_vb::init_state(3, 9, 3);
    const auto log_topics = vb::log_expectation(state.topics.lambda);
    Matrix<double> stats(3, 9);
    for (const auto& doc : docs) {
      Rng r(0);
      const auto e = vb::e_step_document(doc, log_topics, c.alpha, c.e_step, r);
      vb::accumulate_statistics(doc, e.posterior.responsibilities, stats);
    }
    const auto batch = vb::m_step(stats, c.beta);
    online_vb::update(state, docs, c, docs.size());
    for (std::size_t i = 0; i < batch.lambda.values().size(); ++i) {
      CHECK(std::fabs(state.topics.lambda.values()[i] - batch.lambda.values()[i]) <= 1e-9);
    }
  }
  SUBCASE("lambda stays positive under the schedule") {
    auto c = small_config(4, 3);
    c.tau0 = 0.0;
    auto state = online_vb::init_state(4, 9, 4);
    for (std::size_t begin = 0; begin < docs.size(); begin += 3) {
      const auto report = online_vb::update(state, std::span(docs).subspan(begin, 3), c, 12, begin).report;
      CHECK(report.rho == doctest::Approx(online_vb::rho(state.updates, 0.0, 0.7)));
      for (double x : state.topics.lambda.values()) CHECK(x > 0.0);
    }
    CHECK(state.updates == 4);
  }
  SUBCASE("empty batch is rejected") {
    auto state = online_vb::init_state(2, 9, 0);
    CHECK_THROWS_AS(online_vb::update(state, {}, small_config(2, 1), 12), std::invalid_argument);
  }
}

TEST_CASE("online_vb::train") {
  Rng gen(31);
  const Corpus corpus = lda::testing::random_corpus(23, 10, 30, gen);

  SUBCASE("one update per batch, last batch partial") {
    const auto r = online_vb::train(corpus, small_config(3, 5));
    CHECK(r.state.updates == 5);
    REQUIRE(r.report.iterations.size() == 5);
    CHECK(r.report.iterations.back().documents_processed == 23);
    CHECK(r.report.iterations[1].documents_processed == 10);
    CHECK(r.report.statistic_name == "rho");
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(r.report.iterations[i].statistic == doctest::Approx(online_vb::rho(i + 1, 1.0, 0.7)));
    }
  }
  SUBCASE("batch size 1 and a single batch") {
    CHECK(online_vb::train(corpus, small_config(2, 1)).state.updates == 23);
    CHECK(online_vb::train(corpus, small_config(2, 100)).state.updates == 1);
  }
  SUBCASE("deterministic, thread count independent") {
    auto c = small_config(3, 4, 11);
    const auto a = online_vb::train(corpus, c);
    const auto b = online_vb::train(corpus, c);
    c.threads = 3;
    const auto p = online_vb::train(corpus, c);
    CHECK(a.topics.lambda == b.topics.lambda);
    CHECK(a.topics.lambda == p.topics.lambda);
  }
  SUBCASE("configuration validation") {
    auto c = small_config(3, 4);
    c.kappa = 0.5;
    CHECK_THROWS_AS(online_vb::train(corpus, c), std::invalid_argument);
    c.kappa = 1.01;
    CHECK_THROWS_AS(online_vb::train(corpus, c), std::invalid_argument);
    c.kappa = 1.0;
    CHECK_NOTHROW(online_vb::train(corpus, c));
    c.batch_size = 0;
    CHECK_THROWS_AS(online_vb::train(corpus, c), std::invalid_argument);
    c = small_config(3, 4);
    c.tau0 = -1.0;
    CHECK_THROWS_AS(online_vb::train(corpus, c), std::invalid_argument);
  }
}
