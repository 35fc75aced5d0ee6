#include "lda/cli/commands.hpp"

#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "lda/cli/model_io.hpp"
#include "lda/eval.hpp"

namespace lda::cli {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::gibbs:
      return "gibbs";
    case Algorithm::vb:
      return "vb";
    case Algorithm::online_vb:
      return "online-vb";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "gibbs") return Algorithm::gibbs;
  if (name == "vb") return Algorithm::vb;
  if (name == "online-vb") return Algorithm::online_vb;
  throw ConfigError("unknown algorithm '" + name + "' (expected gibbs, vb or online-vb)");
}

vb::EStepConfig RunConfig::e_step_config() const {
  vb::EStepConfig e;
  e.tolerance = e_tol;
  e.max_iterations = e_max_iter;
  return e;
}

gibbs::Config RunConfig::gibbs_config() const {
  gibbs::Config c;
  c.topics = topics;
  c.alpha = alpha;
  c.beta = beta;
  c.max_sweeps = max_sweeps;
  c.z_change_threshold = z_threshold;
  c.seed = seed;
  return c;
}

vb::Config RunConfig::vb_config() const {
  vb::Config c;
  c.topics = topics;
  c.alpha = alpha;
  c.beta = beta;
  c.e_step = e_step_config();
  c.elbo_tolerance = elbo_tol;
  c.max_iterations = max_iter;
  c.seed = seed;
  return c;
}

online_vb::Config RunConfig::online_config(std::size_t training_documents) const {
  online_vb::Config c;
  c.topics = topics;
  c.alpha = alpha;
  c.beta = beta;
  c.batch_size = batch_size;
  c.tau0 = tau0;
  c.kappa = kappa;
  c.corpus_size = corpus_size > 0 ? corpus_size : training_documents;
  c.e_step = e_step_config();
  c.seed = seed;
  return c;
}

namespace {

void require_file(const std::filesystem::path& path, const char* flag) {
  if (path.empty()) throw ConfigError(std::string(flag) + " is required");
  if (!std::filesystem::is_regular_file(path)) throw ConfigError("file not found: " + path.string());
}

// Translates module precondition failures into configuration errors.
template <typename Fn>
void validate_as_config(Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

int cmd_train(const RunConfig& config) {
  require_file(config.bow, "--bow");
  require_file(config.vocab, "--vocab");
  if (!config.held_out.empty()) require_file(config.held_out, "--held-out");
  validate_as_config([&] {
    config.gibbs_config().validate();
    config.vb_config().validate();
    config.online_config(1).validate();
  });

  auto vocabulary = std::make_shared<const Vocabulary>(load_vocabulary(config.vocab));
  const Corpus corpus = load_bow(config.bow, vocabulary);
  std::optional<Corpus> held;
  if (!config.held_out.empty()) {
    held = load_bow(config.held_out, vocabulary);
    if (held->total_tokens() == 0) throw ConfigError("held-out set has no tokens");
  }

  Checkpoint checkpoint;
  if (held && config.checkpoint_every > 0) {
    checkpoint.every = config.checkpoint_every;
    checkpoint.evaluate = [&](const Matrix<double>& log_topics) {
      return eval::held_out_perplexity_log_topics(*held, log_topics, config.alpha, config.e_step_config(), config.seed)
          .perplexity;
    };
  }

  Matrix<double> values;
  ModelKind kind = ModelKind::lambda;
  TrainReport report;
  switch (config.algorithm) {
    case Algorithm::gibbs: {
      auto result = gibbs::train(corpus, config.gibbs_config(), &checkpoint);
      values = std::move(result.phi);
      kind = ModelKind::phi;
      report = std::move(result.report);
      break;
    }
    case Algorithm::vb: {
      auto result = vb::train(corpus, config.vb_config(), &checkpoint);
      values = std::move(result.topics.lambda);
      report = std::move(result.report);
      break;
    }
    case Algorithm::online_vb: {
      auto result = online_vb::train(corpus, config.online_config(corpus.size()), &checkpoint);
      values = std::move(result.topics.lambda);
      report = std::move(result.report);
      break;
    }
  }

  std::filesystem::create_directories(config.out);
  const TopicModelFile model{kind, std::move(values)};
  const auto model_path = config.out / ("model." + to_string(kind) + ".tsv");
  save_model(model_path, model.values, kind);
  {
    auto out = open_output(config.out / "topics.json");
    out << top_words_json(topic_word_weights(model), *vocabulary, config.top_words).dump(2) << '\n';
  }
  {
    auto out = open_output(config.out / "report.csv");
    write_report_csv(out, to_string(config.algorithm), report);
  }
  std::cout << to_string(config.algorithm) << ": " << report.iterations.size() << " iteration(s), "
            << (report.converged ? "converged" : "not converged") << ", " << format_double(report.wall_seconds)
            << " s\n"
            << "model written to " << model_path.string() << '\n';
  return 0;
}

int cmd_eval(const RunConfig& config) {
  require_file(config.held_out, "--held-out");
  require_file(config.vocab, "--vocab");
  std::filesystem::path model_path = config.model;
  if (model_path.empty()) {
    model_path = config.out / "model.lambda.tsv";
    if (!std::filesystem::exists(model_path)) model_path = config.out / "model.phi.tsv";
  }
  require_file(model_path, "--model");
  validate_as_config([&] { config.e_step_config().validate(); });
  if (!(config.alpha > 0.0)) throw ConfigError("--alpha must be positive");

  const TopicModelFile model = load_model(model_path);
  if (config.topics_explicit && config.topics != model.values.rows()) {
    throw ConfigError("--topics " + std::to_string(config.topics) + " does not match the model's K=" +
                      std::to_string(model.values.rows()));
  }
  auto vocabulary = std::make_shared<const Vocabulary>(load_vocabulary(config.vocab));
  if (vocabulary->size() != model.values.cols()) {
    throw ConfigError("vocabulary has " + std::to_string(vocabulary->size()) + " terms but the model has V=" +
                      std::to_string(model.values.cols()));
  }
  const Corpus held = load_bow(config.held_out, vocabulary);
  if (held.total_tokens() == 0) throw ConfigError("held-out set has no tokens");

  const auto result = eval::held_out_perplexity_log_topics(held, topic_log_weights(model), config.alpha,
                                                           config.e_step_config(), config.seed);
  nlohmann::json json{{"perplexity", result.perplexity},
                      {"per_word_bound", result.per_word_bound},
                      {"total_tokens", result.total_tokens},
                      {"per_doc_bounds", result.per_doc_bounds}};
  std::filesystem::create_directories(config.out);
  auto out = open_output(config.out / "eval.json");
  out << json.dump(2) << '\n';
  std::cout << format_double(result.perplexity) << '\n';
  return 0;
}

int cmd_generate(const GenerateOptions& options) {
  Rng rng(options.seed);
  SyntheticCorpus synthetic;
  validate_as_config([&] { synthetic = generate_synthetic(options.spec, rng); });
  std::filesystem::create_directories(options.out);
  {
    auto out = open_output(options.out / "vocab.txt");
    write_vocabulary(out, synthetic.corpus.vocabulary());
  }
  {
    auto out = open_output(options.out / "corpus.bow");
    write_bow(out, synthetic.corpus);
  }
  save_model(options.out / "truth.phi.tsv", synthetic.truth.phi, ModelKind::phi);
  std::cout << "wrote " << synthetic.corpus.size() << " documents to " << (options.out / "corpus.bow").string()
            << '\n';
  return 0;
}

namespace {

void add_common(CLI::App& app, RunConfig& c) {
  app.add_option("--topics", c.topics, "Number of topics K")->capture_default_str();
  app.add_option("--alpha", c.alpha, "Document-topic Dirichlet prior")->capture_default_str();
  app.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app.add_option("--out", c.out, "Output directory")->capture_default_str();
  app.add_option("--vocab", c.vocab, "Vocabulary file, one term per line");
  app.add_option("--e-tol", c.e_tol, "E-step relative gamma change threshold")->capture_default_str();
  app.add_option("--e-max-iter", c.e_max_iter, "E-step iteration cap")->capture_default_str();
}

void add_training(CLI::App& app, RunConfig& c) {
  app.add_option("--bow", c.bow, "Training corpus, 'docId termId count' lines");
  app.add_option("--held-out", c.held_out, "Held-out corpus for perplexity");
  app.add_option("--beta", c.beta, "Topic-word Dirichlet prior")->capture_default_str();
  app.add_option("--elbo-tol", c.elbo_tol, "VB relative ELBO improvement threshold")->capture_default_str();
  app.add_option("--max-iter", c.max_iter, "VB outer iteration cap")->capture_default_str();
  app.add_option("--z-threshold", c.z_threshold, "Gibbs changed-assignment fraction threshold")->capture_default_str();
  app.add_option("--max-sweeps", c.max_sweeps, "Gibbs sweep cap")->capture_default_str();
  app.add_option("--batch-size", c.batch_size, "Online VB documents per batch")->capture_default_str();
  app.add_option("--tau0", c.tau0, "Online VB delay tau0")->capture_default_str();
  app.add_option("--kappa", c.kappa, "Online VB forgetting rate in (0.5, 1]")->capture_default_str();
  app.add_option("--corpus-size", c.corpus_size, "Declared stream size for online VB (default: training documents)")
      ->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"LDA topic models: collapsed Gibbs sampling, batch VB and online VB"};
  app.require_subcommand(1);
  RunConfig config;
  GenerateOptions generate;
  std::string algorithm = "vb";
  std::vector<std::string> algorithms{"gibbs", "vb", "online-vb"};

  auto* train = app.add_subcommand("train", "Train a model and write model, topics and report files");
  add_common(*train, config);
  add_training(*train, config);
  train->add_option("--algorithm", algorithm, "gibbs, vb or online-vb")->capture_default_str();
  train->add_option("--checkpoint-every", config.checkpoint_every,
                    "Held-out perplexity every N iterations/batches (0: off)")->capture_default_str();
  train->add_option("--top-words", config.top_words, "Words per topic in topics.json")->capture_default_str();

  auto* evaluate = app.add_subcommand("eval", "Held-out perplexity of a trained model");
  add_common(*evaluate, config);
  evaluate->add_option("--held-out", config.held_out, "Held-out corpus");
  evaluate->add_option("--model", config.model, "Model file (default: <out>/model.lambda.tsv or model.phi.tsv)");

  auto* bench = app.add_subcommand("benchmark", "Train and evaluate each algorithm over a grid of corpus sizes");
  add_common(*bench, config);
  add_training(*bench, config);
  bench->add_option("--algorithm", algorithms, "Comma-separated algorithms")->delimiter(',')->capture_default_str();
  bench->add_option("--grid", config.grid, "Comma-separated training-set sizes")->delimiter(',')->capture_default_str();
  bench->add_option("--held-out-docs", config.held_out_documents,
                    "Documents split off for evaluation when --held-out is absent")->capture_default_str();
  bench->add_flag("--parallel-cells", config.parallel_cells, "Run grid cells concurrently");

  auto* gen = app.add_subcommand("generate", "Sample a synthetic corpus from the LDA generative process");
  gen->add_option("--topics", generate.spec.topics, "Number of topics")->capture_default_str();
  gen->add_option("--vocab-size", generate.spec.vocabulary_size, "Vocabulary size")->capture_default_str();
  gen->add_option("--docs", generate.spec.documents, "Number of documents")->capture_default_str();
  gen->add_option("--doc-length", generate.spec.document_length, "Tokens per document")->capture_default_str();
  gen->add_option("--alpha", generate.spec.alpha, "Document-topic concentration")->capture_default_str();
  gen->add_option("--beta", generate.spec.beta, "Topic-word concentration")->capture_default_str();
  gen->add_option("--seed", generate.seed, "Random seed")->capture_default_str();
  gen->add_option("--out", generate.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    config.topics_explicit = app.got_subcommand(evaluate) && evaluate->count("--topics") > 0;
    if (app.got_subcommand(gen)) return cmd_generate(generate);
    if (app.got_subcommand(train)) {
      config.algorithm = parse_algorithm(algorithm);
      return cmd_train(config);
    }
    if (app.got_subcommand(evaluate)) return cmd_eval(config);
    config.algorithms.clear();
    for (const auto& name : algorithms) config.algorithms.push_back(parse_algorithm(name));
    return cmd_benchmark(config);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const IngestionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace lda::cli
