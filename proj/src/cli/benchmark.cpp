#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>
#include <utility>

#include <spdlog/spdlog.h>

#include "lda/cli/commands.hpp"
#include "lda/cli/model_io.hpp"
#include "lda/eval.hpp"

namespace lda::cli {

namespace {

std::string sanitize(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

std::string optional_field(const std::optional<double>& value) { return value ? format_double(*value) : ""; }

using CellKey = std::pair<std::string, std::size_t>;

// Keys of rows already present in a previous (possibly interrupted) run.
std::set<CellKey> read_completed(const std::filesystem::path& path, bool& any_success) {
  std::set<CellKey> done;
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) return done;
  if (line != kBenchmarkHeader) {
    throw ConfigError("existing benchmark file " + path.string() + " has an unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 2) continue;
    try {
      done.emplace(fields[0], std::stoul(fields[1]));
    } catch (const std::exception&) {
      continue;
    }
    // A truncated last line has fewer than six fields; the error column is the sixth.
    if (fields.size() >= 4 && !fields[3].empty() && (fields.size() < 6 || fields[5].empty())) any_success = true;
  }
  return done;
}

}  // namespace

std::string format_metrics_row(const MetricsRow& row) {
  return row.algorithm + ',' + std::to_string(row.documents) + ',' + optional_field(row.wall_seconds) + ',' +
         optional_field(row.perplexity) + ',' + optional_field(row.convergence_stat) + ',' + sanitize(row.error);
}

MetricsRow run_cell(Algorithm algorithm, const Corpus& train, const Corpus& held, const RunConfig& config) {
  MetricsRow row;
  row.algorithm = to_string(algorithm);
  row.documents = train.size();
  try {
    const auto e_step = config.e_step_config();
    switch (algorithm) {
      case Algorithm::gibbs: {
        const auto result = gibbs::train(train, config.gibbs_config());
        const TopicModelFile model{ModelKind::phi, result.phi};
        row.perplexity =
            eval::held_out_perplexity_log_topics(held, topic_log_weights(model), config.alpha, e_step, config.seed)
                .perplexity;
        row.wall_seconds = result.report.wall_seconds;
        row.convergence_stat = result.report.iterations.back().statistic;
        break;
      }
      case Algorithm::vb: {
        const auto result = vb::train(train, config.vb_config());
        row.perplexity = eval::held_out_perplexity(held, result.topics, config.alpha, e_step, config.seed).perplexity;
        row.wall_seconds = result.report.wall_seconds;
        row.convergence_stat = result.report.iterations.back().statistic;
        break;
      }
      case Algorithm::online_vb: {
        const auto result = online_vb::train(train, config.online_config(train.size()));
        row.perplexity = eval::held_out_perplexity(held, result.topics, config.alpha, e_step, config.seed).perplexity;
        row.wall_seconds = result.report.wall_seconds;
        if (!result.report.iterations.empty()) row.convergence_stat = result.report.iterations.back().statistic;
        break;
      }
    }
  } catch (const std::exception& e) {
    row.wall_seconds.reset();
    row.perplexity.reset();
    row.convergence_stat.reset();
    row.error = e.what();
  }
  return row;
}

int cmd_benchmark(const RunConfig& config) {
  if (config.grid.empty()) throw ConfigError("--grid must list at least one training-set size");
  if (config.algorithms.empty()) throw ConfigError("--algorithm must name at least one algorithm");
  if (config.bow.empty()) throw ConfigError("--bow is required");
  if (config.vocab.empty()) throw ConfigError("--vocab is required");
  for (const auto& path : {config.bow, config.vocab}) {
    if (!std::filesystem::exists(path)) throw ConfigError("file not found: " + path.string());
  }
  if (!config.held_out.empty() && !std::filesystem::exists(config.held_out)) {
    throw ConfigError("file not found: " + config.held_out.string());
  }

  auto vocabulary = std::make_shared<const Vocabulary>(load_vocabulary(config.vocab));
  const Corpus corpus = load_bow(config.bow, vocabulary);
  Corpus train;
  Corpus held;
  if (!config.held_out.empty()) {
    train = corpus;
    held = load_bow(config.held_out, vocabulary);
  } else {
    if (config.held_out_documents > corpus.size()) throw ConfigError("corpus too small for the held-out split");
    Rng rng(config.seed);
    std::tie(train, held) = split_held_out(corpus, config.held_out_documents, rng);
  }
  if (held.total_tokens() == 0) throw ConfigError("held-out set has no tokens");

  std::filesystem::create_directories(config.out);
  const auto csv_path = config.out / "benchmark.csv";
  bool any_success = false;
  const auto done = read_completed(csv_path, any_success);
  const bool fresh = done.empty() && (!std::filesystem::exists(csv_path) || std::filesystem::file_size(csv_path) == 0);
  std::ofstream csv(csv_path, std::ios::app | std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  if (fresh) csv << kBenchmarkHeader << '\n' << std::flush;

  struct Cell {
    Algorithm algorithm;
    std::size_t documents;
  };
  std::vector<Cell> pending;
  for (std::size_t size : config.grid) {
    for (Algorithm algorithm : config.algorithms) {
      if (done.count({to_string(algorithm), size}) > 0) {
        spdlog::info("skipping {} at {} documents (already recorded)", to_string(algorithm), size);
        continue;
      }
      pending.push_back({algorithm, size});
    }
  }

  auto run_pending = [&](const Cell& cell) {
    if (cell.documents > train.size()) {
      MetricsRow row{to_string(cell.algorithm), cell.documents, {}, {}, {}, {}};
      row.error = "grid size " + std::to_string(cell.documents) + " exceeds " + std::to_string(train.size()) +
                  " training documents";
      return row;
    }
    spdlog::info("training {} on {} documents", to_string(cell.algorithm), cell.documents);
    return run_cell(cell.algorithm, train.prefix(cell.documents), held, config);
  };
  auto emit = [&](const MetricsRow& row) {
    csv << format_metrics_row(row) << '\n' << std::flush;
    if (row.error.empty()) any_success = true;
  };

  if (config.parallel_cells) {
    std::vector<std::future<MetricsRow>> futures;
    for (const auto& cell : pending) futures.push_back(std::async(std::launch::async, run_pending, cell));
    for (auto& f : futures) emit(f.get());
  } else {
    for (const auto& cell : pending) emit(run_pending(cell));
  }
  std::cout << "wrote " << csv_path.string() << '\n';
  return (any_success || pending.empty()) ? 0 : 1;
}

}  // namespace lda::cli
