#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lda/gibbs.hpp"
#include "lda/online_vb.hpp"
#include "lda/vb.hpp"

namespace lda::cli {

// Bad flags, missing files, inconsistent inputs. Maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algorithm { gibbs, vb, online_vb };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& name);

struct RunConfig {
  Algorithm algorithm = Algorithm::vb;
  std::vector<Algorithm> algorithms{Algorithm::gibbs, Algorithm::vb, Algorithm::online_vb};  // benchmark
  std::filesystem::path bow;
  std::filesystem::path vocab;
  std::filesystem::path held_out;
  std::filesystem::path model;
  std::filesystem::path out = ".";

  std::size_t topics = 100;
  bool topics_explicit = false;
  double alpha = 0.01;
  double beta = 0.01;
  std::uint64_t seed = 0;

  double e_tol = 0.001;
  std::size_t e_max_iter = 100;
  double elbo_tol = 0.001;
  std::size_t max_iter = 100;

  double z_threshold = 0.20;
  std::size_t max_sweeps = 1000;

  std::size_t batch_size = 100;
  double tau0 = 1024.0;
  double kappa = 0.7;
  std::size_t corpus_size = 0;  // 0: training corpus size

  std::size_t checkpoint_every = 0;
  std::vector<std::size_t> grid{1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000};
  std::size_t held_out_documents = 100;  // benchmark split when --held-out is absent
  bool parallel_cells = false;
  std::size_t top_words = 20;

  gibbs::Config gibbs_config() const;
  vb::Config vb_config() const;
  online_vb::Config online_config(std::size_t training_documents) const;
  vb::EStepConfig e_step_config() const;
};

struct MetricsRow {
  std::string algorithm;
  std::size_t documents = 0;
  std::optional<double> wall_seconds;
  std::optional<double> perplexity;
  std::optional<double> convergence_stat;  // final z-change, ELBO, or rho
  std::string error;
};

inline constexpr const char* kBenchmarkHeader = "algorithm,documents,wall_seconds,perplexity,convergence_stat,error";

std::string format_metrics_row(const MetricsRow& row);

/// Trains one algorithm on `train` and scores it on `held`. Failures are
/// captured in MetricsRow::error rather than thrown.
MetricsRow run_cell(Algorithm algorithm, const Corpus& train, const Corpus& held, const RunConfig& config);

// Each returns a process exit status: 0 ok, 1 runtime failure. Configuration
// problems are thrown as ConfigError (status 2 through run()).
int cmd_train(const RunConfig& config);
int cmd_eval(const RunConfig& config);
int cmd_benchmark(const RunConfig& config);

struct GenerateOptions {
  SyntheticSpec spec;
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
};
int cmd_generate(const GenerateOptions& options);

/// Parses argv and dispatches to a subcommand.
int run(int argc, const char* const* argv);

}  // namespace lda::cli
