#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lda/matrix.hpp"

namespace lda {

// One row per sweep (Gibbs), outer iteration (VB) or mini-batch (online VB).
struct IterationRecord {
  std::size_t index = 0;  // 1-based
  std::size_t documents_processed = 0;
  double wall_seconds = 0.0;  // cumulative training time, checkpoints excluded
  double statistic = 0.0;     // z-change fraction, ELBO, or rho
  std::optional<double> perplexity;
};

struct TrainReport {
  std::string statistic_name;
  std::vector<IterationRecord> iterations;
  bool converged = false;
  double wall_seconds = 0.0;
};

// Held-out evaluation hook. `evaluate` receives the current E[log phi]
// (K x V) and returns a perplexity. Called every `every` iterations/batches
// and after the final one; 0 disables it.
struct Checkpoint {
  std::size_t every = 0;
  std::function<double(const Matrix<double>& log_topics)> evaluate;

  bool due(std::size_t index, bool last) const {
    return every > 0 && evaluate && (last || index % every == 0);
  }
};

// Monotonic stopwatch that can be paused around checkpoint evaluation.
class Stopwatch {
 public:
  Stopwatch() : start_(Clock::now()) {}

  double elapsed() const {
    const auto now = paused_ ? pause_start_ : Clock::now();
    return std::chrono::duration<double>(now - start_ - excluded_).count();
  }
  void pause() {
    if (!paused_) {
      pause_start_ = Clock::now();
      paused_ = true;
    }
  }
  void resume() {
    if (paused_) {
      excluded_ += Clock::now() - pause_start_;
      paused_ = false;
    }
  }

 private:
  using Clock = std::chrono::steady_clock;
  Clock::time_point start_;
  Clock::time_point pause_start_{};
  Clock::duration excluded_{};
  bool paused_ = false;
};

/// Runs the checkpoint if due, with the clock paused, and stores the result in `record`.
void run_checkpoint(const Checkpoint* checkpoint, const Matrix<double>& log_topics, bool last,
                    IterationRecord& record, Stopwatch& clock);

/// Worker count for E-steps, read from LDA_TRIO_THREADS (absent or invalid -> 1).
std::size_t threads_from_environment();

/// Warns once per training run about zero-token documents.
void warn_empty_documents(std::size_t empty_documents, const char* algorithm);

}  // namespace lda
