#include "lda/report.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/spdlog.h>

namespace lda {

void run_checkpoint(const Checkpoint* checkpoint, const Matrix<double>& log_topics, bool last,
                    IterationRecord& record, Stopwatch& clock) {
  if (checkpoint == nullptr || !checkpoint->due(record.index, last)) return;
  clock.pause();
  record.perplexity = checkpoint->evaluate(log_topics);
  clock.resume();
}

std::size_t threads_from_environment() {
  const char* value = std::getenv("LDA_TRIO_THREADS");
  if (value == nullptr) return 1;
  try {
    const long parsed = std::stol(value);
    if (parsed >= 1) return static_cast<std::size_t>(parsed);
  } catch (const std::exception&) {
  }
  spdlog::warn("ignoring invalid LDA_TRIO_THREADS='{}'", value);
  return 1;
}

void warn_empty_documents(std::size_t empty_documents, const char* algorithm) {
  if (empty_documents > 0) {
    spdlog::warn("{}: skipping {} document(s) with zero tokens", algorithm, empty_documents);
  }
}

}  // namespace lda
