#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "lda/corpus.hpp"
#include "lda/matrix.hpp"
#include "lda/report.hpp"

namespace lda::cli {

enum class ModelKind { lambda, phi };

std::string to_string(ModelKind kind);

struct TopicModelFile {
  ModelKind kind = ModelKind::lambda;
  Matrix<double> values;  // K x V
};

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

// TSV layout:
//   #lda-topics K=<K> V=<V> kind=<lambda|phi>
//   one line per topic, V tab-separated values
void write_model(std::ostream& out, const Matrix<double>& values, ModelKind kind);
void save_model(const std::filesystem::path& path, const Matrix<double>& values, ModelKind kind);
TopicModelFile read_model(std::istream& in, const std::string& source = "<stream>");
TopicModelFile load_model(const std::filesystem::path& path);

/// Row-normalized topic-word weights: E_q[phi] = lambda / row sum, or phi as is.
Matrix<double> topic_word_weights(const TopicModelFile& model);

/// E[log phi] used for held-out evaluation: digamma form for lambda, log(phi) for phi.
Matrix<double> topic_log_weights(const TopicModelFile& model);

/// [{"topic": k, "words": [{"term": ..., "weight": ...}, ...]}, ...], highest
/// weight first, ties broken by term id.
nlohmann::json top_words_json(const Matrix<double>& weights, const Vocabulary& vocabulary, std::size_t top_n);

void write_report_csv(std::ostream& out, const std::string& algorithm, const TrainReport& report);

}  // namespace lda::cli
