#include "lda/cli/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <regex>
#include <sstream>

#include "lda/vb.hpp"

namespace lda::cli {

std::string to_string(ModelKind kind) { return kind == ModelKind::lambda ? "lambda" : "phi"; }

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buffer, ptr);
}

void write_model(std::ostream& out, const Matrix<double>& values, ModelKind kind) {
  out << "#lda-topics K=" << values.rows() << " V=" << values.cols() << " kind=" << to_string(kind) << '\n';
  for (std::size_t k = 0; k < values.rows(); ++k) {
    for (std::size_t v = 0; v < values.cols(); ++v) {
      if (v > 0) out << '\t';
      out << format_double(values(k, v));
    }
    out << '\n';
  }
}

void save_model(const std::filesystem::path& path, const Matrix<double>& values, ModelKind kind) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_model(out, values, kind);
}

TopicModelFile read_model(std::istream& in, const std::string& source) {
  std::string header;
  if (!std::getline(in, header)) throw IngestionError(source, 1, "missing model header");
  static const std::regex pattern(R"(#lda-topics K=(\d+) V=(\d+) kind=(lambda|phi))");
  std::smatch match;
  if (!std::regex_match(header, match, pattern)) throw IngestionError(source, 1, "malformed model header");
  const std::size_t k_topics = std::stoul(match[1]);
  const std::size_t v_size = std::stoul(match[2]);

  TopicModelFile model{match[3] == "lambda" ? ModelKind::lambda : ModelKind::phi,
                       Matrix<double>(k_topics, v_size)};
  std::string line;
  for (std::size_t k = 0; k < k_topics; ++k) {
    const std::size_t line_no = k + 2;
    if (!std::getline(in, line)) throw IngestionError(source, line_no, "missing topic row");
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t v = 0; v < v_size; ++v) {
      if (v > 0) {
        if (p == end || *p != '\t') throw IngestionError(source, line_no, "expected " + std::to_string(v_size) + " values");
        ++p;
      }
      double x = 0.0;
      const auto [next, ec] = std::from_chars(p, end, x);
      if (ec != std::errc{}) throw IngestionError(source, line_no, "malformed value");
      if (!(x > 0.0) && model.kind == ModelKind::lambda) throw IngestionError(source, line_no, "lambda entries must be positive");
      if (!(x >= 0.0)) throw IngestionError(source, line_no, "negative value");
      model.values(k, v) = x;
      p = next;
    }
    if (p != end) throw IngestionError(source, line_no, "trailing data after " + std::to_string(v_size) + " values");
  }
  return model;
}

TopicModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError(path.string(), 0, "cannot open model file");
  return read_model(in, path.string());
}

Matrix<double> topic_word_weights(const TopicModelFile& model) {
  Matrix<double> out = model.values;
  for (std::size_t k = 0; k < out.rows(); ++k) {
    const auto row = out.row(k);
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (total > 0.0) {
      for (double& x : row) x /= total;
    }
  }
  return out;
}

Matrix<double> topic_log_weights(const TopicModelFile& model) {
  if (model.kind == ModelKind::lambda) return vb::log_expectation(model.values);
  Matrix<double> out(model.values.rows(), model.values.cols());
  for (std::size_t i = 0; i < out.values().size(); ++i) out.values()[i] = std::log(model.values.values()[i]);
  return out;
}

nlohmann::json top_words_json(const Matrix<double>& weights, const Vocabulary& vocabulary, std::size_t top_n) {
  if (weights.cols() != vocabulary.size()) throw std::invalid_argument("top_words_json: vocabulary size mismatch");
  nlohmann::json topics = nlohmann::json::array();
  std::vector<std::size_t> order(weights.cols());
  for (std::size_t k = 0; k < weights.rows(); ++k) {
    std::iota(order.begin(), order.end(), 0);
    const std::size_t n = std::min(top_n, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return weights(k, a) != weights(k, b) ? weights(k, a) > weights(k, b) : a < b;
                      });
    nlohmann::json words = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) {
      words.push_back({{"term", vocabulary.term(static_cast<TermId>(order[i]))}, {"weight", weights(k, order[i])}});
    }
    topics.push_back({{"topic", k}, {"words", std::move(words)}});
  }
  return topics;
}

void write_report_csv(std::ostream& out, const std::string& algorithm, const TrainReport& report) {
  out << "algorithm,iteration,documents_processed,wall_seconds,convergence_stat,perplexity\n";
  for (const auto& r : report.iterations) {
    out << algorithm << ',' << r.index << ',' << r.documents_processed << ',' << format_double(r.wall_seconds) << ','
        << format_double(r.statistic) << ',' << (r.perplexity ? format_double(*r.perplexity) : "") << '\n';
  }
}

}  // namespace lda::cli
