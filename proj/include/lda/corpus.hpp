#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lda/math.hpp"
#include "lda/matrix.hpp"

namespace lda {

using TermId = std::uint32_t;

// Malformed input file. line() is 1-based; 0 when the error is not tied to a line.
class IngestionError : public std::runtime_error {
 public:
  IngestionError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Throws std::invalid_argument on empty or duplicate terms.
  explicit Vocabulary(std::vector<std::string> terms);

  /// Placeholder terms "t0", "t1", ... for corpora without a real vocabulary.
  static Vocabulary numbered(std::size_t size);

  std::size_t size() const noexcept { return terms_.size(); }
  const std::string& term(TermId id) const { return terms_.at(id); }
  std::optional<TermId> find(const std::string& term) const;
  const std::vector<std::string>& terms() const noexcept { return terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> index_;
};

struct TermCount {
  TermId term;
  std::uint32_t count;
  bool operator==(const TermCount&) const = default;
};

// Sparse bag of words: term ids strictly increasing, counts >= 1.
class Document {
 public:
  Document() = default;
  /// Validates ordering and counts; throws std::invalid_argument.
  explicit Document(std::vector<TermCount> entries);

  const std::vector<TermCount>& entries() const noexcept { return entries_; }
  std::uint64_t token_count() const noexcept { return token_count_; }
  std::size_t distinct_terms() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return token_count_ == 0; }

  bool operator==(const Document&) const = default;

 private:
  std::vector<TermCount> entries_;
  std::uint64_t token_count_ = 0;
};

class Corpus {
 public:
  Corpus() : vocabulary_(std::make_shared<const Vocabulary>()) {}
  /// Throws std::invalid_argument if any document references a term outside the vocabulary.
  Corpus(std::shared_ptr<const Vocabulary> vocabulary, std::vector<Document> documents);

  const Vocabulary& vocabulary() const noexcept { return *vocabulary_; }
  const std::shared_ptr<const Vocabulary>& shared_vocabulary() const noexcept { return vocabulary_; }
  std::size_t vocabulary_size() const noexcept { return vocabulary_->size(); }

  const std::vector<Document>& documents() const noexcept { return documents_; }
  const Document& document(std::size_t m) const { return documents_.at(m); }
  std::size_t size() const noexcept { return documents_.size(); }
  std::uint64_t total_tokens() const noexcept;
  std::size_t empty_documents() const noexcept;

  /// First n documents, sharing the vocabulary.
  Corpus prefix(std::size_t n) const;

  bool operator==(const Corpus& other) const;

 private:
  std::shared_ptr<const Vocabulary> vocabulary_;
  std::vector<Document> documents_;
};

struct GroundTruth {
  Matrix<double> phi;    // K x V
  Matrix<double> theta;  // M x K
};

struct SyntheticSpec {
  std::size_t topics = 5;
  std::size_t vocabulary_size = 50;
  std::size_t documents = 200;
  std::size_t document_length = 100;
  double alpha = 0.1;
  double beta = 0.05;
};

struct SyntheticCorpus {
  Corpus corpus;
  GroundTruth truth;
};

Vocabulary load_vocabulary(const std::filesystem::path& path);
Vocabulary read_vocabulary(std::istream& in, const std::string& source = "<stream>");
void write_vocabulary(std::ostream& out, const Vocabulary& vocabulary);

/// UCI-style "docId termId count" lines, 1-based ids, docIds non-decreasing,
/// '#' comment lines ignored. Gaps in docIds become empty documents. Repeated
/// (doc, term) pairs are summed.
Corpus load_bow(const std::filesystem::path& path, std::shared_ptr<const Vocabulary> vocabulary);
Corpus read_bow(std::istream& in, std::shared_ptr<const Vocabulary> vocabulary,
                const std::string& source = "<stream>");

/// Writes documents as BoW lines. Empty documents produce no lines, so trailing
/// empty documents do not survive a round trip.
void write_bow(std::ostream& out, const Corpus& corpus);

/// Uniformly random disjoint split; both halves keep the original document order.
std::pair<Corpus, Corpus> split_held_out(const Corpus& corpus, std::size_t held_count, Rng& rng);

/// Samples a corpus from the LDA generative process with symmetric priors.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, Rng& rng);

}  // namespace lda
