#include "lda/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace lda {

IngestionError::IngestionError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + what
                                  : source + ": " + what),
      line_(line) {}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i].empty()) {
      throw std::invalid_argument("vocabulary: empty term at index " + std::to_string(i));
    }
    if (!index_.emplace(terms_[i], static_cast<TermId>(i)).second) {
      throw std::invalid_argument("vocabulary: duplicate term '" + terms_[i] + "' at index " +
                                  std::to_string(i));
    }
  }
}

Vocabulary Vocabulary::numbered(std::size_t size) {
  std::vector<std::string> terms;
  terms.reserve(size);
  for (std::size_t v = 0; v < size; ++v) terms.push_back("t" + std::to_string(v));
  return Vocabulary(std::move(terms));
}

std::optional<TermId> Vocabulary::find(const std::string& term) const {
  const auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Document::Document(std::vector<TermCount> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].count == 0) throw std::invalid_argument("document: zero count");
    if (i > 0 && entries_[i].term <= entries_[i - 1].term) {
      throw std::invalid_argument("document: term ids must be strictly increasing");
    }
    token_count_ += entries_[i].count;
  }
}

Corpus::Corpus(std::shared_ptr<const Vocabulary> vocabulary, std::vector<Document> documents)
    : vocabulary_(std::move(vocabulary)), documents_(std::move(documents)) {
  if (!vocabulary_) throw std::invalid_argument("corpus: null vocabulary");
  const std::size_t v = vocabulary_->size();
  for (std::size_t m = 0; m < documents_.size(); ++m) {
    const auto& entries = documents_[m].entries();
    if (!entries.empty() && entries.back().term >= v) {
      throw std::invalid_argument("corpus: document " + std::to_string(m) +
                                  " references term id outside the vocabulary");
    }
  }
}

std::uint64_t Corpus::total_tokens() const noexcept {
  std::uint64_t total = 0;
  for (const auto& doc : documents_) total += doc.token_count();
  return total;
}

std::size_t Corpus::empty_documents() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(documents_.begin(), documents_.end(), [](const Document& d) { return d.empty(); }));
}

Corpus Corpus::prefix(std::size_t n) const {
  n = std::min(n, documents_.size());
  return Corpus(vocabulary_, std::vector<Document>(documents_.begin(), documents_.begin() + n));
}

bool Corpus::operator==(const Corpus& other) const {
  return vocabulary_->terms() == other.vocabulary_->terms() && documents_ == other.documents_;
}

Vocabulary read_vocabulary(std::istream& in, const std::string& source) {
  std::vector<std::string> terms;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw IngestionError(source, line_no, "empty term");
    const auto [it, inserted] = seen.emplace(line, line_no);
    if (!inserted) {
      throw IngestionError(source, line_no,
                           "duplicate term '" + line + "' (first seen on line " +
                               std::to_string(it->second) + ")");
    }
    terms.push_back(line);
  }
  return Vocabulary(std::move(terms));
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError(path.string(), 0, "cannot open vocabulary file");
  return read_vocabulary(in, path.string());
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocabulary) {
  for (const auto& term : vocabulary.terms()) out << term << '\n';
}

namespace {

bool parse_field(std::string_view token, std::int64_t& value) {
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

Document finish_document(std::vector<TermCount>& pending) {
  std::sort(pending.begin(), pending.end(),
            [](const TermCount& a, const TermCount& b) { return a.term < b.term; });
  std::vector<TermCount> merged;
  for (const auto& entry : pending) {
    if (!merged.empty() && merged.back().term == entry.term) {
      merged.back().count += entry.count;
    } else {
      merged.push_back(entry);
    }
  }
  pending.clear();
  return Document(std::move(merged));
}

}  // namespace

Corpus read_bow(std::istream& in, std::shared_ptr<const Vocabulary> vocabulary, const std::string& source) {
  if (!vocabulary) throw std::invalid_argument("read_bow: null vocabulary");
  const auto vocab_size = static_cast<std::int64_t>(vocabulary->size());
  std::vector<Document> documents;
  std::vector<TermCount> pending;
  std::int64_t current_doc = 0;  // 1-based id of the document being collected
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty() || fields.front().front() == '#') continue;
    std::int64_t doc_id = 0;
    std::int64_t term_id = 0;
    std::int64_t count = 0;
    if (fields.size() != 3 || !parse_field(fields[0], doc_id) || !parse_field(fields[1], term_id) ||
        !parse_field(fields[2], count)) {
      throw IngestionError(source, line_no, "expected 'docId termId count'");
    }
    if (doc_id < 1) throw IngestionError(source, line_no, "docId must be >= 1");
    if (term_id < 1 || term_id > vocab_size) {
      throw IngestionError(source, line_no,
                           "termId " + std::to_string(term_id) + " outside vocabulary of size " +
                               std::to_string(vocab_size));
    }
    if (count <= 0) throw IngestionError(source, line_no, "count must be positive");
    if (count > std::numeric_limits<std::uint32_t>::max()) {
      throw IngestionError(source, line_no, "count too large");
    }
    if (doc_id < current_doc) throw IngestionError(source, line_no, "docIds must be non-decreasing");
    if (doc_id > current_doc) {
      if (current_doc > 0) documents.push_back(finish_document(pending));
      while (static_cast<std::int64_t>(documents.size()) < doc_id - 1) documents.emplace_back();
      current_doc = doc_id;
    }
    pending.push_back({static_cast<TermId>(term_id - 1), static_cast<std::uint32_t>(count)});
  }
  if (current_doc > 0) documents.push_back(finish_document(pending));
  return Corpus(std::move(vocabulary), std::move(documents));
}

Corpus load_bow(const std::filesystem::path& path, std::shared_ptr<const Vocabulary> vocabulary) {
  std::ifstream in(path);
  if (!in) throw IngestionError(path.string(), 0, "cannot open bag-of-words file");
  return read_bow(in, std::move(vocabulary), path.string());
}

void write_bow(std::ostream& out, const Corpus& corpus) {
  for (std::size_t m = 0; m < corpus.size(); ++m) {
    for (const auto& entry : corpus.document(m).entries()) {
      out << (m + 1) << ' ' << (entry.term + 1) << ' ' << entry.count << '\n';
    }
  }
}

std::pair<Corpus, Corpus> split_held_out(const Corpus& corpus, std::size_t held_count, Rng& rng) {
  const std::size_t m = corpus.size();
  if (held_count > m) {
    throw std::invalid_argument("split_held_out: cannot hold out " + std::to_string(held_count) +
                                " of " + std::to_string(m) + " documents");
  }
  // Partial Fisher-Yates: the first held_count slots become the held-out set.
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < held_count; ++i) {
    const std::size_t j = i + rng.uniform_index(m - i);
    std::swap(order[i], order[j]);
  }
  std::vector<bool> is_held(m, false);
  for (std::size_t i = 0; i < held_count; ++i) is_held[order[i]] = true;

  std::vector<Document> train;
  std::vector<Document> held;
  train.reserve(m - held_count);
  held.reserve(held_count);
  for (std::size_t i = 0; i < m; ++i) (is_held[i] ? held : train).push_back(corpus.document(i));
  return {Corpus(corpus.shared_vocabulary(), std::move(train)),
          Corpus(corpus.shared_vocabulary(), std::move(held))};
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, Rng& rng) {
  if (spec.topics == 0 || spec.vocabulary_size == 0 || spec.documents == 0 || spec.document_length == 0) {
    throw std::invalid_argument("generate_synthetic: sizes must be >= 1");
  }
  if (!(spec.alpha > 0.0) || !(spec.beta > 0.0)) {
    throw std::invalid_argument("generate_synthetic: alpha and beta must be positive");
  }
  const std::size_t k_topics = spec.topics;
  const std::size_t v_size = spec.vocabulary_size;

  GroundTruth truth{Matrix<double>(k_topics, v_size), Matrix<double>(spec.documents, k_topics)};
  for (std::size_t k = 0; k < k_topics; ++k) {
    const auto row = sample_symmetric_dirichlet(v_size, spec.beta, rng);
    std::copy(row.begin(), row.end(), truth.phi.row(k).begin());
  }

  // Cumulative rows so each word draw is a binary search instead of a V-long scan.
  Matrix<double> phi_cdf(k_topics, v_size);
  for (std::size_t k = 0; k < k_topics; ++k) {
    std::partial_sum(truth.phi.row(k).begin(), truth.phi.row(k).end(), phi_cdf.row(k).begin());
  }

  std::vector<Document> documents;
  documents.reserve(spec.documents);
  std::vector<std::uint32_t> counts(v_size);
  for (std::size_t m = 0; m < spec.documents; ++m) {
    const auto theta = sample_symmetric_dirichlet(k_topics, spec.alpha, rng);
    std::copy(theta.begin(), theta.end(), truth.theta.row(m).begin());
    std::fill(counts.begin(), counts.end(), 0U);
    for (std::size_t n = 0; n < spec.document_length; ++n) {
      const std::size_t z = sample_categorical(theta, rng);
      const auto cdf = phi_cdf.row(z);
      const double target = rng.uniform() * cdf.back();
      auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
      if (it == cdf.end()) --it;
      ++counts[static_cast<std::size_t>(it - cdf.begin())];
    }
    std::vector<TermCount> entries;
    for (std::size_t v = 0; v < v_size; ++v) {
      if (counts[v] > 0) entries.push_back({static_cast<TermId>(v), counts[v]});
    }
    documents.emplace_back(std::move(entries));
  }
  auto vocabulary = std::make_shared<const Vocabulary>(Vocabulary::numbered(v_size));
  return {Corpus(std::move(vocabulary), std::move(documents)), std::move(truth)};
}

}  // namespace lda
