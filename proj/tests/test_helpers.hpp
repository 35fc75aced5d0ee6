#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lda/corpus.hpp"

namespace lda::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("lda_trio_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Corpus from dense per-document term counts.
inline Corpus make_corpus(std::size_t vocab_size, const std::vector<std::vector<std::uint32_t>>& dense) {
  std::vector<Document> docs;
  for (const auto& counts : dense) {
    std::vector<TermCount> entries;
    for (std::size_t v = 0; v < counts.size(); ++v) {
      if (counts[v] > 0) entries.push_back({static_cast<TermId>(v), counts[v]});
    }
    docs.emplace_back(std::move(entries));
  }
  return Corpus(std::make_shared<const Vocabulary>(Vocabulary::numbered(vocab_size)), std::move(docs));
}

// Random corpus: each document gets up to max_len tokens drawn uniformly.
inline Corpus random_corpus(std::size_t docs, std::size_t vocab_size, std::size_t max_len, Rng& rng,
                            bool allow_empty = true) {
  std::vector<std::vector<std::uint32_t>> dense(docs, std::vector<std::uint32_t>(vocab_size, 0));
  for (auto& doc : dense) {
    const std::size_t len = allow_empty ? rng.uniform_index(max_len + 1) : 1 + rng.uniform_index(max_len);
    for (std::size_t n = 0; n < len; ++n) ++doc[rng.uniform_index(vocab_size)];
  }
  return make_corpus(vocab_size, dense);
}

}  // namespace lda::testing
