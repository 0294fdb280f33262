#pragma once

// Criteria passages and exact cosine top-k retrieval over them.
//
// The criteria text is cut into overlapping character windows (500/20 by
// default), embedded in one batch, and held in an immutable flat index.
// Every query scores every passage; there is no approximation.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asc2end/corpus_io.hpp"
#include "asc2end/llm_gateway.hpp"

namespace asc2end {

struct CriteriaPassage {
  std::size_t passage_id = 0;
  std::string text;
  std::size_t start_char = 0;
  std::size_t end_char = 0;
  EmbeddingVector embedding;
};

struct RetrievalHit {
  std::size_t passage_id = 0;
  double score = 0.0;  // cosine similarity in [-1, 1]

  friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

struct RetrievalResult {
  std::string query_doc_id;
  std::vector<RetrievalHit> hits;  // score descending, ties by ascending passage_id
  std::size_t k = 0;
};

Json to_json(const RetrievalResult& result);
RetrievalResult retrieval_from_json(const Json& j);

struct IndexOptions {
  std::size_t window_chars = 500;
  std::size_t overlap_chars = 20;
};

// 0 when either vector has zero norm; clamped to [-1, 1].
double cosine_similarity(std::span<const double> a, std::span<const double> b);

class CriteriaIndex {
 public:
  // Splits, embeds (one batch) and indexes the criteria text.
  static CriteriaIndex build(const CriteriaDocument& criteria, LlmGateway& gateway,
                             IndexOptions options = {});

  // Indexes precomputed passages. Throws ConfigError on mixed dimensions.
  static CriteriaIndex from_passages(std::vector<CriteriaPassage> passages,
                                     IndexOptions options = {}, std::string source_digest = {});

  // Embeds `query_text` once and ranks all passages. Throws
  // std::invalid_argument for an empty query or k == 0.
  RetrievalResult top_k(LlmGateway& gateway, const std::string& query_text, std::size_t k,
                        std::string query_doc_id = {}) const;

  RetrievalResult top_k(std::span<const double> query, std::size_t k,
                        std::string query_doc_id = {}) const;

  const std::vector<CriteriaPassage>& passages() const { return passages_; }
  const CriteriaPassage& passage(std::size_t passage_id) const;
  std::size_t size() const { return passages_.size(); }
  std::size_t dim() const { return dim_; }
  const IndexOptions& options() const { return options_; }
  const std::string& source_digest() const { return source_digest_; }

  Json to_json() const;
  static CriteriaIndex from_json(const Json& j);
  void save(const std::filesystem::path& path) const;
  static CriteriaIndex load(const std::filesystem::path& path);

 private:
  CriteriaIndex() = default;

  std::vector<CriteriaPassage> passages_;
  std::vector<double> norms_;
  std::size_t dim_ = 0;
  IndexOptions options_;
  std::string source_digest_;
};

// Hex digest identifying a criteria text (used to validate a persisted index).
std::string criteria_digest(std::string_view text);

}  // namespace asc2end
