#include "asc2end/criteria_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "asc2end/errors.hpp"
#include "asc2end/text_units.hpp"

namespace asc2end {
namespace {

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double cosine_with_norms(std::span<const double> a, double norm_a, std::span<const double> b,
                         double norm_b) {
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  return std::clamp(dot(a, b) / (norm_a * norm_b), -1.0, 1.0);
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
  return cosine_with_norms(a, l2_norm(a), b, l2_norm(b));
}

std::string criteria_digest(std::string_view text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

Json to_json(const RetrievalResult& r) {
  Json j;
  j["query_doc_id"] = r.query_doc_id;
  j["k"] = r.k;
  Json hits = Json::array();
  for (const auto& h : r.hits) hits.push_back(Json{{"passage_id", h.passage_id}, {"score", h.score}});
  j["hits"] = std::move(hits);
  return j;
}

RetrievalResult retrieval_from_json(const Json& j) {
  RetrievalResult r;
  r.query_doc_id = j.at("query_doc_id").get<std::string>();
  r.k = j.at("k").get<std::size_t>();
  for (const auto& h : j.at("hits")) {
    r.hits.push_back({h.at("passage_id").get<std::size_t>(), h.at("score").get<double>()});
  }
  return r;
}

CriteriaIndex CriteriaIndex::build(const CriteriaDocument& criteria, LlmGateway& gateway,
                                   IndexOptions options) {
  if (criteria.text.empty()) throw InputError("criteria document is empty");
  const auto chunks =
      split_by_char_window(criteria.text, options.window_chars, options.overlap_chars);

  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& c : chunks) texts.push_back(c.text);
  auto vectors = gateway.embed(texts);

  std::vector<CriteriaPassage> passages;
  passages.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    passages.push_back({i, chunks[i].text, chunks[i].start_char, chunks[i].end_char,
                        std::move(vectors[i])});
  }
  return from_passages(std::move(passages), options, criteria_digest(criteria.text));
}

CriteriaIndex CriteriaIndex::from_passages(std::vector<CriteriaPassage> passages,
                                           IndexOptions options, std::string source_digest) {
  CriteriaIndex index;
  index.options_ = options;
  index.source_digest_ = std::move(source_digest);
  if (!passages.empty()) index.dim_ = passages.front().embedding.dim();
  index.norms_.reserve(passages.size());
  for (const auto& p : passages) {
    if (p.embedding.dim() != index.dim_ || index.dim_ == 0) {
      throw ConfigError("criteria passage " + std::to_string(p.passage_id) +
                        " has embedding dimension " + std::to_string(p.embedding.dim()) +
                        ", index dimension is " + std::to_string(index.dim_));
    }
    index.norms_.push_back(l2_norm(p.embedding.values));
  }
  index.passages_ = std::move(passages);
  return index;
}

const CriteriaPassage& CriteriaIndex::passage(std::size_t passage_id) const {
  for (const auto& p : passages_) {
    if (p.passage_id == passage_id) return p;
  }
  throw std::out_of_range("no criteria passage " + std::to_string(passage_id));
}

RetrievalResult CriteriaIndex::top_k(LlmGateway& gateway, const std::string& query_text,
                                     std::size_t k, std::string query_doc_id) const {
  if (query_text.empty()) throw std::invalid_argument("top_k: empty query");
  if (k == 0) throw std::invalid_argument("top_k: k must be >= 1");
  const auto query = gateway.embed_one(query_text);
  return top_k(query.values, k, std::move(query_doc_id));
}

RetrievalResult CriteriaIndex::top_k(std::span<const double> query, std::size_t k,
                                     std::string query_doc_id) const {
  if (k == 0) throw std::invalid_argument("top_k: k must be >= 1");
  if (!passages_.empty() && query.size() != dim_) {
    throw ConfigError("query embedding dimension " + std::to_string(query.size()) +
                      " does not match index dimension " + std::to_string(dim_));
  }
  const double query_norm = l2_norm(query);

  std::vector<RetrievalHit> scored;
  scored.reserve(passages_.size());
  for (std::size_t i = 0; i < passages_.size(); ++i) {
    scored.push_back({passages_[i].passage_id,
                      cosine_with_norms(query, query_norm, passages_[i].embedding.values, norms_[i])});
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.passage_id < b.passage_id;
                    });
  scored.resize(take);
  return RetrievalResult{std::move(query_doc_id), std::move(scored), k};
}

Json CriteriaIndex::to_json() const {
  Json j;
  j["source_digest"] = source_digest_;
  j["window_chars"] = options_.window_chars;
  j["overlap_chars"] = options_.overlap_chars;
  j["dim"] = dim_;
  Json arr = Json::array();
  for (const auto& p : passages_) {
    Json pj;
    pj["passage_id"] = p.passage_id;
    pj["start_char"] = p.start_char;
    pj["end_char"] = p.end_char;
    pj["text"] = p.text;
    pj["embedding"] = p.embedding.values;
    arr.push_back(std::move(pj));
  }
  j["passages"] = std::move(arr);
  return j;
}

CriteriaIndex CriteriaIndex::from_json(const Json& j) {
  IndexOptions options{j.at("window_chars").get<std::size_t>(),
                       j.at("overlap_chars").get<std::size_t>()};
  std::vector<CriteriaPassage> passages;
  for (const auto& pj : j.at("passages")) {
    CriteriaPassage p;
    p.passage_id = pj.at("passage_id").get<std::size_t>();
    p.start_char = pj.at("start_char").get<std::size_t>();
    p.end_char = pj.at("end_char").get<std::size_t>();
    p.text = pj.at("text").get<std::string>();
    p.embedding.values = pj.at("embedding").get<std::vector<double>>();
    passages.push_back(std::move(p));
  }
  return from_passages(std::move(passages), options, j.value("source_digest", std::string()));
}

void CriteriaIndex::save(const std::filesystem::path& path) const {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write criteria index " + tmp.string());
    out << to_json().dump() << '\n';
    if (!out) throw ConfigError("write failed for criteria index " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CriteriaIndex CriteriaIndex::load(const std::filesystem::path& path) {
  return from_json(Json::parse(read_file(path)));
}

}  // namespace asc2end
