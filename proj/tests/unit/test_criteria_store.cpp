#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "asc2end/criteria_store.hpp"
#include "asc2end/errors.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace asc2end;
using testing_support::TempDir;

namespace {

std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0;
  for (auto& x : v) {
    x = n(rng);
    norm += x * x;
  }
  for (auto& x : v) x /= std::sqrt(norm);
  return v;
}

CriteriaIndex index_of(const std::vector<std::vector<double>>& vectors) {
  std::vector<CriteriaPassage> passages;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    passages.push_back({i, "p" + std::to_string(i), i, i + 1, EmbeddingVector{vectors[i]}});
  }
  return CriteriaIndex::from_passages(std::move(passages));
}

void require_matches_oracle(const CriteriaIndex& index, const std::vector<std::vector<double>>& vectors,
                            const std::vector<double>& q, std::size_t k) {
  const auto got = index.top_k(q, k);
  const auto want = oracle::top_k(vectors, q, k);
  REQUIRE(got.hits.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    REQUIRE(got.hits[i].passage_id == want[i].id);
    REQUIRE(std::abs(got.hits[i].score - want[i].score) <= 1e-12);
  }
}

}  // namespace

TEST_CASE("top_k equals a brute-force sort") {
  std::mt19937_64 rng(99);
  std::vector<std::vector<double>> vectors;
  for (int i = 0; i < 1000; ++i) vectors.push_back(random_unit(rng, 32));
  const auto index = index_of(vectors);
  for (int q = 0; q < 50; ++q) {
    const auto query = random_unit(rng, 32);
    for (std::size_t k : {1u, 3u, 10u}) require_matches_oracle(index, vectors, query, k);
  }
}

TEST_CASE("ties break by ascending passage id") {
  std::vector<std::vector<double>> vectors = {{1, 0}, {0, 1}, {1, 0}, {2, 0}, {0, 1}};
  const auto index = index_of(vectors);
  const auto r = index.top_k(std::vector<double>{1, 0}, 3);
  REQUIRE(r.hits.size() == 3);
  CHECK(r.hits[0].passage_id == 0);
  CHECK(r.hits[1].passage_id == 2);
  CHECK(r.hits[2].passage_id == 3);
  require_matches_oracle(index, vectors, {0, 1}, 5);
}

TEST_CASE("k larger than the index returns every passage") {
  const auto index = index_of({{1, 0}, {0, 1}});
  CHECK(index.top_k(std::vector<double>{1, 1}, 10).hits.size() == 2);
  CHECK_THROWS_AS(index.top_k(std::vector<double>{1, 1}, 0), std::invalid_argument);
  CHECK_THROWS_AS(index.top_k(std::vector<double>{1, 1, 1}, 1), ConfigError);
}

TEST_CASE("cosine similarity edge cases") {
  const std::vector<double> a = {1, 0}, z = {0, 0}, b = {-2, 0};
  CHECK(cosine_similarity(a, z) == 0.0);
  CHECK(cosine_similarity(a, b) == -1.0);
  CHECK(cosine_similarity(a, a) == 1.0);
}

TEST_CASE("mixed dimensions are rejected") {
  std::vector<CriteriaPassage> passages = {{0, "a", 0, 1, EmbeddingVector{{1, 0}}},
                                           {1, "b", 1, 2, EmbeddingVector{{1, 0, 0}}}};
  CHECK_THROWS_AS(CriteriaIndex::from_passages(std::move(passages)), ConfigError);
}

TEST_CASE("build splits the criteria into 500/20 windows") {
  std::string text;
  for (int i = 0; text.size() < 2300; ++i) text += "Section " + std::to_string(i) + " eligible activities. ";
  LlmGateway gw(std::make_shared<MockEmbeddingBackend>(64));
  const auto index = CriteriaIndex::build({"criteria.md", text}, gw);
  REQUIRE(index.size() == 5);  // starts 0, 480, 960, 1440, 1920
  CHECK(index.dim() == 64);
  for (std::size_t i = 0; i < index.size(); ++i) {
    CHECK(index.passage(i).passage_id == i);
    CHECK(index.passage(i).start_char == i * 480);
  }
  CHECK(index.passages().back().end_char == text.size());
  CHECK(index.source_digest() == criteria_digest(text));

  // A query equal to a passage's text ranks that passage first.
  const auto r = index.top_k(gw, index.passage(2).text, 1);
  CHECK(r.hits.front().passage_id == 2);
  CHECK(std::abs(r.hits.front().score - 1.0) < 1e-12);
}

TEST_CASE("save and load preserve the index exactly") {
  TempDir dir;
  std::mt19937_64 rng(5);
  std::vector<std::vector<double>> vectors;
  for (int i = 0; i < 40; ++i) vectors.push_back(random_unit(rng, 16));
  std::vector<CriteriaPassage> passages;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    passages.push_back({i, "passage é " + std::to_string(i), i * 480, i * 480 + 500, EmbeddingVector{vectors[i]}});
  }
  const auto index = CriteriaIndex::from_passages(std::move(passages), {500, 20}, "abc123");
  index.save(dir / "index.json");
  const auto loaded = CriteriaIndex::load(dir / "index.json");
  REQUIRE(loaded.size() == index.size());
  CHECK(loaded.source_digest() == "abc123");
  CHECK(loaded.options().window_chars == 500);
  for (std::size_t i = 0; i < index.size(); ++i) {
    CHECK(loaded.passage(i).text == index.passage(i).text);
    CHECK(loaded.passage(i).embedding.values == index.passage(i).embedding.values);
  }
  const auto q = random_unit(rng, 16);
  CHECK(loaded.top_k(q, 5).hits == index.top_k(q, 5).hits);
}

TEST_CASE("retrieval results round-trip through JSON") {
  RetrievalResult r{"D1", {{4, 0.5}, {1, 0.25}}, 2};
  const auto back = retrieval_from_json(to_json(r));
  CHECK(back.query_doc_id == "D1");
  CHECK(back.hits == r.hits);
  CHECK(back.k == 2);
}
