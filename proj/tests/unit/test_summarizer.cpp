#include <catch_amalgamated.hpp>

#include "asc2end/errors.hpp"
#include "asc2end/summarizer.hpp"
#include "support/temp_dir.hpp"

using namespace asc2end;
using testing_support::TempDir;

namespace {

struct Fixture {
  std::shared_ptr<MockCompletionBackend> backend = std::make_shared<MockCompletionBackend>();
  CompletionProfile profile = CompletionProfile::machine_level(backend);
  LlmGateway gateway{nullptr, [] {
                       GatewayOptions o;
                       o.clock = std::make_shared<FixedClock>();
                       return o;
                     }()};
  TokenLedger ledger;
};

std::string words(std::size_t chars) {
  static const std::string kPattern = "green bond proceeds finance wind farms ";
  std::string out;
  while (out.size() < chars) out += kPattern;
  out.resize(chars);
  return out;
}

}  // namespace

TEST_CASE("short documents take one pass and stay intact") {
  Fixture f;
  const Document doc{"D1", "t", "A short article about a $10 million green loan."};
  const auto rec = summarize_document(doc, SummaryConfig{}, f.profile, f.gateway, f.ledger);
  CHECK(rec.passes == 1);
  CHECK(rec.per_pass_chunk_counts == std::vector<std::size_t>{1});
  CHECK(rec.final_text == doc.body);
  CHECK_FALSE(rec.truncated);
  CHECK(f.ledger.entries().size() == 1);
}

TEST_CASE("six chunks force a second pass") {
  Fixture f;
  // Exactly 6 chunks even when cuts move back to whitespace; 6 x 250 > 1250.
  const Document doc{"D6", "t", words(47'000)};
  const auto rec = summarize_document(doc, SummaryConfig{}, f.profile, f.gateway, f.ledger);
  CHECK(rec.per_pass_chunk_counts.front() == 6);
  CHECK(rec.passes >= 2);
  CHECK(rec.final_tokens <= 1250);
  CHECK_FALSE(rec.truncated);
  CHECK(f.ledger.entries().size() == 6 + rec.per_pass_chunk_counts[1]);
}

TEST_CASE("summaries terminate within max_passes under the threshold") {
  for (std::size_t size : {1'000u, 100'000u, 1'000'000u}) {
    Fixture f;
    const Document doc{"D", "t", words(size)};
    const auto rec = summarize_document(doc, SummaryConfig{}, f.profile, f.gateway, f.ledger);
    CHECK(rec.passes <= 5);
    CHECK(rec.final_tokens <= 1250);
    CHECK(rec.final_tokens == estimated_tokens(rec.final_text));
  }
}

TEST_CASE("hitting max_passes truncates to the threshold") {
  Fixture f;
  SummaryConfig cfg;
  cfg.max_passes = 1;
  const Document doc{"D", "t", words(80'000)};
  const auto rec = summarize_document(doc, cfg, f.profile, f.gateway, f.ledger);
  CHECK(rec.passes == 1);
  CHECK(rec.truncated);
  CHECK(rec.final_tokens == 1250);
}

TEST_CASE("the extended preset only changes the threshold") {
  const auto e = SummaryConfig::extended();
  const SummaryConfig s;
  CHECK(e.threshold_tokens == 2500);
  CHECK(e.chunk_budget_tokens == s.chunk_budget_tokens);
  CHECK(e.segment_budget_tokens == s.segment_budget_tokens);
  CHECK(e.max_passes == s.max_passes);
}

TEST_CASE("invalid summary configs are rejected") {
  SummaryConfig cfg;
  cfg.segment_budget_tokens = cfg.chunk_budget_tokens;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.threshold_tokens = cfg.segment_budget_tokens - 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_passes = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("empty body is rejected") {
  Fixture f;
  CHECK_THROWS_AS(summarize_document({"D", "t", ""}, SummaryConfig{}, f.profile, f.gateway, f.ledger),
                  std::invalid_argument);
  CHECK_THROWS_AS(render_summary_prompt(""), std::invalid_argument);
}

TEST_CASE("summary records round-trip through JSON") {
  SummaryRecord r{"D1", "text", 2, {6, 2}, 1, false};
  const auto back = summary_from_json(to_json(r));
  CHECK(back.doc_id == r.doc_id);
  CHECK(back.final_text == r.final_text);
  CHECK(back.passes == 2);
  CHECK(back.per_pass_chunk_counts == r.per_pass_chunk_counts);
  CHECK(back.final_tokens == 1);
}

TEST_CASE("corpus summarization skips empty bodies and resumes from artifacts") {
  TempDir dir;
  const std::vector<Document> docs = {
      {"A", "t", words(9000)}, {"B", "t", ""}, {"C", "t", words(3000)}};
  std::size_t first_calls = 0;
  {
    Fixture f;
    ArtifactStore store(dir.path());
    const auto out = summarize_corpus(docs, SummaryConfig{}, f.profile, f.gateway, f.ledger, &store, 3);
    REQUIRE(out.records.size() == 2);
    CHECK(out.records[0].doc_id == "A");
    CHECK(out.records[1].doc_id == "C");
    CHECK(out.warnings.size() == 1);
    CHECK(out.resumed == 0);
    first_calls = f.ledger.entries().size();
    CHECK(first_calls > 0);
  }
  Fixture f;
  ArtifactStore store(dir.path());
  const auto again = summarize_corpus(docs, SummaryConfig{}, f.profile, f.gateway, f.ledger, &store, 2);
  CHECK(again.resumed == 2);
  CHECK(again.records.size() == 2);
  CHECK(store.read_stage(Stage::summary).size() == 2);
}
