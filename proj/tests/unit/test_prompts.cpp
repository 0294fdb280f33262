#include <catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "asc2end/prompts.hpp"
#include "asc2end/rag_compare.hpp"
#include "asc2end/summarizer.hpp"

using namespace asc2end;

namespace {

std::string golden(const std::string& name) {
  std::ifstream in(std::string(ASC2END_GOLDEN_DIR) + "/" + name, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Plain find-and-replace of every occurrence, applied to the golden template.
std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

const ComparisonContext kCtx{"Northbridge Bank", "sustainable finance"};
const std::string kSummary = "Northbridge Bank arranged a $500 million green bond on 03/15/2021.";
const std::string kPassages =
    "Criteria passage 1: Renewable energy generation is eligible.\n"
    "Criteria passage 2: Thermal coal mining is excluded.";

}  // namespace

TEST_CASE("templates match the transcribed golden files") {
  CHECK(std::string(prompts::kSummaryTemplate) == golden("summary_template.txt"));
  CHECK(std::string(prompts::kRetrievalTemplate) == golden("rag_template.txt"));
  CHECK(std::string(prompts::kComparisonTemplate) == golden("ca_template.txt"));
}

TEST_CASE("rendered prompts equal the golden templates with placeholders replaced") {
  const std::string split = "Chunk text with {braces} and $ signs.";
  CHECK(render_summary_prompt(split) ==
        replace_all(golden("summary_template.txt"), "{split_text}", split));

  std::string rag = golden("rag_template.txt");
  rag = replace_all(rag, "{summary}", kSummary);
  rag = replace_all(rag, "{target_topic}", kCtx.target_topic);
  CHECK(render_rag_prompt(kSummary, kCtx.target_topic) == rag);

  std::string ca = golden("ca_template.txt");
  ca = replace_all(ca, "{company}", kCtx.company);
  ca = replace_all(ca, "{retrieved_text}", kPassages);
  ca = replace_all(ca, "{target_topic}", kCtx.target_topic);
  ca = replace_all(ca, "{summary}", kSummary);
  CHECK(render_ca_prompt(kSummary, kPassages, kCtx) == ca);
}

TEST_CASE("merged prompt matches its golden file") {
  CHECK(render_merged_prompt(kSummary, kPassages, kCtx) == golden("merged_prompt.txt"));
}

TEST_CASE("baseline and full comparison prompts differ only in substituted text") {
  const std::string body = "Full article body. " + std::string(200, 'x');
  const std::string criteria = "Whole criteria document.";
  const auto full = render_ca_prompt(kSummary, kPassages, kCtx);
  const auto baseline = render_ca_prompt(body, criteria, kCtx);
  std::string expected = replace_all(full, kSummary, body);
  expected = replace_all(expected, kPassages, criteria);
  CHECK(baseline == expected);
}

TEST_CASE("substitution is single pass") {
  const auto out = prompts::render("{a}-{b}", {{"a", "{b}"}, {"b", "x"}});
  CHECK(out == "{b}-x");
  CHECK_THROWS_AS(prompts::render("{a} {missing}", {{"a", "1"}}), std::invalid_argument);
  CHECK_THROWS_AS(render_rag_prompt("", "topic"), std::invalid_argument);
  CHECK_THROWS_AS(render_ca_prompt("s", "", kCtx), std::invalid_argument);
}

TEST_CASE("prompts are classified and their fields recovered") {
  const auto summary = render_summary_prompt("source text");
  CHECK(prompts::classify(summary) == prompts::PromptKind::summary);
  CHECK(prompts::summary_source(summary) == "source text");

  const auto rag = render_rag_prompt(kSummary, kCtx.target_topic) + "\n\n" + kPassages;
  CHECK(prompts::classify(rag) == prompts::PromptKind::retrieval);
  const auto rf = prompts::retrieval_fields(rag);
  REQUIRE(rf);
  CHECK(rf->summary == kSummary);
  CHECK(rf->target_topic == kCtx.target_topic);
  CHECK(rf->context == kPassages);

  const auto ca = render_ca_prompt(kSummary, kPassages, kCtx);
  CHECK(prompts::classify(ca) == prompts::PromptKind::comparison);
  const auto cf = prompts::comparison_fields(ca);
  REQUIRE(cf);
  CHECK(cf->company == kCtx.company);
  CHECK(cf->summary == kSummary);
  CHECK(cf->retrieved_text == kPassages);
  CHECK(cf->target_topic == kCtx.target_topic);

  CHECK(prompts::classify(render_merged_prompt(kSummary, kPassages, kCtx)) == prompts::PromptKind::merged);
  CHECK(prompts::classify("hello") == prompts::PromptKind::other);
}

TEST_CASE("retrieval query text follows the query mode") {
  CHECK(retrieval_query_text("S", kCtx, QueryMode::summary_plus_topic) == "S\nsustainable finance");
  CHECK(retrieval_query_text("S", kCtx, QueryMode::full_prompt) == render_rag_prompt("S", kCtx.target_topic));
  CHECK(parse_query_mode(to_string(QueryMode::full_prompt)) == QueryMode::full_prompt);
}

TEST_CASE("rag and assessment calls with mock backends") {
  GatewayOptions o;
  o.clock = std::make_shared<FixedClock>();
  LlmGateway gw(std::make_shared<MockEmbeddingBackend>(64), o);
  std::string criteria;
  for (int i = 0; criteria.size() < 3000; ++i) {
    criteria += "Rule " + std::to_string(i) + ": renewable energy and green bonds are eligible; coal is excluded. ";
  }
  const auto index = CriteriaIndex::build({"c.md", criteria}, gw);
  auto profile = CompletionProfile::human_level(std::make_shared<MockCompletionBackend>());
  TokenLedger ledger;

  const auto rag = run_rag("D1", kSummary, index, kCtx, profile, gw, ledger, 3);
  CHECK(rag.doc_id == "D1");
  CHECK(rag.retrieved.hits.size() == 3);
  CHECK(rag.augmented_text.starts_with("Relevant criteria regarding sustainable finance:\n"));
  REQUIRE(ledger.entries().size() == 1);
  CHECK(ledger.entries()[0].stage == Stage::retrieval);
  const auto expected_prompt =
      render_rag_prompt(kSummary, kCtx.target_topic) + "\n\n" + format_passages(index, rag.retrieved);
  CHECK(ledger.entries()[0].prompt_tokens == estimated_tokens(expected_prompt));

  const auto a = run_assessment("D1", kSummary, rag.augmented_text, kCtx, profile, gw, ledger);
  CHECK(a.doc_id == "D1");
  CHECK_FALSE(a.parse_error);
  CHECK(a.warnings.empty());
  REQUIRE(a.article_date);
  CHECK(a.article_date->iso() == "2021-03-15");
  CHECK(a.transaction_occurred);
  CHECK(a.transaction_amount_usd == 500'000'000.0);
  CHECK(ledger.entries().size() == 2);
  CHECK(ledger.entries()[1].stage == Stage::assessment);

  const auto rt = rag_output_from_json(to_json(rag));
  CHECK(rt.augmented_text == rag.augmented_text);
  CHECK(rt.retrieved.hits == rag.retrieved.hits);
}

TEST_CASE("comparison context must be complete") {
  CHECK_NOTHROW(kCtx.validate());
  CHECK_THROWS(ComparisonContext{"", "topic"}.validate());
  CHECK_THROWS(ComparisonContext{"bank", ""}.validate());
}
