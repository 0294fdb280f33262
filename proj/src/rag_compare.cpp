#include "asc2end/rag_compare.hpp"

#include <cstdio>
#include <stdexcept>

#include "asc2end/errors.hpp"
#include "asc2end/prompts.hpp"

namespace asc2end {

void ComparisonContext::validate() const {
  if (company.empty()) throw ConfigError("company must be set");
  if (target_topic.empty()) throw ConfigError("target_topic must be set");
}

std::string_view to_string(QueryMode mode) {
  return mode == QueryMode::summary_plus_topic ? "summary_plus_topic" : "full_prompt";
}

QueryMode parse_query_mode(std::string_view name) {
  if (name == "summary_plus_topic") return QueryMode::summary_plus_topic;
  if (name == "full_prompt") return QueryMode::full_prompt;
  throw ConfigError("unknown query_mode: " + std::string(name));
}

Json to_json(const RagOutput& out) {
  Json j;
  j["doc_id"] = out.doc_id;
  j["retrieved"] = to_json(out.retrieved);
  j["augmented_text"] = out.augmented_text;
  return j;
}

RagOutput rag_output_from_json(const Json& j) {
  RagOutput out;
  out.doc_id = j.at("doc_id").get<std::string>();
  out.retrieved = retrieval_from_json(j.at("retrieved"));
  out.augmented_text = j.value("augmented_text", std::string());
  return out;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::string_view to_string(WarningKind kind) {
  switch (kind) {
    case WarningKind::missing_field: return "missing_field";
    case WarningKind::unparseable: return "unparseable";
    case WarningKind::clamped: return "clamped";
    case WarningKind::inconsistent: return "inconsistent";
  }
  return "";
}

namespace {

WarningKind parse_warning_kind(std::string_view s) {
  if (s == "missing_field") return WarningKind::missing_field;
  if (s == "unparseable") return WarningKind::unparseable;
  if (s == "clamped") return WarningKind::clamped;
  return WarningKind::inconsistent;
}

}  // namespace

bool Assessment::has_warning(std::string_view field, WarningKind kind) const {
  for (const auto& w : warnings) {
    if (w.field == field && w.kind == kind) return true;
  }
  return false;
}

Json to_json(const Assessment& a) {
  Json j;
  j["doc_id"] = a.doc_id;
  j["article_date"] = a.article_date ? Json(a.article_date->iso()) : Json(nullptr);
  j["participants"] = a.participants;
  j["transaction_occurred"] = a.transaction_occurred;
  j["transaction_type"] = a.transaction_type ? Json(*a.transaction_type) : Json(nullptr);
  j["transaction_amount_usd"] =
      a.transaction_amount_usd ? Json(*a.transaction_amount_usd) : Json(nullptr);
  j["comparison"] = a.comparison;
  j["confidence_score"] = a.confidence_score ? Json(*a.confidence_score) : Json(nullptr);
  j["raw_response"] = a.raw_response;
  j["parse_error"] = a.parse_error;
  Json warnings = Json::array();
  for (const auto& w : a.warnings) {
    warnings.push_back(Json{{"field", w.field}, {"kind", to_string(w.kind)}, {"message", w.message}});
  }
  j["warnings"] = std::move(warnings);
  return j;
}

Assessment assessment_from_json(const Json& j) {
  Assessment a;
  a.doc_id = j.at("doc_id").get<std::string>();
  if (const auto& d = j.at("article_date"); !d.is_null()) {
    const auto s = d.get<std::string>();
    Date date;
    if (std::sscanf(s.c_str(), "%d-%d-%d", &date.year, &date.month, &date.day) == 3) {
      a.article_date = date;
    }
  }
  a.participants = j.at("participants").get<std::string>();
  a.transaction_occurred = j.at("transaction_occurred").get<bool>();
  if (const auto& t = j.at("transaction_type"); !t.is_null()) a.transaction_type = t.get<std::string>();
  if (const auto& t = j.at("transaction_amount_usd"); !t.is_null()) {
    a.transaction_amount_usd = t.get<double>();
  }
  a.comparison = j.at("comparison").get<std::string>();
  if (const auto& c = j.at("confidence_score"); !c.is_null()) a.confidence_score = c.get<int>();
  a.raw_response = j.at("raw_response").get<std::string>();
  a.parse_error = j.value("parse_error", false);
  for (const auto& w : j.value("warnings", Json::array())) {
    a.warnings.push_back({w.at("field").get<std::string>(),
                          parse_warning_kind(w.at("kind").get<std::string>()),
                          w.at("message").get<std::string>()});
  }
  return a;
}

std::string render_rag_prompt(std::string_view summary, std::string_view target_topic) {
  if (summary.empty() || target_topic.empty()) {
    throw std::invalid_argument("render_rag_prompt: summary and target_topic must be nonempty");
  }
  return prompts::render(prompts::kRetrievalTemplate,
                         {{"summary", summary}, {"target_topic", target_topic}});
}

std::string render_ca_prompt(std::string_view summary, std::string_view retrieved_text,
                             const ComparisonContext& ctx) {
  if (summary.empty() || retrieved_text.empty() || ctx.company.empty() ||
      ctx.target_topic.empty()) {
    throw std::invalid_argument("render_ca_prompt: all inputs must be nonempty");
  }
  return prompts::render(prompts::kComparisonTemplate, {{"company", ctx.company},
                                                        {"summary", summary},
                                                        {"retrieved_text", retrieved_text},
                                                        {"target_topic", ctx.target_topic}});
}

std::string format_passages(const CriteriaIndex& index, const RetrievalResult& retrieved) {
  std::string out;
  for (std::size_t i = 0; i < retrieved.hits.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += "Criteria passage " + std::to_string(i + 1) + ": ";
    out += index.passage(retrieved.hits[i].passage_id).text;
  }
  return out;
}

std::string render_merged_prompt(std::string_view summary, std::string_view passages,
                                 const ComparisonContext& ctx) {
  std::string out = render_rag_prompt(summary, ctx.target_topic);
  out += "\n\n";
  out += passages;
  out += "\n\n";
  out += render_ca_prompt(summary, passages, ctx);
  return out;
}

std::string retrieval_query_text(std::string_view summary, const ComparisonContext& ctx,
                                 QueryMode mode) {
  if (mode == QueryMode::full_prompt) return render_rag_prompt(summary, ctx.target_topic);
  std::string q(summary);
  q.push_back('\n');
  q += ctx.target_topic;
  return q;
}

RagOutput run_rag(std::string_view doc_id, std::string_view subject_text,
                  const CriteriaIndex& index, const ComparisonContext& ctx,
                  const CompletionProfile& profile, LlmGateway& gateway, TokenLedger& ledger,
                  std::size_t k, QueryMode mode) {
  RagOutput out;
  out.doc_id = std::string(doc_id);
  out.retrieved = index.top_k(gateway, retrieval_query_text(subject_text, ctx, mode), k,
                              out.doc_id);

  std::string prompt = render_rag_prompt(subject_text, ctx.target_topic);
  const std::string passages = format_passages(index, out.retrieved);
  if (!passages.empty()) {
    prompt += "\n\n";
    prompt += passages;
  }
  out.augmented_text =
      gateway.complete(profile, prompt, CallContext{out.doc_id, Stage::retrieval}, ledger);
  if (out.augmented_text.empty()) {
    throw StageError(out.doc_id, "retrieval", "retrieval completion returned no text");
  }
  return out;
}

RagOutput run_rag(const SummaryRecord& summary, const CriteriaIndex& index,
                  const ComparisonContext& ctx, const CompletionProfile& profile,
                  LlmGateway& gateway, TokenLedger& ledger, std::size_t k, QueryMode mode) {
  return run_rag(summary.doc_id, summary.final_text, index, ctx, profile, gateway, ledger, k,
                 mode);
}

Assessment assess_prompt(std::string_view doc_id, const std::string& prompt,
                         const CompletionProfile& profile, LlmGateway& gateway,
                         TokenLedger& ledger) {
  const std::string raw = gateway.complete(
      profile, prompt, CallContext{std::string(doc_id), Stage::assessment}, ledger);
  Assessment a = parse_assessment(raw);
  a.doc_id = std::string(doc_id);
  return a;
}

Assessment run_assessment(std::string_view doc_id, std::string_view subject_text,
                          std::string_view retrieved_text, const ComparisonContext& ctx,
                          const CompletionProfile& profile, LlmGateway& gateway,
                          TokenLedger& ledger) {
  return assess_prompt(doc_id, render_ca_prompt(subject_text, retrieved_text, ctx), profile,
                       gateway, ledger);
}

Assessment run_assessment(const SummaryRecord& summary, const RagOutput& rag,
                          const ComparisonContext& ctx, const CompletionProfile& profile,
                          LlmGateway& gateway, TokenLedger& ledger) {
  return run_assessment(summary.doc_id, summary.final_text, rag.augmented_text, ctx, profile,
                        gateway, ledger);
}

}  // namespace asc2end
