#include "asc2end/ledger.hpp"

#include <stdexcept>

namespace asc2end {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::summary: return "summary";
    case Stage::retrieval: return "retrieval";
    case Stage::assessment: return "assessment";
  }
  return "";
}

Stage parse_stage(std::string_view name) {
  if (name == "summary") return Stage::summary;
  if (name == "retrieval") return Stage::retrieval;
  if (name == "assessment") return Stage::assessment;
  throw std::invalid_argument("unknown stage: " + std::string(name));
}

std::string_view to_string(Tier tier) {
  return tier == Tier::machine_level ? "machine_level" : "human_level";
}

Tier parse_tier(std::string_view name) {
  if (name == "machine_level") return Tier::machine_level;
  if (name == "human_level") return Tier::human_level;
  throw std::invalid_argument("unknown tier: " + std::string(name));
}

Json to_json(const TokenLedgerEntry& e) {
  Json j;
  j["doc_id"] = e.doc_id;
  j["stage"] = to_string(e.stage);
  j["tier"] = to_string(e.tier);
  j["prompt_tokens"] = e.prompt_tokens;
  j["completion_tokens"] = e.completion_tokens;
  j["wall_time_ms"] = e.wall_time_ms;
  j["calls"] = e.calls;
  if (e.backend_prompt_tokens) j["backend_prompt_tokens"] = *e.backend_prompt_tokens;
  if (e.backend_completion_tokens) {
    j["backend_completion_tokens"] = *e.backend_completion_tokens;
  }
  return j;
}

TokenLedgerEntry ledger_entry_from_json(const Json& j) {
  TokenLedgerEntry e;
  e.doc_id = j.at("doc_id").get<std::string>();
  e.stage = parse_stage(j.at("stage").get<std::string>());
  e.tier = parse_tier(j.value("tier", std::string("machine_level")));
  e.prompt_tokens = j.at("prompt_tokens").get<std::uint64_t>();
  e.completion_tokens = j.at("completion_tokens").get<std::uint64_t>();
  e.wall_time_ms = j.value("wall_time_ms", 0.0);
  e.calls = j.value("calls", std::uint64_t{1});
  if (j.contains("backend_prompt_tokens")) {
    e.backend_prompt_tokens = j["backend_prompt_tokens"].get<std::uint64_t>();
  }
  if (j.contains("backend_completion_tokens")) {
    e.backend_completion_tokens = j["backend_completion_tokens"].get<std::uint64_t>();
  }
  return e;
}

TokenLedgerEntry aggregate(std::span<const TokenLedgerEntry> entries) {
  TokenLedgerEntry out;
  out.calls = 0;
  if (entries.empty()) return out;
  out.doc_id = entries.front().doc_id;
  out.stage = entries.front().stage;
  out.tier = entries.front().tier;
  for (const auto& e : entries) {
    out.prompt_tokens += e.prompt_tokens;
    out.completion_tokens += e.completion_tokens;
    out.wall_time_ms += e.wall_time_ms;
    out.calls += e.calls;
    if (e.backend_prompt_tokens) {
      out.backend_prompt_tokens = out.backend_prompt_tokens.value_or(0) + *e.backend_prompt_tokens;
    }
    if (e.backend_completion_tokens) {
      out.backend_completion_tokens =
          out.backend_completion_tokens.value_or(0) + *e.backend_completion_tokens;
    }
  }
  return out;
}

void LedgerTotals::add(const TokenLedgerEntry& e) {
  prompt_tokens += e.prompt_tokens;
  completion_tokens += e.completion_tokens;
  calls += e.calls;
  wall_time_ms += e.wall_time_ms;
}

LedgerReport ledger_report(std::span<const TokenLedgerEntry> entries) {
  LedgerReport report;
  for (const auto& e : entries) {
    report.per_stage[e.stage].add(e);
    report.per_tier[e.tier].add(e);
    report.grand.add(e);
  }
  return report;
}

Json to_json(const LedgerTotals& t) {
  Json j;
  j["prompt_tokens"] = t.prompt_tokens;
  j["completion_tokens"] = t.completion_tokens;
  j["total_tokens"] = t.total_tokens();
  j["calls"] = t.calls;
  j["wall_time_ms"] = t.wall_time_ms;
  return j;
}

double percent_difference(double base, double other) {
  if (base == 0.0) {
    if (other == 0.0) return 0.0;
    throw std::domain_error("percent_difference: base is zero");
  }
  return 100.0 * (other - base) / base;
}

void TokenLedger::append(TokenLedgerEntry entry) {
  std::lock_guard lock(mutex_);
  entries_.push_back(std::move(entry));
}

void TokenLedger::append_all(std::span<const TokenLedgerEntry> entries) {
  std::lock_guard lock(mutex_);
  entries_.insert(entries_.end(), entries.begin(), entries.end());
}

std::vector<TokenLedgerEntry> TokenLedger::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

LedgerReport TokenLedger::report() const {
  std::lock_guard lock(mutex_);
  return ledger_report(entries_);
}

}  // namespace asc2end
