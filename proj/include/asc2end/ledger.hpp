#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace asc2end {

using Json = nlohmann::ordered_json;

enum class Stage { summary, retrieval, assessment };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view name);

enum class Tier { machine_level, human_level };

std::string_view to_string(Tier tier);
Tier parse_tier(std::string_view name);

// One completion call (or an aggregate of calls for one document and stage).
// Token counts always use the 4-chars-per-token estimate; counts reported by a
// real backend are carried alongside when available.
struct TokenLedgerEntry {
  std::string doc_id;
  Stage stage = Stage::summary;
  Tier tier = Tier::machine_level;
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  double wall_time_ms = 0.0;
  std::uint64_t calls = 1;
  std::optional<std::uint64_t> backend_prompt_tokens;
  std::optional<std::uint64_t> backend_completion_tokens;

  std::uint64_t total_tokens() const { return prompt_tokens + completion_tokens; }
};

Json to_json(const TokenLedgerEntry& entry);
TokenLedgerEntry ledger_entry_from_json(const Json& j);

// Sums `entries` into one entry (doc_id/stage/tier taken from the first one).
TokenLedgerEntry aggregate(std::span<const TokenLedgerEntry> entries);

struct LedgerTotals {
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  std::uint64_t calls = 0;
  double wall_time_ms = 0.0;

  std::uint64_t total_tokens() const { return prompt_tokens + completion_tokens; }
  void add(const TokenLedgerEntry& e);
};

struct LedgerReport {
  std::map<Stage, LedgerTotals> per_stage;
  std::map<Tier, LedgerTotals> per_tier;
  LedgerTotals grand;
};

LedgerReport ledger_report(std::span<const TokenLedgerEntry> entries);
Json to_json(const LedgerTotals& totals);

// 100 * (other - base) / base; zero when both are zero. Throws
// std::domain_error when only base is zero.
double percent_difference(double base, double other);

// Thread-safe append-only ledger. Entries keep their append order.
class TokenLedger {
 public:
  void append(TokenLedgerEntry entry);
  void append_all(std::span<const TokenLedgerEntry> entries);
  std::vector<TokenLedgerEntry> entries() const;
  LedgerReport report() const;

 private:
  mutable std::mutex mutex_;
  std::vector<TokenLedgerEntry> entries_;
};

}  // namespace asc2end
