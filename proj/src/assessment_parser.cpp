#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <regex>

#include "asc2end/rag_compare.hpp"

namespace asc2end {
namespace {

enum Field : std::size_t { kDate, kParticipants, kTransaction, kAmount, kComparison, kConfidence, kFieldCount };

constexpr std::array<std::string_view, kFieldCount> kFieldNames = {
    "article_date",           "participants", "transaction_occurred",
    "transaction_amount_usd", "comparison",   "confidence_score"};

// Leading bullets / quote marks / headings, then an optional bold marker, the
// field number, the label and its colon.
const std::regex& label_regex() {
  static const std::regex re(
      "^\\s*(?:(?:[-*>#+]|\xE2\x80\xA2)\\s*)*(?:\\*\\*|__)?\\s*([1-6])\\s*[.):]\\s*(?:\\*\\*|__)?\\s*"
      "(article date|date|participants of the transaction|participants|"
      "transaction amount in dollars|transaction amount|"
      "transaction and transaction type|transaction type|transaction|"
      "comparison|confidence score|confidence)"
      "\\s*(?:\\*\\*|__)?\\s*:?\\s*(?:\\*\\*|__)?(.*)$",
      std::regex::icase);
  return re;
}

Field field_for_label(std::string label) {
  std::transform(label.begin(), label.end(), label.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (label.find("date") != std::string::npos) return kDate;
  if (label.starts_with("participants")) return kParticipants;
  if (label.starts_with("transaction amount")) return kAmount;
  if (label.starts_with("transaction")) return kTransaction;
  if (label == "comparison") return kComparison;
  return kConfidence;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Trims whitespace and stray markdown emphasis around a field value.
std::string clean_value(std::string_view s) {
  std::string out = trim(s);
  for (const std::string_view marker : {"**", "__"}) {
    while (out.starts_with(marker)) out = trim(std::string_view(out).substr(marker.size()));
    while (out.ends_with(marker)) out = trim(std::string_view(out).substr(0, out.size() - marker.size()));
  }
  return out;
}

std::string strip_bullets(std::string_view s) {
  std::string out = trim(s);
  for (;;) {
    if (!out.empty() && (out[0] == '-' || out[0] == '*' || out[0] == '>' || out[0] == '+')) {
      out = trim(std::string_view(out).substr(1));
    } else if (out.starts_with("\xE2\x80\xA2")) {
      out = trim(std::string_view(out).substr(3));
    } else {
      return out;
    }
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool valid_date(int y, int m, int d) {
  if (y < 1 || m < 1 || m > 12 || d < 1) return false;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  const int limit = kDays[m - 1] + (m == 2 && leap ? 1 : 0);
  return d <= limit;
}

std::optional<Date> parse_date(const std::string& text) {
  static const std::regex re(R"((\d{1,2})/(\d{1,2})/(\d{4}))");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator();
       ++it) {
    const int m = std::stoi((*it)[1].str());
    const int d = std::stoi((*it)[2].str());
    const int y = std::stoi((*it)[3].str());
    if (valid_date(y, m, d)) return Date{y, m, d};
  }
  return std::nullopt;
}

struct TransactionField {
  bool occurred = false;
  std::optional<std::string> type;
};

std::string strip_type_prefix(std::string s) {
  static const std::regex prefix(
      R"(^(?:the\s+)?(?:transaction\s+)?type(?:\s+of\s+transaction)?(?:\s+is)?\s*[:\-]?\s*)",
      std::regex::icase);
  return trim(std::regex_replace(s, prefix, "", std::regex_constants::format_first_only));
}

TransactionField parse_transaction(const std::string& value) {
  TransactionField out;
  std::string text = strip_bullets(value);
  if (const auto nl = text.find('\n'); nl != std::string::npos) {
    // Multi-line answers: keep the first line for the verdict, the rest may name the type.
    const std::string first = strip_bullets(text.substr(0, nl));
    const std::string rest = strip_bullets(text.substr(nl + 1));
    text = first.empty() ? rest : first + (rest.empty() ? "" : " " + rest);
  }
  const std::string low = lower(text);
  auto starts_with_word = [&](std::string_view w) {
    return low.starts_with(w) &&
           (low.size() == w.size() || !std::isalnum(static_cast<unsigned char>(low[w.size()])));
  };

  if (starts_with_word("yes")) {
    out.occurred = true;
    std::string rest = text.substr(3);
    rest.erase(0, rest.find_first_not_of(" ,.;:-\t"));
    rest = strip_type_prefix(rest);
    while (!rest.empty() && (rest.back() == '.' || rest.back() == ';')) rest.pop_back();
    if (!rest.empty()) out.type = rest;
    return out;
  }
  if (starts_with_word("no") || starts_with_word("none") || starts_with_word("n/a")) return out;
  for (std::string_view marker : {"no transaction", "not taken place", "has not taken", "did not",
                                  "no financial transaction", "not applicable"}) {
    if (low.find(marker) != std::string::npos) return out;
  }
  out.occurred = true;
  std::string type = strip_type_prefix(text);
  while (!type.empty() && (type.back() == '.' || type.back() == ';')) type.pop_back();
  if (!type.empty()) out.type = type;
  return out;
}

double apply_multiplier(const std::string& number, std::uint64_t multiplier) {
  std::string digits;
  std::size_t frac_digits = 0;
  bool seen_dot = false;
  for (char c : number) {
    if (c == ',') continue;
    if (c == '.') {
      seen_dot = true;
      continue;
    }
    digits.push_back(c);
    if (seen_dot) ++frac_digits;
  }
  if (digits.size() > 18 || frac_digits > 12) {
    std::string plain;
    for (char c : number) {
      if (c != ',') plain.push_back(c);
    }
    return std::strtod(plain.c_str(), nullptr) * static_cast<double>(multiplier);
  }
  const std::uint64_t mantissa = std::stoull(digits);
  std::uint64_t scale = 1;
  for (std::size_t i = 0; i < frac_digits; ++i) scale *= 10;
  if (multiplier % scale == 0) {
    const unsigned __int128 exact =
        static_cast<unsigned __int128>(mantissa) * (multiplier / scale);
    return static_cast<double>(exact);
  }
  return static_cast<double>(mantissa) * static_cast<double>(multiplier) /
         static_cast<double>(scale);
}

std::uint64_t multiplier_for(std::string word) {
  word = lower(word);
  if (word.empty()) return 1;
  if (word == "thousand" || word == "k") return 1'000ULL;
  if (word == "million" || word == "mn" || word == "mm" || word == "m") return 1'000'000ULL;
  if (word == "billion" || word == "bn" || word == "b") return 1'000'000'000ULL;
  if (word == "trillion" || word == "tn") return 1'000'000'000'000ULL;
  return 1;
}

}  // namespace

std::optional<double> parse_dollar_amount(std::string_view text_view) {
  static const std::regex currency(
      R"((?:us\s?\$|\$|usd)\s*(\d[\d,]*(?:\.\d+)?)(?:\s*(trillion|billion|million|thousand|tn|bn|mn|mm|k|m|b)\b)?)",
      std::regex::icase);
  static const std::regex magnitude(
      R"((\d[\d,]*(?:\.\d+)?)\s*(trillion|billion|million|thousand|tn|bn|mn)\b)",
      std::regex::icase);
  static const std::regex in_dollars(R"((\d[\d,]*(?:\.\d+)?)\s*(?:dollars|usd)\b)",
                                     std::regex::icase);
  static const std::regex leading_number(R"(^(\d[\d,]*(?:\.\d+)?)\b)");

  const std::string text(text_view);
  std::smatch m;
  if (std::regex_search(text, m, currency)) {
    return apply_multiplier(m[1].str(), multiplier_for(m[2].matched ? m[2].str() : ""));
  }
  if (std::regex_search(text, m, magnitude)) {
    return apply_multiplier(m[1].str(), multiplier_for(m[2].str()));
  }
  if (std::regex_search(text, m, in_dollars)) return apply_multiplier(m[1].str(), 1);
  const std::string bare = strip_bullets(text);
  if (std::regex_search(bare, m, leading_number)) return apply_multiplier(m[1].str(), 1);
  return std::nullopt;
}

Assessment parse_assessment(std::string_view raw) {
  Assessment a;
  a.raw_response = std::string(raw);

  std::array<std::optional<std::string>, kFieldCount> values;
  std::optional<Field> current;

  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    std::string line(raw.substr(pos, nl - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = nl + 1;

    std::smatch m;
    if (std::regex_match(line, m, label_regex())) {
      const Field f = field_for_label(m[2].str());
      if (!values[f]) {
        values[f] = m[3].str();
        current = f;
      } else {
        current.reset();  // repeated label: first occurrence wins
      }
      continue;
    }
    if (current) {
      values[*current]->push_back('\n');
      *values[*current] += line;
    }
    if (nl == raw.size()) break;
  }

  auto warn = [&](Field f, WarningKind kind, std::string message) {
    a.warnings.push_back({std::string(kFieldNames[f]), kind, std::move(message)});
  };

  for (std::size_t f = 0; f < kFieldCount; ++f) {
    if (values[f]) *values[f] = clean_value(*values[f]);
    if (!values[f]) {
      warn(static_cast<Field>(f), WarningKind::missing_field,
           "field " + std::to_string(f + 1) + " (" + std::string(kFieldNames[f]) + ") not found");
      a.parse_error = true;
    }
  }

  if (values[kDate]) {
    a.article_date = parse_date(*values[kDate]);
    if (!a.article_date) {
      warn(kDate, WarningKind::unparseable,
           "no valid MM/DD/YYYY date in '" + *values[kDate] + "'");
    }
  }

  if (values[kParticipants]) {
    a.participants = *values[kParticipants];
    if (a.participants.empty()) warn(kParticipants, WarningKind::unparseable, "participants field is empty");
  }

  if (values[kTransaction]) {
    if (values[kTransaction]->empty()) {
      warn(kTransaction, WarningKind::unparseable, "transaction field is empty");
    } else {
      const auto t = parse_transaction(*values[kTransaction]);
      a.transaction_occurred = t.occurred;
      a.transaction_type = t.type;
    }
  }

  if (values[kAmount]) {
    a.transaction_amount_usd = parse_dollar_amount(*values[kAmount]);
    if (!a.transaction_amount_usd) {
      warn(kAmount, WarningKind::unparseable,
           "no dollar amount in '" + *values[kAmount] + "'");
    }
  }

  if (values[kComparison]) {
    a.comparison = *values[kComparison];
    if (a.comparison.empty()) warn(kComparison, WarningKind::unparseable, "comparison field is empty");
  }

  if (values[kConfidence]) {
    static const std::regex integer(R"(-?\d+)");
    std::smatch m;
    if (std::regex_search(*values[kConfidence], m, integer)) {
      long long score = 0;
      const std::string digits = m.str(0);
      // Long digit runs saturate instead of overflowing.
      score = digits.size() > 12 ? (digits[0] == '-' ? -1 : 1000) : std::stoll(digits);
      const long long clamped = std::clamp<long long>(score, 0, 100);
      if (clamped != score) {
        warn(kConfidence, WarningKind::clamped,
             "confidence score " + digits + " clamped to " + std::to_string(clamped));
      }
      a.confidence_score = static_cast<int>(clamped);
    } else {
      warn(kConfidence, WarningKind::unparseable,
           "no integer in confidence field '" + *values[kConfidence] + "'");
      a.parse_error = true;
    }
  }

  // The prompt asks for a score of 0 whenever there is no transaction or the
  // amount is $0. Disagreement is surfaced, never corrected.
  const bool transaction_known = values[kTransaction] && !values[kTransaction]->empty();
  const bool no_transaction = transaction_known && !a.transaction_occurred;
  const bool zero_amount = a.transaction_amount_usd && *a.transaction_amount_usd == 0.0;
  if (no_transaction && a.transaction_amount_usd && *a.transaction_amount_usd > 0.0) {
    warn(kAmount, WarningKind::inconsistent,
         "no transaction reported but an amount of " +
             std::to_string(static_cast<long long>(*a.transaction_amount_usd)) + " was given");
  }
  if ((no_transaction || zero_amount) && a.confidence_score && *a.confidence_score != 0) {
    warn(kConfidence, WarningKind::inconsistent,
         "no transaction or $0 amount but confidence score is " +
             std::to_string(*a.confidence_score) + " (expected 0)");
  }
  return a;
}

}  // namespace asc2end
