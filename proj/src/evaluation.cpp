#include "asc2end/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>

#include "asc2end/errors.hpp"
#include "asc2end/log.hpp"
#include "asc2end/summarizer.hpp"

namespace asc2end {

std::string_view to_string(RougeKind kind) {
  switch (kind) {
    case RougeKind::rouge1: return "rouge1";
    case RougeKind::rouge2: return "rouge2";
    case RougeKind::rougeL: return "rougeL";
  }
  return "";
}

std::string_view to_string(OverlapMode mode) {
  return mode == OverlapMode::clipped ? "clipped" : "set";
}

OverlapMode parse_overlap_mode(std::string_view name) {
  if (name == "clipped") return OverlapMode::clipped;
  if (name == "set") return OverlapMode::set;
  throw ConfigError("unknown rouge_overlap: " + std::string(name) + " (expected clipped or set)");
}

std::vector<std::string> tokenize_for_rouge(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i;
    std::size_t e = j;
    while (b < e && std::ispunct(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b < e) {
      std::string token(text.substr(b, e - b));
      for (char& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      out.push_back(std::move(token));
    }
    i = j;
  }
  return out;
}

double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(const std::vector<std::string>& tokens,
                                                             std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

RougeScore rouge_n(std::string_view candidate, std::string_view reference, int n,
                   OverlapMode mode) {
  if (n != 1 && n != 2) throw std::invalid_argument("rouge_n: n must be 1 or 2");
  const auto cand = ngram_counts(tokenize_for_rouge(candidate), static_cast<std::size_t>(n));
  const auto ref = ngram_counts(tokenize_for_rouge(reference), static_cast<std::size_t>(n));

  std::size_t overlap = 0, cand_total = 0, ref_total = 0;
  for (const auto& [gram, count] : cand) {
    cand_total += mode == OverlapMode::clipped ? count : 1;
    if (auto it = ref.find(gram); it != ref.end()) {
      overlap += mode == OverlapMode::clipped ? std::min(count, it->second) : 1;
    }
  }
  for (const auto& [gram, count] : ref) ref_total += mode == OverlapMode::clipped ? count : 1;

  RougeScore s;
  s.kind = n == 1 ? RougeKind::rouge1 : RougeKind::rouge2;
  s.precision = ratio(overlap, cand_total);
  s.recall = ratio(overlap, ref_total);
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(std::string_view candidate, std::string_view reference) {
  const auto cand = tokenize_for_rouge(candidate);
  const auto ref = tokenize_for_rouge(reference);
  const std::size_t lcs = lcs_length(cand, ref);
  RougeScore s;
  s.kind = RougeKind::rougeL;
  s.precision = ratio(lcs, cand.size());
  s.recall = ratio(lcs, ref.size());
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

RougeTriple score_pair(std::string_view candidate, std::string_view reference, OverlapMode mode) {
  return RougeTriple{rouge_n(candidate, reference, 1, mode), rouge_n(candidate, reference, 2, mode),
                     rouge_l(candidate, reference)};
}

namespace {

Json score_json(const RougeScore& s) {
  return Json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

Json triple_json(const RougeTriple& t) {
  return Json{{"rouge1", score_json(t.rouge1)},
              {"rouge2", score_json(t.rouge2)},
              {"rougeL", score_json(t.rougeL)}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

}  // namespace

Json to_json(const CorpusRougeReport& report) {
  Json j;
  Json per_doc = Json::object();
  for (const auto& [doc_id, t] : report.per_document) per_doc[doc_id] = triple_json(t);
  j["documents"] = report.per_document.size();
  j["averages"] = triple_json(report.averages);
  j["per_document"] = std::move(per_doc);
  j["warnings"] = report.warnings;
  return j;
}

std::string format_rouge_table(const RougeTriple& a) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %8s %8s %8s\n", "", "ROUGE-1", "ROUGE-2", "ROUGE-L");
  out += line;
  auto row = [&](const char* name, auto get) {
    std::snprintf(line, sizeof line, "%-10s %8.3f %8.3f %8.3f\n", name, get(a.rouge1),
                  get(a.rouge2), get(a.rougeL));
    out += line;
  };
  row("Precision", [](const RougeScore& s) { return s.precision; });
  row("Recall", [](const RougeScore& s) { return s.recall; });
  row("F1", [](const RougeScore& s) { return s.f1; });
  return out;
}

CorpusRougeReport score_summaries(const std::filesystem::path& run_dir,
                                  const std::vector<Document>& corpus, OverlapMode mode) {
  if (!std::filesystem::exists(run_dir / stage_file_name(Stage::summary))) {
    throw InputError("no summaries.jsonl in " + run_dir.string());
  }
  const ArtifactStore store(run_dir);
  const auto summaries = store.read_stage(Stage::summary);

  CorpusRougeReport report;
  for (const auto& doc : corpus) {
    const auto it = summaries.find(doc.doc_id);
    if (it == summaries.end()) {
      report.warnings.push_back("document " + doc.doc_id + " has no summary; excluded");
      log::warn(report.warnings.back());
      continue;
    }
    const auto record = summary_from_json(it->second.payload);
    report.per_document[doc.doc_id] = score_pair(record.final_text, doc.body, mode);
  }

  if (!report.per_document.empty()) {
    const double n = static_cast<double>(report.per_document.size());
    auto mean = [&](RougeScore RougeTriple::*member) {
      RougeScore m{(report.averages.*member).kind};
      for (const auto& [id, t] : report.per_document) {
        m.precision += (t.*member).precision;
        m.recall += (t.*member).recall;
        m.f1 += (t.*member).f1;
      }
      m.precision /= n;
      m.recall /= n;
      m.f1 /= n;
      return m;
    };
    report.averages.rouge1 = mean(&RougeTriple::rouge1);
    report.averages.rouge2 = mean(&RougeTriple::rouge2);
    report.averages.rougeL = mean(&RougeTriple::rougeL);
  }

  write_text(run_dir / "rouge_report.json", to_json(report).dump(2) + "\n");
  write_text(run_dir / "rouge_report.txt", format_rouge_table(report.averages));
  return report;
}

// --- survey -----------------------------------------------------------------

namespace {

std::string trimmed(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

void expect_header(const CsvRecord& header, const std::vector<std::string_view>& names,
                   std::string_view what) {
  bool ok = header.fields.size() == names.size();
  for (std::size_t i = 0; ok && i < names.size(); ++i) ok = trimmed(header.fields[i]) == names[i];
  if (!ok) {
    std::string expected;
    for (auto n : names) expected += (expected.empty() ? "" : ",") + std::string(n);
    throw InputError(std::string(what) + " header must be `" + expected + "`");
  }
}

}  // namespace

std::vector<SurveyScorecard> parse_scorecards(std::string_view csv) {
  const auto records = parse_csv(csv);
  if (records.empty()) throw InputError("scorecard file is empty");
  expect_header(records.front(),
                {"annotator_id", "doc_id", "model_label", "q1", "q2", "q3", "q4", "q5"},
                "scorecard");

  std::vector<SurveyScorecard> cards;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = "scorecard row " + std::to_string(rec.row);
    if (rec.fields.size() != 3 + kSurveyQuestions) {
      throw InputError(where + ": expected 8 columns, got " + std::to_string(rec.fields.size()));
    }
    SurveyScorecard card{trimmed(rec.fields[0]), trimmed(rec.fields[1]), trimmed(rec.fields[2]), {}};
    if (card.model_label.empty()) throw InputError(where + ": empty model_label");
    for (std::size_t q = 0; q < kSurveyQuestions; ++q) {
      const std::string v = trimmed(rec.fields[3 + q]);
      if (v != "0" && v != "1") {
        throw InputError(where + ": q" + std::to_string(q + 1) + " must be 0 or 1, got '" + v + "'");
      }
      card.answers[q] = v == "1" ? 1 : 0;
    }
    cards.push_back(std::move(card));
  }
  return cards;
}

std::vector<SurveyScorecard> load_scorecards(const std::filesystem::path& path) {
  return parse_scorecards(read_file(path));
}

std::map<std::string, std::string> parse_unmask_map(std::string_view csv) {
  const auto records = parse_csv(csv);
  if (records.empty()) throw InputError("unmasking file is empty");
  expect_header(records.front(), {"model_label", "model_name"}, "unmasking");
  std::map<std::string, std::string> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != 2) {
      throw InputError("unmasking row " + std::to_string(rec.row) + ": expected 2 columns, got " +
                       std::to_string(rec.fields.size()));
    }
    const std::string label = trimmed(rec.fields[0]);
    if (!out.emplace(label, trimmed(rec.fields[1])).second) {
      throw InputError("unmasking row " + std::to_string(rec.row) + ": duplicate label " + label);
    }
  }
  return out;
}

std::map<std::string, std::string> load_unmask_map(const std::filesystem::path& path) {
  return parse_unmask_map(read_file(path));
}

std::vector<SurveyModelResult> aggregate_survey(const std::vector<SurveyScorecard>& cards,
                                                const std::map<std::string, std::string>& unmask) {
  std::map<std::string, std::pair<std::size_t, std::array<std::size_t, kSurveyQuestions>>> sums;
  for (const auto& card : cards) {
    const auto it = unmask.find(card.model_label);
    if (it == unmask.end()) {
      throw InputError("model label '" + card.model_label + "' is not in the unmasking map");
    }
    auto& [count, totals] = sums[it->second];
    ++count;
    for (std::size_t q = 0; q < kSurveyQuestions; ++q) {
      if (card.answers[q] != 0 && card.answers[q] != 1) {
        throw InputError("non-binary answer in card for " + card.doc_id);
      }
      totals[q] += static_cast<std::size_t>(card.answers[q]);
    }
  }

  std::vector<SurveyModelResult> out;
  for (const auto& [name, entry] : sums) {
    SurveyModelResult r;
    r.model_name = name;
    r.cards = entry.first;
    for (std::size_t q = 0; q < kSurveyQuestions; ++q) {
      r.means[q] = static_cast<double>(entry.second[q]) / static_cast<double>(entry.first);
      r.overall += r.means[q];
    }
    out.push_back(std::move(r));
  }
  return out;
}

Json to_json(const std::vector<SurveyModelResult>& results) {
  Json arr = Json::array();
  for (const auto& r : results) {
    Json means = Json::object();
    for (std::size_t q = 0; q < kSurveyQuestions; ++q) {
      means[std::string(kSurveyQuestionNames[q])] = r.means[q];
    }
    arr.push_back(Json{{"model", r.model_name}, {"cards", r.cards}, {"means", std::move(means)},
                       {"overall", r.overall}});
  }
  return arr;
}

std::string format_survey_table(const std::vector<SurveyModelResult>& results) {
  std::size_t width = 5;
  for (const auto& r : results) width = std::max(width, r.model_name.size());
  std::string out;
  char cell[64];
  out += std::string("Model") + std::string(width - 5, ' ');
  for (std::size_t q = 0; q < kSurveyQuestions; ++q) {
    std::snprintf(cell, sizeof cell, " %7s", ("Q" + std::to_string(q + 1)).c_str());
    out += cell;
  }
  out += "  Overall\n";
  for (const auto& r : results) {
    out += r.model_name + std::string(width - r.model_name.size(), ' ');
    for (double m : r.means) {
      std::snprintf(cell, sizeof cell, " %7.3f", m);
      out += cell;
    }
    std::snprintf(cell, sizeof cell, "  %7.3f\n", r.overall);
    out += cell;
  }
  out += "\n";
  for (std::size_t q = 0; q < kSurveyQuestions; ++q) {
    out += "Q" + std::to_string(q + 1) + ": " + std::string(kSurveyQuestionNames[q]) + "\n";
  }
  return out;
}

}  // namespace asc2end
