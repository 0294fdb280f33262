#include "asc2end/runner.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "asc2end/errors.hpp"
#include "asc2end/log.hpp"
#include "asc2end/worker_pool.hpp"

namespace asc2end {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kIndexFile = "criteria_index.json";
constexpr std::string_view kRunFile = "run.json";

bool uses_ds(Mode m) { return m == Mode::full || m == Mode::no_rag || m == Mode::no_ca; }
bool uses_index(Mode m) { return m == Mode::full || m == Mode::no_ds || m == Mode::no_ca; }

std::size_t idx(Stage s) { return static_cast<std::size_t>(s); }

constexpr std::array<Stage, 3> kStages = {Stage::summary, Stage::retrieval, Stage::assessment};

void write_file(const fs::path& path, const std::string& text) {
  const fs::path tmp(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << text;
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void remove_previous_run(const fs::path& run_dir) {
  for (std::string_view name :
       {"summaries.jsonl", "retrievals.jsonl", "assessments.jsonl", "warnings.jsonl",
        "criteria_index.json", "run.json", "report.json", "report.txt", "rouge_report.json",
        "rouge_report.txt"}) {
    std::error_code ec;
    fs::remove(run_dir / name, ec);
  }
}

CompletionProfile profile_for(Tier tier, const BackendConfig& b,
                              const std::shared_ptr<CompletionBackend>& replacement) {
  if (!replacement) return make_profile(tier, b);
  CompletionProfile p = tier == Tier::machine_level ? CompletionProfile::machine_level(replacement)
                                                    : CompletionProfile::human_level(replacement);
  if (b.temperature) p.temperature = *b.temperature;
  if (b.max_new_tokens) p.max_new_tokens = *b.max_new_tokens;
  p.options = b.options;
  return p;
}

// Everything that must match for a run directory to be resumed.
Json run_identity(const RunConfig& cfg, std::string_view corpus_digest,
                  std::string_view criteria_digest, const CompletionProfile& machine,
                  const CompletionProfile& human, const EmbeddingBackend& embedder) {
  Json j;
  j["mode"] = to_string(cfg.mode);
  j["corpus_digest"] = corpus_digest;
  j["criteria_digest"] = criteria_digest;
  j["sample"] = cfg.sample ? Json(*cfg.sample) : Json(nullptr);
  j["seed"] = cfg.seed;
  j["company"] = cfg.context.company;
  j["target_topic"] = cfg.context.target_topic;
  j["summary"] = Json{{"chunk_budget_tokens", cfg.summary.chunk_budget_tokens},
                      {"segment_budget_tokens", cfg.summary.segment_budget_tokens},
                      {"threshold_tokens", cfg.summary.threshold_tokens},
                      {"max_passes", cfg.summary.max_passes},
                      {"boundary_policy", to_string(cfg.summary.boundary)}};
  j["index"] = Json{{"window_chars", cfg.index.window_chars},
                    {"overlap_chars", cfg.index.overlap_chars}};
  j["k"] = cfg.k;
  j["query_mode"] = to_string(cfg.query_mode);
  j["machine"] = Json{{"backend", machine.endpoint->describe()},
                      {"temperature", machine.temperature},
                      {"max_new_tokens", machine.max_new_tokens}};
  j["human"] = Json{{"backend", human.endpoint->describe()},
                    {"temperature", human.temperature},
                    {"max_new_tokens", human.max_new_tokens}};
  j["embedding"] = embedder.describe() + "/" + std::to_string(cfg.embedding.dim);
  return j;
}

void check_or_write_identity(const fs::path& run_dir, const Json& identity) {
  const fs::path path = run_dir / kRunFile;
  if (fs::exists(path)) {
    Json previous;
    try {
      previous = Json::parse(read_file(path));
    } catch (const std::exception& e) {
      throw ConfigError("unreadable " + path.string() + ": " + e.what());
    }
    if (previous.value("mode", std::string()) != identity["mode"].get<std::string>()) {
      throw ConfigError("run directory " + run_dir.string() + " holds a " +
                        previous.value("mode", std::string("?")) +
                        " run; use another run_dir or --fresh");
    }
    for (const auto& [key, value] : identity.items()) {
      if (!previous.contains(key) || previous[key] != value) {
        throw ConfigError("run directory " + run_dir.string() + " was produced with a different " +
                          key + "; use another run_dir or --fresh");
      }
    }
    return;
  }
  write_file(path, identity.dump(2) + "\n");
}

CriteriaIndex prepare_index(const RunConfig& cfg, const CriteriaDocument& criteria,
                            LlmGateway& gateway) {
  const fs::path path = cfg.run_dir / kIndexFile;
  const std::string digest = criteria_digest(criteria.text);
  if (fs::exists(path)) {
    try {
      auto index = CriteriaIndex::load(path);
      if (index.source_digest() == digest &&
          index.options().window_chars == cfg.index.window_chars &&
          index.options().overlap_chars == cfg.index.overlap_chars) {
        log::info("reusing criteria index with " + std::to_string(index.size()) + " passages");
        return index;
      }
      log::warn("criteria index in run_dir is stale; rebuilding");
    } catch (const std::exception& e) {
      log::warn(std::string("cannot read criteria index (") + e.what() + "); rebuilding");
    }
  }
  CriteriaIndex index = [&] {
    try {
      return CriteriaIndex::build(criteria, gateway, cfg.index);
    } catch (const BackendError& e) {
      throw BackendError(std::string("embedding the criteria failed: ") + e.what(), false);
    }
  }();
  index.save(path);
  log::info("indexed " + std::to_string(index.size()) + " criteria passages");
  return index;
}

struct StageOutput {
  std::optional<Json> payload;  // new artifact to persist
  std::vector<TokenLedgerEntry> entries;
  bool resumed = false;
};

struct DocOutcome {
  std::array<StageOutput, 3> stages;
  bool assessed = false;
  std::vector<std::pair<std::string, std::string>> warnings;  // stage, message
  std::optional<DocFailure> failure;
};

TokenLedgerEntry usage_of(const std::vector<TokenLedgerEntry>& entries, const std::string& doc_id,
                          Stage stage, Tier tier) {
  TokenLedgerEntry e = aggregate(entries);
  e.doc_id = doc_id;
  e.stage = stage;
  e.tier = tier;
  return e;
}

LedgerTotals totals_from_json(const Json& j) {
  LedgerTotals t;
  t.prompt_tokens = j.at("prompt_tokens").get<std::uint64_t>();
  t.completion_tokens = j.at("completion_tokens").get<std::uint64_t>();
  t.calls = j.at("calls").get<std::uint64_t>();
  t.wall_time_ms = j.at("wall_time_ms").get<double>();
  return t;
}

}  // namespace

int RunReport::exit_code() const {
  if (failures.empty()) return 0;
  const bool all_backend = std::all_of(failures.begin(), failures.end(),
                                       [](const DocFailure& f) { return f.backend_failure; });
  return docs_processed == 0 && all_backend ? 4 : 3;
}

Json to_json(const RunReport& r) {
  Json j;
  j["mode"] = to_string(r.mode);
  j["docs_total"] = r.docs_total;
  j["docs_processed"] = r.docs_processed;
  j["docs_resumed"] = r.docs_resumed;
  j["criteria_passages"] = r.criteria_passages;
  j["total_tokens"] = r.total_tokens;
  j["comparison_tokens"] = r.comparison_tokens;
  j["wall_time_ms"] = r.wall_time_ms;
  Json stages = Json::object();
  for (const auto& [stage, totals] : r.ledger.per_stage) stages[std::string(to_string(stage))] = to_json(totals);
  Json tiers = Json::object();
  for (const auto& [tier, totals] : r.ledger.per_tier) tiers[std::string(to_string(tier))] = to_json(totals);
  j["per_stage"] = std::move(stages);
  j["per_tier"] = std::move(tiers);
  j["grand"] = to_json(r.ledger.grand);
  Json failures = Json::array();
  for (const auto& f : r.failures) {
    failures.push_back(Json{{"doc_id", f.doc_id},
                            {"stage", f.stage},
                            {"message", f.message},
                            {"backend_failure", f.backend_failure}});
  }
  j["failures"] = std::move(failures);
  j["warnings"] = r.warnings;
  j["exit_code"] = r.exit_code();
  return j;
}

RunReport run_report_from_json(const Json& j) {
  RunReport r;
  r.mode = parse_mode(j.at("mode").get<std::string>());
  r.docs_total = j.at("docs_total").get<std::size_t>();
  r.docs_processed = j.at("docs_processed").get<std::size_t>();
  r.docs_resumed = j.value("docs_resumed", std::size_t{0});
  r.criteria_passages = j.value("criteria_passages", std::size_t{0});
  r.total_tokens = j.at("total_tokens").get<std::uint64_t>();
  r.comparison_tokens = j.at("comparison_tokens").get<std::uint64_t>();
  r.wall_time_ms = j.at("wall_time_ms").get<double>();
  for (const auto& [name, t] : j.at("per_stage").items()) r.ledger.per_stage[parse_stage(name)] = totals_from_json(t);
  for (const auto& [name, t] : j.at("per_tier").items()) r.ledger.per_tier[parse_tier(name)] = totals_from_json(t);
  r.ledger.grand = totals_from_json(j.at("grand"));
  for (const auto& f : j.value("failures", Json::array())) {
    r.failures.push_back({f.at("doc_id").get<std::string>(), f.at("stage").get<std::string>(),
                          f.at("message").get<std::string>(), f.value("backend_failure", false)});
  }
  r.warnings = j.value("warnings", std::vector<std::string>{});
  return r;
}

RunReport load_run_report(const fs::path& run_dir) {
  const fs::path path = run_dir / "report.json";
  if (!fs::exists(path)) throw InputError("no report.json in " + run_dir.string());
  try {
    return run_report_from_json(Json::parse(read_file(path)));
  } catch (const Json::exception& e) {
    throw InputError("malformed " + path.string() + ": " + e.what());
  }
}

std::string format_run_report(const RunReport& r) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "mode: %s\ndocuments: %zu processed of %zu (%zu resumed)\n",
                std::string(to_string(r.mode)).c_str(), r.docs_processed, r.docs_total,
                r.docs_resumed);
  out += line;
  if (r.criteria_passages > 0) {
    std::snprintf(line, sizeof line, "criteria passages: %zu\n", r.criteria_passages);
    out += line;
  }
  std::snprintf(line, sizeof line, "\n%-14s %12s %12s %12s %8s %12s\n", "", "prompt", "completion",
                "total", "calls", "wall_ms");
  out += line;
  auto row = [&](std::string_view name, const LedgerTotals& t) {
    std::snprintf(line, sizeof line, "%-14s %12llu %12llu %12llu %8llu %12.1f\n",
                  std::string(name).c_str(), static_cast<unsigned long long>(t.prompt_tokens),
                  static_cast<unsigned long long>(t.completion_tokens),
                  static_cast<unsigned long long>(t.total_tokens()),
                  static_cast<unsigned long long>(t.calls), t.wall_time_ms);
    out += line;
  };
  for (const auto& [stage, t] : r.ledger.per_stage) row(to_string(stage), t);
  for (const auto& [tier, t] : r.ledger.per_tier) row(to_string(tier), t);
  row("all", r.ledger.grand);
  std::snprintf(line, sizeof line, "\nwall time: %.1f ms\n", r.wall_time_ms);
  out += line;
  if (!r.failures.empty()) {
    out += "\nfailures:\n";
    for (const auto& f : r.failures) {
      out += "  " + f.doc_id + " [" + f.stage + "] " + f.message + "\n";
    }
  }
  return out;
}

std::vector<Document> sample_corpus(const std::vector<Document>& docs, std::size_t n,
                                    std::uint64_t seed) {
  if (n == 0 || n > docs.size()) {
    throw ConfigError("sample size " + std::to_string(n) + " is outside 1.." +
                      std::to_string(docs.size()));
  }
  // Partial Fisher-Yates with rejection sampling on the raw engine output, so
  // the sample is the same on every standard library.
  std::mt19937_64 rng(seed);
  auto below = [&](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % bound;
  };
  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<Document> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(below(order.size() - i));
    std::swap(order[i], order[j]);
    out.push_back(docs[order[i]]);
  }
  return out;
}

RunReport run_pipeline(const RunConfig& cfg, const RunHooks& hooks) {
  cfg.validate();
  const Mode mode = cfg.mode;

  std::vector<std::string> corpus_warnings;
  std::vector<Document> docs = load_corpus(cfg.corpus_path, &corpus_warnings);
  const std::string corpus_digest = criteria_digest(read_file(cfg.corpus_path));
  const CriteriaDocument criteria = load_criteria(cfg.criteria_path);
  if (cfg.sample) docs = sample_corpus(docs, *cfg.sample, cfg.seed);

  const CompletionProfile machine = profile_for(Tier::machine_level, cfg.machine, hooks.machine);
  const CompletionProfile human = profile_for(Tier::human_level, cfg.human, hooks.human);
  const auto embedder = hooks.embedding ? hooks.embedding : make_embedding_backend(cfg.embedding);

  GatewayOptions options;
  options.retry = cfg.retry;
  options.max_in_flight = cfg.max_in_flight;
  if (hooks.clock) {
    options.clock = hooks.clock;
  } else if (cfg.use_fixed_clock()) {
    options.clock = std::make_shared<FixedClock>();
  }
  if (hooks.sleep) options.sleep = hooks.sleep;
  LlmGateway gateway(embedder, options);
  const auto started = gateway.clock().now();

  if (cfg.fresh) remove_previous_run(cfg.run_dir);
  ArtifactStore store(cfg.run_dir);
  check_or_write_identity(cfg.run_dir, run_identity(cfg, corpus_digest,
                                                    criteria_digest(criteria.text), machine,
                                                    human, *embedder));

  std::optional<CriteriaIndex> index;
  if (uses_index(mode)) index = prepare_index(cfg, criteria, gateway);

  std::array<std::map<std::string, RunArtifact>, 3> existing;
  if (uses_ds(mode)) existing[idx(Stage::summary)] = store.read_stage(Stage::summary);
  if (uses_index(mode)) existing[idx(Stage::retrieval)] = store.read_stage(Stage::retrieval);
  existing[idx(Stage::assessment)] = store.read_stage(Stage::assessment);

  RunReport report;
  report.mode = mode;
  report.docs_total = docs.size();
  report.criteria_passages = index ? index->size() : 0;
  report.warnings = corpus_warnings;
  TokenLedger ledger;

  auto work = [&](std::size_t i) {
    const Document& doc = docs[i];
    DocOutcome outcome;
    if (doc.body.empty()) {
      outcome.warnings.emplace_back("input", "document " + doc.doc_id + " has an empty body; skipped");
      return outcome;
    }

    // Runs one stage, or reads it back from a previous run. Token usage of
    // completed calls is kept even when the stage fails.
    auto run_stage = [&](Stage stage, auto&& compute) -> Json {
      StageOutput& out = outcome.stages[idx(stage)];
      const auto& prior = existing[idx(stage)];
      if (auto it = prior.find(doc.doc_id); it != prior.end()) {
        out.resumed = true;
        out.entries.push_back(it->second.token_usage);
        return it->second.payload;
      }
      TokenLedger local;
      try {
        Json payload = compute(local);
        out.entries = local.entries();
        out.payload = payload;
        return payload;
      } catch (const BackendError& e) {
        out.entries = local.entries();
        throw StageError(doc.doc_id, std::string(to_string(stage)), e.what(), true);
      } catch (const std::invalid_argument& e) {
        out.entries = local.entries();
        throw StageError(doc.doc_id, std::string(to_string(stage)), e.what());
      } catch (...) {
        out.entries = local.entries();
        throw;
      }
    };

    try {
      std::optional<SummaryRecord> summary;
      if (uses_ds(mode)) {
        summary = summary_from_json(run_stage(Stage::summary, [&](TokenLedger& l) {
          auto record = summarize_document(doc, cfg.summary, machine, gateway, l);
          if (record.truncated) {
            outcome.warnings.emplace_back(
                "summary", "summary of " + doc.doc_id + " still exceeded " +
                               std::to_string(cfg.summary.threshold_tokens) + " tokens after " +
                               std::to_string(record.passes) + " passes; truncated");
          }
          return to_json(record);
        }));
      }
      const std::string& subject = summary ? summary->final_text : doc.body;

      std::optional<RagOutput> rag;
      if (uses_index(mode)) {
        rag = rag_output_from_json(run_stage(Stage::retrieval, [&](TokenLedger& l) {
          if (mode == Mode::no_ca) {
            RagOutput out;
            out.doc_id = doc.doc_id;
            out.retrieved = index->top_k(gateway, retrieval_query_text(subject, cfg.context, cfg.query_mode),
                                         cfg.k, doc.doc_id);
            return to_json(out);
          }
          return to_json(run_rag(doc.doc_id, subject, *index, cfg.context, human, gateway, l,
                                 cfg.k, cfg.query_mode));
        }));
      }

      const Json assessment_json = run_stage(Stage::assessment, [&](TokenLedger& l) {
        Assessment a;
        switch (mode) {
          case Mode::full:
          case Mode::no_ds:
            a = run_assessment(doc.doc_id, subject, rag->augmented_text, cfg.context, human,
                               gateway, l);
            break;
          case Mode::baseline:
          case Mode::no_rag:
            a = run_assessment(doc.doc_id, subject, criteria.text, cfg.context, human, gateway, l);
            break;
          case Mode::no_ca:
            a = assess_prompt(doc.doc_id,
                              render_merged_prompt(subject, format_passages(*index, rag->retrieved),
                                                   cfg.context),
                              human, gateway, l);
            break;
        }
        for (const auto& w : a.warnings) {
          outcome.warnings.emplace_back("assessment", w.field + " (" + std::string(to_string(w.kind)) +
                                                          "): " + w.message);
        }
        return to_json(a);
      });
      (void)assessment_json;
      outcome.assessed = true;
    } catch (const StageError& e) {
      outcome.failure = DocFailure{e.doc_id(), e.stage(), e.what(), e.backend_failure()};
    }
    return outcome;
  };

  auto commit = [&](std::size_t i, DocOutcome outcome) {
    const Document& doc = docs[i];
    for (Stage stage : kStages) {
      StageOutput& out = outcome.stages[idx(stage)];
      for (const auto& e : out.entries) {
        if (e.calls > 0) ledger.append(e);
      }
      if (!out.payload) continue;
      RunArtifact artifact;
      artifact.doc_id = doc.doc_id;
      artifact.stage = stage;
      artifact.payload = std::move(*out.payload);
      artifact.created_at = format_timestamp(gateway.clock().now());
      artifact.token_usage = usage_of(out.entries, doc.doc_id, stage,
                                      stage == Stage::summary ? Tier::machine_level : Tier::human_level);
      store.persist(artifact);
    }
    for (const auto& [stage, message] : outcome.warnings) {
      store.record_warning(doc.doc_id, stage, "warning", message);
      report.warnings.push_back(doc.doc_id + ": " + message);
    }
    if (outcome.failure) {
      log::error("document " + doc.doc_id + " failed in " + outcome.failure->stage + ": " +
                 outcome.failure->message);
      store.record_warning(doc.doc_id, outcome.failure->stage, "error", outcome.failure->message);
      report.failures.push_back(std::move(*outcome.failure));
    }
    if (outcome.assessed) {
      ++report.docs_processed;
      if (outcome.stages[idx(Stage::assessment)].resumed) ++report.docs_resumed;
    }
  };

  run_ordered<DocOutcome>(docs.size(), cfg.workers, work, commit);

  report.ledger = ledger.report();
  report.total_tokens = report.ledger.grand.total_tokens();
  if (auto it = report.ledger.per_tier.find(Tier::human_level); it != report.ledger.per_tier.end()) {
    report.comparison_tokens = it->second.total_tokens();
  }
  report.wall_time_ms = gateway.clock().elapsed_ms(started);

  write_file(cfg.run_dir / "report.json", to_json(report).dump(2) + "\n");
  write_file(cfg.run_dir / "report.txt", format_run_report(report));
  log::info(std::string("run finished: ") + std::to_string(report.docs_processed) + "/" +
            std::to_string(report.docs_total) + " documents, " +
            std::to_string(report.total_tokens) + " tokens");
  return report;
}

namespace {

RunReport run_as(RunConfig cfg, Mode mode, const RunHooks& hooks) {
  cfg.mode = mode;
  return run_pipeline(cfg, hooks);
}

std::string describe_mode(Mode mode) {
  switch (mode) {
    case Mode::full: return "Full pipeline";
    case Mode::baseline: return "Baseline";
    case Mode::no_ds: return "No DS";
    case Mode::no_rag: return "No RAG";
    case Mode::no_ca: return "No CA";
  }
  return "";
}

double pct_or_nan(double base, double other) {
  try {
    return percent_difference(base, other);
  } catch (const std::domain_error&) {
    return std::nan("");
  }
}

}  // namespace

RunReport run_full(RunConfig cfg, const RunHooks& hooks) { return run_as(std::move(cfg), Mode::full, hooks); }
RunReport run_baseline(RunConfig cfg, const RunHooks& hooks) { return run_as(std::move(cfg), Mode::baseline, hooks); }
RunReport run_no_ds(RunConfig cfg, const RunHooks& hooks) { return run_as(std::move(cfg), Mode::no_ds, hooks); }
RunReport run_no_rag(RunConfig cfg, const RunHooks& hooks) { return run_as(std::move(cfg), Mode::no_rag, hooks); }
RunReport run_no_ca(RunConfig cfg, const RunHooks& hooks) { return run_as(std::move(cfg), Mode::no_ca, hooks); }

std::vector<ComparisonRow> compare_runs(const RunReport& reference,
                                        const std::vector<RunReport>& runs) {
  std::vector<ComparisonRow> rows;
  for (const auto& r : runs) {
    rows.push_back({describe_mode(r.mode),
                    pct_or_nan(static_cast<double>(reference.comparison_tokens),
                               static_cast<double>(r.comparison_tokens)),
                    pct_or_nan(static_cast<double>(reference.total_tokens),
                               static_cast<double>(r.total_tokens)),
                    pct_or_nan(reference.wall_time_ms, r.wall_time_ms)});
  }
  return rows;
}

std::string format_comparison(const RunReport& reference, const std::vector<ComparisonRow>& rows) {
  std::string out;
  char line[200];
  auto pct = [](double v) {
    char buf[32];
    if (std::isnan(v)) return std::string("n/a");
    std::snprintf(buf, sizeof buf, "%+.1f%%", v);
    return std::string(buf);
  };
  std::snprintf(line, sizeof line, "reference: %s (%llu comparison tokens, %llu total, %.1f ms)\n\n",
                describe_mode(reference.mode).c_str(),
                static_cast<unsigned long long>(reference.comparison_tokens),
                static_cast<unsigned long long>(reference.total_tokens), reference.wall_time_ms);
  out += line;
  std::snprintf(line, sizeof line, "%-16s %20s %20s %22s\n", "Description", "% Token Difference",
                "% Token Diff (all)", "% Runtime Difference");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-16s %20s %20s %22s\n", r.description.c_str(),
                  pct(r.comparison_token_diff_pct).c_str(), pct(r.total_token_diff_pct).c_str(),
                  pct(r.runtime_diff_pct).c_str());
    out += line;
  }
  out += "\n% Token Difference counts comparison-tier calls; (all) adds summarization.\n";
  return out;
}

}  // namespace asc2end
