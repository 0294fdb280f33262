// asc2end command line: run a pipeline mode, score summaries, aggregate
// survey scorecards, and compare run reports.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "asc2end/config.hpp"
#include "asc2end/errors.hpp"
#include "asc2end/evaluation.hpp"
#include "asc2end/log.hpp"
#include "asc2end/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBackend = 4;

void set_log_level(const std::string& name) {
  using asc2end::log::Level;
  if (name == "debug") asc2end::log::set_level(Level::debug);
  else if (name == "info") asc2end::log::set_level(Level::info);
  else if (name == "warn") asc2end::log::set_level(Level::warn);
  else if (name == "error") asc2end::log::set_level(Level::error);
  else if (name == "off") asc2end::log::set_level(Level::off);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Summarize documents, retrieve matching criteria and assess them against a topic"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "debug, info, warn, error or off")
      ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));

  // run
  auto* run = app.add_subcommand("run", "Run one pipeline mode over a corpus");
  std::string config_path;
  std::string mode;
  std::size_t sample = 0;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string run_dir;
  bool fresh = false;
  std::vector<std::string> overrides;
  run->add_option("--config", config_path, "Config file (key = value)")->required()->check(CLI::ExistingFile);
  run->add_option("--mode", mode, "full, baseline, no-ds, no-rag or no-ca")
      ->check(CLI::IsMember({"full", "baseline", "no-ds", "no-rag", "no-ca", "no_ds", "no_rag", "no_ca"}));
  auto* sample_opt = run->add_option("--sample", sample, "Process N randomly chosen documents");
  auto* seed_opt = run->add_option("--seed", seed, "Seed for --sample");
  run->add_option("--workers", workers, "Documents processed concurrently")->check(CLI::PositiveNumber);
  run->add_option("--run-dir", run_dir, "Output directory (overrides config and ASC2END_RUN_DIR)");
  run->add_flag("--fresh", fresh, "Discard artifacts of a previous run in the run directory");
  run->add_option("--set", overrides, "Override a config key, e.g. --set k=5");

  // score-rouge
  auto* rouge = app.add_subcommand("score-rouge", "ROUGE-1/2/L of summaries against source bodies");
  std::string rouge_run;
  std::string rouge_corpus;
  std::string overlap = "clipped";
  rouge->add_option("--run", rouge_run, "Run directory with summaries.jsonl")->required();
  rouge->add_option("--corpus", rouge_corpus, "Corpus CSV")->required()->check(CLI::ExistingFile);
  rouge->add_option("--overlap", overlap, "clipped or set")->check(CLI::IsMember({"clipped", "set"}));

  // survey
  auto* survey = app.add_subcommand("survey", "Aggregate survey scorecards per model");
  std::string cards_path;
  std::string unmask_path;
  std::string survey_out;
  survey->add_option("--cards", cards_path, "Scorecards CSV")->required()->check(CLI::ExistingFile);
  survey->add_option("--unmask", unmask_path, "model_label,model_name CSV")->required()->check(CLI::ExistingFile);
  survey->add_option("--json", survey_out, "Also write the result as JSON to this file");

  // report
  auto* report = app.add_subcommand("report", "Show a run report, or percent differences to a reference run");
  std::vector<std::string> report_runs;
  std::string reference;
  report->add_option("--run", report_runs, "Run directory (repeatable)")->required();
  report->add_option("--reference", reference, "Reference run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  set_log_level(log_level);

  try {
    if (*run) {
      const std::filesystem::path config_file(config_path);
      asc2end::RunConfig cfg = asc2end::load_config(config_file);
      const auto base_dir = config_file.parent_path();
      for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw asc2end::ConfigError("--set expects key=value, got " + kv);
        asc2end::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1), std::filesystem::current_path());
      }
      if (!mode.empty()) cfg.mode = asc2end::parse_mode(mode);
      if (*sample_opt) cfg.sample = sample;
      if (*seed_opt) cfg.seed = seed;
      if (workers > 0) cfg.workers = workers;
      if (!run_dir.empty()) cfg.run_dir = std::filesystem::absolute(run_dir);
      if (fresh) cfg.fresh = true;
      asc2end::finalize_run_dir(cfg, base_dir);

      const auto result = asc2end::run_pipeline(cfg);
      std::cout << asc2end::format_run_report(result);
      std::cout << "run directory: " << cfg.run_dir.string() << "\n";
      return result.exit_code();
    }

    if (*rouge) {
      const auto corpus = asc2end::load_corpus(rouge_corpus);
      const auto result =
          asc2end::score_summaries(rouge_run, corpus, asc2end::parse_overlap_mode(overlap));
      std::cout << "documents scored: " << result.per_document.size() << "\n\n"
                << asc2end::format_rouge_table(result.averages);
      return 0;
    }

    if (*survey) {
      const auto results = asc2end::aggregate_survey(asc2end::load_scorecards(cards_path),
                                                     asc2end::load_unmask_map(unmask_path));
      std::cout << asc2end::format_survey_table(results);
      if (!survey_out.empty()) {
        std::ofstream out(survey_out, std::ios::binary | std::ios::trunc);
        if (!out) throw asc2end::ConfigError("cannot write " + survey_out);
        out << asc2end::to_json(results).dump(2) << "\n";
      }
      return 0;
    }

    if (*report) {
      std::vector<asc2end::RunReport> reports;
      for (const auto& dir : report_runs) reports.push_back(asc2end::load_run_report(dir));
      if (reference.empty()) {
        for (std::size_t i = 0; i < reports.size(); ++i) {
          if (i > 0) std::cout << "\n";
          std::cout << report_runs[i] << "\n" << asc2end::format_run_report(reports[i]);
        }
        return 0;
      }
      const auto ref = asc2end::load_run_report(reference);
      std::cout << asc2end::format_comparison(ref, asc2end::compare_runs(ref, reports));
      return 0;
    }
  } catch (const asc2end::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const asc2end::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const asc2end::BackendError& e) {
    std::cerr << "backend unreachable: " << e.what() << "\n";
    return kExitBackend;
  }
  return 0;
}
