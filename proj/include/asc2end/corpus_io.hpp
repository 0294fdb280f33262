#pragma once

// Corpus / criteria ingestion and the per-stage JSONL artifact store.
//
// Corpus CSV follows RFC 4180 (quoted fields may contain commas, quotes
// doubled as "", and newlines). The header is `title,body` or `id,title,body`.

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "asc2end/ledger.hpp"

namespace asc2end {

struct Document {
  std::string doc_id;
  std::string title;
  std::string body;

  friend bool operator==(const Document&, const Document&) = default;
};

struct CriteriaDocument {
  std::string source_path;
  std::string text;
};

struct CsvRecord {
  std::size_t row = 0;  // 1-based; the header is row 1
  std::vector<std::string> fields;
};

// Throws InputError on an unterminated quoted field.
std::vector<CsvRecord> parse_csv(std::string_view data);
std::string csv_escape(std::string_view field);

std::string read_file(const std::filesystem::path& path);

// doc_id defaults to the zero-padded data-row ordinal ("0001", ...).
// Warnings (empty corpus, empty bodies) are appended to `warnings` if given
// and logged. Throws InputError for a missing file or malformed row.
std::vector<Document> load_corpus(const std::filesystem::path& path,
                                  std::vector<std::string>* warnings = nullptr);

void write_corpus(const std::filesystem::path& path,
                  const std::vector<Document>& docs, bool with_id_column);

// Loads the file byte-for-byte. Throws InputError when missing or empty.
CriteriaDocument load_criteria(const std::filesystem::path& path);

struct RunArtifact {
  std::string doc_id;
  Stage stage = Stage::summary;
  Json payload;
  std::string created_at;
  TokenLedgerEntry token_usage;
};

Json to_json(const RunArtifact& artifact);
RunArtifact artifact_from_json(const Json& j);

std::string_view stage_file_name(Stage stage);

// Append-only JSONL files, one per stage, under a run directory. A record for
// a (doc_id, stage) pair supersedes any earlier one when read back.
class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path run_dir);

  const std::filesystem::path& run_dir() const { return run_dir_; }
  std::filesystem::path stage_path(Stage stage) const;

  // Returns the file the artifact was appended to.
  std::filesystem::path persist(const RunArtifact& artifact);

  // Last record per doc_id. A torn final line (crash mid-write) is skipped.
  std::map<std::string, RunArtifact> read_stage(Stage stage) const;

  // Appends one {doc_id, stage, level, message} line to warnings.jsonl.
  void record_warning(std::string_view doc_id, std::string_view stage,
                      std::string_view level, std::string_view message);

 private:
  void append_line(const std::filesystem::path& path, const std::string& line);

  std::filesystem::path run_dir_;
  std::mutex mutex_;
};

}  // namespace asc2end
