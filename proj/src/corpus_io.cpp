#include "asc2end/corpus_io.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "asc2end/clock.hpp"
#include "asc2end/errors.hpp"
#include "asc2end/log.hpp"

namespace asc2end {

namespace fs = std::filesystem;

std::string format_timestamp(Clock::time_point tp) {
  using namespace std::chrono;
  const auto ms = duration_cast<milliseconds>(tp.time_since_epoch()).count();
  std::time_t secs = static_cast<std::time_t>(ms / 1000);
  long rem = static_cast<long>(ms % 1000);
  if (rem < 0) {
    rem += 1000;
    --secs;
  }
  std::tm utc{};
  gmtime_r(&secs, &utc);
  char buf[40];
  const std::size_t n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &utc);
  std::snprintf(buf + n, sizeof buf - n, ".%03ldZ", rem);
  return buf;
}

std::vector<CsvRecord> parse_csv(std::string_view data) {
  if (data.starts_with("\xEF\xBB\xBF")) data.remove_prefix(3);

  std::vector<CsvRecord> records;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;  // the record has at least one char or separator
  std::size_t row = 0;
  std::size_t quote_line = 0;
  std::size_t line = 1;

  auto end_record = [&] {
    ++row;
    if (field_started || !field.empty() || !fields.empty()) {
      fields.push_back(std::move(field));
      records.push_back({row, std::move(fields)});
    } else {
      --row;  // blank line, not a record
    }
    fields.clear();
    field.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        quote_line = line;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        if (i + 1 < data.size() && data[i + 1] == '\n') break;
        field.push_back(c);
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) {
    throw InputError("unterminated quoted field starting on line " +
                     std::to_string(quote_line));
  }
  if (field_started || !field.empty() || !fields.empty()) end_record();
  return records;
}

std::string csv_escape(std::string_view field) {
  const bool needs_quotes =
      field.find_first_of(",\"\r\n") != std::string_view::npos ||
      (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string lower_trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string pad_ordinal(std::size_t ordinal, std::size_t width) {
  std::string s = std::to_string(ordinal);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

void warn(std::vector<std::string>* sink, std::string message) {
  log::warn(message);
  if (sink) sink->push_back(std::move(message));
}

}  // namespace

std::vector<Document> load_corpus(const fs::path& path,
                                  std::vector<std::string>* warnings) {
  if (!fs::exists(path)) throw InputError("corpus file not found: " + path.string());
  const auto records = parse_csv(read_file(path));
  if (records.empty()) throw InputError("corpus file has no header row: " + path.string());

  const auto& header = records.front().fields;
  bool has_id = false;
  if (header.size() == 3) {
    const auto first = lower_trim(header[0]);
    if (first != "id" && first != "doc_id") {
      throw InputError("corpus header with three columns must start with 'id'");
    }
    has_id = true;
  } else if (header.size() != 2) {
    throw InputError("corpus header must have columns title,body (optionally id first); got " +
                     std::to_string(header.size()) + " columns");
  }
  const std::size_t expected = has_id ? 3 : 2;

  const std::size_t n = records.size() - 1;
  const std::size_t width = std::max<std::size_t>(4, std::to_string(n).size());

  std::vector<Document> docs;
  docs.reserve(n);
  std::set<std::string> seen;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.fields.size() != expected) {
      throw InputError("malformed corpus row " + std::to_string(rec.row) + ": expected " +
                       std::to_string(expected) + " columns, got " +
                       std::to_string(rec.fields.size()));
    }
    Document doc;
    if (has_id) {
      doc.doc_id = rec.fields[0];
      doc.title = rec.fields[1];
      doc.body = rec.fields[2];
      if (doc.doc_id.empty()) {
        throw InputError("empty id in corpus row " + std::to_string(rec.row));
      }
    } else {
      doc.doc_id = pad_ordinal(i, width);
      doc.title = rec.fields[0];
      doc.body = rec.fields[1];
    }
    if (!seen.insert(doc.doc_id).second) {
      throw InputError("duplicate doc id '" + doc.doc_id + "' in corpus row " +
                       std::to_string(rec.row));
    }
    if (doc.body.empty()) warn(warnings, "document " + doc.doc_id + " has an empty body");
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) warn(warnings, "corpus " + path.string() + " contains no documents");
  return docs;
}

void write_corpus(const fs::path& path, const std::vector<Document>& docs,
                  bool with_id_column) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write corpus: " + path.string());
  out << (with_id_column ? "id,title,body\r\n" : "title,body\r\n");
  for (const auto& d : docs) {
    if (with_id_column) out << csv_escape(d.doc_id) << ',';
    out << csv_escape(d.title) << ',' << csv_escape(d.body) << "\r\n";
  }
}

CriteriaDocument load_criteria(const fs::path& path) {
  if (!fs::exists(path)) throw InputError("criteria file not found: " + path.string());
  CriteriaDocument doc{path.string(), read_file(path)};
  if (doc.text.empty()) throw InputError("criteria document is empty");
  return doc;
}

Json to_json(const RunArtifact& a) {
  Json j;
  j["doc_id"] = a.doc_id;
  j["stage"] = to_string(a.stage);
  j["payload"] = a.payload;
  j["created_at"] = a.created_at;
  j["token_usage"] = to_json(a.token_usage);
  return j;
}

RunArtifact artifact_from_json(const Json& j) {
  RunArtifact a;
  a.doc_id = j.at("doc_id").get<std::string>();
  a.stage = parse_stage(j.at("stage").get<std::string>());
  a.payload = j.at("payload");
  a.created_at = j.value("created_at", std::string());
  a.token_usage = ledger_entry_from_json(j.at("token_usage"));
  return a;
}

std::string_view stage_file_name(Stage stage) {
  switch (stage) {
    case Stage::summary: return "summaries.jsonl";
    case Stage::retrieval: return "retrievals.jsonl";
    case Stage::assessment: return "assessments.jsonl";
  }
  return "";
}

ArtifactStore::ArtifactStore(fs::path run_dir) : run_dir_(std::move(run_dir)) {
  std::error_code ec;
  fs::create_directories(run_dir_, ec);
  if (ec || !fs::is_directory(run_dir_)) {
    throw ConfigError("cannot create run directory " + run_dir_.string() + ": " +
                      ec.message());
  }
}

fs::path ArtifactStore::stage_path(Stage stage) const {
  return run_dir_ / stage_file_name(stage);
}

void ArtifactStore::append_line(const fs::path& path, const std::string& line) {
  std::lock_guard lock(mutex_);
  // A torn last line must stay on its own line so the next record survives.
  bool needs_newline = false;
  if (std::ifstream tail(path, std::ios::binary | std::ios::ate); tail && tail.tellg() > 0) {
    tail.seekg(-1, std::ios::end);
    needs_newline = tail.get() != '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw ConfigError("cannot write artifact file " + path.string());
  if (needs_newline) out << '\n';
  out << line << '\n';
  out.flush();
  if (!out) throw ConfigError("write failed for artifact file " + path.string());
}

fs::path ArtifactStore::persist(const RunArtifact& artifact) {
  const auto path = stage_path(artifact.stage);
  append_line(path, to_json(artifact).dump());
  return path;
}

std::map<std::string, RunArtifact> ArtifactStore::read_stage(Stage stage) const {
  std::map<std::string, RunArtifact> latest;
  std::ifstream in(stage_path(stage), std::ios::binary);
  if (!in) return latest;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto artifact = artifact_from_json(Json::parse(line));
      latest.insert_or_assign(artifact.doc_id, std::move(artifact));
    } catch (const std::exception& e) {
      log::warn(std::string(stage_file_name(stage)) + ": skipping unreadable line " +
                std::to_string(lineno) + " (" + e.what() + ")");
    }
  }
  return latest;
}

void ArtifactStore::record_warning(std::string_view doc_id, std::string_view stage,
                                   std::string_view level, std::string_view message) {
  Json j;
  j["doc_id"] = doc_id;
  j["stage"] = stage;
  j["level"] = level;
  j["message"] = message;
  append_line(run_dir_ / "warnings.jsonl", j.dump());
}

}  // namespace asc2end
