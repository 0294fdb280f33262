#include "asc2end/config.hpp"

#include <charconv>
#include <cstdlib>

#include "asc2end/errors.hpp"

namespace asc2end {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::full: return "full";
    case Mode::baseline: return "baseline";
    case Mode::no_ds: return "no_ds";
    case Mode::no_rag: return "no_rag";
    case Mode::no_ca: return "no_ca";
  }
  return "";
}

Mode parse_mode(std::string_view name) {
  std::string n(name);
  for (char& c : n) {
    if (c == '-') c = '_';
  }
  if (n == "full") return Mode::full;
  if (n == "baseline") return Mode::baseline;
  if (n == "no_ds") return Mode::no_ds;
  if (n == "no_rag") return Mode::no_rag;
  if (n == "no_ca") return Mode::no_ca;
  throw ConfigError("unknown mode: " + std::string(name) +
                    " (expected full, baseline, no-ds, no-rag or no-ca)");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_uint(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (value.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" +
                      std::string(value) + "'");
  }
  return out;
}

std::size_t parse_count(std::string_view key, std::string_view value) {
  const auto n = parse_uint(key, value);
  if (n == 0) throw ConfigError(std::string(key) + " must be >= 1");
  return static_cast<std::size_t>(n);
}

double parse_real(std::string_view key, std::string_view value) {
  const std::string v(value);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + v + "'");
  }
  return d;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "yes" || value == "1" || value == "on") return true;
  if (value == "false" || value == "no" || value == "0" || value == "off") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(value) + "'");
}

std::filesystem::path resolve(std::string_view value, const std::filesystem::path& base_dir) {
  std::filesystem::path p{std::string(value)};
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return p.lexically_normal();
}

// Option values are forwarded as JSON when they parse as JSON, else as strings.
Json option_value(std::string_view value) {
  try {
    return Json::parse(value);
  } catch (const Json::parse_error&) {
    return Json(std::string(value));
  }
}

bool set_backend_value(BackendConfig& b, std::string_view field, std::string_view key,
                       std::string_view value) {
  if (field == "backend") {
    if (value != "mock" && value != "http") {
      throw ConfigError(std::string(key) + ": expected mock or http, got '" + std::string(value) + "'");
    }
    b.backend = value;
  } else if (field == "endpoint") {
    b.endpoint = value;
  } else if (field == "model") {
    b.model = value;
  } else if (field == "key_env") {
    b.key_env = value;
  } else if (field == "temperature") {
    b.temperature = parse_real(key, value);
  } else if (field == "max_new_tokens") {
    b.max_new_tokens = parse_count(key, value);
  } else if (field == "timeout_s") {
    b.timeout_s = parse_count(key, value);
  } else if (field == "dim") {
    b.dim = parse_count(key, value);
  } else if (field.starts_with("option.") && field.size() > 7) {
    b.options[std::string(field.substr(7))] = option_value(value);
  } else {
    return false;
  }
  return true;
}

}  // namespace

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value,
                      const std::filesystem::path& base_dir) {
  if (key == "corpus_path") {
    cfg.corpus_path = resolve(value, base_dir);
  } else if (key == "criteria_path") {
    cfg.criteria_path = resolve(value, base_dir);
  } else if (key == "run_dir") {
    cfg.run_dir = resolve(value, base_dir);
  } else if (key == "company") {
    cfg.context.company = value;
  } else if (key == "target_topic") {
    cfg.context.target_topic = value;
  } else if (key == "mode") {
    cfg.mode = parse_mode(value);
  } else if (key == "k") {
    cfg.k = parse_count(key, value);
  } else if (key == "query_mode") {
    cfg.query_mode = parse_query_mode(value);
  } else if (key == "workers") {
    cfg.workers = parse_count(key, value);
  } else if (key == "sample") {
    cfg.sample = parse_count(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_uint(key, value);
  } else if (key == "chunk_budget_tokens") {
    cfg.summary.chunk_budget_tokens = parse_count(key, value);
  } else if (key == "segment_budget_tokens") {
    cfg.summary.segment_budget_tokens = parse_count(key, value);
  } else if (key == "threshold_tokens") {
    cfg.summary.threshold_tokens = parse_count(key, value);
  } else if (key == "max_passes") {
    cfg.summary.max_passes = parse_count(key, value);
  } else if (key == "boundary_policy") {
    try {
      cfg.summary.boundary = parse_boundary_policy(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "summary_preset") {
    if (value == "standard") {
      cfg.summary.threshold_tokens = SummaryConfig{}.threshold_tokens;
    } else if (value == "extended") {
      cfg.summary.threshold_tokens = SummaryConfig::extended().threshold_tokens;
    } else {
      throw ConfigError("summary_preset: expected standard or extended");
    }
  } else if (key == "window_chars") {
    cfg.index.window_chars = parse_count(key, value);
  } else if (key == "overlap_chars") {
    cfg.index.overlap_chars = static_cast<std::size_t>(parse_uint(key, value));
  } else if (key == "max_in_flight") {
    cfg.max_in_flight = parse_count(key, value);
  } else if (key == "retry.attempts") {
    cfg.retry.max_attempts = static_cast<int>(parse_count(key, value));
  } else if (key == "retry.initial_backoff_ms") {
    cfg.retry.initial_backoff = std::chrono::milliseconds(parse_uint(key, value));
  } else if (key == "retry.multiplier") {
    cfg.retry.multiplier = parse_real(key, value);
  } else if (key == "deterministic_clock") {
    cfg.deterministic_clock = parse_bool(key, value);
  } else if (key == "rouge_overlap") {
    cfg.rouge_overlap = parse_overlap_mode(value);
  } else if (key == "fresh") {
    cfg.fresh = parse_bool(key, value);
  } else {
    const auto dot = key.find('.');
    bool handled = false;
    if (dot != std::string_view::npos) {
      const auto group = key.substr(0, dot);
      const auto field = key.substr(dot + 1);
      if (group == "machine") handled = set_backend_value(cfg.machine, field, key, value);
      if (group == "human") handled = set_backend_value(cfg.human, field, key, value);
      if (group == "embedding") handled = set_backend_value(cfg.embedding, field, key, value);
    }
    if (!handled) throw ConfigError("unknown config key: " + std::string(key));
  }
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    try {
      set_config_value(cfg, key, value, base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, path.parent_path());
}

void finalize_run_dir(RunConfig& cfg, const std::filesystem::path& base_dir) {
  if (!cfg.run_dir.empty()) return;
  if (const char* env = std::getenv("ASC2END_RUN_DIR"); env && *env) {
    cfg.run_dir = std::filesystem::path(env);
    return;
  }
  cfg.run_dir = (base_dir / "runs" / std::string(to_string(cfg.mode))).lexically_normal();
}

void RunConfig::validate() const {
  if (corpus_path.empty()) throw ConfigError("corpus_path must be set");
  // Every mode compares against the criteria, inlined or retrieved.
  if (criteria_path.empty()) throw ConfigError("criteria_path must be set");
  if (run_dir.empty()) throw ConfigError("run_dir must be set");
  context.validate();
  summary.validate();
  if (index.overlap_chars >= index.window_chars) {
    throw ConfigError("overlap_chars must be smaller than window_chars");
  }
  if (retry.max_attempts < 1) throw ConfigError("retry.attempts must be >= 1");
  if (retry.multiplier < 1.0) throw ConfigError("retry.multiplier must be >= 1");
  for (const auto* b : {&machine, &human, &embedding}) {
    if (!b->is_mock() && (b->endpoint.empty() || b->model.empty())) {
      throw ConfigError("http backends need both endpoint and model");
    }
  }
}

std::shared_ptr<CompletionBackend> make_completion_backend(const BackendConfig& b) {
  if (b.is_mock()) return std::make_shared<MockCompletionBackend>();
  if (!b.key_env.empty()) {
    const char* key = std::getenv(b.key_env.c_str());
    if (!key || !*key) throw ConfigError("environment variable " + b.key_env + " is not set");
  }
  return std::make_shared<HttpCompletionBackend>(
      HttpEndpointConfig{b.endpoint, b.model, b.key_env, std::chrono::seconds(b.timeout_s)});
}

std::shared_ptr<EmbeddingBackend> make_embedding_backend(const BackendConfig& b) {
  if (b.is_mock()) return std::make_shared<MockEmbeddingBackend>(b.dim);
  if (!b.key_env.empty()) {
    const char* key = std::getenv(b.key_env.c_str());
    if (!key || !*key) throw ConfigError("environment variable " + b.key_env + " is not set");
  }
  return std::make_shared<HttpEmbeddingBackend>(
      HttpEndpointConfig{b.endpoint, b.model, b.key_env, std::chrono::seconds(b.timeout_s)});
}

CompletionProfile make_profile(Tier tier, const BackendConfig& b) {
  auto endpoint = make_completion_backend(b);
  CompletionProfile p = tier == Tier::machine_level ? CompletionProfile::machine_level(endpoint)
                                                    : CompletionProfile::human_level(endpoint);
  if (b.temperature) p.temperature = *b.temperature;
  if (b.max_new_tokens) p.max_new_tokens = *b.max_new_tokens;
  p.options = b.options;
  return p;
}

}  // namespace asc2end
