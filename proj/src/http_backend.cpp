#include <cstdlib>

#include <httplib.h>

#include "asc2end/errors.hpp"
#include "asc2end/llm_gateway.hpp"

namespace asc2end {
namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint URL lacks a scheme: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported endpoint scheme '" + scheme + "' in " + url);
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw ConfigError("built without TLS support; cannot reach " + url);
#endif
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  return out;
}

bool is_transient_status(int status) {
  return status == 408 || status == 409 || status == 425 || status == 429 || status >= 500;
}

Json post_json(const HttpEndpointConfig& cfg, const Json& body) {
  const ParsedUrl url = parse_url(cfg.url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(cfg.timeout);
  client.set_write_timeout(cfg.timeout);

  httplib::Headers headers;
  if (!cfg.key_env.empty()) {
    const char* key = std::getenv(cfg.key_env.c_str());
    if (!key || !*key) {
      throw ConfigError("environment variable " + cfg.key_env + " (API key) is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  auto res = client.Post(url.path, headers, body.dump(), "application/json");
  if (!res) {
    throw BackendError(cfg.url + ": " + httplib::to_string(res.error()), true);
  }
  if (res->status < 200 || res->status >= 300) {
    std::string detail = res->body.substr(0, 300);
    throw BackendError(cfg.url + ": HTTP " + std::to_string(res->status) + " " + detail,
                       is_transient_status(res->status));
  }
  try {
    return Json::parse(res->body);
  } catch (const Json::parse_error& e) {
    throw BackendError(cfg.url + ": response is not JSON (" + e.what() + ")", false);
  }
}

}  // namespace

HttpCompletionBackend::HttpCompletionBackend(HttpEndpointConfig config)
    : config_(std::move(config)) {
  parse_url(config_.url);
}

std::string HttpCompletionBackend::describe() const {
  return "http(" + config_.url + ", model=" + config_.model + ")";
}

CompletionResult HttpCompletionBackend::complete(std::string_view prompt,
                                                 const CompletionProfile& profile) {
  Json body;
  body["model"] = config_.model;
  body["messages"] = Json::array({Json{{"role", "user"}, {"content", std::string(prompt)}}});
  body["temperature"] = profile.temperature;
  body["max_tokens"] = profile.max_new_tokens;
  for (const auto& [key, value] : profile.options.items()) body[key] = value;

  const Json reply = post_json(config_, body);
  CompletionResult result;
  try {
    const auto& choice = reply.at("choices").at(0);
    if (choice.contains("message")) {
      result.text = choice.at("message").at("content").get<std::string>();
    } else {
      result.text = choice.at("text").get<std::string>();
    }
  } catch (const Json::exception& e) {
    throw BackendError(config_.url + ": unexpected completion response shape (" +
                           std::string(e.what()) + ")",
                       false);
  }
  if (reply.contains("usage") && reply["usage"].is_object()) {
    const auto& usage = reply["usage"];
    if (usage.contains("prompt_tokens")) {
      result.backend_prompt_tokens = usage["prompt_tokens"].get<std::uint64_t>();
    }
    if (usage.contains("completion_tokens")) {
      result.backend_completion_tokens = usage["completion_tokens"].get<std::uint64_t>();
    }
  }
  return result;
}

HttpEmbeddingBackend::HttpEmbeddingBackend(HttpEndpointConfig config)
    : config_(std::move(config)) {
  parse_url(config_.url);
}

std::string HttpEmbeddingBackend::describe() const {
  return "http(" + config_.url + ", model=" + config_.model + ")";
}

std::vector<std::vector<double>> HttpEmbeddingBackend::embed(std::span<const std::string> texts) {
  Json body;
  body["model"] = config_.model;
  body["input"] = Json::array();
  for (const auto& t : texts) body["input"].push_back(t);

  const Json reply = post_json(config_, body);
  std::vector<std::vector<double>> out(texts.size());
  try {
    const auto& data = reply.at("data");
    if (data.size() != texts.size()) {
      throw BackendError(config_.url + ": expected " + std::to_string(texts.size()) +
                             " embeddings, got " + std::to_string(data.size()),
                         false);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::size_t index = data[i].value("index", i);
      if (index >= out.size()) throw BackendError(config_.url + ": embedding index out of range", false);
      out[index] = data[i].at("embedding").get<std::vector<double>>();
    }
  } catch (const Json::exception& e) {
    throw BackendError(config_.url + ": unexpected embedding response shape (" +
                           std::string(e.what()) + ")",
                       false);
  }
  return out;
}

}  // namespace asc2end
