#include "recsim/llm_client.hpp"

#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "recsim/error.hpp"

namespace recsim {

std::string api_key_from_env(const std::string& env_var) {
  if (env_var.empty()) return {};
  const char* v = std::getenv(env_var.c_str());
  return v ? std::string(v) : std::string();
}

void InFlightLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return available_ > 0; });
  --available_;
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    ++available_;
  }
  cv_.notify_one();
}

namespace {

struct Endpoint {
  std::string scheme_host_port;
  std::string path_prefix;
};

Endpoint split_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("llm.base_url", "missing scheme in '" + base_url + "'");
  const auto path_start = base_url.find('/', scheme_end + 3);
  Endpoint ep;
  if (path_start == std::string::npos) {
    ep.scheme_host_port = base_url;
  } else {
    ep.scheme_host_port = base_url.substr(0, path_start);
    ep.path_prefix = base_url.substr(path_start);
  }
  while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
  return ep;
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

OpenAiChatClient::OpenAiChatClient(ChatClientOptions options)
    : options_(std::move(options)), limiter_(options_.max_in_flight) {
  split_base_url(options_.base_url);
}

std::string OpenAiChatClient::request_body(const ChatRequest& request) const {
  nlohmann::ordered_json body;
  body["model"] = options_.model;
  auto& msgs = body["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : request.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  if (request.seed) body["seed"] = *request.seed;
  return body.dump();
}

std::string OpenAiChatClient::extract_content(const std::string& response_body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(response_body);
  } catch (const nlohmann::json::parse_error&) {
    throw BackendError("chat completion response is not JSON");
  }
  if (j.contains("error")) {
    const auto& e = j["error"];
    throw BackendError("backend error: " + (e.is_object() ? e.value("message", e.dump()) : e.dump()));
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw BackendError("chat completion response has no choices");
  }
  const auto& msg = j["choices"][0].value("message", nlohmann::json::object());
  if (!msg.contains("content") || !msg["content"].is_string()) {
    throw BackendError("chat completion choice has no text content");
  }
  return msg["content"].get<std::string>();
}

std::string OpenAiChatClient::complete(const ChatRequest& request) {
  const Endpoint ep = split_base_url(options_.base_url);
  const std::string body = request_body(request);
  const std::string path = ep.path_prefix + "/chat/completions";

  InFlightLimiter::Guard guard(limiter_);
  auto backoff = options_.initial_backoff;
  std::string last_error;
  int last_status = 0;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client cli(ep.scheme_host_port);
    const auto secs = options_.timeout.count() / 1000;
    const auto usecs = (options_.timeout.count() % 1000) * 1000;
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);
    auto res = cli.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      last_status = 0;
      continue;
    }
    if (res->status == 200) return extract_content(res->body);
    last_status = res->status;
    last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
    if (!retryable(res->status)) break;
  }
  throw BackendError("chat completion failed: " + last_error, last_status);
}

}  // namespace recsim
