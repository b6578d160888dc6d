// Copyright 2026 The maskcert Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "maskcert/http_backend.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>
#include <thread>

#include <httplib.h>

#include "maskcert/errors.hpp"

namespace maskcert {

struct HttpGenerationBackend::AttemptOutcome {
  enum class Kind { kOk, kTransient, kFatal } kind = Kind::kTransient;
  int status = 0;
  std::string body;
  std::string error;
};

nlohmann::json MinimalJsonProtocol::EncodeRequest(
    const GenerationRequest& request) const {
  nlohmann::json body = DecodingParamsToJson(request.params);
  body["prompt"] = request.prompt;
  return body;
}

std::string MinimalJsonProtocol::DecodeResponse(
    const nlohmann::json& reply) const {
  if (!reply.is_object() || !reply.contains("text") ||
      !reply.at("text").is_string()) {
    throw BackendProtocolError("reply has no string field 'text'");
  }
  return reply.at("text").get<std::string>();
}

nlohmann::json CompletionsProtocol::EncodeRequest(
    const GenerationRequest& request) const {
  return {{"model", model_},
          {"prompt", request.prompt},
          {"max_tokens", request.params.max_new_tokens},
          {"n", 1},
          {"temperature", 0},
          {"use_beam_search", request.params.num_beams > 1},
          {"best_of", request.params.num_beams},
          {"repetition_penalty", request.params.repetition_penalty}};
}

std::string CompletionsProtocol::DecodeResponse(
    const nlohmann::json& reply) const {
  try {
    return reply.at("choices").at(0).at("text").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw BackendProtocolError("reply has no choices[0].text");
  }
}

EndpointConfig EndpointConfig::FromJson(const nlohmann::json& json) {
  EndpointConfig c;
  static const std::set<std::string> kKnown = {
      "url", "path", "protocol", "model", "auth_header", "timeout_seconds",
      "max_attempts", "initial_backoff_ms", "backoff_multiplier",
      "max_concurrency", "log_path"};
  if (!json.is_object()) throw ConfigError("endpoint must be an object");
  for (const auto& [key, _] : json.items()) {
    if (!kKnown.count(key)) {
      throw ConfigError("unknown key '" + key + "' in endpoint");
    }
  }
  try {
    c.url = json.value("url", c.url);
    c.path = json.value("path", c.path);
    c.protocol = json.value("protocol", c.protocol);
    c.model = json.value("model", c.model);
    c.auth_header = json.value("auth_header", c.auth_header);
    c.timeout_seconds = json.value("timeout_seconds", c.timeout_seconds);
    c.max_attempts = json.value("max_attempts", c.max_attempts);
    c.initial_backoff_ms = json.value("initial_backoff_ms", c.initial_backoff_ms);
    c.backoff_multiplier = json.value("backoff_multiplier", c.backoff_multiplier);
    c.max_concurrency = json.value("max_concurrency", c.max_concurrency);
    if (json.contains("log_path")) {
      c.log_path = json.at("log_path").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad endpoint config: ") + e.what());
  }
  return c;
}

void EndpointConfig::ApplyEnvironment() {
  if (const char* v = std::getenv("MASKCERT_ENDPOINT_URL")) url = v;
  if (const char* v = std::getenv("MASKCERT_ENDPOINT_PATH")) path = v;
  if (const char* v = std::getenv("MASKCERT_AUTH_HEADER")) auth_header = v;
  if (const char* v = std::getenv("MASKCERT_TIMEOUT_SECONDS")) {
    char* end = nullptr;
    const double parsed = std::strtod(v, &end);
    if (end == v || *end != '\0') {
      throw ConfigError(std::string("MASKCERT_TIMEOUT_SECONDS is not a "
                                    "number: ") + v);
    }
    timeout_seconds = parsed;
  }
}

void EndpointConfig::Validate() const {
  if (url.empty()) throw ConfigError("endpoint url is empty");
  if (path.empty() || path.front() != '/') {
    throw ConfigError("endpoint path must start with '/'");
  }
  if (protocol != "minimal" && protocol != "completions") {
    throw ConfigError("unknown endpoint protocol '" + protocol + "'");
  }
  if (!(timeout_seconds > 0)) throw ConfigError("timeout must be positive");
  if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  if (initial_backoff_ms < 0) throw ConfigError("backoff must be >= 0");
  if (!(backoff_multiplier >= 1.0)) {
    throw ConfigError("backoff_multiplier must be >= 1");
  }
  if (max_concurrency < 1) throw ConfigError("max_concurrency must be >= 1");
}

std::unique_ptr<ProtocolAdapter> MakeProtocol(const EndpointConfig& config) {
  if (config.protocol == "completions") {
    return std::make_unique<CompletionsProtocol>(config.model);
  }
  return std::make_unique<MinimalJsonProtocol>();
}

HttpGenerationBackend::HttpGenerationBackend(EndpointConfig config)
    : config_(std::move(config)) {
  config_.Validate();
  protocol_ = MakeProtocol(config_);
  if (config_.log_path) {
    log_file_ = std::fopen(config_.log_path->c_str(), "a");
    if (log_file_ == nullptr) {
      throw IoError("cannot open request log " + config_.log_path->string());
    }
  }
}

HttpGenerationBackend::~HttpGenerationBackend() {
  if (log_file_ != nullptr) std::fclose(log_file_);
}

void HttpGenerationBackend::AcquireSlot() {
  std::unique_lock lock(slot_mutex_);
  slot_cv_.wait(lock, [&] { return slots_in_use_ < config_.max_concurrency; });
  ++slots_in_use_;
}

void HttpGenerationBackend::ReleaseSlot() {
  {
    std::lock_guard lock(slot_mutex_);
    --slots_in_use_;
  }
  slot_cv_.notify_one();
}

void HttpGenerationBackend::Log(const nlohmann::json& entry) {
  if (log_file_ == nullptr) return;
  const std::string line = entry.dump() + "\n";
  std::lock_guard lock(log_mutex_);
  std::fwrite(line.data(), 1, line.size(), log_file_);
  std::fflush(log_file_);
}

HttpGenerationBackend::AttemptOutcome HttpGenerationBackend::Attempt(
    const std::string& body) {
  using Kind = AttemptOutcome::Kind;
  httplib::Client client(config_.url);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!config_.auth_header.empty()) {
    headers.emplace("Authorization", config_.auth_header);
  }
  const auto result = client.Post(config_.path, headers, body,
                                  "application/json");
  AttemptOutcome outcome;
  if (!result) {
    outcome.error = httplib::to_string(result.error());
    return outcome;
  }
  outcome.status = result->status;
  outcome.body = result->body;
  if (result->status >= 200 && result->status < 300) {
    outcome.kind = Kind::kOk;
  } else if (result->status == 429 || result->status >= 500) {
    outcome.kind = Kind::kTransient;
  } else {
    outcome.kind = Kind::kFatal;
  }
  return outcome;
}

std::string HttpGenerationBackend::Generate(const GenerationRequest& request) {
  using Kind = AttemptOutcome::Kind;
  ++requests_;
  const std::string body = protocol_->EncodeRequest(request).dump();

  AcquireSlot();
  struct SlotGuard {
    HttpGenerationBackend* self;
    ~SlotGuard() { self->ReleaseSlot(); }
  } guard{this};

  double backoff_ms = config_.initial_backoff_ms;
  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    ++attempts_;
    AttemptOutcome outcome = Attempt(body);
    Log({{"attempt", attempt},
         {"template", request.template_key},
         {"prompt", request.prompt},
         {"status", outcome.status},
         {"response", outcome.body},
         {"error", outcome.error}});
    if (outcome.kind == Kind::kOk) {
      try {
        return protocol_->DecodeResponse(nlohmann::json::parse(outcome.body));
      } catch (const nlohmann::json::exception& e) {
        ++failures_;
        throw BackendProtocolError(std::string("reply is not JSON: ") +
                                   e.what());
      } catch (const BackendProtocolError&) {
        ++failures_;
        throw;
      }
    }
    if (outcome.kind == Kind::kFatal) {
      ++failures_;
      throw BackendProtocolError("endpoint answered HTTP " +
                                 std::to_string(outcome.status) + ": " +
                                 outcome.body.substr(0, 200));
    }
    last_error = outcome.status != 0 ? "HTTP " + std::to_string(outcome.status)
                                     : outcome.error;
    if (attempt < config_.max_attempts) {
      std::this_thread::sleep_for(
          std::chrono::duration<double, std::milli>(backoff_ms));
      backoff_ms *= config_.backoff_multiplier;
    }
  }
  ++failures_;
  throw BackendUnavailable("endpoint " + config_.url + config_.path +
                           " unavailable after " +
                           std::to_string(config_.max_attempts) +
                           " attempts: " + last_error);
}

HttpStats HttpGenerationBackend::stats() const {
  return {requests_.load(), attempts_.load(), failures_.load()};
}

}  // namespace maskcert
