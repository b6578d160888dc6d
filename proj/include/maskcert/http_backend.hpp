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

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "maskcert/backends.hpp"

namespace maskcert {

// Encodes a generation request as a JSON body and extracts the completion
// text from the JSON reply.
class ProtocolAdapter {
 public:
  virtual ~ProtocolAdapter() = default;
  virtual std::string name() const = 0;
  virtual nlohmann::json EncodeRequest(const GenerationRequest& request) const = 0;
  // Throws BackendProtocolError when the reply lacks a completion.
  virtual std::string DecodeResponse(const nlohmann::json& reply) const = 0;
};

// {"prompt", "decoding", "num_beams", "repetition_penalty",
//  "max_new_tokens"} -> {"text"}
class MinimalJsonProtocol final : public ProtocolAdapter {
 public:
  std::string name() const override { return "minimal"; }
  nlohmann::json EncodeRequest(const GenerationRequest& request) const override;
  std::string DecodeResponse(const nlohmann::json& reply) const override;
};

// OpenAI-style /v1/completions: {"model", "prompt", "max_tokens", ...} ->
// {"choices": [{"text"}]}
class CompletionsProtocol final : public ProtocolAdapter {
 public:
  explicit CompletionsProtocol(std::string model) : model_(std::move(model)) {}
  std::string name() const override { return "completions"; }
  nlohmann::json EncodeRequest(const GenerationRequest& request) const override;
  std::string DecodeResponse(const nlohmann::json& reply) const override;

 private:
  std::string model_;
};

struct EndpointConfig {
  std::string url = "http://127.0.0.1:8080";  // scheme://host[:port]
  std::string path = "/generate";
  std::string protocol = "minimal";  // "minimal" or "completions"
  std::string model;                 // completions protocol only
  std::string auth_header;           // sent verbatim as Authorization
  double timeout_seconds = 60.0;
  int max_attempts = 4;
  int initial_backoff_ms = 200;
  double backoff_multiplier = 2.0;
  int max_concurrency = 4;
  std::optional<std::filesystem::path> log_path;

  static EndpointConfig FromJson(const nlohmann::json& json);
  // MASKCERT_ENDPOINT_URL, MASKCERT_ENDPOINT_PATH, MASKCERT_AUTH_HEADER and
  // MASKCERT_TIMEOUT_SECONDS override the file values when set.
  void ApplyEnvironment();
  void Validate() const;
};

std::unique_ptr<ProtocolAdapter> MakeProtocol(const EndpointConfig& config);

struct HttpStats {
  std::uint64_t requests = 0;  // Generate calls
  std::uint64_t attempts = 0;  // HTTP round trips, including retries
  std::uint64_t failures = 0;  // Generate calls that threw
};

// Talks to a remote completion endpoint. Transient failures (connection
// errors, 429, 5xx) are retried with exponential backoff; other non-2xx
// replies and malformed bodies raise BackendProtocolError immediately.
// Exhausted retries raise BackendUnavailable.
class HttpGenerationBackend final : public GenerationBackend {
 public:
  explicit HttpGenerationBackend(EndpointConfig config);
  ~HttpGenerationBackend() override;

  std::string Generate(const GenerationRequest& request) override;

  HttpStats stats() const;
  const EndpointConfig& config() const { return config_; }

 private:
  struct AttemptOutcome;
  AttemptOutcome Attempt(const std::string& body);
  void Log(const nlohmann::json& entry);
  void AcquireSlot();
  void ReleaseSlot();

  EndpointConfig config_;
  std::unique_ptr<ProtocolAdapter> protocol_;

  std::mutex slot_mutex_;
  std::condition_variable slot_cv_;
  int slots_in_use_ = 0;

  std::mutex log_mutex_;
  std::FILE* log_file_ = nullptr;

  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> attempts_{0};
  std::atomic<std::uint64_t> failures_{0};
};

}  // namespace maskcert
