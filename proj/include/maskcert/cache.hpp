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

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "maskcert/backends.hpp"

namespace maskcert {

std::string Sha256Hex(std::string_view data);

// Hash of the canonical JSON encoding of (prompt, decoding params, template).
std::string CacheKey(const GenerationRequest& request);

// Append-only JSON-lines store of {key_hash, prompt_digest, response}.
// Each producer runs at most once per key for the lifetime of the cache,
// including under concurrent identical requests, and its value is flushed
// and fsync'ed before any caller sees it.
class ResponseCache {
 public:
  // Loads existing records and opens the file for appending. Throws
  // CacheError on I/O failure or a malformed record.
  static std::shared_ptr<ResponseCache> Open(const std::filesystem::path& path);
  // No backing file; still single-flight.
  static std::shared_ptr<ResponseCache> InMemory();

  ~ResponseCache();
  ResponseCache(const ResponseCache&) = delete;
  ResponseCache& operator=(const ResponseCache&) = delete;

  std::string LookupOrInsert(const std::string& key_hash,
                             const std::string& prompt_digest,
                             const std::function<std::string()>& producer);
  std::optional<std::string> Lookup(const std::string& key_hash) const;

  std::size_t size() const;
  std::uint64_t producer_calls() const;
  const std::optional<std::filesystem::path>& path() const { return path_; }

 private:
  explicit ResponseCache(std::optional<std::filesystem::path> path);
  void Append(const std::string& key_hash, const std::string& prompt_digest,
              const std::string& response);

  std::optional<std::filesystem::path> path_;
  std::FILE* file_ = nullptr;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::unordered_map<std::string, std::shared_future<std::string>> in_flight_;
  std::uint64_t producer_calls_ = 0;
};

// Makes any generation backend a deterministic function of its request.
class CachedGenerationBackend final : public GenerationBackend {
 public:
  CachedGenerationBackend(std::shared_ptr<GenerationBackend> inner,
                          std::shared_ptr<ResponseCache> cache);

  std::string Generate(const GenerationRequest& request) override;

 private:
  std::shared_ptr<GenerationBackend> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

}  // namespace maskcert
