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

#include "maskcert/cache.hpp"

#include <unistd.h>

#include <array>
#include <fstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "maskcert/errors.hpp"

namespace maskcert {

std::string Sha256Hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length,
                 EVP_sha256(), nullptr) != 1) {
    throw CacheError("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string CacheKey(const GenerationRequest& request) {
  // nlohmann::json objects serialize with sorted keys, so this is canonical.
  const nlohmann::json key = {{"prompt", request.prompt},
                              {"params", DecodingParamsToJson(request.params)},
                              {"template", request.template_key}};
  return Sha256Hex(key.dump());
}

ResponseCache::ResponseCache(std::optional<std::filesystem::path> path)
    : path_(std::move(path)) {}

ResponseCache::~ResponseCache() {
  if (file_ != nullptr) std::fclose(file_);
}

std::shared_ptr<ResponseCache> ResponseCache::InMemory() {
  return std::shared_ptr<ResponseCache>(new ResponseCache(std::nullopt));
}

std::shared_ptr<ResponseCache> ResponseCache::Open(
    const std::filesystem::path& path) {
  std::shared_ptr<ResponseCache> cache(new ResponseCache(path));
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw CacheError("cannot create cache directory " +
                       path.parent_path().string() + ": " + ec.message());
    }
  }
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    if (!in) throw CacheError("cannot read cache file " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        const auto record = nlohmann::json::parse(line);
        cache->entries_.emplace(record.at("key_hash").get<std::string>(),
                                record.at("response").get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw CacheError(path.string() + ":" + std::to_string(line_no) +
                         ": malformed cache record: " + e.what());
      }
    }
  }
  cache->file_ = std::fopen(path.c_str(), "a");
  if (cache->file_ == nullptr) {
    throw CacheError("cannot open cache file " + path.string() +
                     " for appending");
  }
  return cache;
}

void ResponseCache::Append(const std::string& key_hash,
                           const std::string& prompt_digest,
                           const std::string& response) {
  if (file_ == nullptr) return;
  const std::string line = nlohmann::json{{"key_hash", key_hash},
                                          {"prompt_digest", prompt_digest},
                                          {"response", response}}
                               .dump() +
                           "\n";
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() ||
      std::fflush(file_) != 0 || ::fsync(::fileno(file_)) != 0) {
    throw CacheError("failed to append to cache file " + path_->string());
  }
}

std::string ResponseCache::LookupOrInsert(
    const std::string& key_hash, const std::string& prompt_digest,
    const std::function<std::string()>& producer) {
  std::promise<std::string> promise;
  {
    std::unique_lock lock(mutex_);
    if (auto it = entries_.find(key_hash); it != entries_.end()) {
      return it->second;
    }
    if (auto it = in_flight_.find(key_hash); it != in_flight_.end()) {
      std::shared_future<std::string> pending = it->second;
      lock.unlock();
      return pending.get();
    }
    in_flight_.emplace(key_hash, promise.get_future().share());
    ++producer_calls_;
  }

  try {
    std::string value = producer();
    std::lock_guard lock(mutex_);
    Append(key_hash, prompt_digest, value);
    entries_.emplace(key_hash, value);
    in_flight_.erase(key_hash);
    promise.set_value(value);
    return value;
  } catch (...) {
    {
      std::lock_guard lock(mutex_);
      in_flight_.erase(key_hash);
    }
    promise.set_exception(std::current_exception());
    throw;
  }
}

std::optional<std::string> ResponseCache::Lookup(
    const std::string& key_hash) const {
  std::lock_guard lock(mutex_);
  if (auto it = entries_.find(key_hash); it != entries_.end()) {
    return it->second;
  }
  return std::nullopt;
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::uint64_t ResponseCache::producer_calls() const {
  std::lock_guard lock(mutex_);
  return producer_calls_;
}

CachedGenerationBackend::CachedGenerationBackend(
    std::shared_ptr<GenerationBackend> inner,
    std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {
  if (!inner_ || !cache_) {
    throw InvalidArgument("cached backend needs a backend and a cache");
  }
}

std::string CachedGenerationBackend::Generate(
    const GenerationRequest& request) {
  return cache_->LookupOrInsert(CacheKey(request), Sha256Hex(request.prompt),
                                [&] { return inner_->Generate(request); });
}

}  // namespace maskcert
