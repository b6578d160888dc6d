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

#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include "maskcert/cache.hpp"
#include "maskcert/errors.hpp"
#include "maskcert/http_backend.hpp"
#include "support/mock_endpoint.hpp"

using namespace maskcert;
using maskcert::testing::MockEndpoint;
using maskcert::testing::MockReply;
using maskcert::testing::StatusReply;
using maskcert::testing::TextReply;
namespace fs = std::filesystem;

namespace {

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("maskcert_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

EndpointConfig FastConfig(const MockEndpoint& mock) {
  EndpointConfig c;
  c.url = mock.url();
  c.max_attempts = 4;
  c.initial_backoff_ms = 20;
  c.backoff_multiplier = 2.0;
  c.timeout_seconds = 5;
  return c;
}

GenerationRequest Request(const std::string& prompt) {
  return {prompt, DecodingParams::ForClassification(), "t@v1"};
}

}  // namespace

TEST_CASE("sha256 known answers") {
  CHECK(Sha256Hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(Sha256Hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("cache key covers prompt, decoding params and template") {
  const GenerationRequest base = Request("p");
  GenerationRequest other_params = base;
  other_params.params.num_beams = 3;
  GenerationRequest other_template = base;
  other_template.template_key = "t@v2";
  CHECK(CacheKey(base) == CacheKey(Request("p")));
  CHECK(CacheKey(base) != CacheKey(Request("q")));
  CHECK(CacheKey(base) != CacheKey(other_params));
  CHECK(CacheKey(base) != CacheKey(other_template));
}

TEST_CASE("cache: producer runs once per key") {
  auto cache = ResponseCache::InMemory();
  int calls = 0;
  const auto producer = [&] {
    ++calls;
    return std::string("v");
  };
  CHECK(cache->LookupOrInsert("k", "d", producer) == "v");
  CHECK(cache->LookupOrInsert("k", "d", producer) == "v");
  CHECK(calls == 1);
  CHECK(cache->producer_calls() == 1);
  CHECK(cache->size() == 1);
  CHECK(cache->Lookup("k") == "v");
  CHECK_FALSE(cache->Lookup("other").has_value());
}

TEST_CASE("cache: concurrent identical keys are single-flight") {
  auto cache = ResponseCache::InMemory();
  std::atomic<int> calls{0};
  std::vector<std::string> results(8);
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&, t] {
        results[t] = cache->LookupOrInsert("same", "d", [&] {
          ++calls;
          std::this_thread::sleep_for(std::chrono::milliseconds(50));
          return std::string("once");
        });
      });
    }
  }
  CHECK(calls == 1);
  for (const auto& r : results) CHECK(r == "once");
}

TEST_CASE("cache: a failing producer caches nothing") {
  auto cache = ResponseCache::InMemory();
  CHECK_THROWS_AS(cache->LookupOrInsert("k", "d",
                                        []() -> std::string {
                                          throw BackendUnavailable("down");
                                        }),
                  BackendUnavailable);
  CHECK_FALSE(cache->Lookup("k").has_value());
  CHECK(cache->LookupOrInsert("k", "d", [] { return std::string("later"); }) == "later");
}

TEST_CASE("cache: values persist across reopen") {
  const fs::path dir = FreshDir("persist");
  const fs::path file = dir / "cache.jsonl";
  {
    auto cache = ResponseCache::Open(file);
    cache->LookupOrInsert("k1", "d1", [] { return std::string("first\nline"); });
    cache->LookupOrInsert("k2", "d2", [] { return std::string("second"); });
  }
  auto reopened = ResponseCache::Open(file);
  CHECK(reopened->size() == 2);
  int calls = 0;
  CHECK(reopened->LookupOrInsert("k1", "d1", [&] {
    ++calls;
    return std::string("x");
  }) == "first\nline");
  CHECK(calls == 0);

  // One JSON object per line with the documented fields.
  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  const auto record = nlohmann::json::parse(line);
  CHECK(record.contains("key_hash"));
  CHECK(record.contains("prompt_digest"));
  CHECK(record.contains("response"));
  fs::remove_all(dir);
}

TEST_CASE("cache: malformed file and I/O failures raise CacheError") {
  const fs::path dir = FreshDir("malformed");
  {
    std::ofstream out(dir / "bad.jsonl");
    out << R"({"key_hash":"a","prompt_digest":"b","response":"c"})" << "\n"
        << "not json\n";
  }
  try {
    ResponseCache::Open(dir / "bad.jsonl");
    FAIL("expected CacheError");
  } catch (const CacheError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  // A directory where the file should be.
  fs::create_directories(dir / "is_a_dir");
  CHECK_THROWS_AS(ResponseCache::Open(dir / "is_a_dir"), CacheError);
  fs::remove_all(dir);
}

TEST_CASE("cached backend: second identical call causes no network traffic") {
  MockEndpoint mock([](const nlohmann::json&, std::size_t) { return TextReply("ok"); });
  auto http = std::make_shared<HttpGenerationBackend>(FastConfig(mock));
  CachedGenerationBackend cached(http, ResponseCache::InMemory());
  CHECK(cached.Generate(Request("p")) == "ok");
  CHECK(cached.Generate(Request("p")) == "ok");
  CHECK(mock.calls() == 1);
  CHECK(cached.Generate(Request("q")) == "ok");
  CHECK(mock.calls() == 2);
}

TEST_CASE("http: two transient 5xx then success takes three attempts") {
  MockEndpoint mock([](const nlohmann::json&, std::size_t call) {
    return call < 2 ? StatusReply(503) : TextReply("recovered");
  });
  HttpGenerationBackend http(FastConfig(mock));
  const auto start = std::chrono::steady_clock::now();
  CHECK(http.Generate(Request("p")) == "recovered");
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(mock.calls() == 3);
  CHECK(http.stats().attempts == 3);
  CHECK(http.stats().requests == 1);
  CHECK(http.stats().failures == 0);
  // Backoff 20 ms then 40 ms.
  CHECK(elapsed >= std::chrono::milliseconds(60));
}

TEST_CASE("http: 429 is retried") {
  MockEndpoint mock([](const nlohmann::json&, std::size_t call) {
    return call == 0 ? StatusReply(429) : TextReply("ok");
  });
  HttpGenerationBackend http(FastConfig(mock));
  CHECK(http.Generate(Request("p")) == "ok");
  CHECK(mock.calls() == 2);
}

TEST_CASE("http: persistent failure raises BackendUnavailable after max attempts") {
  MockEndpoint mock([](const nlohmann::json&, std::size_t) { return StatusReply(500); });
  HttpGenerationBackend http(FastConfig(mock));
  CHECK_THROWS_AS(http.Generate(Request("p")), BackendUnavailable);
  CHECK(mock.calls() == 4);
  CHECK(http.stats().failures == 1);
}

TEST_CASE("http: endpoint down raises BackendUnavailable") {
  int port = 0;
  {
    MockEndpoint probe([](const nlohmann::json&, std::size_t) { return TextReply(""); });
    port = probe.port();
  }  // closed: nothing listens on the port any more
  EndpointConfig c;
  c.url = "http://127.0.0.1:" + std::to_string(port);
  c.max_attempts = 3;
  c.initial_backoff_ms = 1;
  c.timeout_seconds = 2;
  HttpGenerationBackend http(c);
  CHECK_THROWS_AS(http.Generate(Request("p")), BackendUnavailable);
  CHECK(http.stats().attempts == 3);
}

TEST_CASE("http: malformed replies raise BackendProtocolError without retry") {
  MockEndpoint not_json([](const nlohmann::json&, std::size_t) {
    return MockReply{200, "<html>"};
  });
  HttpGenerationBackend a(FastConfig(not_json));
  CHECK_THROWS_AS(a.Generate(Request("p")), BackendProtocolError);
  CHECK(not_json.calls() == 1);

  MockEndpoint no_text([](const nlohmann::json&, std::size_t) {
    return MockReply{200, R"({"completion": "x"})"};
  });
  HttpGenerationBackend b(FastConfig(no_text));
  CHECK_THROWS_AS(b.Generate(Request("p")), BackendProtocolError);

  MockEndpoint bad_request([](const nlohmann::json&, std::size_t) { return StatusReply(400); });
  HttpGenerationBackend c(FastConfig(bad_request));
  CHECK_THROWS_AS(c.Generate(Request("p")), BackendProtocolError);
  CHECK(bad_request.calls() == 1);
}

TEST_CASE("http: request body, auth header and request log") {
  const fs::path dir = FreshDir("log");
  MockEndpoint mock([](const nlohmann::json&, std::size_t) { return TextReply("fine"); });
  EndpointConfig c = FastConfig(mock);
  c.auth_header = "Bearer secret";
  c.log_path = dir / "requests.jsonl";
  {
    HttpGenerationBackend http(c);
    http.Generate(Request("the prompt"));
  }
  const auto body = mock.requests().at(0);
  CHECK(body.at("prompt") == "the prompt");
  CHECK(body.at("num_beams") == 2);
  CHECK(body.at("repetition_penalty") == 1.3);
  CHECK(body.at("max_new_tokens") == 8);
  CHECK(mock.authorization_headers().at(0) == "Bearer secret");

  std::ifstream in(dir / "requests.jsonl");
  std::string line;
  REQUIRE(std::getline(in, line));
  const auto entry = nlohmann::json::parse(line);
  CHECK(entry.at("prompt") == "the prompt");
  CHECK(entry.at("status") == 200);
  CHECK(entry.at("template") == "t@v1");
  fs::remove_all(dir);
}

TEST_CASE("http: completions protocol") {
  MockEndpoint mock(
      [](const nlohmann::json&, std::size_t) {
        return MockReply{200, R"({"choices": [{"text": " positive"}]})"};
      },
      "/v1/completions");
  EndpointConfig c = FastConfig(mock);
  c.protocol = "completions";
  c.path = "/v1/completions";
  c.model = "local-model";
  HttpGenerationBackend http(c);
  CHECK(http.Generate(Request("p")) == " positive");
  const auto body = mock.requests().at(0);
  CHECK(body.at("model") == "local-model");
  CHECK(body.at("max_tokens") == 8);
}

TEST_CASE("endpoint config: JSON, environment overrides and validation") {
  EndpointConfig c = EndpointConfig::FromJson(
      {{"url", "http://h:1"}, {"path", "/gen"}, {"max_attempts", 2}});
  CHECK(c.url == "http://h:1");
  CHECK(c.max_attempts == 2);
  ::setenv("MASKCERT_ENDPOINT_URL", "http://override:9", 1);
  ::setenv("MASKCERT_TIMEOUT_SECONDS", "12.5", 1);
  c.ApplyEnvironment();
  ::unsetenv("MASKCERT_ENDPOINT_URL");
  ::unsetenv("MASKCERT_TIMEOUT_SECONDS");
  CHECK(c.url == "http://override:9");
  CHECK(c.timeout_seconds == 12.5);
  ::setenv("MASKCERT_TIMEOUT_SECONDS", "soon", 1);
  CHECK_THROWS_AS(c.ApplyEnvironment(), ConfigError);
  ::unsetenv("MASKCERT_TIMEOUT_SECONDS");

  c.protocol = "grpc";
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  c.protocol = "minimal";
  c.path = "gen";
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  CHECK_THROWS_AS(EndpointConfig::FromJson({{"max_attempts", "many"}}), ConfigError);
}

TEST_CASE("http: concurrency limit is respected") {
  std::atomic<int> in_flight{0}, peak{0};
  MockEndpoint mock([&](const nlohmann::json&, std::size_t) {
    const int now = ++in_flight;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    --in_flight;
    return TextReply("ok");
  });
  EndpointConfig c = FastConfig(mock);
  c.max_concurrency = 2;
  HttpGenerationBackend http(c);
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 6; ++t) {
      threads.emplace_back([&, t] { http.Generate(Request("p" + std::to_string(t))); });
    }
  }
  CHECK(mock.calls() == 6);
  CHECK(peak.load() <= 2);
}
