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

#include "support/mock_endpoint.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include <httplib.h>

#include "maskcert/prompts.hpp"

namespace maskcert::testing {

MockReply TextReply(const std::string& text) {
  return {200, nlohmann::json{{"text", text}}.dump()};
}

MockReply StatusReply(int status) {
  return {status, nlohmann::json{{"error", "scripted failure"}}.dump()};
}

MockEndpoint::MockEndpoint(Script script, std::string path)
    : server_(std::make_unique<httplib::Server>()), script_(std::move(script)) {
  server_->Post(path, [this](const httplib::Request& req, httplib::Response& res) {
    const std::size_t call = calls_.fetch_add(1);
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      res.status = 400;
      return;
    }
    {
      std::lock_guard lock(mutex_);
      requests_.push_back(body);
      auth_.push_back(req.get_header_value("Authorization"));
    }
    const MockReply reply = script_(body, call);
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  });
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("mock endpoint cannot bind");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

MockEndpoint::~MockEndpoint() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockEndpoint::url() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

std::vector<nlohmann::json> MockEndpoint::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::vector<std::string> MockEndpoint::authorization_headers() const {
  std::lock_guard lock(mutex_);
  return auth_;
}

std::string CannedModel::Complete(const std::string& prompt) const {
  std::string input = ExtractLastInput(prompt).value_or("");
  if (!denoise_marker.empty() && prompt.find(denoise_marker) != std::string::npos) {
    const std::string mask = "[MASK]";
    for (std::size_t pos = input.find(mask); pos != std::string::npos;
         pos = input.find(mask, pos + filler.size())) {
      input.replace(pos, mask.size(), filler);
    }
    return input;
  }
  std::istringstream words(input);
  std::string word;
  while (words >> word) {
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const auto& [cue, answer] : cues) {
      if (word == cue) return " " + answer + "\n";
    }
  }
  return " I cannot tell from this text.";
}

}  // namespace maskcert::testing
