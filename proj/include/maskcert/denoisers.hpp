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
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "maskcert/backends.hpp"
#include "maskcert/prompts.hpp"
#include "maskcert/text.hpp"

namespace maskcert {

enum class DenoiserKind { kLlmFill, kRemoveMask, kIdentity };

std::string DenoiserKindName(DenoiserKind kind);
// "llm_fill", "remove_mask" or "identity".
DenoiserKind ParseDenoiserKind(const std::string& name);

struct LlmFillSettings {
  std::shared_ptr<GenerationBackend> backend;
  PromptTemplate prompt_template = templates::Sst2Denoise();
  // Defaults to DecodingParams::ForDenoising(sentence length) per call.
  std::optional<DecodingParams> params;
};

// The denoising step D applied to a masked sentence before classification.
// Every variant is a deterministic function of its input as long as the
// LLM fill backend is (wrap it in CachedGenerationBackend).
class Denoiser {
 public:
  static Denoiser Identity();
  static Denoiser RemoveMask();
  // Throws InvalidArgument without a backend.
  static Denoiser LlmFill(LlmFillSettings settings);

  DenoiserKind kind() const { return kind_; }

  // Identity: the masked text as is. RemoveMask: unmasked tokens joined by
  // single spaces ("" when everything is masked). LlmFill: the backend's
  // completion of the denoising prompt, verbatim; a sentence without masks
  // is passed through.
  std::string Denoise(const MaskedSentence& masked) const;

  // LlmFill completions whose whitespace token count differs from the input.
  std::uint64_t length_mismatches() const { return mismatches_->load(); }

 private:
  explicit Denoiser(DenoiserKind kind) : kind_(kind) {}

  DenoiserKind kind_;
  std::optional<LlmFillSettings> llm_;
  std::shared_ptr<std::atomic<std::uint64_t>> mismatches_ =
      std::make_shared<std::atomic<std::uint64_t>>(0);
};

struct StrategyPolicy {
  Rate removal_threshold = Rate::FromPercent(70);
  std::optional<DenoiserKind> forced;
};

// RemoveMask when mask_rate >= threshold, LlmFill below it, unless forced.
DenoiserKind SelectStrategy(Rate mask_rate, const StrategyPolicy& policy = {});

}  // namespace maskcert
