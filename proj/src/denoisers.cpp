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

#include "maskcert/denoisers.hpp"

#include <cctype>

#include "maskcert/errors.hpp"

namespace maskcert {
namespace {

std::size_t CountWords(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (const char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

}  // namespace

std::string DenoiserKindName(DenoiserKind kind) {
  switch (kind) {
    case DenoiserKind::kLlmFill:
      return "llm_fill";
    case DenoiserKind::kRemoveMask:
      return "remove_mask";
    case DenoiserKind::kIdentity:
      return "identity";
  }
  return "unknown";
}

DenoiserKind ParseDenoiserKind(const std::string& name) {
  if (name == "llm_fill") return DenoiserKind::kLlmFill;
  if (name == "remove_mask") return DenoiserKind::kRemoveMask;
  if (name == "identity") return DenoiserKind::kIdentity;
  throw InvalidArgument("unknown denoiser '" + name + "'");
}

Denoiser Denoiser::Identity() { return Denoiser(DenoiserKind::kIdentity); }

Denoiser Denoiser::RemoveMask() { return Denoiser(DenoiserKind::kRemoveMask); }

Denoiser Denoiser::LlmFill(LlmFillSettings settings) {
  if (!settings.backend) {
    throw InvalidArgument("LLM fill denoiser needs a generation backend");
  }
  if (settings.params) settings.params->Validate();
  RenderPrompt(settings.prompt_template, "probe");
  Denoiser denoiser(DenoiserKind::kLlmFill);
  denoiser.llm_ = std::move(settings);
  return denoiser;
}

std::string Denoiser::Denoise(const MaskedSentence& masked) const {
  switch (kind_) {
    case DenoiserKind::kIdentity:
      return masked.Detokenize();
    case DenoiserKind::kRemoveMask: {
      std::string out;
      for (std::size_t i = 0; i < masked.tokens().size(); ++i) {
        if (masked.IsMasked(i)) continue;
        if (!out.empty()) out.push_back(' ');
        out += masked.tokens()[i];
      }
      return out;
    }
    case DenoiserKind::kLlmFill: {
      const std::string input = masked.Detokenize();
      if (masked.mask_set().size() == 0) return input;
      const DecodingParams params =
          llm_->params.value_or(DecodingParams::ForDenoising(masked.origin_length()));
      std::string filled = llm_->backend->Generate(
          {RenderPrompt(llm_->prompt_template, input), params,
           llm_->prompt_template.Key()});
      if (CountWords(filled) != masked.origin_length()) ++*mismatches_;
      return filled;
    }
  }
  return masked.Detokenize();
}

DenoiserKind SelectStrategy(Rate mask_rate, const StrategyPolicy& policy) {
  if (policy.forced) return *policy.forced;
  return mask_rate >= policy.removal_threshold ? DenoiserKind::kRemoveMask
                                               : DenoiserKind::kLlmFill;
}

}  // namespace maskcert
