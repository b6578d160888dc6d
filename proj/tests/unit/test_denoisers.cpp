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

#include <atomic>
#include <string>

#include "maskcert/cache.hpp"
#include "maskcert/denoisers.hpp"
#include "maskcert/errors.hpp"

using namespace maskcert;

namespace {

MaskedSentence Masked(const std::string& text, std::vector<std::size_t> indices) {
  const Sentence x = Tokenize(text);
  return ApplyMask(x, MaskSet(std::move(indices), x.length()));
}

// A generation backend that answers differently on every call, i.e. a
// nondeterministic model.
class DriftingGenerator final : public GenerationBackend {
 public:
  std::string Generate(const GenerationRequest& request) override {
    last = request;
    return "answer " + std::to_string(calls++);
  }
  std::atomic<int> calls{0};
  GenerationRequest last;
};

}  // namespace

TEST_CASE("identity and remove-mask: worked examples") {
  CHECK(Denoiser::Identity().Denoise(Masked("a b", {})) == "a b");
  CHECK(Denoiser::Identity().Denoise(Masked("a b", {1})) == "a [MASK]");
  CHECK(Denoiser::RemoveMask().Denoise(Masked("good movie", {0})) == "movie");
  CHECK(Denoiser::RemoveMask().Denoise(Masked("a b c", {0, 1, 2})) == "");
  CHECK(Denoiser::RemoveMask().Denoise(Masked("a b c d", {1, 2})) == "a d");
}

TEST_CASE("property: remove-mask output has L - k tokens") {
  RngStream rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t L = 1 + rng.Below(15);
    std::string text;
    for (std::size_t i = 0; i < L; ++i) text += (i ? " w" : "w") + std::to_string(i);
    const std::size_t k = rng.Below(L + 1);
    const MaskedSentence m = ApplyMask(Tokenize(text), SampleMaskSet(L, k, rng));
    const std::string out = Denoiser::RemoveMask().Denoise(m);
    const std::size_t tokens = out.empty() ? 0 : Tokenize(out).length();
    CHECK(tokens == L - k);
  }
}

TEST_CASE("llm fill: renders the denoising prompt and returns the completion") {
  auto gen = std::make_shared<DriftingGenerator>();
  const Denoiser d = Denoiser::LlmFill({gen, templates::Sst2Denoise(), std::nullopt});
  CHECK(d.kind() == DenoiserKind::kLlmFill);
  const MaskedSentence m = Masked("a great film", {1});
  CHECK(d.Denoise(m) == "answer 0");
  CHECK(gen->last.prompt == RenderPrompt(templates::Sst2Denoise(), "a [MASK] film"));
  CHECK(gen->last.params == DecodingParams::ForDenoising(3));
  CHECK(gen->last.template_key == templates::Sst2Denoise().Key());
  // "answer 0" has 2 tokens, the input 3.
  CHECK(d.length_mismatches() == 1);
}

TEST_CASE("llm fill: nothing masked means no backend call") {
  auto gen = std::make_shared<DriftingGenerator>();
  const Denoiser d = Denoiser::LlmFill({gen, templates::Sst2Denoise(), std::nullopt});
  CHECK(d.Denoise(Masked("a b", {})) == "a b");
  CHECK(gen->calls == 0);
}

TEST_CASE("llm fill: explicit params and a cache make it deterministic") {
  auto gen = std::make_shared<DriftingGenerator>();
  auto cached = std::make_shared<CachedGenerationBackend>(gen, ResponseCache::InMemory());
  const Denoiser d = Denoiser::LlmFill(
      {cached, templates::AgNewsDenoise(), DecodingParams{3, 1.1, 40}});
  const MaskedSentence m = Masked("stocks rally on earnings", {0, 2});
  const std::string first = d.Denoise(m);
  CHECK(d.Denoise(m) == first);
  CHECK(d.Denoise(Masked("stocks rally on earnings", {0, 2})) == first);
  CHECK(gen->calls == 1);
  CHECK(gen->last.params == DecodingParams{3, 1.1, 40});
}

TEST_CASE("llm fill: errors") {
  CHECK_THROWS_AS(Denoiser::LlmFill({nullptr, templates::Sst2Denoise(), std::nullopt}),
                  InvalidArgument);
  auto gen = std::make_shared<MaskFillerBackend>();
  const Denoiser d = Denoiser::LlmFill({gen, templates::Sst2Denoise(), std::nullopt});
  CHECK(d.Denoise(Masked("a b c", {0, 2})) == "the b the");
  CHECK(d.length_mismatches() == 0);
}

TEST_CASE("select_strategy: worked examples and the 70% boundary") {
  CHECK(SelectStrategy(Rate::FromPercent(80)) == DenoiserKind::kRemoveMask);
  CHECK(SelectStrategy(Rate::FromPercent(30)) == DenoiserKind::kLlmFill);
  CHECK(SelectStrategy(Rate::FromPercent(70)) == DenoiserKind::kRemoveMask);
  CHECK(SelectStrategy(Rate::FromBasisPoints(6999)) == DenoiserKind::kLlmFill);
  StrategyPolicy forced{Rate::FromPercent(70), DenoiserKind::kIdentity};
  CHECK(SelectStrategy(Rate::FromPercent(90), forced) == DenoiserKind::kIdentity);
  StrategyPolicy lower{Rate::FromPercent(40), std::nullopt};
  CHECK(SelectStrategy(Rate::FromPercent(50), lower) == DenoiserKind::kRemoveMask);
}

TEST_CASE("denoiser kind names round-trip") {
  for (DenoiserKind k : {DenoiserKind::kLlmFill, DenoiserKind::kRemoveMask,
                         DenoiserKind::kIdentity}) {
    CHECK(ParseDenoiserKind(DenoiserKindName(k)) == k);
  }
  CHECK(DenoiserKindName(DenoiserKind::kRemoveMask) == "remove_mask");
  CHECK_THROWS_AS(ParseDenoiserKind("magic"), InvalidArgument);
}
