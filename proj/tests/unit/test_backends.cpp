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

#include "maskcert/backends.hpp"
#include "maskcert/errors.hpp"
#include "maskcert/prompts.hpp"

using namespace maskcert;

namespace {

// Records requests and answers from a fixed string.
class RecordingGenerator final : public GenerationBackend {
 public:
  explicit RecordingGenerator(std::string answer) : answer_(std::move(answer)) {}
  std::string Generate(const GenerationRequest& request) override {
    ++calls;
    last = request;
    return answer_;
  }
  std::atomic<int> calls{0};
  GenerationRequest last;

 private:
  std::string answer_;
};

KeywordClassifier Sentiment() {
  return KeywordClassifier(LabelSpace::Sst2(), {{"good", 0}, {"bad", 1}});
}

}  // namespace

TEST_CASE("decoding params: defaults and validation") {
  CHECK(DecodingParams::ForClassification() == DecodingParams{2, 1.3, 8});
  CHECK(DecodingParams::ForDenoising(7).max_new_tokens == 14);
  CHECK(DecodingParams::ForDenoising(0).max_new_tokens == 1);
  CHECK_THROWS_AS((DecodingParams{0, 1.3, 8}.Validate()), InvalidArgument);
  CHECK_THROWS_AS((DecodingParams{2, 0.0, 8}.Validate()), InvalidArgument);
  CHECK_THROWS_AS((DecodingParams{2, 1.3, 0}.Validate()), InvalidArgument);
  const auto json = DecodingParamsToJson({2, 1.3, 8});
  CHECK(json.at("num_beams") == 2);
  CHECK(json.at("repetition_penalty") == 1.3);
  CHECK(json.at("decoding") == "beam_search");
}

TEST_CASE("keyword classifier: worked examples") {
  KeywordClassifier k = Sentiment();
  CHECK(k.Classify("good good bad") == 0);
  CHECK(k.Classify("bad bad good") == 1);
  CHECK(k.Classify("[MASK] [MASK]") == 0);  // no hits: first label
  CHECK(k.Classify("good bad") == 0);       // tie: lower label id
  CHECK(k.Classify("GOOD Bad bad") == 1);   // case-insensitive
  CHECK(k.Classify("goodness badly") == 0); // whole tokens only
  CHECK(k.Classify("") == kInvalidLabel);
  CHECK(k.Classify("   ") == kInvalidLabel);
  CHECK_THROWS_AS(KeywordClassifier(LabelSpace::Sst2(), {{"x", 2}}), InvalidArgument);
}

TEST_CASE("lookup and constant classifiers") {
  LookupClassifier lookup(LabelSpace::Sst2(), {{"a b", 1}, {"", kInvalidLabel}}, 0);
  CHECK(lookup.Classify("a b") == 1);
  CHECK(lookup.Classify("a  b") == 0);
  CHECK(lookup.Classify("") == kInvalidLabel);
  ConstantClassifier constant(LabelSpace::AgNews(), 2);
  CHECK(constant.Classify("anything") == 2);
  CHECK(constant.Classify("") == 2);
  CHECK_THROWS_AS(ConstantClassifier(LabelSpace::Sst2(), 5), InvalidArgument);
}

TEST_CASE("mask filler answers the denoising prompt") {
  MaskFillerBackend filler("nice");
  const std::string prompt = RenderPrompt(templates::Sst2Denoise(), "a [MASK] film [MASK]");
  CHECK(filler.Generate({prompt, DecodingParams::ForDenoising(4), "k"}) == "a nice film nice");
  MaskFillerBackend mask_word("[MASK]");  // filler containing the marker
  CHECK(mask_word.Generate({prompt, {}, "k"}) == "a [MASK] film [MASK]");
}

TEST_CASE("prompt classifier renders, generates and parses") {
  auto gen = std::make_shared<RecordingGenerator>(" Negative.\n");
  PromptClassifier classifier(gen, templates::Sst2Classify(), LabelSpace::Sst2());
  CHECK(classifier.Classify("a dull film") == 1);
  CHECK(gen->calls == 1);
  CHECK(gen->last.prompt == RenderPrompt(templates::Sst2Classify(), "a dull film"));
  CHECK(gen->last.params == DecodingParams::ForClassification());
  CHECK(gen->last.template_key == templates::Sst2Classify().Key());

  // Blank text never reaches the backend.
  CHECK(classifier.Classify("  ") == kInvalidLabel);
  CHECK(gen->calls == 1);

  auto unsure = std::make_shared<RecordingGenerator>("no idea");
  PromptClassifier unparsable(unsure, templates::Sst2Classify(), LabelSpace::Sst2());
  CHECK(unparsable.Classify("text") == kInvalidLabel);

  PromptTemplate broken = templates::Sst2Classify();
  broken.wrapper = "{instruction} only";
  CHECK_THROWS_AS(PromptClassifier(gen, broken, LabelSpace::Sst2()), TemplateError);
  CHECK_THROWS_AS(PromptClassifier(nullptr, templates::Sst2Classify(), LabelSpace::Sst2()),
                  InvalidArgument);
}
