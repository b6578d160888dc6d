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

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskcert/labels.hpp"
#include "maskcert/prompts.hpp"

namespace maskcert {

struct DecodingParams {
  int num_beams = 2;
  double repetition_penalty = 1.3;
  int max_new_tokens = 8;

  // Throws InvalidArgument on num_beams < 1, penalty <= 0 or
  // max_new_tokens < 1.
  void Validate() const;

  static DecodingParams ForClassification();
  // Twice the input's token count, at least 1.
  static DecodingParams ForDenoising(std::size_t input_tokens);

  friend bool operator==(const DecodingParams&,
                         const DecodingParams&) = default;
};

nlohmann::json DecodingParamsToJson(const DecodingParams& params);

struct GenerationRequest {
  std::string prompt;
  DecodingParams params;
  std::string template_key;  // PromptTemplate::Key() of the rendered prompt
};

// Text-in, text-out model. Implementations must tolerate concurrent calls.
class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual std::string Generate(const GenerationRequest& request) = 0;
};

// The base classifier f. Implementations must tolerate concurrent calls and
// return equal labels for equal strings.
class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;
  virtual LabelId Classify(std::string_view text) = 0;
  virtual const LabelSpace& labels() const = 0;
};

struct KeywordRule {
  std::string keyword;
  LabelId label = 0;
};

// Votes for the label with the most keyword hits among whitespace tokens
// (case-insensitive, whole-token). Ties go to the lower label id, no hits to
// label 0, blank text to kInvalidLabel.
class KeywordClassifier final : public ClassifierBackend {
 public:
  KeywordClassifier(LabelSpace labels, std::vector<KeywordRule> rules);

  LabelId Classify(std::string_view text) override;
  const LabelSpace& labels() const override { return labels_; }

 private:
  LabelSpace labels_;
  std::map<std::string, std::vector<LabelId>, std::less<>> rules_;
};

// Exact-string table with a default.
class LookupClassifier final : public ClassifierBackend {
 public:
  LookupClassifier(LabelSpace labels, std::map<std::string, LabelId> table,
                   LabelId fallback);

  LabelId Classify(std::string_view text) override;
  const LabelSpace& labels() const override { return labels_; }

 private:
  LabelSpace labels_;
  std::map<std::string, LabelId, std::less<>> table_;
  LabelId fallback_;
};

class ConstantClassifier final : public ClassifierBackend {
 public:
  ConstantClassifier(LabelSpace labels, LabelId label);

  LabelId Classify(std::string_view) override { return label_; }
  const LabelSpace& labels() const override { return labels_; }

 private:
  LabelSpace labels_;
  LabelId label_;
};

// Toy denoising model: answers with the prompt's last input, every mask
// marker replaced by `filler`.
class MaskFillerBackend final : public GenerationBackend {
 public:
  explicit MaskFillerBackend(std::string filler = "the")
      : filler_(std::move(filler)) {}
  std::string Generate(const GenerationRequest& request) override;

 private:
  std::string filler_;
};

// Classifies by prompting a generation backend and parsing its answer.
class PromptClassifier final : public ClassifierBackend {
 public:
  PromptClassifier(std::shared_ptr<GenerationBackend> backend,
                   PromptTemplate prompt_template, LabelSpace labels,
                   DecodingParams params = DecodingParams::ForClassification());

  // Blank text is kInvalidLabel without a backend call.
  LabelId Classify(std::string_view text) override;
  const LabelSpace& labels() const override { return labels_; }

 private:
  std::shared_ptr<GenerationBackend> backend_;
  PromptTemplate template_;
  LabelSpace labels_;
  DecodingParams params_;
};

}  // namespace maskcert
