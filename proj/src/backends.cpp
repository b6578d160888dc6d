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

#include "maskcert/backends.hpp"

#include <algorithm>
#include <cctype>

#include "maskcert/errors.hpp"

namespace maskcert {
namespace {

std::string Lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

constexpr std::string_view kMaskMarker = "[MASK]";

bool IsBlank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

void CheckLabel(const LabelSpace& labels, LabelId id) {
  if (id < 0 || static_cast<std::size_t>(id) >= labels.size()) {
    throw InvalidArgument("label id " + std::to_string(id) +
                          " outside label space");
  }
}

}  // namespace

void DecodingParams::Validate() const {
  if (num_beams < 1) throw InvalidArgument("num_beams must be >= 1");
  if (!(repetition_penalty > 0.0)) {
    throw InvalidArgument("repetition_penalty must be > 0");
  }
  if (max_new_tokens < 1) throw InvalidArgument("max_new_tokens must be >= 1");
}

DecodingParams DecodingParams::ForClassification() { return {2, 1.3, 8}; }

DecodingParams DecodingParams::ForDenoising(std::size_t input_tokens) {
  return {2, 1.3, static_cast<int>(std::max<std::size_t>(1, 2 * input_tokens))};
}

nlohmann::json DecodingParamsToJson(const DecodingParams& params) {
  return {{"decoding", "beam_search"},
          {"num_beams", params.num_beams},
          {"repetition_penalty", params.repetition_penalty},
          {"max_new_tokens", params.max_new_tokens}};
}

KeywordClassifier::KeywordClassifier(LabelSpace labels,
                                     std::vector<KeywordRule> rules)
    : labels_(std::move(labels)) {
  for (auto& rule : rules) {
    CheckLabel(labels_, rule.label);
    rules_[Lower(rule.keyword)].push_back(rule.label);
  }
}

LabelId KeywordClassifier::Classify(std::string_view text) {
  if (IsBlank(text)) return kInvalidLabel;
  std::vector<int> hits(labels_.size(), 0);
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    const std::size_t start = i;
    while (i < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    if (i == start) continue;
    const auto it = rules_.find(Lower(text.substr(start, i - start)));
    if (it == rules_.end()) continue;
    for (const LabelId label : it->second) ++hits[static_cast<std::size_t>(label)];
  }
  // max_element keeps the first maximum, i.e. the lowest id on ties; all
  // zeros picks label 0.
  return static_cast<LabelId>(std::max_element(hits.begin(), hits.end()) -
                              hits.begin());
}

LookupClassifier::LookupClassifier(LabelSpace labels,
                                   std::map<std::string, LabelId> table,
                                   LabelId fallback)
    : labels_(std::move(labels)), fallback_(fallback) {
  if (fallback_ != kInvalidLabel) CheckLabel(labels_, fallback_);
  for (auto& [key, label] : table) {
    if (label != kInvalidLabel) CheckLabel(labels_, label);
    table_.emplace(key, label);
  }
}

LabelId LookupClassifier::Classify(std::string_view text) {
  const auto it = table_.find(text);
  return it == table_.end() ? fallback_ : it->second;
}

ConstantClassifier::ConstantClassifier(LabelSpace labels, LabelId label)
    : labels_(std::move(labels)), label_(label) {
  CheckLabel(labels_, label_);
}

std::string MaskFillerBackend::Generate(const GenerationRequest& request) {
  std::string text = ExtractLastInput(request.prompt).value_or("");
  for (std::size_t pos = text.find(kMaskMarker); pos != std::string::npos;
       pos = text.find(kMaskMarker, pos + filler_.size())) {
    text.replace(pos, kMaskMarker.size(), filler_);
  }
  return text;
}

PromptClassifier::PromptClassifier(std::shared_ptr<GenerationBackend> backend,
                                   PromptTemplate prompt_template,
                                   LabelSpace labels, DecodingParams params)
    : backend_(std::move(backend)),
      template_(std::move(prompt_template)),
      labels_(std::move(labels)),
      params_(params) {
  if (!backend_) throw InvalidArgument("prompt classifier needs a backend");
  params_.Validate();
  // Surface template errors at construction rather than per sample.
  RenderPrompt(template_, "probe");
}

LabelId PromptClassifier::Classify(std::string_view text) {
  if (IsBlank(text)) return kInvalidLabel;
  const std::string response = backend_->Generate(
      {RenderPrompt(template_, text), params_, template_.Key()});
  return ParseLabel(response, labels_);
}

}  // namespace maskcert
