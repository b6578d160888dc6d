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

#include "support/toy_models.hpp"

#include <algorithm>
#include <cctype>

namespace maskcert::testing {

WeightedVoteClassifier::WeightedVoteClassifier(
    LabelSpace labels, std::map<std::string, std::vector<double>> weights,
    std::vector<double> bias)
    : labels_(std::move(labels)), bias_(std::move(bias)) {
  bias_.resize(labels_.size(), 0.0);
  for (auto& [word, w] : weights) {
    w.resize(labels_.size(), 0.0);
    weights_.emplace(word, std::move(w));
  }
}

LabelId WeightedVoteClassifier::Classify(std::string_view text) {
  std::vector<double> score = bias_;
  bool any = false;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) continue;
    any = true;
    const auto it = weights_.find(text.substr(start, i - start));
    if (it == weights_.end()) continue;
    for (std::size_t c = 0; c < score.size(); ++c) score[c] += it->second[c];
  }
  if (!any) return kInvalidLabel;
  return static_cast<LabelId>(std::max_element(score.begin(), score.end()) -
                              score.begin());
}

std::shared_ptr<WeightedVoteClassifier> RandomWeightedClassifier(
    RngStream& rng, const std::vector<std::string>& vocabulary,
    const LabelSpace& labels) {
  std::map<std::string, std::vector<double>> weights;
  for (const std::string& word : vocabulary) {
    std::vector<double> w;
    for (std::size_t c = 0; c < labels.size(); ++c) {
      w.push_back(static_cast<double>(rng.Below(7)) - 3.0);
    }
    weights.emplace(word, std::move(w));
  }
  std::vector<double> bias;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    bias.push_back(static_cast<double>(rng.Below(5)) - 2.0);
  }
  return std::make_shared<WeightedVoteClassifier>(labels, std::move(weights),
                                                  std::move(bias));
}

Sentence RandomSentence(RngStream& rng, const std::vector<std::string>& vocabulary,
                        std::size_t length) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < length; ++i) {
    tokens.push_back(vocabulary[rng.Below(vocabulary.size())]);
  }
  return Sentence::FromTokens(std::move(tokens));
}

std::string RandomWord(RngStream& rng) {
  std::string word;
  const std::size_t length = 2 + rng.Below(7);
  for (std::size_t i = 0; i < length; ++i) {
    word.push_back(static_cast<char>('a' + rng.Below(26)));
  }
  return word;
}

}  // namespace maskcert::testing
