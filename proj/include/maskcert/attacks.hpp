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

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskcert/backends.hpp"
#include "maskcert/rng.hpp"
#include "maskcert/smoothing.hpp"
#include "maskcert/text.hpp"

namespace maskcert {

enum class TransformationKind {
  kCharSwap,    // swap two adjacent characters
  kCharSub,     // replace a character with a random letter
  kCharDelete,  // drop a character
  kCharInsert,  // insert a random letter
  kHomoglyph,   // replace a character with a look-alike
};

std::string TransformationKindName(TransformationKind kind);

// Operator family of DeepWordBug-style attacks.
std::vector<TransformationKind> DeepWordBugKinds();
// DeepWordBug operators plus homoglyphs, TextBugger-style.
std::vector<TransformationKind> TextBuggerKinds();
// "deepwordbug" or "textbugger".
std::vector<TransformationKind> AttackKindsByName(const std::string& name);

// Built-in look-alike for an ASCII character, if any.
std::optional<char> Homoglyph(char c);

struct AttackBudget {
  Rate max_word_fraction = Rate::FromPercent(10);
  std::uint64_t queries_cap = 5000;

  std::size_t WordBudget(std::size_t length) const {
    return PerturbCount(length, max_word_fraction);
  }
  void Validate() const;
};

// Black-box view of the model under attack.
class Victim {
 public:
  virtual ~Victim() = default;
  // Fraction of votes for `label` on x; one query.
  virtual double VoteFraction(const Sentence& x, LabelId label) = 0;
  // Final verdict; kInvalidLabel when the model abstains.
  virtual LabelId Predict(const Sentence& x) = 0;
  virtual const LabelSpace& labels() const = 0;
};

// The base classifier itself: vote fraction is 1 or 0.
class BaseVictim final : public Victim {
 public:
  explicit BaseVictim(std::shared_ptr<ClassifierBackend> classifier);
  double VoteFraction(const Sentence& x, LabelId label) override;
  LabelId Predict(const Sentence& x) override;
  const LabelSpace& labels() const override { return classifier_->labels(); }

 private:
  std::shared_ptr<ClassifierBackend> classifier_;
};

// A smoothed classifier searched with a reduced sample count and judged with
// the full one.
class SmoothedVictim final : public Victim {
 public:
  SmoothedVictim(const SmoothedClassifier& smoothed,
                 std::uint64_t search_samples = 100);
  double VoteFraction(const Sentence& x, LabelId label) override;
  LabelId Predict(const Sentence& x) override;
  const LabelSpace& labels() const override { return verdict_.labels(); }

 private:
  SmoothedClassifier search_;
  SmoothedClassifier verdict_;
};

struct AttackStep {
  std::size_t word_index = 0;
  TransformationKind kind = TransformationKind::kCharSwap;
  std::string before;
  std::string after;
  double vote_fraction = 0.0;  // ground-truth vote fraction after the step

  friend bool operator==(const AttackStep&, const AttackStep&) = default;
};

struct AttackResult {
  bool success = false;
  bool query_cap_hit = false;
  std::string adversarial_text;
  std::size_t words_changed = 0;
  std::uint64_t queries_used = 0;
  LabelId original_label = kInvalidLabel;
  LabelId final_label = kInvalidLabel;
  std::vector<AttackStep> steps;

  friend bool operator==(const AttackResult&, const AttackResult&) = default;
};

// Word positions ordered by how much deleting the word lowers the vote
// fraction of `truth`, largest drop first; ties by position.
std::vector<std::size_t> RankWordImportance(const Sentence& x, LabelId truth,
                                            Victim& victim,
                                            std::uint64_t* queries = nullptr);

// Greedy black-box attack: walk words by importance, apply the edit that most
// lowers the ground-truth vote fraction (if it does not raise it), stop at a
// label flip, an exhausted word budget or the query cap.
AttackResult Attack(const Sentence& x, LabelId truth, Victim& victim,
                    const AttackBudget& budget,
                    const std::vector<TransformationKind>& kinds,
                    std::uint64_t seed);

struct LabeledSentence {
  std::string id;
  Sentence sentence;
  LabelId label = 0;
};

struct RobustnessReport {
  double accuracy = 0.0;
  std::vector<AttackResult> results;  // one per example, in input order
};

// Seed of the attack on example `index` of a run seeded with `seed`.
inline std::uint64_t ExampleSeed(std::uint64_t seed, std::uint64_t index) {
  return RngStream::Substream(seed, index).Next();
}

// One example of EmpiricalRobustAccuracy: a clean misclassification is
// returned unattacked (final label = clean prediction); otherwise Attack.
AttackResult AttackExample(const LabeledSentence& example, Victim& victim,
                           const AttackBudget& budget,
                           const std::vector<TransformationKind>& kinds,
                           std::uint64_t example_seed);

// Fraction of examples whose prediction on the attacked text still equals the
// ground truth. Examples misclassified before the attack count as failures
// and are not attacked.
RobustnessReport EmpiricalRobustAccuracy(
    const std::vector<LabeledSentence>& dataset, Victim& victim,
    const AttackBudget& budget, const std::vector<TransformationKind>& kinds,
    std::uint64_t seed);

// {id, steps: [{word_idx, kind, before, after, vote_fraction}], result}
nlohmann::json AttackTranscriptToJson(const std::string& id,
                                      const AttackResult& result,
                                      const LabelSpace& labels);

// Number of positions where two equal-length token lists differ; token count
// difference counts as extra changed words.
std::size_t WordDiff(const Sentence& a, const Sentence& b);

}  // namespace maskcert
