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

#include "maskcert/attacks.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "maskcert/errors.hpp"

namespace maskcert {
namespace {

constexpr std::string_view kLetters = "abcdefghijklmnopqrstuvwxyz";

bool Editable(char c) { return std::isalnum(static_cast<unsigned char>(c)); }

bool ValidReplacement(const std::string& candidate, const std::string& original) {
  if (candidate.empty() || candidate == original || candidate == kMaskToken) {
    return false;
  }
  return std::none_of(candidate.begin(), candidate.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

char RandomLetter(RngStream& rng, char avoid) {
  char c = avoid;
  while (std::tolower(static_cast<unsigned char>(c)) ==
         std::tolower(static_cast<unsigned char>(avoid))) {
    c = kLetters[rng.Below(kLetters.size())];
  }
  return c;
}

// Candidate edits of `word` for one operator, in position order.
std::vector<std::string> Candidates(const std::string& word,
                                    TransformationKind kind, RngStream& rng) {
  std::vector<std::string> out;
  const std::size_t n = word.size();
  switch (kind) {
    case TransformationKind::kCharSwap:
      for (std::size_t j = 0; j + 1 < n; ++j) {
        if (!Editable(word[j]) || !Editable(word[j + 1]) ||
            word[j] == word[j + 1]) {
          continue;
        }
        std::string w = word;
        std::swap(w[j], w[j + 1]);
        out.push_back(std::move(w));
      }
      break;
    case TransformationKind::kCharSub:
      for (std::size_t j = 0; j < n; ++j) {
        if (!Editable(word[j])) continue;
        std::string w = word;
        w[j] = RandomLetter(rng, word[j]);
        out.push_back(std::move(w));
      }
      break;
    case TransformationKind::kCharDelete:
      if (n < 2) break;
      for (std::size_t j = 0; j < n; ++j) {
        if (!Editable(word[j])) continue;
        std::string w = word;
        w.erase(j, 1);
        out.push_back(std::move(w));
      }
      break;
    case TransformationKind::kCharInsert:
      for (std::size_t j = 0; j <= n; ++j) {
        std::string w = word;
        w.insert(w.begin() + static_cast<std::ptrdiff_t>(j),
                 kLetters[rng.Below(kLetters.size())]);
        out.push_back(std::move(w));
      }
      break;
    case TransformationKind::kHomoglyph:
      for (std::size_t j = 0; j < n; ++j) {
        if (const auto g = Homoglyph(word[j])) {
          std::string w = word;
          w[j] = *g;
          out.push_back(std::move(w));
        }
      }
      break;
  }
  std::erase_if(out, [&](const std::string& w) {
    return !ValidReplacement(w, word);
  });
  return out;
}

Sentence Replace(const Sentence& x, std::size_t index, std::string word) {
  std::vector<std::string> tokens = x.tokens();
  tokens[index] = std::move(word);
  return Sentence::FromTokens(std::move(tokens));
}

}  // namespace

std::string TransformationKindName(TransformationKind kind) {
  switch (kind) {
    case TransformationKind::kCharSwap:
      return "char_swap";
    case TransformationKind::kCharSub:
      return "char_sub";
    case TransformationKind::kCharDelete:
      return "char_delete";
    case TransformationKind::kCharInsert:
      return "char_insert";
    case TransformationKind::kHomoglyph:
      return "homoglyph";
  }
  return "unknown";
}

std::vector<TransformationKind> DeepWordBugKinds() {
  return {TransformationKind::kCharSwap, TransformationKind::kCharSub,
          TransformationKind::kCharDelete, TransformationKind::kCharInsert};
}

std::vector<TransformationKind> TextBuggerKinds() {
  auto kinds = DeepWordBugKinds();
  kinds.push_back(TransformationKind::kHomoglyph);
  return kinds;
}

std::vector<TransformationKind> AttackKindsByName(const std::string& name) {
  if (name == "deepwordbug") return DeepWordBugKinds();
  if (name == "textbugger") return TextBuggerKinds();
  throw InvalidArgument("unknown attack '" + name +
                        "' (expected deepwordbug or textbugger)");
}

std::optional<char> Homoglyph(char c) {
  switch (c) {
    case 'a': return '@';
    case 'b': return '6';
    case 'e': return '3';
    case 'g': return '9';
    case 'i': return '1';
    case 'l': return '1';
    case 'o': return '0';
    case 's': return '$';
    case 't': return '7';
    case 'z': return '2';
    case 'A': return '4';
    case 'B': return '8';
    case 'E': return '3';
    case 'I': return 'l';
    case 'O': return '0';
    case 'S': return '5';
    default: return std::nullopt;
  }
}

void AttackBudget::Validate() const {
  if (max_word_fraction.basis_points() == 0) {
    throw InvalidArgument("attack word fraction must lie in (0, 1]");
  }
  if (queries_cap < 1) throw InvalidArgument("queries_cap must be >= 1");
}

BaseVictim::BaseVictim(std::shared_ptr<ClassifierBackend> classifier)
    : classifier_(std::move(classifier)) {
  if (!classifier_) throw InvalidArgument("victim needs a classifier");
}

double BaseVictim::VoteFraction(const Sentence& x, LabelId label) {
  return classifier_->Classify(x.Detokenize()) == label ? 1.0 : 0.0;
}

LabelId BaseVictim::Predict(const Sentence& x) {
  return classifier_->Classify(x.Detokenize());
}

SmoothedVictim::SmoothedVictim(const SmoothedClassifier& smoothed,
                               std::uint64_t search_samples)
    : search_([&] {
        SmoothingConfig c = smoothed.config();
        c.n_samples = search_samples;
        return smoothed.WithConfig(c);
      }()),
      verdict_(smoothed) {}

double SmoothedVictim::VoteFraction(const Sentence& x, LabelId label) {
  const VoteCounts counts = search_.Tally(x, search_.config().n_samples);
  return static_cast<double>(counts.Count(label)) /
         static_cast<double>(counts.n);
}

LabelId SmoothedVictim::Predict(const Sentence& x) {
  return verdict_.Predict(x).label.value_or(kInvalidLabel);
}

std::vector<std::size_t> RankWordImportance(const Sentence& x, LabelId truth,
                                            Victim& victim,
                                            std::uint64_t* queries) {
  std::vector<std::size_t> order(x.length());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (x.length() == 1) return order;

  std::uint64_t used = 1;
  const double base = victim.VoteFraction(x, truth);
  std::vector<double> drop(x.length(), 0.0);
  for (std::size_t i = 0; i < x.length(); ++i) {
    std::vector<std::string> tokens = x.tokens();
    tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i));
    drop[i] = base - victim.VoteFraction(Sentence::FromTokens(tokens), truth);
    ++used;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return drop[a] > drop[b];
  });
  if (queries != nullptr) *queries += used;
  return order;
}

AttackResult Attack(const Sentence& x, LabelId truth, Victim& victim,
                    const AttackBudget& budget,
                    const std::vector<TransformationKind>& kinds,
                    std::uint64_t seed) {
  budget.Validate();
  AttackResult result;
  RngStream rng(seed);
  Sentence current = x;
  result.original_label = victim.Predict(x);
  result.queries_used = 1;
  double current_fraction = victim.VoteFraction(x, truth);
  ++result.queries_used;

  const std::vector<std::size_t> order =
      RankWordImportance(x, truth, victim, &result.queries_used);
  const std::size_t word_budget = budget.WordBudget(x.length());

  bool flipped = false;
  for (const std::size_t index : order) {
    if (result.words_changed >= word_budget || flipped ||
        result.query_cap_hit) {
      break;
    }
    std::optional<AttackStep> best;
    for (const TransformationKind kind : kinds) {
      for (std::string& candidate : Candidates(current[index], kind, rng)) {
        if (result.queries_used >= budget.queries_cap) {
          result.query_cap_hit = true;
          break;
        }
        const double fraction =
            victim.VoteFraction(Replace(current, index, candidate), truth);
        ++result.queries_used;
        if (!best || fraction < best->vote_fraction) {
          best = AttackStep{index, kind, current[index], std::move(candidate),
                            fraction};
        }
      }
      if (result.query_cap_hit) break;
    }
    if (result.query_cap_hit || !best ||
        best->vote_fraction > current_fraction) {
      continue;
    }
    current = Replace(current, index, best->after);
    current_fraction = best->vote_fraction;
    result.steps.push_back(*best);
    ++result.words_changed;
    if (result.queries_used < budget.queries_cap) {
      flipped = victim.Predict(current) != truth;
      ++result.queries_used;
    }
  }

  result.adversarial_text = current.Detokenize();
  result.final_label = victim.Predict(current);
  result.success = !result.query_cap_hit && result.final_label != truth;
  return result;
}

AttackResult AttackExample(const LabeledSentence& example, Victim& victim,
                           const AttackBudget& budget,
                           const std::vector<TransformationKind>& kinds,
                           std::uint64_t example_seed) {
  AttackResult result;
  result.original_label = victim.Predict(example.sentence);
  if (result.original_label != example.label) {
    result.adversarial_text = example.sentence.Detokenize();
    result.final_label = result.original_label;
    result.queries_used = 1;
    return result;
  }
  return Attack(example.sentence, example.label, victim, budget, kinds,
                example_seed);
}

RobustnessReport EmpiricalRobustAccuracy(
    const std::vector<LabeledSentence>& dataset, Victim& victim,
    const AttackBudget& budget, const std::vector<TransformationKind>& kinds,
    std::uint64_t seed) {
  RobustnessReport report;
  if (dataset.empty()) return report;
  std::size_t robust = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    AttackResult result = AttackExample(dataset[i], victim, budget, kinds,
                                        ExampleSeed(seed, i));
    if (result.final_label == dataset[i].label) ++robust;
    report.results.push_back(std::move(result));
  }
  report.accuracy =
      static_cast<double>(robust) / static_cast<double>(dataset.size());
  return report;
}

nlohmann::json AttackTranscriptToJson(const std::string& id,
                                      const AttackResult& result,
                                      const LabelSpace& labels) {
  nlohmann::json steps = nlohmann::json::array();
  for (const AttackStep& step : result.steps) {
    steps.push_back({{"word_idx", step.word_index},
                     {"kind", TransformationKindName(step.kind)},
                     {"before", step.before},
                     {"after", step.after},
                     {"vote_fraction", step.vote_fraction}});
  }
  return {{"id", id},
          {"steps", std::move(steps)},
          {"result",
           {{"success", result.success},
            {"query_cap_hit", result.query_cap_hit},
            {"adversarial_text", result.adversarial_text},
            {"words_changed", result.words_changed},
            {"queries_used", result.queries_used},
            {"original_label", labels.Name(result.original_label)},
            {"final_label", labels.Name(result.final_label)}}}};
}

std::size_t WordDiff(const Sentence& a, const Sentence& b) {
  const std::size_t common = std::min(a.length(), b.length());
  std::size_t diff = std::max(a.length(), b.length()) - common;
  for (std::size_t i = 0; i < common; ++i) {
    if (a[i] != b[i]) ++diff;
  }
  return diff;
}

}  // namespace maskcert
