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
#include "maskcert/cert_math.hpp"
#include "maskcert/denoisers.hpp"
#include "maskcert/text.hpp"

namespace maskcert {

struct SmoothingConfig {
  Rate mask_rate = Rate::FromPercent(50);
  std::uint64_t n_samples = 500;
  double alpha = 0.05;
  BetaMode beta_mode = BetaMode::kOne;
  std::uint64_t seed = 0;
  std::vector<Rate> eval_grid = DefaultScaleGrid();
  // Pipeline evaluations in flight at once.
  int max_concurrency = 1;
  // Extra attempts for a sample whose backend call is unavailable; the run
  // aborts once they are spent.
  int sample_retries = 1;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;

  // Throws InvalidArgument.
  void Validate() const;
};

struct VoteCounts {
  std::vector<std::uint64_t> per_label;
  std::uint64_t invalid = 0;
  std::uint64_t n = 0;

  std::uint64_t Count(LabelId label) const {
    return label < 0 ? invalid : per_label.at(static_cast<std::size_t>(label));
  }
  friend bool operator==(const VoteCounts&, const VoteCounts&) = default;
};

struct PredictionResult {
  std::optional<LabelId> label;  // nullopt: abstain
  VoteCounts counts;
  Rational p_value;  // one-sided binomial test of the top label against 1/2
};

struct CertifyResult {
  LabelId label = 0;
  std::uint64_t count = 0;  // votes for `label`
  std::uint64_t n = 0;
  double p_lower = 0.0;
  std::size_t length = 0;
  std::size_t masked = 0;
  Rate mask_rate;
  BetaMode beta_mode = BetaMode::kOne;
  std::uint64_t seed = 0;
  std::optional<std::size_t> rho_max;
  std::optional<Rate> d_max;
  std::vector<ConditionRow> condition_table;
  VoteCounts counts;

  bool certified() const { return rho_max.has_value(); }
  friend bool operator==(const CertifyResult&, const CertifyResult&) = default;
};

struct ExactDistribution {
  std::vector<std::uint64_t> per_label;
  std::uint64_t invalid = 0;
  std::uint64_t total = 0;  // C(L, k)

  Rational Probability(LabelId label) const;
  // The unique most likely label; nullopt on a tie or when every vote is
  // invalid.
  std::optional<LabelId> StrictArgmax() const;
};

struct ExactCertificate {
  LabelId label = 0;
  Rational p;
  std::optional<std::size_t> rho_max;
};

struct SoundnessReport {
  std::optional<std::size_t> rho_max;
  std::uint64_t checked = 0;  // neighbours x' examined, x itself included
  std::vector<std::string> counterexamples;
  bool passed() const { return counterexamples.empty(); }
};

// The smoothed classifier: mask, denoise, classify, then vote. Without a
// denoiser the masked text goes straight to the classifier.
class SmoothedClassifier {
 public:
  SmoothedClassifier(std::shared_ptr<ClassifierBackend> classifier,
                     std::optional<Denoiser> denoiser, SmoothingConfig config);

  const SmoothingConfig& config() const { return config_; }
  const LabelSpace& labels() const { return classifier_->labels(); }
  const std::optional<Denoiser>& denoiser() const { return denoiser_; }

  // The mask set of draw `index`, a pure function of (seed, index).
  MaskSet DrawMaskSet(std::size_t length, std::uint64_t index) const;

  // f(D(M(x, s))) for a given mask set.
  LabelId Evaluate(const MaskedSentence& masked) const;

  // One Monte Carlo vote: Evaluate on draw `index`.
  LabelId SampleVote(const Sentence& x, std::uint64_t index) const;

  // Votes over draws [0, n) for the configured seed.
  VoteCounts Tally(const Sentence& x, std::uint64_t n) const;

  PredictionResult Predict(const Sentence& x) const;
  CertifyResult Certify(const Sentence& x, LabelId truth) const;

  // Throws EnumerationTooLarge when C(L, k) exceeds the cap.
  ExactDistribution ExactSmooth(const Sentence& x) const;
  ExactCertificate ExactCertify(const Sentence& x, LabelId truth) const;

  // Certifies x with exact probabilities, then checks the smoothed argmax of
  // every sentence within Hamming distance rho_max built from `vocabulary`.
  SoundnessReport ExactSoundnessCheck(
      const Sentence& x, LabelId truth,
      const std::vector<std::string>& vocabulary) const;

  // A copy with a different configuration and the same backends.
  SmoothedClassifier WithConfig(SmoothingConfig config) const;

 private:
  LabelId EvaluateWithRetry(const MaskedSentence& masked) const;

  std::shared_ptr<ClassifierBackend> classifier_;
  std::optional<Denoiser> denoiser_;
  SmoothingConfig config_;
};

// {id, label, count_y, n, p_lower, rho_max, d_max, m, beta_mode, seed}
nlohmann::json CertifyRecordToJson(const std::string& id,
                                   const CertifyResult& result,
                                   const LabelSpace& labels);

}  // namespace maskcert
