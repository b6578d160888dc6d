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

#include "maskcert/smoothing.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "maskcert/errors.hpp"

namespace maskcert {
namespace {

// Runs fn(i) for i in [0, n) on up to `concurrency` threads. The first
// exception stops the remaining work and is rethrown.
template <typename Fn>
void ParallelFor(std::uint64_t n, int concurrency, Fn&& fn) {
  if (concurrency <= 1 || n <= 1) {
    for (std::uint64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto workers = static_cast<std::uint64_t>(concurrency) < n
                           ? static_cast<std::uint64_t>(concurrency)
                           : n;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::uint64_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (!stop.load()) {
          const std::uint64_t i = next.fetch_add(1);
          if (i >= n) return;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            stop = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

void SmoothingConfig::Validate() const {
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("alpha must lie in (0, 1)");
  }
  for (std::size_t i = 0; i < eval_grid.size(); ++i) {
    if (eval_grid[i].basis_points() == 0) {
      throw InvalidArgument("evaluation grid values must lie in (0, 1]");
    }
    if (i > 0 && !(eval_grid[i - 1] < eval_grid[i])) {
      throw InvalidArgument("evaluation grid must be strictly increasing");
    }
  }
  if (max_concurrency < 1) throw InvalidArgument("max_concurrency must be >= 1");
  if (sample_retries < 0) throw InvalidArgument("sample_retries must be >= 0");
}

Rational ExactDistribution::Probability(LabelId label) const {
  const std::uint64_t count =
      label < 0 ? invalid : per_label.at(static_cast<std::size_t>(label));
  return Rational(BigInt(count), BigInt(total));
}

std::optional<LabelId> ExactDistribution::StrictArgmax() const {
  const auto best = std::max_element(per_label.begin(), per_label.end());
  if (best == per_label.end() || *best == 0) return std::nullopt;
  if (std::count(per_label.begin(), per_label.end(), *best) > 1) {
    return std::nullopt;
  }
  return static_cast<LabelId>(best - per_label.begin());
}

SmoothedClassifier::SmoothedClassifier(
    std::shared_ptr<ClassifierBackend> classifier,
    std::optional<Denoiser> denoiser, SmoothingConfig config)
    : classifier_(std::move(classifier)),
      denoiser_(std::move(denoiser)),
      config_(std::move(config)) {
  if (!classifier_) throw InvalidArgument("smoothing needs a classifier");
  config_.Validate();
}

SmoothedClassifier SmoothedClassifier::WithConfig(SmoothingConfig config) const {
  return SmoothedClassifier(classifier_, denoiser_, std::move(config));
}

MaskSet SmoothedClassifier::DrawMaskSet(std::size_t length,
                                        std::uint64_t index) const {
  RngStream stream = RngStream::Substream(config_.seed, index);
  return SampleMaskSet(length, MaskCount(length, config_.mask_rate), stream);
}

LabelId SmoothedClassifier::Evaluate(const MaskedSentence& masked) const {
  const std::string text =
      denoiser_ ? denoiser_->Denoise(masked) : masked.Detokenize();
  return classifier_->Classify(text);
}

LabelId SmoothedClassifier::EvaluateWithRetry(
    const MaskedSentence& masked) const {
  for (int attempt = 0;; ++attempt) {
    try {
      return Evaluate(masked);
    } catch (const BackendUnavailable&) {
      if (attempt >= config_.sample_retries) throw;
    }
  }
}

LabelId SmoothedClassifier::SampleVote(const Sentence& x,
                                       std::uint64_t index) const {
  return EvaluateWithRetry(ApplyMask(x, DrawMaskSet(x.length(), index)));
}

VoteCounts SmoothedClassifier::Tally(const Sentence& x, std::uint64_t n) const {
  // Draw every mask set before dispatch so scheduling cannot change them.
  std::vector<MaskSet> draws;
  draws.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) draws.push_back(DrawMaskSet(x.length(), i));

  std::vector<LabelId> votes(n, kInvalidLabel);
  ParallelFor(n, config_.max_concurrency, [&](std::uint64_t i) {
    votes[i] = EvaluateWithRetry(ApplyMask(x, draws[i]));
  });

  VoteCounts counts;
  counts.per_label.assign(labels().size(), 0);
  counts.n = n;
  for (const LabelId vote : votes) {
    if (vote < 0 || static_cast<std::size_t>(vote) >= labels().size()) {
      ++counts.invalid;
    } else {
      ++counts.per_label[static_cast<std::size_t>(vote)];
    }
  }
  return counts;
}

PredictionResult SmoothedClassifier::Predict(const Sentence& x) const {
  PredictionResult result;
  result.counts = Tally(x, config_.n_samples);
  const auto& per_label = result.counts.per_label;
  const auto top = std::max_element(per_label.begin(), per_label.end());
  const std::uint64_t top_count = *top;
  result.p_value = BinomialTestPValue(top_count, result.counts.n);
  const bool tied = std::count(per_label.begin(), per_label.end(), top_count) > 1;
  if (!tied && top_count > 0 && result.p_value <= ToRational(config_.alpha)) {
    result.label = static_cast<LabelId>(top - per_label.begin());
  }
  return result;
}

CertifyResult SmoothedClassifier::Certify(const Sentence& x,
                                          LabelId truth) const {
  if (truth < 0 || static_cast<std::size_t>(truth) >= labels().size()) {
    throw InvalidArgument("ground-truth label outside the label space");
  }
  CertifyResult r;
  r.counts = Tally(x, config_.n_samples);
  r.label = truth;
  r.count = r.counts.Count(truth);
  r.n = r.counts.n;
  r.p_lower = ClopperPearsonLower(r.count, {config_.alpha, r.n});
  r.length = x.length();
  r.masked = MaskCount(x.length(), config_.mask_rate);
  r.mask_rate = config_.mask_rate;
  r.beta_mode = config_.beta_mode;
  r.seed = config_.seed;
  const Rational p_lower = ToRational(r.p_lower);
  r.condition_table =
      ConditionTable(p_lower, config_.beta_mode, r.length, r.masked);
  r.rho_max = MaxCertifiedRho(p_lower, config_.beta_mode, r.length, r.masked);
  r.d_max = RhoToPercentRadius(r.rho_max, r.length, config_.eval_grid);
  return r;
}

ExactDistribution SmoothedClassifier::ExactSmooth(const Sentence& x) const {
  const std::size_t k = MaskCount(x.length(), config_.mask_rate);
  const MaskSetRange range =
      EnumerateMaskSets(x.length(), k, config_.enumeration_cap);
  std::vector<MaskSet> sets(range.begin(), range.end());

  std::vector<LabelId> votes(sets.size(), kInvalidLabel);
  ParallelFor(sets.size(), config_.max_concurrency, [&](std::uint64_t i) {
    votes[i] = EvaluateWithRetry(ApplyMask(x, sets[i]));
  });

  ExactDistribution dist;
  dist.per_label.assign(labels().size(), 0);
  dist.total = sets.size();
  for (const LabelId vote : votes) {
    if (vote < 0 || static_cast<std::size_t>(vote) >= labels().size()) {
      ++dist.invalid;
    } else {
      ++dist.per_label[static_cast<std::size_t>(vote)];
    }
  }
  return dist;
}

ExactCertificate SmoothedClassifier::ExactCertify(const Sentence& x,
                                                  LabelId truth) const {
  const ExactDistribution dist = ExactSmooth(x);
  ExactCertificate cert;
  cert.label = truth;
  cert.p = dist.Probability(truth);
  cert.rho_max =
      MaxCertifiedRho(cert.p, config_.beta_mode, x.length(),
                      MaskCount(x.length(), config_.mask_rate));
  return cert;
}

SoundnessReport SmoothedClassifier::ExactSoundnessCheck(
    const Sentence& x, LabelId truth,
    const std::vector<std::string>& vocabulary) const {
  SoundnessReport report;
  report.rho_max = ExactCertify(x, truth).rho_max;
  if (!report.rho_max) return report;

  const std::size_t length = x.length();
  for (std::size_t distance = 0; distance <= *report.rho_max; ++distance) {
    for (const MaskSet& positions :
         EnumerateMaskSets(length, distance, config_.enumeration_cap)) {
      // Replacement candidates per chosen position: vocabulary words that
      // differ from the original token.
      std::vector<std::vector<const std::string*>> options;
      bool feasible = true;
      for (const std::size_t i : positions.indices()) {
        std::vector<const std::string*> words;
        for (const std::string& w : vocabulary) {
          if (w != x[i]) words.push_back(&w);
        }
        if (words.empty()) feasible = false;
        options.push_back(std::move(words));
      }
      if (!feasible) continue;

      std::vector<std::size_t> odometer(options.size(), 0);
      while (true) {
        std::vector<std::string> tokens = x.tokens();
        for (std::size_t j = 0; j < options.size(); ++j) {
          tokens[positions.indices()[j]] = *options[j][odometer[j]];
        }
        const Sentence neighbour = Sentence::FromTokens(std::move(tokens));
        ++report.checked;
        if (ExactSmooth(neighbour).StrictArgmax() != truth) {
          report.counterexamples.push_back(neighbour.Detokenize());
        }
        std::size_t j = 0;
        while (j < odometer.size() && ++odometer[j] == options[j].size()) {
          odometer[j] = 0;
          ++j;
        }
        if (j == odometer.size()) break;
      }
    }
  }
  return report;
}

nlohmann::json CertifyRecordToJson(const std::string& id,
                                   const CertifyResult& result,
                                   const LabelSpace& labels) {
  nlohmann::json record = {{"id", id},
                           {"label", labels.Name(result.label)},
                           {"count_y", result.count},
                           {"n", result.n},
                           {"p_lower", result.p_lower},
                           {"m", result.mask_rate.fraction()},
                           {"beta_mode", BetaModeName(result.beta_mode)},
                           {"seed", result.seed}};
  record["rho_max"] = result.rho_max ? nlohmann::json(*result.rho_max)
                                     : nlohmann::json(nullptr);
  record["d_max"] = result.d_max ? nlohmann::json(result.d_max->fraction())
                                 : nlohmann::json(nullptr);
  return record;
}

}  // namespace maskcert
