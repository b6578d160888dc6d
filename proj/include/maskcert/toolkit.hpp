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
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskcert/attacks.hpp"
#include "maskcert/backends.hpp"
#include "maskcert/cache.hpp"
#include "maskcert/config.hpp"
#include "maskcert/evaluation.hpp"
#include "maskcert/http_backend.hpp"
#include "maskcert/smoothing.hpp"

namespace maskcert {

// Evaluation methods: "base" (the classifier alone), "ranmask" (smoothing
// without a denoiser) and "self-denoise" (smoothing with the configured
// denoising strategy).
inline constexpr const char* kMethodBase = "base";
inline constexpr const char* kMethodRanMask = "ranmask";
inline constexpr const char* kMethodSelfDenoise = "self-denoise";

class Error;

// Errors that skip a single example (backend failures, unusable text) rather
// than abort a run.
bool IsExampleFailure(const Error& e);

// Backends, cache and smoothed classifiers assembled from a config.
class Toolkit {
 public:
  // Throws ConfigError for an inconsistent config, CacheError when the
  // cache cannot be opened.
  explicit Toolkit(ToolkitConfig config);

  const ToolkitConfig& config() const { return config_; }
  const LabelSpace& labels() const { return config_.labels; }
  std::shared_ptr<ClassifierBackend> classifier() const { return classifier_; }
  std::shared_ptr<GenerationBackend> generator() const { return generator_; }
  const std::shared_ptr<ResponseCache>& cache() const { return cache_; }
  // Null unless the backend kind is "http".
  const std::shared_ptr<HttpGenerationBackend>& http() const { return http_; }

  // The denoiser "self-denoise" uses at mask rate m.
  Denoiser DenoiserFor(Rate mask_rate) const;

  // Throws ConfigError for "base" or an unknown method.
  SmoothedClassifier Smoothed(const std::string& method,
                              const SmoothingConfig& smoothing) const;
  SmoothedClassifier Smoothed(const std::string& method, Rate mask_rate) const;

  // BaseVictim for "base"; otherwise a SmoothedVictim at the attack mask rate.
  std::unique_ptr<Victim> VictimFor(const std::string& method) const;

  std::vector<std::string> TemplateKeys() const;

 private:
  ToolkitConfig config_;
  std::shared_ptr<ResponseCache> cache_;
  std::shared_ptr<HttpGenerationBackend> http_;
  std::shared_ptr<GenerationBackend> generator_;
  std::shared_ptr<ClassifierBackend> classifier_;
};

struct EvaluationRun {
  EvaluationSummary summary;
  // Certification records per method (test examples at m*(d) for each
  // distinct m*).
  std::map<std::string, std::vector<nlohmann::json>> certify_records;
  // Attack transcripts per "method/attack".
  std::map<std::string, std::vector<nlohmann::json>> attack_transcripts;
  // One line per example that could not be processed.
  std::vector<std::string> failures;
};

// The full experiment: for each certified method, sweep the mask-rate grid on
// the validation examples, certify the test examples at the selected m*(d)
// and trace certified accuracy over the scales; for each empirical method,
// clean and attacked accuracy per attack mode. Examples whose backend calls
// fail, or whose text is unusable, are skipped, recorded in `failures` and
// counted in summary.examples_failed; accuracies are over the remaining
// examples.
EvaluationRun RunEvaluation(const Toolkit& toolkit,
                            const std::vector<DatasetRecord>& validation,
                            const std::vector<DatasetRecord>& test);

// Writes the report files plus per-method JSON lines (certify_<method>.jsonl,
// attacks_<method>_<attack>.jsonl) and failures.txt. Returns kEmpty when the
// summary is empty.
ReportStatus WriteEvaluation(const EvaluationRun& run,
                             const std::filesystem::path& directory);

// {command, config_hash, seed, templates, config}
nlohmann::json Manifest(const ToolkitConfig& config, const std::string& command);
void WriteManifest(const ToolkitConfig& config, const std::string& command,
                   const std::filesystem::path& directory);

void WriteJsonLines(const std::vector<nlohmann::json>& rows,
                    const std::filesystem::path& path);

}  // namespace maskcert
