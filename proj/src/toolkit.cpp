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

#include "maskcert/toolkit.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "maskcert/errors.hpp"
#include "maskcert/rng.hpp"

namespace maskcert {
namespace {

using nlohmann::json;

// Salts for the seeded subsets drawn from the run seed.
constexpr std::uint64_t kValidationSubsetStream = 1;
constexpr std::uint64_t kCertifySubsetStream = 2;
constexpr std::uint64_t kAttackSubsetStream = 3;

std::uint64_t SubsetSeed(std::uint64_t seed, std::uint64_t stream) {
  return RngStream::Substream(seed, stream).Next();
}

class FailureLog {
 public:
  explicit FailureLog(EvaluationRun& run) : run_(run) {}

  void Record(const std::string& phase, const std::string& id,
              const std::string& what) {
    run_.failures.push_back(phase + "\t" + id + "\t" + what);
    ids_.insert(id);
  }
  std::uint64_t distinct() const { return ids_.size(); }

 private:
  EvaluationRun& run_;
  std::set<std::string> ids_;
};

struct Example {
  std::string id;
  std::optional<LabeledSentence> labeled;  // nullopt: text unusable
  std::string error;
};

std::vector<Example> Prepare(const std::vector<DatasetRecord>& records,
                             const LabelSpace& labels) {
  std::vector<Example> out;
  out.reserve(records.size());
  for (const DatasetRecord& r : records) {
    Example e{r.id, std::nullopt, {}};
    try {
      e.labeled = LabeledSentence{r.id, Tokenize(r.text), labels.Require(r.label)};
    } catch (const Error& err) {
      if (!IsExampleFailure(err)) throw;
      e.error = err.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

double Fraction(std::size_t hits, std::size_t total) {
  return total == 0 ? 0.0
                    : static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

bool IsExampleFailure(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kBackendUnavailable:
    case ErrorCode::kBackendProtocolError:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kReservedToken:
      return true;
    default:
      return false;
  }
}

Toolkit::Toolkit(ToolkitConfig config) : config_(std::move(config)) {
  if (config_.cache_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*config_.cache_dir, ec);
    if (ec) {
      throw CacheError("cannot create cache directory " +
                       config_.cache_dir->string() + ": " + ec.message());
    }
    cache_ = ResponseCache::Open(*config_.cache_dir / "responses.jsonl");
  } else {
    cache_ = ResponseCache::InMemory();
  }

  const BackendSettings& b = config_.backend;
  std::shared_ptr<GenerationBackend> raw;
  if (b.kind == "http") {
    EndpointConfig endpoint = b.endpoint;
    endpoint.ApplyEnvironment();
    endpoint.Validate();
    http_ = std::make_shared<HttpGenerationBackend>(endpoint);
    raw = http_;
  } else {
    raw = std::make_shared<MaskFillerBackend>(b.filler_word);
  }
  generator_ = std::make_shared<CachedGenerationBackend>(raw, cache_);

  if (b.kind == "http") {
    classifier_ = std::make_shared<PromptClassifier>(
        generator_, config_.classify_template, config_.labels);
  } else if (b.kind == "keyword") {
    const auto require = [&](const std::string& label) {
      if (!config_.labels.Find(label)) {
        throw ConfigError("backend label '" + label + "' is not a task label");
      }
      return *config_.labels.Find(label);
    };
    std::vector<KeywordRule> rules;
    for (const auto& [word, label] : b.keywords) {
      rules.push_back({word, require(label)});
    }
    classifier_ = std::make_shared<KeywordClassifier>(config_.labels, rules);
  } else if (b.kind == "constant") {
    if (b.constant_label.empty()) {
      throw ConfigError("constant backend needs backend.constant_label");
    }
    const auto id = config_.labels.Find(b.constant_label);
    if (!id) {
      throw ConfigError("backend label '" + b.constant_label +
                        "' is not a task label");
    }
    classifier_ = std::make_shared<ConstantClassifier>(config_.labels, *id);
  } else {
    throw ConfigError("unknown backend kind '" + b.kind + "'");
  }
}

Denoiser Toolkit::DenoiserFor(Rate mask_rate) const {
  StrategyPolicy policy;
  policy.removal_threshold = config_.removal_threshold;
  if (config_.denoiser == "none") {
    policy.forced = DenoiserKind::kIdentity;
  } else if (config_.denoiser != "auto") {
    policy.forced = ParseDenoiserKind(config_.denoiser);
  }
  switch (SelectStrategy(mask_rate, policy)) {
    case DenoiserKind::kLlmFill:
      return Denoiser::LlmFill({generator_, config_.denoise_template, std::nullopt});
    case DenoiserKind::kRemoveMask:
      return Denoiser::RemoveMask();
    case DenoiserKind::kIdentity:
      return Denoiser::Identity();
  }
  throw ConfigError("unhandled denoiser kind");
}

SmoothedClassifier Toolkit::Smoothed(const std::string& method,
                                     const SmoothingConfig& smoothing) const {
  if (method == kMethodRanMask) {
    return SmoothedClassifier(classifier_, std::nullopt, smoothing);
  }
  if (method == kMethodSelfDenoise) {
    return SmoothedClassifier(classifier_, DenoiserFor(smoothing.mask_rate),
                              smoothing);
  }
  throw ConfigError("method '" + method + "' has no smoothed classifier");
}

SmoothedClassifier Toolkit::Smoothed(const std::string& method,
                                     Rate mask_rate) const {
  SmoothingConfig smoothing = config_.smoothing;
  smoothing.mask_rate = mask_rate;
  return Smoothed(method, smoothing);
}

std::unique_ptr<Victim> Toolkit::VictimFor(const std::string& method) const {
  if (method == kMethodBase) return std::make_unique<BaseVictim>(classifier_);
  return std::make_unique<SmoothedVictim>(
      Smoothed(method, config_.attack.mask_rate), config_.attack.search_samples);
}

std::vector<std::string> Toolkit::TemplateKeys() const {
  return {config_.classify_template.Key(), config_.denoise_template.Key()};
}

EvaluationRun RunEvaluation(const Toolkit& toolkit,
                            const std::vector<DatasetRecord>& validation,
                            const std::vector<DatasetRecord>& test) {
  const ToolkitConfig& config = toolkit.config();
  const std::uint64_t seed = config.smoothing.seed;
  const LabelSpace& labels = toolkit.labels();
  EvaluationRun run;
  FailureLog failures(run);

  const std::vector<Example> val_examples =
      Prepare(SampleSubset(validation, config.evaluation.certify_examples,
                           SubsetSeed(seed, kValidationSubsetStream)),
              labels);
  const std::vector<Example> cert_examples =
      Prepare(SampleSubset(test, config.evaluation.certify_examples,
                           SubsetSeed(seed, kCertifySubsetStream)),
              labels);
  const std::vector<Example> attack_examples =
      Prepare(SampleSubset(test, config.evaluation.attack_examples,
                           SubsetSeed(seed, kAttackSubsetStream)),
              labels);
  for (const auto* set : {&val_examples, &cert_examples, &attack_examples}) {
    for (const Example& e : *set) {
      if (!e.labeled) failures.Record("load", e.id, e.error);
    }
  }

  // Radii are reported on the sweep scales.
  SmoothingConfig smoothing = config.smoothing;
  smoothing.eval_grid = config.sweep_scales;

  for (const std::string& method : config.evaluation.certified_methods) {
    // Certifies every usable example at mask rate m; failed examples are
    // dropped from the returned radii.
    const auto radii_at = [&](const std::vector<Example>& examples, Rate m,
                              const std::string& phase,
                              std::vector<json>* records) {
      SmoothingConfig at = smoothing;
      at.mask_rate = m;
      const SmoothedClassifier smoothed = toolkit.Smoothed(method, at);
      std::vector<std::optional<Rate>> radii;
      for (const Example& e : examples) {
        if (!e.labeled) continue;
        try {
          const CertifyResult r =
              smoothed.Certify(e.labeled->sentence, e.labeled->label);
          radii.push_back(r.d_max);
          if (records) records->push_back(CertifyRecordToJson(e.id, r, labels));
        } catch (const Error& err) {
          if (!IsExampleFailure(err)) throw;
          failures.Record(phase + ":" + method, e.id, err.what());
        }
      }
      return radii;
    };

    const SweepResult sweep = MaskRateSweep(
        config.sweep_grid, config.sweep_scales, [&](Rate m) {
          return radii_at(val_examples, m, "sweep", nullptr);
        });
    run.summary.best_mask_rate[method] = sweep.best_mask_rate;

    std::map<Rate, std::vector<std::optional<Rate>>> test_radii;
    for (const Rate d : config.sweep_scales) {
      const Rate m = sweep.best_mask_rate.at(d);
      auto it = test_radii.find(m);
      if (it == test_radii.end()) {
        it = test_radii
                 .emplace(m, radii_at(cert_examples, m, "certify",
                                      &run.certify_records[method]))
                 .first;
      }
      run.summary.certified_curve.push_back(
          {method, d, CertifiedAccuracy(it->second, d)});
    }
  }

  const AttackBudget budget{config.attack.max_word_fraction,
                            config.attack.queries_cap};
  for (const std::string& method : config.evaluation.empirical_methods) {
    const std::unique_ptr<Victim> victim = toolkit.VictimFor(method);
    MethodMetrics& metrics = run.summary.methods[method];
    std::optional<std::pair<std::size_t, std::size_t>> clean;  // hits, total

    for (const std::string& mode : config.attack.modes) {
      const std::vector<TransformationKind> kinds = AttackKindsByName(mode);
      std::vector<json>& transcripts =
          run.attack_transcripts[method + "/" + mode];
      std::size_t robust = 0, clean_hits = 0, total = 0;
      for (std::size_t i = 0; i < attack_examples.size(); ++i) {
        const Example& e = attack_examples[i];
        if (!e.labeled) continue;
        try {
          const AttackResult r = AttackExample(*e.labeled, *victim, budget,
                                               kinds, ExampleSeed(seed, i));
          ++total;
          if (r.original_label == e.labeled->label) ++clean_hits;
          if (r.final_label == e.labeled->label) ++robust;
          transcripts.push_back(AttackTranscriptToJson(e.id, r, labels));
        } catch (const Error& err) {
          if (!IsExampleFailure(err)) throw;
          failures.Record("attack:" + method + "/" + mode, e.id, err.what());
        }
      }
      metrics.empirical_robust_accuracy[mode] = Fraction(robust, total);
      if (!clean) clean.emplace(clean_hits, total);
    }

    if (!clean) {
      std::size_t hits = 0, total = 0;
      for (const Example& e : attack_examples) {
        if (!e.labeled) continue;
        try {
          hits += victim->Predict(e.labeled->sentence) == e.labeled->label;
          ++total;
        } catch (const Error& err) {
          if (!IsExampleFailure(err)) throw;
          failures.Record("clean:" + method, e.id, err.what());
        }
      }
      clean.emplace(hits, total);
    }
    metrics.clean_accuracy = Fraction(clean->first, clean->second);
  }

  run.summary.examples_failed = failures.distinct();
  return run;
}

void WriteJsonLines(const std::vector<json>& rows,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const json& row : rows) out << row.dump() << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

ReportStatus WriteEvaluation(const EvaluationRun& run,
                             const std::filesystem::path& directory) {
  const ReportStatus status = EmitReport(run.summary, directory);
  for (const auto& [method, rows] : run.certify_records) {
    WriteJsonLines(rows, directory / ("certify_" + method + ".jsonl"));
  }
  for (const auto& [key, rows] : run.attack_transcripts) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '/', '_');
    WriteJsonLines(rows, directory / ("attacks_" + name + ".jsonl"));
  }
  std::ofstream out(directory / "failures.txt", std::ios::trunc);
  if (!out) throw IoError("cannot write failures.txt");
  for (const std::string& line : run.failures) out << line << '\n';
  return status;
}

json Manifest(const ToolkitConfig& config, const std::string& command) {
  return {{"command", command},
          {"config_hash", config.Hash()},
          {"seed", config.smoothing.seed},
          {"templates",
           {config.classify_template.Key(), config.denoise_template.Key()}},
          {"config", config.ToJson()}};
}

void WriteManifest(const ToolkitConfig& config, const std::string& command,
                   const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());
  std::ofstream out(directory / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in " + directory.string());
  out << Manifest(config, command).dump(2) << '\n';
}

}  // namespace maskcert
