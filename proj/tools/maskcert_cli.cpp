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

// Command-line front end: certify, predict, attack, sweep, evaluate and
// oracle-check over a JSON config.
//
// Exit codes: 0 success, 2 partial (some examples failed, or nothing to
// report), 1 fatal.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "maskcert/attacks.hpp"
#include "maskcert/cert_math.hpp"
#include "maskcert/config.hpp"
#include "maskcert/errors.hpp"
#include "maskcert/evaluation.hpp"
#include "maskcert/smoothing.hpp"
#include "maskcert/toolkit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace maskcert;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string backend;
  std::string cache_dir;
  std::string out = "maskcert-out";
};

struct InputOptions {
  std::string input;
  std::string format;
  std::string text;
  std::string label;
  std::size_t limit = 0;  // 0: every record
};

ToolkitConfig LoadConfig(const GlobalOptions& g) {
  ToolkitConfig config =
      g.config_path.empty() ? ToolkitConfig{} : ToolkitConfig::Load(g.config_path);
  if (g.seed) config.smoothing.seed = *g.seed;
  if (!g.backend.empty()) {
    if (g.backend != "http" && g.backend != "keyword" && g.backend != "constant") {
      throw ConfigError("--backend must be http, keyword or constant");
    }
    config.backend.kind = g.backend;
  }
  if (!g.cache_dir.empty()) config.cache_dir = g.cache_dir;
  return config;
}

std::vector<DatasetRecord> ReadInputs(const InputOptions& in,
                                      const ToolkitConfig& config,
                                      bool need_label) {
  std::vector<DatasetRecord> records;
  if (!in.text.empty()) {
    std::string label = in.label;
    if (label.empty()) {
      if (need_label) throw ConfigError("--text needs --label");
      label = config.labels.Name(0);
    }
    config.labels.Require(label);
    records.push_back({"1", in.text, label});
  } else if (!in.input.empty()) {
    const DatasetFormat format = in.format.empty()
                                     ? DatasetFormatForPath(in.input)
                                     : ParseDatasetFormat(in.format);
    records = LoadDataset(in.input, format, config.labels);
  } else {
    throw ConfigError("give --input FILE or --text TEXT");
  }
  if (in.limit > 0) {
    records = SampleSubset(std::move(records), in.limit, config.smoothing.seed);
  }
  return records;
}

void AddInputOptions(CLI::App* cmd, InputOptions& in, bool label_for_text) {
  cmd->add_option("-i,--input", in.input, "Dataset file (JSON lines or TSV)");
  cmd->add_option("--format", in.format, "jsonl or tsv (default: by extension)");
  cmd->add_option("--text", in.text, "Single input text instead of a file");
  if (label_for_text) {
    cmd->add_option("--label", in.label, "Ground-truth label for --text");
  }
  cmd->add_option("--limit", in.limit, "Seeded random subset of this size");
}

void CheckMethod(const std::string& method, bool allow_base) {
  if (method == kMethodRanMask || method == kMethodSelfDenoise ||
      (allow_base && method == kMethodBase)) {
    return;
  }
  throw ConfigError("unknown method '" + method + "'");
}

// Runs `per_example` over the records, writing one JSON line each to
// out/<file> and stdout; backend failures skip the example.
int ForEachRecord(const std::vector<DatasetRecord>& records,
                  const fs::path& out_path,
                  const std::function<json(const DatasetRecord&)>& per_example) {
  std::vector<json> rows;
  std::uint64_t failed = 0;
  for (const DatasetRecord& r : records) {
    try {
      rows.push_back(per_example(r));
      std::cout << rows.back().dump() << '\n';
    } catch (const Error& e) {
      if (!IsExampleFailure(e)) throw;
      ++failed;
      std::cerr << "example " << r.id << " failed: " << e.what() << '\n';
    }
  }
  WriteJsonLines(rows, out_path);
  if (failed > 0) {
    std::cerr << failed << " of " << records.size() << " examples failed\n";
    return kExitPartial;
  }
  return rows.empty() ? kExitPartial : kExitOk;
}

json VoteCountsToJson(const VoteCounts& counts, const LabelSpace& labels) {
  json per_label = json::object();
  for (std::size_t i = 0; i < counts.per_label.size(); ++i) {
    per_label[labels.Name(static_cast<LabelId>(i))] = counts.per_label[i];
  }
  return {{"per_label", per_label}, {"invalid", counts.invalid}, {"n", counts.n}};
}

int RunOracleCheck() {
  int failures = 0;
  const auto report = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "PASS " : "FAIL ") << what << '\n';
    if (!ok) ++failures;
  };

  // Delta against brute-force enumeration of mask sets.
  bool delta_ok = true;
  for (std::size_t L = 1; L <= 9 && delta_ok; ++L) {
    for (std::size_t k = 0; k <= L && delta_ok; ++k) {
      for (std::size_t rho = 0; rho <= L && delta_ok; ++rho) {
        std::uint64_t miss = 0, total = 0;
        for (const MaskSet& s : EnumerateMaskSets(L, k)) {
          ++total;
          // Fixed rho-subset {0, ..., rho-1}; a miss is any position the
          // mask set leaves visible.
          for (std::size_t j = 0; j < rho; ++j) {
            if (!s.Contains(j)) {
              ++miss;
              break;
            }
          }
        }
        delta_ok = Delta({L, k, rho}) == Rational(miss, total);
      }
    }
  }
  report(delta_ok, "delta matches mask-set enumeration for L <= 9");

  report(Delta({10, 5, 1}) == Rational(1, 2) && Delta({10, 9, 1}) == Rational(1, 10),
         "delta closed-form spot values");
  const double cp = ClopperPearsonLower(500, {0.05, 500});
  report(std::abs(cp - std::pow(0.05, 1.0 / 500)) < 1e-6,
         "Clopper-Pearson lower(500, 500, 0.05) = 0.05^(1/500)");
  bool switch_ok = true;
  for (const Rate m : DefaultMaskRateGrid()) {
    switch_ok &= (SelectStrategy(m) == DenoiserKind::kRemoveMask) ==
                 (m >= Rate::FromPercent(70));
  }
  report(switch_ok, "strategy switch at 70% mask rate");
  return failures == 0 ? kExitOk : kExitFatal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified robustness of text classifiers by randomized masking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "maskcert 1.0.0");

  GlobalOptions g;
  app.add_option("-c,--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Override smoothing.seed");
  app.add_option("--backend", g.backend, "Override backend.kind (http, keyword, constant)");
  app.add_option("--cache-dir", g.cache_dir, "Response cache directory");
  app.add_option("-o,--out", g.out, "Output directory")->capture_default_str();

  InputOptions certify_in, predict_in, attack_in, sweep_in, eval_in;
  std::string certify_method = kMethodSelfDenoise, attack_method = kMethodSelfDenoise,
              sweep_method = kMethodSelfDenoise, attack_mode = "deepwordbug";
  std::optional<double> certify_m, predict_m;
  std::string predict_method = kMethodSelfDenoise;
  std::string validation_path;

  CLI::App* certify = app.add_subcommand("certify", "Certify examples against their labels");
  AddInputOptions(certify, certify_in, true);
  certify->add_option("--method", certify_method, "self-denoise or ranmask")->capture_default_str();
  certify->add_option("-m,--mask-rate", certify_m, "Mask rate (default: smoothing.mask_rate)");

  CLI::App* predict = app.add_subcommand("predict", "Smoothed prediction with abstention");
  AddInputOptions(predict, predict_in, false);
  predict->add_option("--method", predict_method, "self-denoise or ranmask")->capture_default_str();
  predict->add_option("-m,--mask-rate", predict_m, "Mask rate (default: smoothing.mask_rate)");

  CLI::App* attack = app.add_subcommand("attack", "Black-box attack transcripts");
  AddInputOptions(attack, attack_in, true);
  attack->add_option("--method", attack_method, "base, ranmask or self-denoise")->capture_default_str();
  attack->add_option("--mode", attack_mode, "deepwordbug or textbugger")->capture_default_str();

  CLI::App* sweep = app.add_subcommand("sweep", "Best mask rate per perturbation scale");
  AddInputOptions(sweep, sweep_in, true);
  sweep->add_option("--method", sweep_method, "self-denoise or ranmask")->capture_default_str();

  CLI::App* evaluate = app.add_subcommand("evaluate", "Full experiment and report");
  evaluate->add_option("-i,--input", eval_in.input, "Test dataset")->required();
  evaluate->add_option("--validation", validation_path,
                       "Validation dataset (default: split the test file in halves)");
  evaluate->add_option("--format", eval_in.format, "jsonl or tsv (default: by extension)");

  app.add_subcommand("oracle-check", "Self-check of the certification math");

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "oracle-check") return RunOracleCheck();

    const ToolkitConfig config = LoadConfig(g);
    const fs::path out = g.out;
    WriteManifest(config, command, out);
    const Toolkit toolkit(config);
    const LabelSpace& labels = toolkit.labels();

    if (command == "certify") {
      CheckMethod(certify_method, false);
      const SmoothedClassifier smoothed = toolkit.Smoothed(
          certify_method, certify_m ? Rate::FromFraction(*certify_m)
                                    : config.smoothing.mask_rate);
      return ForEachRecord(
          ReadInputs(certify_in, config, true), out / "certify.jsonl",
          [&](const DatasetRecord& r) {
            return CertifyRecordToJson(
                r.id, smoothed.Certify(Tokenize(r.text), labels.Require(r.label)),
                labels);
          });
    }
    if (command == "predict") {
      CheckMethod(predict_method, false);
      const SmoothedClassifier smoothed = toolkit.Smoothed(
          predict_method, predict_m ? Rate::FromFraction(*predict_m)
                                    : config.smoothing.mask_rate);
      return ForEachRecord(
          ReadInputs(predict_in, config, false), out / "predict.jsonl",
          [&](const DatasetRecord& r) {
            const PredictionResult p = smoothed.Predict(Tokenize(r.text));
            return json{{"id", r.id},
                        {"label", p.label ? json(labels.Name(*p.label)) : json(nullptr)},
                        {"counts", VoteCountsToJson(p.counts, labels)},
                        {"p_value", ToDouble(p.p_value)}};
          });
    }
    if (command == "attack") {
      CheckMethod(attack_method, true);
      const std::vector<TransformationKind> kinds = AttackKindsByName(attack_mode);
      const std::unique_ptr<Victim> victim = toolkit.VictimFor(attack_method);
      const AttackBudget budget{config.attack.max_word_fraction,
                                config.attack.queries_cap};
      std::uint64_t index = 0;
      return ForEachRecord(
          ReadInputs(attack_in, config, true), out / "attacks.jsonl",
          [&](const DatasetRecord& r) {
            const LabeledSentence example{r.id, Tokenize(r.text),
                                          labels.Require(r.label)};
            const AttackResult result =
                AttackExample(example, *victim, budget, kinds,
                              ExampleSeed(config.smoothing.seed, index++));
            return AttackTranscriptToJson(r.id, result, labels);
          });
    }
    if (command == "sweep") {
      CheckMethod(sweep_method, false);
      const std::vector<DatasetRecord> records = ReadInputs(sweep_in, config, true);
      std::uint64_t failed = 0;
      SmoothingConfig smoothing = config.smoothing;
      smoothing.eval_grid = config.sweep_scales;
      const SweepResult result = MaskRateSweep(
          config.sweep_grid, config.sweep_scales, [&](Rate m) {
            SmoothingConfig at = smoothing;
            at.mask_rate = m;
            const SmoothedClassifier smoothed = toolkit.Smoothed(sweep_method, at);
            std::vector<std::optional<Rate>> radii;
            for (const DatasetRecord& r : records) {
              try {
                radii.push_back(
                    smoothed.Certify(Tokenize(r.text), labels.Require(r.label)).d_max);
              } catch (const Error& e) {
                if (!IsExampleFailure(e)) throw;
                ++failed;
              }
            }
            return radii;
          });
      json doc = {{"method", sweep_method}, {"best_mask_rate", json::array()},
                  {"accuracy", json::array()}};
      for (const auto& [d, m] : result.best_mask_rate) {
        doc["best_mask_rate"].push_back({{"d", d.fraction()}, {"m", m.fraction()}});
      }
      for (const auto& [d, row] : result.accuracy) {
        for (const auto& [m, acc] : row) {
          doc["accuracy"].push_back(
              {{"d", d.fraction()}, {"m", m.fraction()}, {"acc", acc}});
        }
      }
      std::ofstream(out / "sweep.json") << doc.dump(2) << '\n';
      std::cout << doc.dump(2) << '\n';
      return failed > 0 ? kExitPartial : kExitOk;
    }
    if (command == "evaluate") {
      const DatasetFormat format = eval_in.format.empty()
                                       ? DatasetFormatForPath(eval_in.input)
                                       : ParseDatasetFormat(eval_in.format);
      std::vector<DatasetRecord> test = LoadDataset(eval_in.input, format, labels);
      std::vector<DatasetRecord> validation;
      if (!validation_path.empty()) {
        validation = LoadDataset(validation_path,
                                 eval_in.format.empty()
                                     ? DatasetFormatForPath(validation_path)
                                     : format,
                                 labels);
      }
      if (test.empty()) {
        WriteEvaluation(EvaluationRun{}, out);
        std::cerr << "no examples in " << eval_in.input << "; wrote an empty report\n";
        return kExitPartial;
      }
      if (validation_path.empty()) {
        if (config.evaluation.holdout_split && test.size() >= 2) {
          std::tie(validation, test) = SplitHoldout(std::move(test), config.smoothing.seed);
        } else {
          validation = test;
        }
      }
      const EvaluationRun run = RunEvaluation(toolkit, validation, test);
      const ReportStatus status = WriteEvaluation(run, out);
      std::cout << SummaryToJson(run.summary).dump(2) << '\n';
      if (toolkit.http()) {
        const HttpStats stats = toolkit.http()->stats();
        std::cerr << "http: " << stats.requests << " requests, " << stats.attempts
                  << " attempts, " << stats.failures << " failures\n";
      }
      if (run.summary.examples_failed > 0) {
        std::cerr << run.summary.examples_failed
                  << " examples failed; see failures.txt\n";
        return kExitPartial;
      }
      return status == ReportStatus::kEmpty ? kExitPartial : kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << ErrorCodeName(e.code()) << "]: " << e.what() << '\n';
    return kExitFatal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFatal;
  }
  return kExitFatal;
}
