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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskcert/http_backend.hpp"
#include "maskcert/labels.hpp"
#include "maskcert/prompts.hpp"
#include "maskcert/smoothing.hpp"

namespace maskcert {

struct BackendSettings {
  // "http" (remote LLM), "keyword" (toy keyword rules, with a filler-word
  // denoiser) or "constant".
  std::string kind = "keyword";
  EndpointConfig endpoint;
  std::vector<std::pair<std::string, std::string>> keywords;  // word, label
  std::string constant_label;
  std::string filler_word = "the";
};

struct AttackSettings {
  Rate max_word_fraction = Rate::FromPercent(10);
  std::uint64_t queries_cap = 5000;
  std::uint64_t search_samples = 100;
  Rate mask_rate = Rate::FromPercent(5);
  std::vector<std::string> modes = {"deepwordbug", "textbugger"};
};

struct EvaluationSettings {
  std::size_t certify_examples = 100;
  std::size_t attack_examples = 200;
  // Split the evaluation file into validation/test halves when no separate
  // validation file is given.
  bool holdout_split = true;
  std::vector<std::string> certified_methods = {"self-denoise", "ranmask"};
  std::vector<std::string> empirical_methods = {"base", "ranmask",
                                                "self-denoise"};
};

// Every key of the config file. Unknown keys are rejected.
//
// {
//   "task": "sst2" | "agnews" | "custom",
//   "labels": [...],                        // custom task only
//   "templates": {"classify": {...}, "denoise": {...}},
//   "backend": {"kind", "endpoint": {...}, "keywords": {"word": "label"},
//               "constant_label", "filler_word"},
//   "smoothing": {"mask_rate", "n_samples", "alpha", "beta_mode",
//                 "denoiser", "removal_threshold", "seed", "eval_grid",
//                 "max_concurrency", "sample_retries"},
//   "sweep": {"grid": [...], "scales": [...]},
//   "attack": {"max_word_fraction", "queries_cap", "search_samples",
//              "mask_rate", "modes"},
//   "evaluation": {"certify_examples", "attack_examples", "holdout_split",
//                  "certified_methods", "empirical_methods"},
//   "cache_dir": "..."
// }
struct ToolkitConfig {
  std::string task = "sst2";
  LabelSpace labels = LabelSpace::Sst2();
  PromptTemplate classify_template = templates::Sst2Classify();
  PromptTemplate denoise_template = templates::Sst2Denoise();
  BackendSettings backend;
  SmoothingConfig smoothing;
  // "auto" picks by mask rate; otherwise a DenoiserKind name.
  std::string denoiser = "auto";
  Rate removal_threshold = Rate::FromPercent(70);
  std::vector<Rate> sweep_grid = DefaultMaskRateGrid();
  std::vector<Rate> sweep_scales = DefaultScaleGrid();
  AttackSettings attack;
  EvaluationSettings evaluation;
  std::optional<std::filesystem::path> cache_dir;

  // Throws ConfigError.
  static ToolkitConfig FromJson(const nlohmann::json& json);
  static ToolkitConfig Load(const std::filesystem::path& path);
  nlohmann::json ToJson() const;
  // SHA-256 of the canonical JSON form.
  std::string Hash() const;
};

}  // namespace maskcert
