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

#include "maskcert/config.hpp"

#include <fstream>
#include <set>

#include "maskcert/cache.hpp"
#include "maskcert/errors.hpp"

namespace maskcert {
namespace {

using nlohmann::json;

void RejectUnknownKeys(const json& object, const std::set<std::string>& known,
                       const std::string& where) {
  if (!object.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : object.items()) {
    if (!known.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

Rate RateValue(const json& value, const std::string& what) {
  try {
    return Rate::FromFraction(value.get<double>());
  } catch (const Error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

std::vector<Rate> RateList(const json& value, const std::string& what) {
  std::vector<Rate> out;
  for (const auto& v : value) out.push_back(RateValue(v, what));
  return out;
}

json RateListJson(const std::vector<Rate>& rates) {
  json out = json::array();
  for (const Rate r : rates) out.push_back(r.fraction());
  return out;
}

}  // namespace

ToolkitConfig ToolkitConfig::FromJson(const json& root) {
  ToolkitConfig c;
  try {
    RejectUnknownKeys(root,
                      {"task", "labels", "templates", "backend", "smoothing",
                       "sweep", "attack", "evaluation", "cache_dir"},
                      "config");
    c.task = root.value("task", c.task);
    if (c.task == "sst2") {
      c.labels = LabelSpace::Sst2();
      c.classify_template = templates::Sst2Classify();
      c.denoise_template = templates::Sst2Denoise();
    } else if (c.task == "agnews") {
      c.labels = LabelSpace::AgNews();
      c.classify_template = templates::AgNewsClassify();
      c.denoise_template = templates::AgNewsDenoise();
    } else if (c.task != "custom") {
      throw ConfigError("unknown task '" + c.task + "'");
    }
    if (root.contains("labels")) {
      c.labels = LabelSpace(root.at("labels").get<std::vector<std::string>>());
    } else if (c.task == "custom") {
      throw ConfigError("custom task needs a 'labels' list");
    }
    if (root.contains("templates")) {
      const json& t = root.at("templates");
      RejectUnknownKeys(t, {"classify", "denoise"}, "templates");
      if (t.contains("classify")) {
        c.classify_template = PromptTemplateFromJson(t.at("classify"));
      }
      if (t.contains("denoise")) {
        c.denoise_template = PromptTemplateFromJson(t.at("denoise"));
      }
    }

    if (root.contains("backend")) {
      const json& b = root.at("backend");
      RejectUnknownKeys(b, {"kind", "endpoint", "keywords", "constant_label",
                            "filler_word"},
                        "backend");
      c.backend.kind = b.value("kind", c.backend.kind);
      if (b.contains("endpoint")) {
        c.backend.endpoint = EndpointConfig::FromJson(b.at("endpoint"));
      }
      if (b.contains("keywords")) {
        for (const auto& [word, label] : b.at("keywords").items()) {
          c.backend.keywords.emplace_back(word, label.get<std::string>());
        }
      }
      c.backend.constant_label = b.value("constant_label", c.backend.constant_label);
      c.backend.filler_word = b.value("filler_word", c.backend.filler_word);
    }
    if (c.backend.kind != "http" && c.backend.kind != "keyword" &&
        c.backend.kind != "constant") {
      throw ConfigError("unknown backend kind '" + c.backend.kind + "'");
    }

    if (root.contains("smoothing")) {
      const json& s = root.at("smoothing");
      RejectUnknownKeys(s, {"mask_rate", "n_samples", "alpha", "beta_mode",
                            "denoiser", "removal_threshold", "seed",
                            "eval_grid", "max_concurrency", "sample_retries"},
                        "smoothing");
      SmoothingConfig& sc = c.smoothing;
      if (s.contains("mask_rate")) sc.mask_rate = RateValue(s.at("mask_rate"), "mask_rate");
      sc.n_samples = s.value("n_samples", sc.n_samples);
      sc.alpha = s.value("alpha", sc.alpha);
      if (s.contains("beta_mode")) {
        sc.beta_mode = ParseBetaMode(s.at("beta_mode").get<std::string>());
      }
      c.denoiser = s.value("denoiser", c.denoiser);
      if (s.contains("removal_threshold")) {
        c.removal_threshold = RateValue(s.at("removal_threshold"), "removal_threshold");
      }
      sc.seed = s.value("seed", sc.seed);
      if (s.contains("eval_grid")) sc.eval_grid = RateList(s.at("eval_grid"), "eval_grid");
      sc.max_concurrency = s.value("max_concurrency", sc.max_concurrency);
      sc.sample_retries = s.value("sample_retries", sc.sample_retries);
    }
    if (c.denoiser != "auto" && c.denoiser != "none") {
      ParseDenoiserKind(c.denoiser);
    }

    if (root.contains("sweep")) {
      const json& s = root.at("sweep");
      RejectUnknownKeys(s, {"grid", "scales"}, "sweep");
      if (s.contains("grid")) c.sweep_grid = RateList(s.at("grid"), "sweep grid");
      if (s.contains("scales")) c.sweep_scales = RateList(s.at("scales"), "sweep scales");
    }
    if (root.contains("attack")) {
      const json& a = root.at("attack");
      RejectUnknownKeys(a, {"max_word_fraction", "queries_cap",
                            "search_samples", "mask_rate", "modes"},
                        "attack");
      if (a.contains("max_word_fraction")) {
        c.attack.max_word_fraction = RateValue(a.at("max_word_fraction"), "max_word_fraction");
      }
      c.attack.queries_cap = a.value("queries_cap", c.attack.queries_cap);
      c.attack.search_samples = a.value("search_samples", c.attack.search_samples);
      if (a.contains("mask_rate")) c.attack.mask_rate = RateValue(a.at("mask_rate"), "attack mask_rate");
      if (a.contains("modes")) c.attack.modes = a.at("modes").get<std::vector<std::string>>();
    }
    if (root.contains("evaluation")) {
      const json& e = root.at("evaluation");
      RejectUnknownKeys(e, {"certify_examples", "attack_examples",
                            "holdout_split", "certified_methods",
                            "empirical_methods"},
                        "evaluation");
      EvaluationSettings& es = c.evaluation;
      es.certify_examples = e.value("certify_examples", es.certify_examples);
      es.attack_examples = e.value("attack_examples", es.attack_examples);
      es.holdout_split = e.value("holdout_split", es.holdout_split);
      if (e.contains("certified_methods")) {
        es.certified_methods = e.at("certified_methods").get<std::vector<std::string>>();
      }
      if (e.contains("empirical_methods")) {
        es.empirical_methods = e.at("empirical_methods").get<std::vector<std::string>>();
      }
    }
    if (root.contains("cache_dir")) {
      c.cache_dir = root.at("cache_dir").get<std::string>();
    }
    c.smoothing.Validate();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ToolkitConfig ToolkitConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return FromJson(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json ToolkitConfig::ToJson() const {
  json keywords = json::object();
  for (const auto& [word, label] : backend.keywords) keywords[word] = label;
  json endpoint = {{"url", backend.endpoint.url},
                   {"path", backend.endpoint.path},
                   {"protocol", backend.endpoint.protocol},
                   {"model", backend.endpoint.model},
                   {"timeout_seconds", backend.endpoint.timeout_seconds},
                   {"max_attempts", backend.endpoint.max_attempts},
                   {"initial_backoff_ms", backend.endpoint.initial_backoff_ms},
                   {"backoff_multiplier", backend.endpoint.backoff_multiplier},
                   {"max_concurrency", backend.endpoint.max_concurrency}};
  // The auth header is a secret and stays out of manifests.
  json out = {
      {"task", task},
      {"labels", labels.labels()},
      {"templates",
       {{"classify", PromptTemplateToJson(classify_template)},
        {"denoise", PromptTemplateToJson(denoise_template)}}},
      {"backend",
       {{"kind", backend.kind},
        {"endpoint", endpoint},
        {"keywords", keywords},
        {"constant_label", backend.constant_label},
        {"filler_word", backend.filler_word}}},
      {"smoothing",
       {{"mask_rate", smoothing.mask_rate.fraction()},
        {"n_samples", smoothing.n_samples},
        {"alpha", smoothing.alpha},
        {"beta_mode", BetaModeName(smoothing.beta_mode)},
        {"denoiser", denoiser},
        {"removal_threshold", removal_threshold.fraction()},
        {"seed", smoothing.seed},
        {"eval_grid", RateListJson(smoothing.eval_grid)},
        {"max_concurrency", smoothing.max_concurrency},
        {"sample_retries", smoothing.sample_retries}}},
      {"sweep",
       {{"grid", RateListJson(sweep_grid)},
        {"scales", RateListJson(sweep_scales)}}},
      {"attack",
       {{"max_word_fraction", attack.max_word_fraction.fraction()},
        {"queries_cap", attack.queries_cap},
        {"search_samples", attack.search_samples},
        {"mask_rate", attack.mask_rate.fraction()},
        {"modes", attack.modes}}},
      {"evaluation",
       {{"certify_examples", evaluation.certify_examples},
        {"attack_examples", evaluation.attack_examples},
        {"holdout_split", evaluation.holdout_split},
        {"certified_methods", evaluation.certified_methods},
        {"empirical_methods", evaluation.empirical_methods}}}};
  if (cache_dir) out["cache_dir"] = cache_dir->string();
  return out;
}

std::string ToolkitConfig::Hash() const { return Sha256Hex(ToJson().dump()); }

}  // namespace maskcert
