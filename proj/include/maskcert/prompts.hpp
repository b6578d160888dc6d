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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskcert/labels.hpp"

namespace maskcert {

// The instruction/input/response scaffold with named slots.
inline constexpr std::string_view kInstructionSlot = "{instruction}";
inline constexpr std::string_view kInputSlot = "{input}";
extern const std::string_view kAlpacaScaffold;

struct PromptTemplate {
  std::string id;
  std::string version = "v1";
  std::string instruction;
  // In-context examples rendered after the instruction, separated by a
  // blank line.
  std::optional<std::string> few_shot_block;
  std::string wrapper = std::string(kAlpacaScaffold);

  // "id@version"; part of every cache key built from this template.
  std::string Key() const { return id + "@" + version; }
};

// Throws TemplateError when the instruction is empty or the wrapper does not
// hold exactly one of each slot.
std::string RenderPrompt(const PromptTemplate& prompt_template,
                         std::string_view input_text);

// Reads {"id", "version", "instruction", "few_shot"?, "wrapper"?}.
PromptTemplate PromptTemplateFromJson(const nlohmann::json& json);
nlohmann::json PromptTemplateToJson(const PromptTemplate& prompt_template);

namespace templates {

const PromptTemplate& Sst2Classify();
const PromptTemplate& Sst2Denoise();
const PromptTemplate& AgNewsClassify();
const PromptTemplate& AgNewsDenoise();

std::vector<const PromptTemplate*> Builtins();

}  // namespace templates

// The text of the last input section of a rendered prompt, i.e. what was
// substituted into the input slot of the standard scaffold.
std::optional<std::string> ExtractLastInput(std::string_view prompt);

// Case-insensitive whole-word search for label names; the earliest match in
// the response wins. Never throws; kInvalidLabel when nothing matches.
LabelId ParseLabel(std::string_view response, const LabelSpace& space);

}  // namespace maskcert
