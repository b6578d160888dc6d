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

#include "maskcert/prompts.hpp"

#include <algorithm>
#include <cctype>

#include "maskcert/errors.hpp"

namespace maskcert {

const std::string_view kAlpacaScaffold =
    "Below is an instruction that describes a task, paired with an input that "
    "provides further context. Write a response that appropriately completes "
    "the request.\n"
    "\n"
    "### Instruction:\n"
    "{instruction}\n"
    "\n"
    "### Input:\n"
    "{input}\n"
    "\n"
    "### Response:";

namespace {

std::size_t CountOccurrences(std::string_view haystack,
                             std::string_view needle) {
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

void ReplaceOnce(std::string& text, std::string_view slot,
                 std::string_view value) {
  const std::size_t pos = text.find(slot);
  text.replace(pos, slot.size(), value);
}

bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string Lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

PromptTemplate MakeTemplate(std::string id, std::string instruction,
                            std::optional<std::string> few_shot) {
  PromptTemplate t;
  t.id = std::move(id);
  t.instruction = std::move(instruction);
  t.few_shot_block = std::move(few_shot);
  return t;
}

}  // namespace

std::string RenderPrompt(const PromptTemplate& prompt_template,
                         std::string_view input_text) {
  if (prompt_template.instruction.empty()) {
    throw TemplateError("template '" + prompt_template.Key() +
                        "' has an empty instruction");
  }
  const std::string& wrapper = prompt_template.wrapper;
  if (CountOccurrences(wrapper, kInstructionSlot) != 1 ||
      CountOccurrences(wrapper, kInputSlot) != 1) {
    throw TemplateError("template '" + prompt_template.Key() +
                        "' must contain exactly one {instruction} and one "
                        "{input} slot");
  }
  std::string instruction = prompt_template.instruction;
  if (prompt_template.few_shot_block) {
    instruction += "\n\n";
    instruction += *prompt_template.few_shot_block;
  }
  // Fill the input slot first so that slot-like text inside the instruction
  // is never substituted.
  std::string out = wrapper;
  const std::size_t instruction_pos = out.find(kInstructionSlot);
  const std::size_t input_pos = out.find(kInputSlot);
  if (input_pos > instruction_pos) {
    ReplaceOnce(out, kInputSlot, input_text);
    ReplaceOnce(out, kInstructionSlot, instruction);
  } else {
    ReplaceOnce(out, kInstructionSlot, instruction);
    out.replace(input_pos, kInputSlot.size(), input_text);
  }
  return out;
}

PromptTemplate PromptTemplateFromJson(const nlohmann::json& json) {
  try {
    PromptTemplate t;
    t.id = json.at("id").get<std::string>();
    t.version = json.value("version", std::string("v1"));
    t.instruction = json.at("instruction").get<std::string>();
    if (json.contains("few_shot") && !json.at("few_shot").is_null()) {
      t.few_shot_block = json.at("few_shot").get<std::string>();
    }
    if (json.contains("wrapper")) {
      t.wrapper = json.at("wrapper").get<std::string>();
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw TemplateError(std::string("malformed template asset: ") + e.what());
  }
}

nlohmann::json PromptTemplateToJson(const PromptTemplate& t) {
  nlohmann::json json = {{"id", t.id},
                         {"version", t.version},
                         {"instruction", t.instruction},
                         {"wrapper", t.wrapper}};
  json["few_shot"] = t.few_shot_block ? nlohmann::json(*t.few_shot_block)
                                      : nlohmann::json(nullptr);
  return json;
}

namespace templates {

const PromptTemplate& Sst2Classify() {
  static const PromptTemplate t = MakeTemplate(
      "sst2-classify",
      "Given an English sentence input, determine its sentiment as positive "
      "or negative.",
      std::nullopt);
  return t;
}

const PromptTemplate& Sst2Denoise() {
  static const PromptTemplate t = MakeTemplate(
      "sst2-denoise",
      "Replace each mask word [MASK] in the input sentence with a suitable "
      "word. The output sentence should be natural and coherent and should be "
      "of the same length as the given sentence.",
      "### Input: \n"
      "[MASK] reassembled from [MASK] cutting-room [MASK] of any [MASK] "
      "daytime [MASK].\n"
      "\n"
      "### Response:\n"
      "apparently reassembled from the cutting-room floor of any given daytime "
      "soap.\n"
      "\n"
      "### Input: \n"
      "a [MASK], funny and [MASK] transporting re-imagining [MASK] [MASK] and "
      "the beast and 1930s [MASK] films\n"
      "\n"
      "### Response:\n"
      "a stirring, funny and finally transporting re-imagining of beauty and "
      "the beast and 1930s horror films");
  return t;
}

const PromptTemplate& AgNewsClassify() {
  static const PromptTemplate t = MakeTemplate(
      "agnews-classify",
      "Given a news article title and description, classify it into one of "
      "the four categories: Sports, World, Technology, or Business. Return the "
      "category name as the answer.",
      "### Input: \n"
      "Title: Venezuelans Vote Early in Referendum on Chavez Rule (Reuters)\n"
      "Description: Reuters - Venezuelans turned out early and in large "
      "numbers on Sunday to vote in a historic referendum that will either "
      "remove left-wing President Hugo Chavez from office or give him a new "
      "mandate to govern for the next two years.\n"
      "\n"
      "### Response:\n"
      "World\n"
      "\n"
      "### Input:\n"
      "Title: Phelps, Thorpe Advance in 200 Freestyle (AP)\n"
      "Description: AP - Michael Phelps took care of qualifying for the "
      "Olympic 200-meter freestyle semifinals Sunday, and then found out he "
      "had been added to the American team for the evening's 400 freestyle "
      "relay final. Phelps' rivals Ian Thorpe and Pieter van den Hoogenband "
      "and teammate Klete Keller were faster than the teenager in the 200 "
      "free preliminaries.\n"
      "\n"
      "### Response:\n"
      "Sports\n"
      "\n"
      "### Input:\n"
      "Title: Wall St. Bears Claw Back Into the Black (Reuters)\n"
      "Description: Reuters - Short-sellers, Wall Street's dwindling band of "
      "ultra-cynics, are seeing green again.\n"
      "\n"
      "### Response:\n"
      "Business\n"
      "        \n"
      "### Input:\n"
      "Title: 'Madden,' 'ESPN' Football Score in Different Ways (Reuters)\n"
      "Description: Reuters - Was absenteeism a little high\\on Tuesday among "
      "the guys at the office? EA Sports would like to think it was because "
      "\"Madden NFL 2005\" came out that day, and some fans of the football "
      "simulation are rabid enough to take a sick day to play it.\n"
      "\n"
      "### Response:\n"
      "Technology");
  return t;
}

const PromptTemplate& AgNewsDenoise() {
  static const PromptTemplate t = MakeTemplate(
      "agnews-denoise",
      "Replace each masked position \"[MASK]\" in the provided sentence with a "
      "suitable word to make it natural and coherent. Only one word should be "
      "used to replace each \"[MASK]\". The returned sentence should be of the "
      "same length as the given sentence. Provide the answer directly.",
      std::nullopt);
  return t;
}

std::vector<const PromptTemplate*> Builtins() {
  return {&Sst2Classify(), &Sst2Denoise(), &AgNewsClassify(),
          &AgNewsDenoise()};
}

}  // namespace templates

std::optional<std::string> ExtractLastInput(std::string_view prompt) {
  constexpr std::string_view kInputHeader = "### Input:";
  constexpr std::string_view kResponseTrailer = "\n\n### Response:";
  const std::size_t header = prompt.rfind(kInputHeader);
  if (header == std::string_view::npos) return std::nullopt;
  const std::size_t start = prompt.find('\n', header);
  const std::size_t end = prompt.rfind(kResponseTrailer);
  if (start == std::string_view::npos || end == std::string_view::npos ||
      end < start) {
    return std::nullopt;
  }
  if (end == start) return std::string();
  return std::string(prompt.substr(start + 1, end - start - 1));
}

LabelId ParseLabel(std::string_view response, const LabelSpace& space) {
  const std::string haystack = Lower(response);
  LabelId best = kInvalidLabel;
  std::size_t best_pos = std::string::npos;
  std::size_t best_len = 0;
  for (std::size_t id = 0; id < space.size(); ++id) {
    const std::string needle = Lower(space.labels()[id]);
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + 1)) {
      const bool left_ok = pos == 0 || !IsWordChar(haystack[pos - 1]);
      const std::size_t end = pos + needle.size();
      const bool right_ok = end == haystack.size() || !IsWordChar(haystack[end]);
      if (!left_ok || !right_ok) continue;
      if (pos < best_pos || (pos == best_pos && needle.size() > best_len)) {
        best = static_cast<LabelId>(id);
        best_pos = pos;
        best_len = needle.size();
      }
      break;
    }
  }
  return best;
}

}  // namespace maskcert
