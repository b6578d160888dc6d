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

#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "maskcert/errors.hpp"
#include "maskcert/labels.hpp"
#include "maskcert/prompts.hpp"

using namespace maskcert;

namespace {

std::string ReadGolden(const std::string& name) {
  std::ifstream in(std::string(MASKCERT_GOLDEN_DIR) + "/" + name, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing golden file " << name);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void CheckGolden(const PromptTemplate& t, const std::string& name) {
  const std::string expected = ReadGolden(name + ".txt");
  const std::string input = ReadGolden(name + ".input.txt");
  const std::string rendered = RenderPrompt(t, input);
  CHECK(rendered.size() == expected.size());
  CHECK(rendered == expected);
}

}  // namespace

TEST_CASE("golden prompts match the reference listings byte for byte") {
  CheckGolden(templates::Sst2Classify(), "sst2_classify");
  CheckGolden(templates::Sst2Denoise(), "sst2_denoise");
  CheckGolden(templates::AgNewsClassify(), "agnews_classify");
  CheckGolden(templates::AgNewsDenoise(), "agnews_denoise");
}

TEST_CASE("render_prompt: worked examples") {
  const std::string sst2 = RenderPrompt(templates::Sst2Classify(), "great film");
  CHECK(sst2.find("determine its sentiment as positive or negative") != std::string::npos);
  CHECK(sst2.find("### Input:\ngreat film") != std::string::npos);
  CHECK(sst2.ends_with("### Response:"));

  const std::string ag = RenderPrompt(templates::AgNewsClassify(), "Title: x");
  CHECK(ag.find("classify it into one of the four categories") != std::string::npos);

  PromptTemplate empty = templates::Sst2Classify();
  empty.instruction.clear();
  CHECK_THROWS_AS(RenderPrompt(empty, "x"), TemplateError);
}

TEST_CASE("render_prompt: slot errors and literal slot text") {
  PromptTemplate t{"t", "v1", "do it", std::nullopt, "{instruction}\n{input}\n{input}"};
  CHECK_THROWS_AS(RenderPrompt(t, "x"), TemplateError);
  t.wrapper = "no slots";
  CHECK_THROWS_AS(RenderPrompt(t, "x"), TemplateError);
  // Slot-like text inside the input or instruction is never substituted.
  t.wrapper = "I: {instruction} / X: {input}";
  t.instruction = "say {input}";
  CHECK(RenderPrompt(t, "{instruction}") == "I: say {input} / X: {instruction}");
}

TEST_CASE("templates: keys and JSON round-trip") {
  CHECK(templates::Sst2Denoise().Key() == templates::Sst2Denoise().id + "@v1");
  CHECK(templates::Builtins().size() == 4);
  for (const PromptTemplate* t : templates::Builtins()) {
    const PromptTemplate back = PromptTemplateFromJson(PromptTemplateToJson(*t));
    CHECK(RenderPrompt(back, "probe") == RenderPrompt(*t, "probe"));
    CHECK(back.Key() == t->Key());
  }
  CHECK_THROWS_AS(PromptTemplateFromJson(nlohmann::json{{"id", "x"}}), TemplateError);
}

TEST_CASE("extract_last_input recovers the rendered input") {
  for (const PromptTemplate* t : templates::Builtins()) {
    for (const std::string input : {"a [MASK] b", "Title: T\nDescription: D", "x"}) {
      CHECK(ExtractLastInput(RenderPrompt(*t, input)) == input);
    }
  }
  CHECK_FALSE(ExtractLastInput("no sections here").has_value());
}

TEST_CASE("parse_label: worked examples") {
  const LabelSpace sst2 = LabelSpace::Sst2();
  const LabelSpace ag = LabelSpace::AgNews();
  CHECK(ParseLabel("Positive.", sst2) == *sst2.Find("positive"));
  CHECK(ParseLabel("I think the answer is Sports", ag) == *ag.Find("Sports"));
  CHECK(ParseLabel("cannot determine", sst2) == kInvalidLabel);
}

TEST_CASE("parse_label: first whole-word match wins") {
  const LabelSpace sst2 = LabelSpace::Sst2();
  CHECK(ParseLabel("negative, not positive", sst2) == *sst2.Find("negative"));
  CHECK(ParseLabel("NEGATIVE", sst2) == *sst2.Find("negative"));
  CHECK(ParseLabel("nonpositive", sst2) == kInvalidLabel);
  CHECK(ParseLabel("positively", sst2) == kInvalidLabel);
  CHECK(ParseLabel("", sst2) == kInvalidLabel);
  const LabelSpace ag = LabelSpace::AgNews();
  CHECK(ParseLabel("\n Business\n", ag) == *ag.Find("Business"));
  CHECK(ParseLabel("world-wide technology", ag) == *ag.Find("World"));
}

TEST_CASE("label space: validation and lookup") {
  CHECK_THROWS_AS(LabelSpace({"only"}), InvalidArgument);
  CHECK_THROWS_AS(LabelSpace({"a", "A"}), InvalidArgument);
  CHECK_THROWS_AS(LabelSpace({"a", "INVALID"}), InvalidArgument);
  CHECK_THROWS_AS(LabelSpace({"a", ""}), InvalidArgument);
  const LabelSpace ag = LabelSpace::AgNews();
  CHECK(ag.labels() == std::vector<std::string>{"World", "Sports", "Business", "Technology"});
  CHECK(ag.Name(kInvalidLabel) == "INVALID");
  CHECK_FALSE(ag.Find("Politics").has_value());
  CHECK_THROWS_AS(ag.Require("Politics"), DatasetError);
}
