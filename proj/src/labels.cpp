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

#include "maskcert/labels.hpp"

#include <algorithm>
#include <cctype>

#include "maskcert/errors.hpp"

namespace maskcert {
namespace {

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

LabelSpace::LabelSpace(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  if (labels_.size() < 2) {
    throw InvalidArgument("a label space needs at least two labels");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw InvalidArgument("empty label name");
    if (EqualsIgnoreCase(labels_[i], kInvalidLabelName)) {
      throw InvalidArgument("label name INVALID is reserved");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (EqualsIgnoreCase(labels_[i], labels_[j])) {
        throw InvalidArgument("duplicate label '" + labels_[i] + "'");
      }
    }
  }
}

LabelSpace LabelSpace::Sst2() { return LabelSpace({"positive", "negative"}); }

LabelSpace LabelSpace::AgNews() {
  return LabelSpace({"World", "Sports", "Business", "Technology"});
}

const std::string& LabelSpace::Name(LabelId id) const {
  static const std::string kInvalid(kInvalidLabelName);
  if (id < 0 || static_cast<std::size_t>(id) >= labels_.size()) {
    return kInvalid;
  }
  return labels_[static_cast<std::size_t>(id)];
}

std::optional<LabelId> LabelSpace::Find(std::string_view name) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == name) return static_cast<LabelId>(i);
  }
  return std::nullopt;
}

LabelId LabelSpace::Require(std::string_view name) const {
  if (auto id = Find(name)) return *id;
  throw DatasetError("unknown label '" + std::string(name) + "'");
}

}  // namespace maskcert
