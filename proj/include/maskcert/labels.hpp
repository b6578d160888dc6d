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

namespace maskcert {

// Index into a LabelSpace. Votes that parse to no label are kInvalidLabel.
using LabelId = int;
inline constexpr LabelId kInvalidLabel = -1;
inline constexpr std::string_view kInvalidLabelName = "INVALID";

class LabelSpace {
 public:
  // At least two distinct, non-empty names; "INVALID" is reserved.
  explicit LabelSpace(std::vector<std::string> labels);

  static LabelSpace Sst2();
  static LabelSpace AgNews();

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  // Name of a label, or "INVALID" for kInvalidLabel.
  const std::string& Name(LabelId id) const;
  std::optional<LabelId> Find(std::string_view name) const;
  // Throws DatasetError for unknown names.
  LabelId Require(std::string_view name) const;

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

 private:
  std::vector<std::string> labels_;
};

}  // namespace maskcert
