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

#include "maskcert/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "maskcert/cert_math.hpp"
#include "maskcert/errors.hpp"

namespace maskcert {
namespace {

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)); }

std::string JoinTokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const std::string& token : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += token;
  }
  return out;
}

}  // namespace

Rate Rate::FromFraction(double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("rate must lie in [0, 1], got " +
                          std::to_string(fraction));
  }
  return Rate(static_cast<std::uint32_t>(std::llround(fraction * kScale)));
}

Rate Rate::FromBasisPoints(std::uint32_t bp) {
  if (bp > kScale) {
    throw InvalidArgument("rate exceeds 100%: " + std::to_string(bp) + "bp");
  }
  return Rate(bp);
}

std::vector<Rate> DefaultScaleGrid() {
  std::vector<Rate> grid;
  for (std::uint32_t p = 1; p <= 10; ++p) grid.push_back(Rate::FromPercent(p));
  return grid;
}

std::vector<Rate> DefaultMaskRateGrid() {
  std::vector<Rate> grid;
  for (std::uint32_t p = 10; p <= 90; p += 10) {
    grid.push_back(Rate::FromPercent(p));
  }
  return grid;
}

Sentence Sentence::FromTokens(std::vector<std::string> tokens) {
  if (tokens.empty()) throw EmptyInput("sentence has no tokens");
  for (const std::string& token : tokens) {
    if (token.empty()) throw EmptyInput("sentence contains an empty token");
    if (std::any_of(token.begin(), token.end(), IsSpace)) {
      throw InvalidArgument("token contains whitespace: '" + token + "'");
    }
    if (token == kMaskToken) {
      throw ReservedToken("input contains the reserved token [MASK]");
    }
  }
  return Sentence(std::move(tokens));
}

std::string Sentence::Detokenize() const { return JoinTokens(tokens_); }

MaskSet::MaskSet(std::vector<std::size_t> indices, std::size_t owner_length)
    : indices_(std::move(indices)), owner_length_(owner_length) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw InvalidMaskCount("mask set has duplicate indices");
  }
  if (!indices_.empty() && indices_.back() >= owner_length_) {
    throw InvalidMaskCount("mask index " + std::to_string(indices_.back()) +
                           " out of range for length " +
                           std::to_string(owner_length_));
  }
}

bool MaskSet::Contains(std::size_t index) const {
  return std::binary_search(indices_.begin(), indices_.end(), index);
}

std::string MaskedSentence::Detokenize() const { return JoinTokens(tokens_); }

Sentence Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !IsSpace(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  if (tokens.empty()) throw EmptyInput("input text is empty or whitespace");
  return Sentence::FromTokens(std::move(tokens));
}

std::size_t MaskCount(std::size_t length, Rate mask_rate) {
  const std::uint64_t bp = mask_rate.basis_points();
  if (bp == 0) return 0;
  // round_half_up(bp * L / kScale) in integers.
  const std::uint64_t scaled = bp * length;
  const std::uint64_t rounded = (2 * scaled + Rate::kScale) / (2 * Rate::kScale);
  return std::min<std::size_t>(length, std::max<std::uint64_t>(1, rounded));
}

std::size_t PerturbCount(std::size_t length, Rate scale) {
  return static_cast<std::size_t>(
      static_cast<std::uint64_t>(scale.basis_points()) * length / Rate::kScale);
}

MaskSet SampleMaskSet(std::size_t length, std::size_t k, RngStream& stream) {
  if (k > length) {
    throw InvalidMaskCount("cannot mask " + std::to_string(k) + " of " +
                           std::to_string(length) + " words");
  }
  // Partial Fisher-Yates: the first k slots form a uniform k-subset.
  std::vector<std::size_t> pool(length);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(stream.Below(length - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return MaskSet(std::move(pool), length);
}

MaskedSentence ApplyMask(const Sentence& sentence, const MaskSet& mask_set) {
  if (mask_set.owner_length() != sentence.length()) {
    throw MaskLengthMismatch("mask set for length " +
                             std::to_string(mask_set.owner_length()) +
                             " applied to sentence of length " +
                             std::to_string(sentence.length()));
  }
  std::vector<std::string> tokens = sentence.tokens();
  for (const std::size_t i : mask_set.indices()) tokens[i] = kMaskToken;
  return MaskedSentence(std::move(tokens), mask_set);
}

MaskSetRange::Iterator::Iterator(std::size_t length, std::size_t k)
    : length_(length), combo_(k), done_(false) {
  std::iota(combo_.begin(), combo_.end(), std::size_t{0});
  Refresh();
}

void MaskSetRange::Iterator::Refresh() { current_ = MaskSet(combo_, length_); }

MaskSetRange::Iterator& MaskSetRange::Iterator::operator++() {
  const std::size_t k = combo_.size();
  // Rightmost slot that can still advance.
  std::size_t i = k;
  while (i > 0 && combo_[i - 1] == length_ - k + (i - 1)) --i;
  if (i == 0) {
    done_ = true;
    combo_.clear();
    return *this;
  }
  ++combo_[i - 1];
  for (std::size_t j = i; j < k; ++j) combo_[j] = combo_[j - 1] + 1;
  Refresh();
  return *this;
}

MaskSetRange EnumerateMaskSets(std::size_t length, std::size_t k,
                               std::uint64_t cap) {
  if (k > length) {
    throw InvalidMaskCount("cannot enumerate " + std::to_string(k) +
                           "-subsets of " + std::to_string(length));
  }
  const BigInt count = Binomial(static_cast<std::int64_t>(length),
                                static_cast<std::int64_t>(k));
  if (count > cap) {
    throw EnumerationTooLarge("C(" + std::to_string(length) + ", " +
                              std::to_string(k) + ") = " + count.str() +
                              " exceeds enumeration cap " +
                              std::to_string(cap));
  }
  return MaskSetRange(length, k, static_cast<std::uint64_t>(count));
}

}  // namespace maskcert
