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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "maskcert/rng.hpp"

namespace maskcert {

inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

// A fraction in [0, 1] stored as integer basis points. Mask rates and
// perturbation scales are both Rates so that the integer word counts derived
// from them are exact and identical everywhere they are computed.
class Rate {
 public:
  static constexpr std::uint32_t kScale = 10'000;

  constexpr Rate() = default;

  // Rounds to the nearest basis point. Throws InvalidArgument outside [0, 1].
  static Rate FromFraction(double fraction);
  static Rate FromBasisPoints(std::uint32_t bp);
  static Rate FromPercent(std::uint32_t percent) {
    return FromBasisPoints(percent * 100);
  }

  constexpr std::uint32_t basis_points() const { return bp_; }
  constexpr double fraction() const {
    return static_cast<double>(bp_) / kScale;
  }
  constexpr double percent() const { return static_cast<double>(bp_) / 100.0; }

  constexpr auto operator<=>(const Rate&) const = default;

 private:
  constexpr explicit Rate(std::uint32_t bp) : bp_(bp) {}
  std::uint32_t bp_ = 0;
};

// The 1%..10% grid of perturbation scales.
std::vector<Rate> DefaultScaleGrid();
// The 10%..90% grid of mask rates.
std::vector<Rate> DefaultMaskRateGrid();

class Sentence {
 public:
  // Rejects empty token lists, empty tokens, tokens containing whitespace and
  // the reserved mask marker.
  static Sentence FromTokens(std::vector<std::string> tokens);

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t length() const { return tokens_.size(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }

  // Tokens joined by single spaces.
  std::string Detokenize() const;

  friend bool operator==(const Sentence&, const Sentence&) = default;

 private:
  explicit Sentence(std::vector<std::string> tokens)
      : tokens_(std::move(tokens)) {}
  std::vector<std::string> tokens_;
};

class MaskSet {
 public:
  MaskSet() = default;
  // Throws InvalidMaskCount on duplicates or out-of-range indices.
  MaskSet(std::vector<std::size_t> indices, std::size_t owner_length);

  // Sorted ascending.
  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t owner_length() const { return owner_length_; }
  std::size_t size() const { return indices_.size(); }
  bool Contains(std::size_t index) const;

  friend bool operator==(const MaskSet&, const MaskSet&) = default;
  friend auto operator<=>(const MaskSet& a, const MaskSet& b) {
    return a.indices_ <=> b.indices_;
  }

 private:
  std::vector<std::size_t> indices_;
  std::size_t owner_length_ = 0;
};

class MaskedSentence {
 public:
  const std::vector<std::string>& tokens() const { return tokens_; }
  const MaskSet& mask_set() const { return mask_set_; }
  std::size_t origin_length() const { return tokens_.size(); }
  bool IsMasked(std::size_t i) const { return mask_set_.Contains(i); }

  std::string Detokenize() const;

  friend bool operator==(const MaskedSentence& a, const MaskedSentence& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  friend MaskedSentence ApplyMask(const Sentence&, const MaskSet&);
  MaskedSentence(std::vector<std::string> tokens, MaskSet mask_set)
      : tokens_(std::move(tokens)), mask_set_(std::move(mask_set)) {}

  std::vector<std::string> tokens_;
  MaskSet mask_set_;
};

// Whitespace segmentation. Throws EmptyInput on blank text and ReservedToken
// if any token is the mask marker.
Sentence Tokenize(std::string_view text);

// Number of masked words for mask rate m: half-up rounding of m*L, at least 1
// when m > 0, never more than L.
std::size_t MaskCount(std::size_t length, Rate mask_rate);

// The adversary's word budget floor(d*L) at perturbation scale d.
std::size_t PerturbCount(std::size_t length, Rate scale);

// Uniform k-subset of [0, length). Throws InvalidMaskCount when k > length.
MaskSet SampleMaskSet(std::size_t length, std::size_t k, RngStream& stream);

// Throws MaskLengthMismatch when the mask set belongs to another length.
MaskedSentence ApplyMask(const Sentence& sentence, const MaskSet& mask_set);

// Lazy lexicographic sequence of every k-subset of [0, length).
class MaskSetRange {
 public:
  class Iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = MaskSet;
    using difference_type = std::ptrdiff_t;
    using pointer = const MaskSet*;
    using reference = const MaskSet&;

    Iterator() = default;
    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    Iterator& operator++();
    Iterator operator++(int) {
      Iterator copy = *this;
      ++*this;
      return copy;
    }
    bool operator==(const Iterator& other) const {
      return done_ == other.done_ && (done_ || combo_ == other.combo_);
    }

   private:
    friend class MaskSetRange;
    Iterator(std::size_t length, std::size_t k);
    void Refresh();

    std::size_t length_ = 0;
    std::vector<std::size_t> combo_;
    MaskSet current_;
    bool done_ = true;
  };

  Iterator begin() const { return Iterator(length_, k_); }
  Iterator end() const { return Iterator(); }
  std::uint64_t count() const { return count_; }

 private:
  friend MaskSetRange EnumerateMaskSets(std::size_t, std::size_t,
                                        std::uint64_t);
  MaskSetRange(std::size_t length, std::size_t k, std::uint64_t count)
      : length_(length), k_(k), count_(count) {}

  std::size_t length_;
  std::size_t k_;
  std::uint64_t count_;
};

// Throws InvalidMaskCount when k > length and EnumerationTooLarge when
// C(length, k) exceeds `cap`.
MaskSetRange EnumerateMaskSets(std::size_t length, std::size_t k,
                               std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace maskcert
