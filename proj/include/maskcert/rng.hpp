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

namespace maskcert {

// SplitMix64 stream. Output depends only on (seed, position), so results are
// identical on every platform and compiler. Streams are plain values: copy one
// to fork it, derive independent per-draw streams with `Substream`.
class RngStream {
 public:
  explicit constexpr RngStream(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t Next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return Mix(state_);
  }

  // Unbiased integer in [0, bound). bound must be > 0.
  std::uint64_t Below(std::uint64_t bound) noexcept;

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform() noexcept {
    return static_cast<double>(Next() >> 11) * 0x1.0p-53;
  }

  // Independent stream for draw `index`; a pure function of (seed, index).
  static constexpr RngStream Substream(std::uint64_t seed,
                                       std::uint64_t index) noexcept {
    return RngStream(Mix(seed ^ Mix(index + 0xD1B54A32D192ED03ULL)));
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

  static constexpr std::uint64_t Mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace maskcert
