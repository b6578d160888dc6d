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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "maskcert/text.hpp"

namespace maskcert {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Exact C(n, k); 0 when k < 0 or k > n.
BigInt Binomial(std::int64_t n, std::int64_t k);

// Exact value of a finite double.
Rational ToRational(double value);
double ToDouble(const Rational& value);

struct DeltaQuery {
  std::size_t length = 0;
  std::size_t masked = 0;     // k, words replaced by the mask marker
  std::size_t perturbed = 0;  // rho, words the adversary may change
};

// Probability that a uniform k-mask set leaves at least one of rho fixed
// positions unmasked:
//   1 - C(L - rho, L - k) / C(L, L - k)
// and exactly 1 when rho > k. Throws InvalidDeltaQuery if k or rho exceed L.
Rational Delta(const DeltaQuery& query);

enum class BetaMode {
  kOne,     // sound default
  kPLower,  // beta = p_lower; heuristic
};

std::string BetaModeName(BetaMode mode);
// Accepts "one" or "p_lower". Throws InvalidArgument otherwise.
BetaMode ParseBetaMode(const std::string& name);

struct ConfidenceSpec {
  double alpha = 0.05;
  std::uint64_t n = 1;
};

// Exact one-sided Clopper-Pearson lower confidence limit for a binomial
// proportion: the p at which P(Binomial(n, p) >= successes) = alpha, found by
// bisection (tolerance 1e-9, lower end returned) on exact tail sums.
double ClopperPearsonLower(std::uint64_t successes, const ConfidenceSpec& spec);

// P(Binomial(n, 1/2) >= successes), exact.
Rational BinomialTestPValue(std::uint64_t successes, std::uint64_t n);

struct CertCondition {
  Rational p_lower;
  BetaMode beta_mode = BetaMode::kOne;
  Rational delta;
};

// p_lower - beta * delta > 1/2, strict.
bool ConditionHolds(const CertCondition& condition);

struct ConditionRow {
  std::size_t rho = 0;
  Rational delta;
  bool holds = false;

  friend bool operator==(const ConditionRow&, const ConditionRow&) = default;
};

// One row per rho in [0, length].
std::vector<ConditionRow> ConditionTable(const Rational& p_lower,
                                         BetaMode beta_mode,
                                         std::size_t length,
                                         std::size_t masked);

// Largest rho whose condition holds, found by binary search over the
// monotone condition. nullopt when even rho = 0 fails.
std::optional<std::size_t> MaxCertifiedRho(const Rational& p_lower,
                                           BetaMode beta_mode,
                                           std::size_t length,
                                           std::size_t masked);

// Same result by linear scan.
std::optional<std::size_t> MaxCertifiedRhoScan(const Rational& p_lower,
                                               BetaMode beta_mode,
                                               std::size_t length,
                                               std::size_t masked);

// Largest scale in `grid` whose word budget fits within rho. A certified
// input with no qualifying grid scale gets Rate 0 (certified only at d = 0).
// nullopt means not certified.
std::optional<Rate> RhoToPercentRadius(std::optional<std::size_t> rho,
                                       std::size_t length,
                                       std::span<const Rate> grid);

}  // namespace maskcert
