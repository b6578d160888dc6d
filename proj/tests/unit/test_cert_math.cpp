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

#include <cmath>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "maskcert/cert_math.hpp"
#include "maskcert/errors.hpp"
#include "maskcert/rng.hpp"
#include "maskcert/text.hpp"

using namespace maskcert;

namespace {

// Pascal's triangle in big integers, the oracle for Binomial.
std::vector<std::vector<BigInt>> PascalTriangle(int rows) {
  std::vector<std::vector<BigInt>> t(rows + 1);
  for (int n = 0; n <= rows; ++n) {
    t[n].assign(n + 1, BigInt(1));
    for (int k = 1; k < n; ++k) t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
  }
  return t;
}

// Fraction of k-subsets of [0, L) that leave some position of
// {0, ..., rho-1} unmasked, counted by enumeration.
Rational EnumeratedDelta(std::size_t L, std::size_t k, std::size_t rho) {
  std::uint64_t miss = 0, total = 0;
  for (const MaskSet& s : EnumerateMaskSets(L, k)) {
    ++total;
    for (std::size_t j = 0; j < rho; ++j) {
      if (!s.Contains(j)) {
        ++miss;
        break;
      }
    }
  }
  return Rational(miss, total);
}

double BoostLowerBound(std::uint64_t n, std::uint64_t k, double alpha) {
  return boost::math::binomial_distribution<double>::find_lower_bound_on_p(
      static_cast<double>(n), static_cast<double>(k), alpha);
}

}  // namespace

TEST_CASE("binomial: worked examples") {
  CHECK(Binomial(10, 5) == 252);
  CHECK(Binomial(9, 5) == 126);
  CHECK(Binomial(17, 0) == 1);
  CHECK(Binomial(5, 6) == 0);
  CHECK(Binomial(5, -1) == 0);
  CHECK(Binomial(100, 50) == BigInt("100891344545564193334812497256"));
}

TEST_CASE("binomial: matches Pascal's triangle up to n = 120") {
  const auto t = PascalTriangle(120);
  for (int n = 0; n <= 120; ++n) {
    for (int k = 0; k <= n; ++k) REQUIRE(Binomial(n, k) == t[n][k]);
  }
}

TEST_CASE("delta: worked examples") {
  CHECK(Delta({10, 5, 1}) == Rational(1, 2));
  CHECK(Delta({10, 9, 1}) == Rational(1, 10));
  CHECK(Delta({10, 10, 7}) == 0);
  CHECK(Delta({8, 3, 0}) == 0);
  CHECK(Delta({10, 3, 4}) == 1);  // rho > k: coincidence impossible
  CHECK_THROWS_AS(Delta({10, 11, 0}), InvalidDeltaQuery);
  CHECK_THROWS_AS(Delta({10, 5, 11}), InvalidDeltaQuery);
}

TEST_CASE("delta: equals the enumeration fraction for L <= 10") {
  for (std::size_t L = 0; L <= 10; ++L) {
    for (std::size_t k = 0; k <= L; ++k) {
      for (std::size_t rho = 0; rho <= L; ++rho) {
        REQUIRE(Delta({L, k, rho}) == EnumeratedDelta(L, k, rho));
      }
    }
  }
}

TEST_CASE("delta: monotone in rho and k, zero at rho = 0") {
  for (std::size_t L = 1; L <= 12; ++L) {
    for (std::size_t k = 0; k <= L; ++k) {
      CHECK(Delta({L, k, 0}) == 0);
      for (std::size_t rho = 1; rho <= L; ++rho) {
        CHECK(Delta({L, k, rho - 1}) <= Delta({L, k, rho}));
        if (k > 0) CHECK(Delta({L, k, rho}) <= Delta({L, k - 1, rho}));
      }
    }
  }
}

TEST_CASE("clopper_pearson: worked examples") {
  CHECK(ClopperPearsonLower(0, {0.05, 37}) == 0.0);
  CHECK(ClopperPearsonLower(500, {0.05, 500}) ==
        doctest::Approx(std::pow(0.05, 1.0 / 500)).epsilon(1e-8));
  CHECK(ClopperPearsonLower(500, {0.05, 500}) == doctest::Approx(0.99403).epsilon(1e-4));
  CHECK(ClopperPearsonLower(450, {0.05, 500}) ==
        doctest::Approx(0.8751341925861911).epsilon(1e-8));
}

TEST_CASE("clopper_pearson: agrees with the Boost.Math binomial bound") {
  for (std::uint64_t n : {1ULL, 7ULL, 50ULL, 200ULL, 500ULL}) {
    for (double alpha : {0.001, 0.05, 0.2}) {
      for (std::uint64_t k = 1; k <= n; k += (n > 50 ? 13 : 1)) {
        const double ours = ClopperPearsonLower(k, {alpha, n});
        CHECK(ours == doctest::Approx(BoostLowerBound(n, k, alpha)).epsilon(1e-7));
        CHECK(ours <= static_cast<double>(k) / static_cast<double>(n));
      }
    }
  }
}

TEST_CASE("clopper_pearson: monotone in successes") {
  double previous = -1.0;
  for (std::uint64_t k = 0; k <= 200; ++k) {
    const double bound = ClopperPearsonLower(k, {0.05, 200});
    CHECK(bound >= previous);
    previous = bound;
  }
}

TEST_CASE("clopper_pearson: rejects bad arguments") {
  CHECK_THROWS_AS(ClopperPearsonLower(5, {0.05, 4}), InvalidArgument);
  CHECK_THROWS_AS(ClopperPearsonLower(1, {0.0, 4}), InvalidArgument);
  CHECK_THROWS_AS(ClopperPearsonLower(1, {1.0, 4}), InvalidArgument);
  CHECK_THROWS_AS(ClopperPearsonLower(0, {0.05, 0}), InvalidArgument);
}

TEST_CASE("binomial test p-value") {
  CHECK(ToDouble(BinomialTestPValue(52, 100)) ==
        doctest::Approx(0.38217671720133345).epsilon(1e-12));
  CHECK(BinomialTestPValue(0, 10) == 1);
  CHECK(BinomialTestPValue(10, 10) == Rational(1, 1024));
}

TEST_CASE("condition_holds: worked examples (strict inequality)") {
  CHECK(ConditionHolds({ToRational(0.994), BetaMode::kOne, ToRational(0.4)}));
  CHECK_FALSE(ConditionHolds({Rational(7, 10), BetaMode::kOne, Rational(1, 5)}));
  CHECK_FALSE(ConditionHolds({Rational(1, 2), BetaMode::kOne, Rational(0)}));
  // beta = p_lower: 0.8 - 0.8 * 0.3 = 0.56 > 0.5 but 0.8 - 0.3 = 0.5 is not.
  CHECK(ConditionHolds({Rational(4, 5), BetaMode::kPLower, Rational(3, 10)}));
  CHECK_FALSE(ConditionHolds({Rational(4, 5), BetaMode::kOne, Rational(3, 10)}));
}

TEST_CASE("max_certified_rho: worked examples") {
  CHECK(MaxCertifiedRho(ToRational(0.994), BetaMode::kOne, 10, 9) == 4u);
  CHECK(MaxCertifiedRho(Rational(7, 10), BetaMode::kOne, 10, 9) == 1u);
  CHECK_FALSE(MaxCertifiedRho(Rational(2, 5), BetaMode::kOne, 10, 9).has_value());
  CHECK_FALSE(MaxCertifiedRho(Rational(2, 5), BetaMode::kPLower, 6, 3).has_value());
}

TEST_CASE("property: binary search equals scan; condition table is a prefix of trues") {
  RngStream rng(11);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t L = 1 + rng.Below(40);
    const std::size_t k = rng.Below(L + 1);
    const Rational p(static_cast<long long>(rng.Below(1001)), 1000);
    const BetaMode mode = rng.Below(2) ? BetaMode::kOne : BetaMode::kPLower;
    const auto fast = MaxCertifiedRho(p, mode, L, k);
    REQUIRE(fast == MaxCertifiedRhoScan(p, mode, L, k));

    const auto table = ConditionTable(p, mode, L, k);
    REQUIRE(table.size() == L + 1);
    std::size_t trues = 0;
    while (trues < table.size() && table[trues].holds) ++trues;
    for (std::size_t i = trues; i < table.size(); ++i) CHECK_FALSE(table[i].holds);
    CHECK(fast == (trues == 0 ? std::nullopt : std::optional<std::size_t>(trues - 1)));
  }
}

TEST_CASE("rho_to_percent_radius: worked examples") {
  const auto grid = DefaultScaleGrid();
  CHECK(RhoToPercentRadius(1, 10, grid) == Rate::FromPercent(10));
  CHECK(RhoToPercentRadius(0, 10, grid) == Rate::FromPercent(9));
  CHECK_FALSE(RhoToPercentRadius(std::nullopt, 10, grid).has_value());
  // Certified, but even 1% already allows one word: radius 0.
  CHECK(RhoToPercentRadius(0, 150, grid) == Rate::FromPercent(0));
  CHECK(RhoToPercentRadius(3, 40, grid) == Rate::FromPercent(9));
}

TEST_CASE("beta mode names round-trip") {
  CHECK(ParseBetaMode(BetaModeName(BetaMode::kOne)) == BetaMode::kOne);
  CHECK(ParseBetaMode("p_lower") == BetaMode::kPLower);
  CHECK_THROWS_AS(ParseBetaMode("two"), InvalidArgument);
}

TEST_CASE("ToRational is exact") {
  CHECK(ToRational(0.5) == Rational(1, 2));
  CHECK(ToRational(0.1) != Rational(1, 10));  // 0.1 is not a dyadic rational
  CHECK(ToDouble(ToRational(0.1)) == 0.1);
}
