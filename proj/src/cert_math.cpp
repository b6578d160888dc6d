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

#include "maskcert/cert_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "maskcert/errors.hpp"

namespace maskcert {
namespace {

using Float = boost::multiprecision::cpp_bin_float_50;

constexpr double kBisectionTolerance = 1e-9;

// Row n of Pascal's triangle from index `from` onwards.
std::vector<BigInt> PascalRowTail(std::uint64_t n, std::uint64_t from) {
  std::vector<BigInt> row;
  row.reserve(n - from + 1);
  BigInt c = Binomial(static_cast<std::int64_t>(n),
                      static_cast<std::int64_t>(from));
  for (std::uint64_t j = from; j <= n; ++j) {
    row.push_back(c);
    c = c * (n - j) / (j + 1);
  }
  return row;
}

// P(Binomial(n, p) >= from) with coefficients C(n, from..n).
Float UpperTail(const std::vector<Float>& coefficients, std::uint64_t n,
                std::uint64_t from, const Float& p) {
  if (p >= 1) return Float(1);
  const Float q = 1 - p;
  const std::uint64_t span = n - from;
  std::vector<Float> q_pow(span + 1);
  q_pow[0] = 1;
  for (std::uint64_t i = 1; i <= span; ++i) q_pow[i] = q_pow[i - 1] * q;
  Float p_pow = boost::multiprecision::pow(p, static_cast<int>(from));
  Float total = 0;
  for (std::uint64_t j = from; j <= n; ++j) {
    total += coefficients[j - from] * p_pow * q_pow[n - j];
    p_pow *= p;
  }
  return total;
}

bool HoldsAt(const Rational& p_lower, BetaMode beta_mode, std::size_t length,
             std::size_t masked, std::size_t rho) {
  return ConditionHolds(
      {p_lower, beta_mode, Delta({length, masked, rho})});
}

}  // namespace

BigInt Binomial(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt result = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;
  }
  return result;
}

Rational ToRational(double value) {
  if (!std::isfinite(value)) {
    throw InvalidArgument("cannot convert non-finite value to rational");
  }
  int exponent = 0;
  const double mantissa = std::frexp(value, &exponent);
  // mantissa * 2^53 is an exact integer.
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational result = Rational(BigInt(scaled));
  if (exponent >= 0) {
    result *= Rational(BigInt(1) << exponent);
  } else {
    result /= Rational(BigInt(1) << -exponent);
  }
  return result;
}

double ToDouble(const Rational& value) {
  return static_cast<double>(value);
}

Rational Delta(const DeltaQuery& query) {
  const auto [length, masked, perturbed] = query;
  if (masked > length || perturbed > length) {
    throw InvalidDeltaQuery("delta query out of range: L=" +
                            std::to_string(length) +
                            " k=" + std::to_string(masked) +
                            " rho=" + std::to_string(perturbed));
  }
  if (perturbed > masked) return Rational(1);
  const auto L = static_cast<std::int64_t>(length);
  const auto kept = static_cast<std::int64_t>(length - masked);
  const auto rho = static_cast<std::int64_t>(perturbed);
  return Rational(1) - Rational(Binomial(L - rho, kept), Binomial(L, kept));
}

std::string BetaModeName(BetaMode mode) {
  return mode == BetaMode::kOne ? "one" : "p_lower";
}

BetaMode ParseBetaMode(const std::string& name) {
  if (name == "one") return BetaMode::kOne;
  if (name == "p_lower") return BetaMode::kPLower;
  throw InvalidArgument("unknown beta mode '" + name +
                        "' (expected one or p_lower)");
}

double ClopperPearsonLower(std::uint64_t successes,
                           const ConfidenceSpec& spec) {
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) {
    throw InvalidArgument("alpha must lie in (0, 1)");
  }
  if (spec.n == 0) throw InvalidArgument("sample count must be positive");
  if (successes > spec.n) {
    throw InvalidArgument("successes exceed sample count");
  }
  if (successes == 0) return 0.0;

  std::vector<Float> coefficients;
  for (const BigInt& c : PascalRowTail(spec.n, successes)) {
    coefficients.emplace_back(c);
  }
  const Float alpha(spec.alpha);
  double lo = 0.0;
  double hi = 1.0;
  // The tail is increasing in p; keep tail(lo) <= alpha < tail(hi).
  while (hi - lo > kBisectionTolerance) {
    const double mid = lo + (hi - lo) / 2;
    if (UpperTail(coefficients, spec.n, successes, Float(mid)) > alpha) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

Rational BinomialTestPValue(std::uint64_t successes, std::uint64_t n) {
  if (successes > n) return Rational(0);
  BigInt tail = 0;
  for (const BigInt& c : PascalRowTail(n, successes)) tail += c;
  return Rational(tail, BigInt(1) << n);
}

bool ConditionHolds(const CertCondition& condition) {
  const Rational beta = condition.beta_mode == BetaMode::kOne
                            ? Rational(1)
                            : condition.p_lower;
  return condition.p_lower - beta * condition.delta > Rational(1, 2);
}

std::vector<ConditionRow> ConditionTable(const Rational& p_lower,
                                         BetaMode beta_mode,
                                         std::size_t length,
                                         std::size_t masked) {
  std::vector<ConditionRow> rows;
  rows.reserve(length + 1);
  for (std::size_t rho = 0; rho <= length; ++rho) {
    Rational delta = Delta({length, masked, rho});
    const bool holds = ConditionHolds({p_lower, beta_mode, delta});
    rows.push_back({rho, std::move(delta), holds});
  }
  return rows;
}

std::optional<std::size_t> MaxCertifiedRho(const Rational& p_lower,
                                           BetaMode beta_mode,
                                           std::size_t length,
                                           std::size_t masked) {
  if (!HoldsAt(p_lower, beta_mode, length, masked, 0)) return std::nullopt;
  // Invariant: holds(lo), and everything above hi fails.
  std::size_t lo = 0;
  std::size_t hi = length;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    if (HoldsAt(p_lower, beta_mode, length, masked, mid)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

std::optional<std::size_t> MaxCertifiedRhoScan(const Rational& p_lower,
                                               BetaMode beta_mode,
                                               std::size_t length,
                                               std::size_t masked) {
  std::optional<std::size_t> best;
  for (std::size_t rho = 0; rho <= length; ++rho) {
    if (!HoldsAt(p_lower, beta_mode, length, masked, rho)) break;
    best = rho;
  }
  return best;
}

std::optional<Rate> RhoToPercentRadius(std::optional<std::size_t> rho,
                                       std::size_t length,
                                       std::span<const Rate> grid) {
  if (!rho) return std::nullopt;
  Rate best = Rate::FromBasisPoints(0);
  for (const Rate d : grid) {
    if (PerturbCount(length, d) <= *rho) best = std::max(best, d);
  }
  return best;
}

}  // namespace maskcert
