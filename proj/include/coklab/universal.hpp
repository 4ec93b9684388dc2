#pragma once

#include <cstdint>
#include <set>

#include "coklab/groups.hpp"

namespace coklab {

enum class LimitKind { NonSymmetric, Symmetric, AlternatingEven, AlternatingOdd };
enum class MomentKind { NonSymmetric, Symmetric, Alternating, Graph };

LimitKind limit_kind_from_name(const std::string& name);

// High-precision value with an explicit truncation tail bound.
struct LimitFormulaResult {
  long double value = 0;
  int truncation_index = 0;
  long double tail_bound = 0;
};

// prod_{i >= 1} (1 - p^-(a*i + b)), truncated once the geometric bound on the
// log-tail drops below tol. Requires a >= 1 and a + b >= 1 so every term lies
// in (0, 1). Throws NonconvergentSpec otherwise.
LimitFormulaResult truncated_product(std::uint64_t p, int a, int b, long double tol = 1e-12L);

// Limiting cokernel distribution for the three matrix symmetry classes (the
// alternating class split by ambient parity).
LimitFormulaResult cokernel_limit_prob(LimitKind kind, const PGroupType& h);

// Limiting corank-k probabilities over F_p.
LimitFormulaResult rank_limit_prob(LimitKind kind, std::uint64_t p, int k);

// Tail sum_{j >= k} rank_limit_prob(kind, p, j).
LimitFormulaResult rank_limit_tail(LimitKind kind, std::uint64_t p, int k);

// Sandpile-group distribution (identical formula to the symmetric case).
LimitFormulaResult sandpile_limit_prob(const PGroupType& h);

// lim E(#Sur(cok, G)): 1, |wedge^2 G|, |Sym^2 G|, |wedge^2 G| by kind.
std::uint64_t moment_limit(MomentKind kind, const PGroupType& g);

// Multi-prime extension: product of per-prime ingredients over the given
// prime set. Throws MissingPrime when a divisor of |H| lies outside it.
LimitFormulaResult multi_prime_limit_prob(LimitKind kind, const AbGroupType& h,
                                          const std::set<std::uint64_t>& primes);

}  // namespace coklab
