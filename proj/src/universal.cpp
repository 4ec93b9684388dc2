#include "coklab/universal.hpp"

#include <cmath>

namespace coklab {

LimitKind limit_kind_from_name(const std::string& name) {
  if (name == "non-symmetric" || name == "nonsymmetric" || name == "general")
    return LimitKind::NonSymmetric;
  if (name == "symmetric" || name == "sandpile" || name == "graph") return LimitKind::Symmetric;
  if (name == "alternating-even" || name == "alternating") return LimitKind::AlternatingEven;
  if (name == "alternating-odd") return LimitKind::AlternatingOdd;
  fail(Errc::BadConfig, "unknown limit kind: " + name);
}

LimitFormulaResult truncated_product(std::uint64_t p, int a, int b, long double tol) {
  if (p < 2 || a < 1 || a + b < 1)
    fail(Errc::NonconvergentSpec, "product terms must be 1 - p^-(a*i+b) with a*1+b >= 1");
  const long double lp = std::log(static_cast<long double>(p));
  const long double qa = std::exp(-static_cast<long double>(a) * lp);  // p^-a
  long double log_value = 0;
  int i = 1;
  LimitFormulaResult out;
  for (;; ++i) {
    long double x = std::exp(-static_cast<long double>(a * i + b) * lp);
    log_value += std::log1p(-x);
    long double xnext = x * qa;
    // sum_{j > i} -log(1 - x_j) <= (x_{i+1} / (1 - p^-a)) / (1 - x_{i+1})
    long double tail_log = xnext / (1 - qa) / (1 - xnext);
    if (tail_log < tol / 2) {
      out.value = std::exp(log_value);
      out.truncation_index = i;
      // Truncation tail plus an allowance for accumulated rounding.
      out.tail_bound = out.value * tail_log * 1.0000001L + 5e-16L;
      return out;
    }
    if (i > 100000) fail(Errc::NonconvergentSpec, "product failed to converge");
  }
}

LimitFormulaResult cokernel_limit_prob(LimitKind kind, const PGroupType& h) {
  LimitFormulaResult out;
  switch (kind) {
    case LimitKind::NonSymmetric: {
      LimitFormulaResult prod = truncated_product(h.p, 1, 0);
      long double scale = 1.0L / static_cast<long double>(aut_order(h));
      out.value = scale * prod.value;
      out.truncation_index = prod.truncation_index;
      out.tail_bound = scale * prod.tail_bound;
      return out;
    }
    case LimitKind::Symmetric: {
      LimitFormulaResult prod = truncated_product(h.p, 2, -1);
      long double scale = static_cast<long double>(count_symmetric_perfect_pairings(h)) /
                          (static_cast<long double>(h.order()) *
                           static_cast<long double>(aut_order(h)));
      out.value = scale * prod.value;
      out.truncation_index = prod.truncation_index;
      out.tail_bound = scale * prod.tail_bound;
      return out;
    }
    case LimitKind::AlternatingEven: {
      if (!h.is_square()) return out;  // 0
      LimitFormulaResult prod = truncated_product(h.p, 2, -1);
      long double scale = static_cast<long double>(h.order()) /
                          static_cast<long double>(sp_order(h));
      out.value = scale * prod.value;
      out.truncation_index = prod.truncation_index;
      out.tail_bound = scale * prod.tail_bound;
      return out;
    }
    case LimitKind::AlternatingOdd: {
      if (!h.is_square()) return out;  // 0
      // prod_{i >= 2} (1 - p^(1-2i)) = prod_{i >= 1} (1 - p^-(2i+1))
      LimitFormulaResult prod = truncated_product(h.p, 2, 1);
      long double scale = 1.0L / static_cast<long double>(sp_order(h));
      out.value = scale * prod.value;
      out.truncation_index = prod.truncation_index;
      out.tail_bound = scale * prod.tail_bound;
      return out;
    }
  }
  return out;
}

LimitFormulaResult rank_limit_prob(LimitKind kind, std::uint64_t p, int k) {
  if (k < 0) fail(Errc::BadConfig, "corank must be >= 0");
  const long double lp = std::log(static_cast<long double>(p));
  auto pow_p = [&](long double e) { return std::exp(-e * lp); };  // p^-e
  LimitFormulaResult out;
  switch (kind) {
    case LimitKind::NonSymmetric: {
      // p^(-k^2) prod_{i>=1}(1 - p^-i) / prod_{i=1..k}(1 - p^-i)^2
      LimitFormulaResult prod = truncated_product(p, 1, 0);
      long double denom = 1;
      for (int i = 1; i <= k; ++i) {
        long double t = 1 - pow_p(i);
        denom *= t * t;
      }
      long double scale = pow_p(static_cast<long double>(k) * k) / denom;
      out.value = scale * prod.value;
      out.truncation_index = prod.truncation_index;
      out.tail_bound = scale * prod.tail_bound;
      return out;
    }
    case LimitKind::Symmetric: {
      // p^(-k(k+1)/2) prod_{i=k+1..inf}(1 - p^-i) / prod_{i>=1}(1 - p^-2i)
      LimitFormulaResult num = truncated_product(p, 1, k);
      LimitFormulaResult den = truncated_product(p, 2, 0);
      long double scale = pow_p(static_cast<long double>(k) * (k + 1) / 2);
      out.value = scale * num.value / den.value;
      out.truncation_index = std::max(num.truncation_index, den.truncation_index);
      out.tail_bound = out.value * 3e-12L;
      return out;
    }
    case LimitKind::AlternatingEven: {
      // p^(-k(2k-1)) prod_{i=k..inf}(1 - p^-(2i+1)) / prod_{i=1..k}(1 - p^-2i)
      LimitFormulaResult num = truncated_product(p, 2, 2 * k - 1);
      long double denom = 1;
      for (int i = 1; i <= k; ++i) denom *= 1 - pow_p(2 * i);
      long double scale = pow_p(static_cast<long double>(k) * (2 * k - 1)) / denom;
      out.value = scale * num.value;
      out.truncation_index = num.truncation_index;
      out.tail_bound = scale * num.tail_bound;
      return out;
    }
    case LimitKind::AlternatingOdd: {
      // p^(-k(2k+1)) prod_{i=k+1..inf}(1 - p^-(2i+1)) / prod_{i=1..k}(1 - p^-2i)
      LimitFormulaResult num = truncated_product(p, 2, 2 * k + 1);
      long double denom = 1;
      for (int i = 1; i <= k; ++i) denom *= 1 - pow_p(2 * i);
      long double scale = pow_p(static_cast<long double>(k) * (2 * k + 1)) / denom;
      out.value = scale * num.value;
      out.truncation_index = num.truncation_index;
      out.tail_bound = scale * num.tail_bound;
      return out;
    }
  }
  return out;
}

LimitFormulaResult rank_limit_tail(LimitKind kind, std::uint64_t p, int k) {
  LimitFormulaResult out;
  for (int j = k;; ++j) {
    LimitFormulaResult term = rank_limit_prob(kind, p, j);
    out.value += term.value;
    out.tail_bound += term.tail_bound;
    out.truncation_index = j;
    if (term.value < 1e-15L && j > k) break;
  }
  return out;
}

LimitFormulaResult sandpile_limit_prob(const PGroupType& h) {
  return cokernel_limit_prob(LimitKind::Symmetric, h);
}

std::uint64_t moment_limit(MomentKind kind, const PGroupType& g) {
  switch (kind) {
    case MomentKind::NonSymmetric: return 1;
    case MomentKind::Symmetric: return ext_square_order(g);
    case MomentKind::Alternating: return sym_square_order(g);
    case MomentKind::Graph: return ext_square_order(g);
  }
  return 1;
}

LimitFormulaResult multi_prime_limit_prob(LimitKind kind, const AbGroupType& h,
                                          const std::set<std::uint64_t>& primes) {
  for (const auto& [p, lam] : h.components)
    if (!primes.count(p))
      fail(Errc::MissingPrime,
           "prime " + std::to_string(p) + " divides |H| but is not in the prime set");
  LimitFormulaResult out;
  out.value = 1;
  long double rel_tail = 0;
  for (std::uint64_t p : primes) {
    if (!is_prime_u64(p)) fail(Errc::BadConfig, "non-prime in prime set");
    LimitFormulaResult f = cokernel_limit_prob(kind, h.primary(p));
    out.value *= f.value;
    if (f.value > 0) rel_tail += f.tail_bound / f.value;
    out.truncation_index = std::max(out.truncation_index, f.truncation_index);
  }
  out.tail_bound = out.value * rel_tail * 1.0000001L;
  return out;
}

}  // namespace coklab
