#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coklab/universal.hpp"

using namespace coklab;

namespace {
const PGroupType kTrivial2(2, Partition{});
const PGroupType kZ2(2, Partition({1}));
const PGroupType kKlein(2, Partition({1, 1}));
}  // namespace

TEST_CASE("truncated products hit the known constants") {
  // The truncation tail bound must bracket the reference values.
  LimitFormulaResult c2 = truncated_product(2, 1, 0);
  CHECK(c2.tail_bound < 1e-12L);
  CHECK(std::abs(c2.value - 0.28878809508660242L) <= c2.tail_bound);

  LimitFormulaResult c3 = truncated_product(3, 1, 0);
  CHECK(c3.tail_bound < 1e-12L);
  CHECK(std::abs(c3.value - 0.56012607792794934L) <= c3.tail_bound);

  LimitFormulaResult s2 = truncated_product(2, 2, -1);
  CHECK(s2.tail_bound < 1e-12L);
  CHECK(std::abs(s2.value - 0.41942244179510748L) <= s2.tail_bound);

  // Single-term family: (1 - q) to machine precision.
  LimitFormulaResult one = truncated_product(2, 30, 0);
  CHECK(std::abs(one.value - (1.0L - std::exp2(-30.0L))) < 1e-15L);

  CHECK_THROWS_AS(truncated_product(2, 0, 5), Error);
  CHECK_THROWS_AS(truncated_product(2, 1, -1), Error);
}

TEST_CASE("infinite-product split identity") {
  // prod(1 - p^-i) = prod(1 - p^-(2i)) * prod(1 - p^-(2i-1)), within the
  // combined truncation tails.
  for (std::uint64_t p : {2ull, 3ull, 5ull}) {
    LimitFormulaResult all = truncated_product(p, 1, 0);
    LimitFormulaResult even = truncated_product(p, 2, 0);
    LimitFormulaResult odd = truncated_product(p, 2, -1);
    long double tol = all.tail_bound + even.tail_bound + odd.tail_bound + 1e-15L;
    CHECK(std::abs(all.value - even.value * odd.value) < tol);
  }
}

TEST_CASE("cokernel limit probabilities") {
  CHECK(std::abs(cokernel_limit_prob(LimitKind::NonSymmetric, kTrivial2).value -
                 0.288788095L) < 1e-8L);
  CHECK(std::abs(cokernel_limit_prob(LimitKind::Symmetric, kTrivial2).value -
                 0.419422442L) < 1e-8L);
  // Non-square types have zero alternating mass.
  CHECK(cokernel_limit_prob(LimitKind::AlternatingEven, PGroupType(3, Partition({1}))).value ==
        0);
  CHECK(cokernel_limit_prob(LimitKind::AlternatingOdd, kZ2).value == 0);
  // Alternating even, trivial H: same constant as the symmetric case.
  CHECK(std::abs(cokernel_limit_prob(LimitKind::AlternatingEven, kTrivial2).value -
                 0.419422442L) < 1e-8L);
  // Alternating odd, trivial H: prod_{i>=2}(1 - 2^(1-2i)) = 0.419.../0.5.
  CHECK(std::abs(cokernel_limit_prob(LimitKind::AlternatingOdd, kTrivial2).value -
                 0.8388448835902150L) < 1e-8L);
}

TEST_CASE("sandpile limits") {
  CHECK(std::abs(sandpile_limit_prob(kTrivial2).value - 0.419422442L) < 1e-8L);
  CHECK(std::abs(sandpile_limit_prob(kZ2).value - 0.209711221L) < 1e-8L);
  CHECK(std::abs(sandpile_limit_prob(kKlein).value - 0.069903740L) < 1e-8L);
}

TEST_CASE("rank limit probabilities") {
  CHECK(std::abs(rank_limit_prob(LimitKind::NonSymmetric, 2, 0).value - 0.288788095L) <
        1e-8L);
  CHECK(std::abs(rank_limit_prob(LimitKind::Symmetric, 2, 0).value - 0.419422442L) < 1e-8L);
  // Normalization within 1e-6 after ten coranks (non-symmetric, p=2).
  long double total = 0;
  for (int k = 0; k <= 10; ++k) total += rank_limit_prob(LimitKind::NonSymmetric, 2, k).value;
  CHECK(std::abs(total - 1.0L) < 1e-6L);
}

TEST_CASE("rank distributions are proper for all four families") {
  for (std::uint64_t p : {2ull, 3ull})
    for (LimitKind k : {LimitKind::NonSymmetric, LimitKind::Symmetric,
                        LimitKind::AlternatingEven, LimitKind::AlternatingOdd})
      CHECK(std::abs(rank_limit_tail(k, p, 0).value - 1.0L) < 1e-9L);
}

TEST_CASE("corank-zero equals trivial-cokernel in every class") {
  for (std::uint64_t p : {2ull, 3ull}) {
    PGroupType triv(p, Partition{});
    CHECK(std::abs(cokernel_limit_prob(LimitKind::NonSymmetric, triv).value -
                   rank_limit_prob(LimitKind::NonSymmetric, p, 0).value) < 1e-12L);
    CHECK(std::abs(cokernel_limit_prob(LimitKind::Symmetric, triv).value -
                   rank_limit_prob(LimitKind::Symmetric, p, 0).value) < 1e-12L);
    CHECK(std::abs(cokernel_limit_prob(LimitKind::AlternatingEven, triv).value -
                   rank_limit_prob(LimitKind::AlternatingEven, p, 0).value) < 1e-12L);
  }
}

TEST_CASE("moment limits") {
  CHECK(moment_limit(MomentKind::NonSymmetric, kKlein) == 1);
  CHECK(moment_limit(MomentKind::Symmetric, kKlein) == 2);
  CHECK(moment_limit(MomentKind::Alternating, kZ2) == 2);
  CHECK(moment_limit(MomentKind::Graph, kZ2) == 1);
  CHECK(moment_limit(MomentKind::Graph, kKlein) == 2);
}

TEST_CASE("multi-prime limits") {
  AbGroupType trivial;
  LimitFormulaResult r = multi_prime_limit_prob(LimitKind::NonSymmetric, trivial, {2, 3});
  CHECK(std::abs(r.value - 0.161756880L) < 1e-6L);

  AbGroupType z6(std::map<std::uint64_t, Partition>{{2, Partition({1})}, {3, Partition({1})}});
  LimitFormulaResult rz6 = multi_prime_limit_prob(LimitKind::NonSymmetric, z6, {2, 3});
  // 1/|Aut(Z/2)| * C_2 * 1/|Aut(Z/3)| * C_3.
  CHECK(std::abs(rz6.value - 0.288788095L * 0.560126078L / 2) < 1e-7L);

  CHECK_THROWS_AS(multi_prime_limit_prob(LimitKind::NonSymmetric, z6, {2}), Error);
}

TEST_CASE("alternating-even mass concentrates on the cyclic ladder") {
  // P over H = (Z/2^e)^2 follows C * (4/3) * 2^-e; the first few terms alone
  // already carry most of the distribution.
  long double c = truncated_product(2, 2, -1).value;
  long double expect1 = cokernel_limit_prob(LimitKind::AlternatingEven,
                                            PGroupType(2, Partition({1, 1})))
                            .value;
  CHECK(std::abs(expect1 - c * 4 / 6) < 1e-10L);  // |H|/|Sp| = 4/6
}
