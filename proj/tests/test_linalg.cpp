#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coklab/linalg.hpp"
#include "coklab/rng.hpp"
#include "coklab/serialization.hpp"

using namespace coklab;

namespace {

ModMatrix from_rows(std::uint64_t m, std::vector<std::vector<std::uint32_t>> rows,
                    Symmetry sym = Symmetry::general) {
  ModMatrix A(static_cast<int>(rows.size()), m, sym);
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows.size(); ++j) A.at(i, j) = rows[i][j];
  return A;
}

}  // namespace

TEST_CASE("snf on diagonal and zero matrices") {
  // diag(1, p) over Z/p^2.
  ModMatrix A = from_rows(9, {{1, 0}, {0, 3}});
  CHECK(smith_normal_form(A) == std::vector<int>{0, 1});
  ModMatrix Z = from_rows(9, {{0, 0}, {0, 0}});
  CHECK(smith_normal_form(Z) == std::vector<int>{2, 2});
}

TEST_CASE("snf example over Z/9") {
  ModMatrix A = from_rows(9, {{2, 1}, {1, 2}});
  CHECK(smith_normal_form(A) == std::vector<int>{0, 1});
  CHECK(cokernel_class(A, 3, 2).capped_lambda == Partition({1}));
  CHECK(cokernel_class(A, 3, 2).saturated_parts == 0);
}

TEST_CASE("composite modulus is rejected") {
  ModMatrix A = from_rows(6, {{1, 0}, {0, 1}});
  CHECK_THROWS_AS(smith_normal_form(A), Error);
}

TEST_CASE("cokernel classes") {
  ModMatrix I = from_rows(4, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  CokernelClass c = cokernel_class(I, 2, 2);
  CHECK(c.capped_lambda.empty());
  CHECK(c.saturated_parts == 0);

  ModMatrix Z = from_rows(4, {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  CokernelClass cz = cokernel_class(Z, 2, 2);
  CHECK(cz.capped_lambda == Partition({2, 2, 2}));
  CHECK(cz.saturated_parts == 3);
  CHECK(cz.key() == "2^[2,2,2]s3");
}

TEST_CASE("rank over F_p") {
  CHECK(rank_mod_p(from_rows(2, {{1, 1}, {1, 1}}), 2) == 1);
  CHECK(rank_mod_p(from_rows(5, {{1, 0}, {0, 1}}), 5) == 2);
  CHECK(rank_mod_p(from_rows(3, {{0, 0}, {0, 0}}), 3) == 0);
  // rank + #(v >= 1) = n on random batteries.
  RngStream rng(7, 1, 0);
  for (int t = 0; t < 500; ++t) {
    ModMatrix A(4, 8, Symmetry::general);
    for (auto& x : A.a) x = rng.next_below(8);
    std::vector<int> v = smith_normal_form(A);
    int ge1 = 0;
    for (int e : v)
      if (e >= 1) ++ge1;
    CHECK(rank_mod_p(A, 2) + ge1 == 4);
  }
}

TEST_CASE("fast kernel agrees with the reference") {
  RngStream rng(99, 2, 0);
  for (auto [p, d] : std::vector<std::pair<std::uint64_t, int>>{{2, 1}, {2, 2}, {2, 3}, {3, 1},
                                                                {3, 2}, {5, 1}, {7, 2}}) {
    std::uint64_t m = checked_pow(p, d);
    for (int t = 0; t < 200; ++t) {
      int n = 1 + rng.next_below(6);
      ModMatrix A(n, m, Symmetry::general);
      for (auto& x : A.a) x = rng.next_below(static_cast<std::uint32_t>(m));
      CHECK(snf_exponents_fast(A) == smith_normal_form(A));
    }
  }
}

TEST_CASE("multi-prime cokernel splitting") {
  IntMatrix A(2);
  A.at(0, 0) = 6;
  A.at(1, 1) = 1;
  auto classes = multi_prime_cokernel(A, {{2, 2}, {3, 2}});
  CHECK(classes.at(2).capped_lambda == Partition({1}));
  CHECK(classes.at(3).capped_lambda == Partition({1}));
  CHECK(classes.at(2).saturated_parts == 0);

  IntMatrix I(3);
  for (int i = 0; i < 3; ++i) I.at(i, i) = 1;
  auto ci = multi_prime_cokernel(I, {{2, 1}, {5, 1}});
  CHECK(ci.at(2).capped_lambda.empty());
  CHECK(ci.at(5).capped_lambda.empty());

  IntMatrix Z1(1);
  auto cz = multi_prime_cokernel(Z1, {{2, 3}});
  CHECK(cz.at(2).capped_lambda == Partition({3}));
  CHECK(cz.at(2).saturated_parts == 1);
}

TEST_CASE("negative integers reduce correctly") {
  IntMatrix L(2);
  L.at(0, 0) = 2;
  L.at(0, 1) = -1;
  L.at(1, 0) = -1;
  L.at(1, 1) = 2;
  // Triangle sandpile group: Z/3.
  CokernelClass c3 = cokernel_class_int(L, 3, 2);
  CHECK(c3.capped_lambda == Partition({1}));
  CokernelClass c2 = cokernel_class_int(L, 2, 1);
  CHECK(c2.capped_lambda.empty());
}

TEST_CASE("cokernel class invariance under invertible multiplication") {
  RngStream rng(5, 3, 0);
  const std::uint64_t m = 8;
  for (int t = 0; t < 1000; ++t) {
    const int n = 3;
    ModMatrix A(n, m, Symmetry::general);
    for (auto& x : A.a) x = rng.next_below(8);
    ModMatrix U(n, m, Symmetry::general);
    do {
      for (auto& x : U.a) x = rng.next_below(8);
    } while (rank_mod_p(U, 2) < n);
    ModMatrix B(n, m, Symmetry::general);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        std::uint64_t acc = 0;
        for (int a = 0; a < n; ++a) acc += std::uint64_t(U.at(i, a)) * A.at(a, j);
        B.at(i, j) = static_cast<std::uint32_t>(acc % m);
      }
    CHECK(smith_normal_form(A) == smith_normal_form(B));
  }
}

TEST_CASE("serialization round trips") {
  ModMatrix A = from_rows(9, {{2, 1}, {1, 2}}, Symmetry::symmetric);
  sjson j = to_json(A);
  CHECK(j["modulus"] == 9);
  CHECK(j["symmetry"] == "symmetric");
  ModMatrix B = modmatrix_from_json(j);
  CHECK(B.a == A.a);

  CokernelClass c = cokernel_class(A, 3, 2);
  sjson cj = to_json(c);
  CHECK(cj.dump() == R"({"p":3,"d":2,"lambda":[1],"saturated":0})");
  CokernelClass c2 = cokclass_from_json(cj);
  CHECK(c2 == c);

  PGroupType g(2, Partition({2, 1}));
  CHECK(to_json(g).dump() == R"({"p":2,"lambda":[2,1]})");
  CHECK(pgroup_from_json(to_json(g)) == g);

  AbGroupType ab(std::map<std::uint64_t, Partition>{{2, Partition({1})}, {3, Partition({2})}});
  CHECK(to_json(ab).dump() == R"({"2":[1],"3":[2]})");
  CHECK(abgroup_from_json(to_json(ab)).order() == ab.order());
}

TEST_CASE("symmetry invariants") {
  ModMatrix S(3, 4, Symmetry::symmetric);
  S.at(0, 1) = 3;
  S.at(1, 0) = 3;
  CHECK(S.invariants_hold());
  S.at(1, 0) = 2;
  CHECK(!S.invariants_hold());

  ModMatrix Alt(2, 4, Symmetry::alternating);
  Alt.at(0, 1) = 3;
  Alt.at(1, 0) = 1;
  CHECK(Alt.invariants_hold());
  Alt.at(0, 0) = 2;
  CHECK(!Alt.invariants_hold());
}
