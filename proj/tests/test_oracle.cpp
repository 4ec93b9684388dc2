#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coklab/oracle.hpp"

using namespace coklab;

namespace {
const PGroupType kZ2(2, Partition({1}));
const PGroupType kZ4(2, Partition({2}));
const PGroupType kKlein(2, Partition({1, 1}));

CokernelClass make_class(std::uint64_t p, int d, std::vector<int> parts) {
  CokernelClass c;
  c.p = p;
  c.d = d;
  c.capped_lambda = Partition(std::move(parts));
  int sat = 0;
  for (int v : c.capped_lambda.parts)
    if (v == d) ++sat;
  c.saturated_parts = sat;
  return c;
}
}  // namespace

TEST_CASE("hom counts from classes") {
  CHECK(hom_count_from_class(make_class(2, 3, {}), kZ4) == 1);
  CHECK(hom_count_from_class(make_class(2, 3, {1}), kZ4) == 2);  // |Z/4[2]|
  CHECK(hom_count_from_class(make_class(2, 3, {2, 1}), kKlein) == 16);
  // Guard: exponent(G) must stay below the level.
  CHECK_THROWS_AS(hom_count_from_class(make_class(2, 1, {1}), kZ2), Error);
  CHECK(hom_count_modlevel(make_class(2, 1, {1}), kZ2) == 2);
}

TEST_CASE("sur counts") {
  CHECK(sur_count(make_class(2, 3, {1}), kZ4) == 0);       // Z/2 onto Z/4
  CHECK(sur_count(make_class(2, 3, {1, 1}), kZ2) == 3);    // Klein onto Z/2
  CHECK(sur_count(make_class(2, 3, {1, 1}), kKlein) == 6); // equals |Aut|
  // Hom = sum of Sur over subgroups.
  SurTable table = SurTable::build(kKlein);
  CokernelClass c = make_class(2, 3, {2, 1});
  unsigned __int128 total = 0;
  for (size_t i = 0; i < table.lat.subgroups.size(); ++i) {
    SurTable sub = SurTable::build(PGroupType(2, table.lat.types[i]));
    total += sub.sur(c);
  }
  CHECK(table.hom(c) == total);
}

TEST_CASE("exact hom moments: by-hand values") {
  EntryDistribution uniform2 = EntryDistribution::uniform(2);
  MatrixModel m1{Symmetry::general, 1, uniform2, {}};
  CHECK(exact_hom_moment(m1, kZ2, 1) == Rational(3, 2));

  MatrixModel alt1{Symmetry::alternating, 1, uniform2, {}};
  CHECK(exact_hom_moment(alt1, kZ2, 1) == Rational(2));

  // Trivial target: the moment is 1 for every model.
  PGroupType triv(2, Partition{});
  MatrixModel sym2{Symmetry::symmetric, 2, EntryDistribution::spike01(Rational(3, 10), 2), {}};
  CHECK(exact_hom_moment(sym2, triv, 1) == Rational(1));
}

TEST_CASE("fourier agrees with exact enumeration across flavors") {
  for (auto [p, d] : std::vector<std::pair<std::uint64_t, int>>{{2, 1}, {3, 1}, {2, 2}}) {
    std::uint64_t m = checked_pow(p, d);
    std::vector<EntryDistribution> dists = {EntryDistribution::spike01(Rational(3, 10), m),
                                            EntryDistribution::spike_uniform(Rational(3, 10), m)};
    std::vector<PGroupType> gs = {PGroupType(p, Partition{}), PGroupType(p, Partition({1}))};
    if (d == 2) gs.push_back(PGroupType(2, Partition({2})));
    for (const auto& g : gs)
      for (const auto& dist : dists)
        for (int n = 1; n <= 2; ++n) {
          for (Symmetry sym : {Symmetry::general, Symmetry::symmetric, Symmetry::alternating}) {
            MatrixModel model{sym, n, dist, {}};
            long double e = exact_hom_moment(model, g, d).to_long_double();
            long double f = fourier_hom_moment(model, g, d);
            CHECK(std::abs(e - f) <= 1e-9L);
          }
          long double eg = exact_hom_moment_graph(n, dist, g, d).to_long_double();
          long double fg = fourier_hom_moment_graph(n, dist, g, d);
          CHECK(std::abs(eg - fg) <= 1e-9L);
        }
  }
}

TEST_CASE("fourier graph moment at n=3") {
  EntryDistribution edge = EntryDistribution::spike01(Rational(1, 2), 2);
  long double e = exact_hom_moment_graph(3, edge, kZ2, 1).to_long_double();
  long double f = fourier_hom_moment_graph(3, edge, kZ2, 1);
  CHECK(std::abs(e - f) <= 1e-9L);
}

TEST_CASE("trivial target gives moment 1 in the fourier path") {
  PGroupType triv(2, Partition{});
  MatrixModel model{Symmetry::general, 2, EntryDistribution::spike01(Rational(1, 4), 2), {}};
  CHECK(std::abs(fourier_hom_moment(model, triv, 1) - 1.0L) < 1e-12L);
}

TEST_CASE("trivial part counts") {
  PairingSpec u1(PairingFlavor::U1B1_NonSymmetric, kZ2, 1);
  CHECK(trivial_part_count(u1, 1) == 3);
  CHECK(trivial_part_census(u1, 1) == 3);
  CHECK(trivial_part_count(u1, 2) == 7);   // 2^(n+1) - 1
  CHECK(trivial_part_count(u1, 3) == 15);

  PairingSpec u3(PairingFlavor::U3B3_Alternating, kZ2, 1);
  CHECK(trivial_part_count(u3, 1) == 4);

  PairingSpec u2(PairingFlavor::U2B2_Symmetric, kZ2, 1);
  for (int n = 1; n <= 3; ++n)
    CHECK(trivial_part_count(u2, n) == trivial_part_census(u2, n));

  PairingSpec u4(PairingFlavor::U4B4_Graph, kZ2, 1);
  for (int n = 2; n <= 3; ++n)
    CHECK(trivial_part_count(u4, n) == trivial_part_census(u4, n));
}

TEST_CASE("isotropic censuses match the formula sums") {
  IsotropicCensus alt2 = isotropic_census(kZ2, IsotropicFlavor::B_Alt);
  CHECK(alt2.subgroups.size() == 3);
  CHECK(alt2.max_count == 3);
  IsotropicCensus sym2 = isotropic_census(kZ2, IsotropicFlavor::B_Sym_P_vanishing);
  CHECK(sym2.subgroups.size() == 2);
  CHECK(sym2.max_count == 2);
  IsotropicCensus altk = isotropic_census(kKlein, IsotropicFlavor::B_Alt);
  CHECK(altk.subgroups.size() == 15);
  CHECK(altk.max_count == 15);
  // Every listed subgroup is isotropic and has |W| = |G| (spot-check sizes).
  for (const auto& w : altk.subgroups) CHECK(w.size() == 4);
}

TEST_CASE("zero column bound") {
  CHECK(zero_column_bound(1) == Rational(1, 2));
  CHECK(zero_column_bound(3) == Rational(1, 24));
  CHECK_THROWS_AS(zero_column_bound(0), Error);
}

TEST_CASE("enumeration guards throw") {
  MatrixModel big{Symmetry::general, 5, EntryDistribution::uniform(16), {}};
  CHECK_THROWS_AS(exact_hom_moment(big, PGroupType(2, Partition({1})), 4), Error);
  CHECK_THROWS_AS(fourier_hom_moment(
                      MatrixModel{Symmetry::general, 9,
                                  EntryDistribution::uniform(4), {}},
                      PGroupType(2, Partition({2})), 2),
                  Error);
}

TEST_CASE("aut oracle on mid-size groups") {
  // A couple of heavier spot checks beyond the unit grid.
  CHECK(aut_order_exhaustive(PGroupType(2, Partition({1, 1, 1, 1, 1}))) ==
        aut_order(PGroupType(2, Partition({1, 1, 1, 1, 1}))));
  CHECK(aut_order_exhaustive(PGroupType(2, Partition({3, 2, 1}))) ==
        aut_order(PGroupType(2, Partition({3, 2, 1}))));
  CHECK(aut_order_exhaustive(PGroupType(3, Partition({2, 1}))) ==
        aut_order(PGroupType(3, Partition({2, 1}))));
}

TEST_CASE("tensor presentations agree with the closed forms") {
  for (std::uint64_t p : {2ull, 3ull})
    for (const Partition& lam : partitions_up_to(4)) {
      PGroupType g(p, lam);
      CHECK(tensor_square_order_bruteforce(g) ==
            ext_square_order(g) * sym_square_order(g));
      CHECK(ext_square_order_bruteforce(g) == ext_square_order(g));
      CHECK(sym_square_order_bruteforce(g) == sym_square_order(g));
    }
}
