#include "coklab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace coklab {

// ---------------------------------------------------------------------------
// PairingSpec
// ---------------------------------------------------------------------------

PairingSpec::PairingSpec(PairingFlavor f, const PGroupType& grp, int level)
    : flavor(f), g(grp), d(level) {
  if (g.lambda.largest() > d)
    fail(Errc::LevelTooLow, "need p^d G = 0 for the pairing level");
  tab = AbelianTable::of(g);
  pd = checked_pow(g.p, d);
  if (tab.size * tab.size > 70000000ull)
    fail(Errc::TooLargeToEnumerate, "dot table too large");
  dot_table.assign(tab.size * tab.size, 0);
  for (std::uint64_t x = 0; x < tab.size; ++x)
    for (std::uint64_t y = 0; y < tab.size; ++y)
      dot_table[x * tab.size + y] =
          static_cast<std::uint32_t>(dot_pairing(tab, g.p, d, x, y));
}

std::uint64_t PairingSpec::dot(std::uint64_t x, std::uint64_t y) const {
  return dot_table[x * tab.size + y];
}

std::uint64_t PairingSpec::u_value(std::uint64_t gk, std::uint64_t hk) const {
  switch (flavor) {
    case PairingFlavor::U1B1_NonSymmetric:
    case PairingFlavor::U2B2_Symmetric: return dot(gk, hk);
    case PairingFlavor::U3B3_Alternating:
    case PairingFlavor::U4B4_Graph: return 0;
  }
  return 0;
}

std::uint64_t PairingSpec::b_value(std::uint64_t gk, std::uint64_t hk, std::uint64_t gl,
                                   std::uint64_t hl) const {
  switch (flavor) {
    case PairingFlavor::U1B1_NonSymmetric: return dot(gk, hl);
    case PairingFlavor::U2B2_Symmetric: return (dot(gk, hl) + dot(gl, hk)) % pd;
    case PairingFlavor::U3B3_Alternating:
      return (dot(gk, hl) + pd - dot(gl, hk)) % pd;
    case PairingFlavor::U4B4_Graph: {
      std::uint64_t dg = tab.sub(gk, gl), dh = tab.sub(hk, hl);
      return (pd - dot(dg, dh)) % pd;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Hom / Sur counts
// ---------------------------------------------------------------------------

static std::uint64_t hom_product(const CokernelClass& c, const PGroupType& g) {
  unsigned __int128 acc = 1;
  for (int v : c.capped_lambda.parts) {
    acc *= g.torsion_order(v);
    if (acc > static_cast<unsigned __int128>(UINT64_MAX))
      fail(Errc::Overflow, "hom count overflows 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

std::uint64_t hom_count_from_class(const CokernelClass& c, const PGroupType& g) {
  if (g.p != c.p) fail(Errc::BadConfig, "class and group prime differ");
  if (g.lambda.largest() >= c.d)
    fail(Errc::LevelTooLow, "class level too low: need exponent(G) <= p^(d-1)");
  return hom_product(c, g);
}

std::uint64_t hom_count_modlevel(const CokernelClass& c, const PGroupType& g) {
  if (g.p != c.p) fail(Errc::BadConfig, "class and group prime differ");
  if (g.lambda.largest() > c.d)
    fail(Errc::LevelTooLow, "class level too low: need p^d G = 0");
  return hom_product(c, g);
}

std::uint64_t sur_count(const CokernelClass& x_class, const PGroupType& g) {
  SurTable table = SurTable::build(g);
  unsigned __int128 s = table.sur(x_class);
  if (s > static_cast<unsigned __int128>(UINT64_MAX))
    fail(Errc::Overflow, "sur count overflows 64 bits");
  return static_cast<std::uint64_t>(s);
}

SurTable SurTable::build(const PGroupType& grp) {
  SurTable t;
  t.g = grp;
  t.lat = SubgroupLattice::build(grp);
  return t;
}

unsigned __int128 SurTable::hom(const CokernelClass& c) const {
  return hom_count_from_class(c, g);
}

unsigned __int128 SurTable::sur(const CokernelClass& c) const {
  __int128 acc = 0;
  for (size_t i = 0; i < lat.subgroups.size(); ++i) {
    PGroupType k(g.p, lat.types[i]);
    acc += static_cast<__int128>(lat.mu[i]) *
           static_cast<__int128>(hom_count_from_class(c, k));
  }
  if (acc < 0) fail(Errc::Overflow, "negative sur count (inconsistent lattice)");
  return static_cast<unsigned __int128>(acc);
}

// ---------------------------------------------------------------------------
// Exact moments by total enumeration
// ---------------------------------------------------------------------------

namespace {

struct FreeEntry {
  int i, j;
  const EntryDistribution* dist;
};

std::vector<FreeEntry> free_entries(const MatrixModel& model) {
  std::vector<FreeEntry> out;
  const int n = model.n;
  auto push = [&](int i, int j) { out.push_back({i, j, &model.dist_at(i, j)}); };
  switch (model.kind) {
    case Symmetry::general:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) push(i, j);
      break;
    case Symmetry::symmetric:
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) push(i, j);
      break;
    case Symmetry::alternating:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) push(i, j);
      break;
  }
  return out;
}

void check_enumerable(const std::vector<FreeEntry>& entries) {
  long double total = 1;
  for (const auto& e : entries) {
    total *= static_cast<long double>(e.dist->support.size());
    if (total > 1e7L)
      fail(Errc::TooLargeToEnumerate, "support^entries exceeds the enumeration budget");
  }
}

// Odometer over per-entry support indices; calls f(per-entry support index
// array, exact probability of the assignment).
template <typename F>
void enumerate_assignments(const std::vector<FreeEntry>& entries, F&& f) {
  std::vector<size_t> odo(entries.size(), 0);
  while (true) {
    Rational prob(1);
    for (size_t t = 0; t < entries.size(); ++t)
      prob *= entries[t].dist->support[odo[t]].second;
    f(odo, prob);
    size_t t = 0;
    while (t < entries.size() && ++odo[t] == entries[t].dist->support.size()) odo[t++] = 0;
    if (t == entries.size()) break;
  }
}

}  // namespace

Rational exact_hom_moment(const MatrixModel& model, const PGroupType& g, int d) {
  const std::uint64_t pd = checked_pow(g.p, d);
  if (model.dist.m != pd) fail(Errc::BadConfig, "entry modulus must equal p^d");
  if (g.lambda.largest() > d) fail(Errc::LevelTooLow, "need p^d G = 0");
  auto entries = free_entries(model);
  check_enumerable(entries);

  Rational total(0);
  ModMatrix mat(model.n, pd, model.kind);
  enumerate_assignments(entries, [&](const std::vector<size_t>& odo, const Rational& prob) {
    for (size_t t = 0; t < entries.size(); ++t) {
      std::uint32_t v = entries[t].dist->support[odo[t]].first;
      mat.at(entries[t].i, entries[t].j) = v;
      if (model.kind == Symmetry::symmetric) mat.at(entries[t].j, entries[t].i) = v;
      if (model.kind == Symmetry::alternating)
        mat.at(entries[t].j, entries[t].i) = static_cast<std::uint32_t>((pd - v) % pd);
    }
    CokernelClass c = cokernel_class(mat, g.p, d);
    total += prob * Rational(static_cast<std::int64_t>(hom_count_modlevel(c, g)));
  });
  return total;
}

Rational exact_hom_moment_graph(int n, const EntryDistribution& edge_dist,
                                const PGroupType& g, int d) {
  const std::uint64_t pd = checked_pow(g.p, d);
  if (edge_dist.m != pd) fail(Errc::BadConfig, "edge modulus must equal p^d");
  if (g.lambda.largest() > d) fail(Errc::LevelTooLow, "need p^d G = 0");
  if (n < 1) fail(Errc::BadConfig, "graph needs n >= 1");
  std::vector<FreeEntry> entries;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) entries.push_back({i, j, &edge_dist});
  check_enumerable(entries);

  Rational total(0);
  std::vector<std::int64_t> weights(entries.size(), 0);
  enumerate_assignments(entries, [&](const std::vector<size_t>& odo, const Rational& prob) {
    for (size_t t = 0; t < entries.size(); ++t)
      weights[t] = edge_dist.support[odo[t]].first;
    IntMatrix lap = reduced_laplacian_weighted(n, weights);
    CokernelClass c = cokernel_class_int(lap, g.p, d);
    total += prob * Rational(static_cast<std::int64_t>(hom_count_modlevel(c, g)));
  });
  return total;
}

// ---------------------------------------------------------------------------
// Fourier moments
// ---------------------------------------------------------------------------

namespace {

using cld = std::complex<long double>;

std::vector<cld> character_table(const EntryDistribution& dist, std::uint64_t pd) {
  std::vector<cld> chi(pd, cld(0, 0));
  const long double tau = 2.0L * 3.14159265358979323846264338327950288L;
  for (std::uint64_t r = 0; r < pd; ++r) {
    cld acc(0, 0);
    for (const auto& [s, pr] : dist.support) {
      long double ang = tau * static_cast<long double>(r * s % pd) / pd;
      acc += pr.to_long_double() * cld(std::cos(ang), std::sin(ang));
    }
    chi[r] = acc;
  }
  return chi;
}

long double realize(cld z, long double scale) {
  if (std::abs(z.imag()) * scale > 1e-9L)
    fail(Errc::ImaginaryResidue, "character sum has a non-real residue");
  return z.real() * scale;
}

}  // namespace

long double fourier_hom_moment(const MatrixModel& model, const PGroupType& g, int d) {
  const std::uint64_t pd = checked_pow(g.p, d);
  if (model.dist.m != pd) fail(Errc::BadConfig, "entry modulus must equal p^d");
  const int n = model.n;
  PairingFlavor flavor = model.kind == Symmetry::general    ? PairingFlavor::U1B1_NonSymmetric
                         : model.kind == Symmetry::symmetric ? PairingFlavor::U2B2_Symmetric
                                                             : PairingFlavor::U3B3_Alternating;
  PairingSpec spec(flavor, g, d);
  const std::uint64_t go = spec.group_order();
  long double tuples = std::pow(static_cast<long double>(go), 2.0L * n);
  if (tuples > 1e7L) fail(Errc::TooLargeToEnumerate, "|G|^(2n) exceeds the enumeration budget");

  std::vector<std::vector<cld>> chi(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      chi[static_cast<size_t>(i) * n + j] = character_table(model.dist_at(i, j), pd);

  std::vector<std::uint64_t> gk(n), hk(n);
  cld total(0, 0);
  std::vector<std::uint64_t> odo(2 * n, 0);
  while (true) {
    for (int k = 0; k < n; ++k) {
      gk[k] = odo[2 * k];
      hk[k] = odo[2 * k + 1];
    }
    cld term(1, 0);
    if (model.kind == Symmetry::general) {
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          term *= chi[static_cast<size_t>(k) * n + l][spec.dot(gk[k], hk[l])];
    } else if (model.kind == Symmetry::symmetric) {
      for (int k = 0; k < n; ++k)
        term *= chi[static_cast<size_t>(k) * n + k][spec.u_value(gk[k], hk[k])];
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l)
          term *= chi[static_cast<size_t>(k) * n + l][spec.b_value(gk[k], hk[k], gk[l], hk[l])];
    } else {
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l)
          term *= chi[static_cast<size_t>(k) * n + l][spec.b_value(gk[k], hk[k], gk[l], hk[l])];
    }
    total += term;
    size_t t = 0;
    while (t < odo.size() && ++odo[t] == go) odo[t++] = 0;
    if (t == odo.size()) break;
  }
  long double scale = std::pow(static_cast<long double>(go), -static_cast<long double>(n));
  return realize(total, scale);
}

long double fourier_hom_moment_graph(int n, const EntryDistribution& edge_dist,
                                     const PGroupType& g, int d) {
  const std::uint64_t pd = checked_pow(g.p, d);
  if (edge_dist.m != pd) fail(Errc::BadConfig, "edge modulus must equal p^d");
  PairingSpec spec(PairingFlavor::U4B4_Graph, g, d);
  const std::uint64_t go = spec.group_order();
  long double tuples = std::pow(static_cast<long double>(go), 2.0L * n);
  if (tuples > 1e7L) fail(Errc::TooLargeToEnumerate, "|G|^(2n) exceeds the enumeration budget");
  std::vector<cld> chi = character_table(edge_dist, pd);

  std::vector<std::uint64_t> gk(n), hk(n);
  cld total(0, 0);
  std::vector<std::uint64_t> odo(2 * n, 0);
  while (true) {
    for (int k = 0; k < n; ++k) {
      gk[k] = odo[2 * k];
      hk[k] = odo[2 * k + 1];
    }
    cld term(1, 0);
    for (int k = 0; k < n; ++k)
      for (int l = k + 1; l < n; ++l)
        term *= chi[spec.b_value(gk[k], hk[k], gk[l], hk[l])];
    total += term;
    size_t t = 0;
    while (t < odo.size() && ++odo[t] == go) odo[t++] = 0;
    if (t == odo.size()) break;
  }
  long double scale = std::pow(static_cast<long double>(go), -static_cast<long double>(n + 1));
  return realize(total, scale);
}

// ---------------------------------------------------------------------------
// Trivial part and censuses
// ---------------------------------------------------------------------------

std::uint64_t trivial_part_count(const PairingSpec& spec, int n) {
  const std::uint64_t go = spec.group_order();
  long double tuples = std::pow(static_cast<long double>(go), 2.0L * n);
  if (tuples > 1e7L) fail(Errc::TooLargeToEnumerate, "|G|^(2n) exceeds the enumeration budget");
  std::vector<std::uint64_t> odo(2 * n, 0);
  std::vector<std::uint64_t> gk(n), hk(n);
  std::uint64_t count = 0;
  while (true) {
    for (int k = 0; k < n; ++k) {
      gk[k] = odo[2 * k];
      hk[k] = odo[2 * k + 1];
    }
    bool ok = true;
    for (int k = 0; k < n && ok; ++k)
      if (spec.u_value(gk[k], hk[k]) != 0) ok = false;
    for (int k = 0; k < n && ok; ++k)
      for (int l = 0; l < n && ok; ++l)
        if (spec.b_value(gk[k], hk[k], gk[l], hk[l]) != 0) ok = false;
    if (ok) ++count;
    size_t t = 0;
    while (t < odo.size() && ++odo[t] == go) odo[t++] = 0;
    if (t == odo.size()) break;
  }
  return count;
}

unsigned __int128 generating_tuple_count(const AbelianTable& tab, const SubgroupRecord& w,
                                         int n) {
  // gen(K) = |K|^n - sum_{L < K} gen(L), over the subgroup lattice of W.
  auto subs = enumerate_subgroups(tab);
  std::vector<const SubgroupRecord*> inside;
  for (const auto& s : subs)
    if (w.contains_all(s)) inside.push_back(&s);
  std::vector<unsigned __int128> gen(inside.size(), 0);
  unsigned __int128 result = 0;
  for (size_t i = 0; i < inside.size(); ++i) {
    unsigned __int128 total = 1;
    for (int t = 0; t < n; ++t) total *= inside[i]->size();
    unsigned __int128 below = 0;
    for (size_t j = 0; j < i; ++j)
      if (inside[j]->size() < inside[i]->size() && inside[i]->contains_all(*inside[j]))
        below += gen[j];
    gen[i] = total - below;
    if (inside[i]->elements == w.elements) result = gen[i];
  }
  return result;
}

namespace {

// Subgroups of G^2 that are isotropic of U-vanishing type for the given spec.
std::vector<SubgroupRecord> iso_u_vanishing(const PairingSpec& spec, const AbelianTable& sq) {
  auto subs = enumerate_subgroups(sq);
  const std::uint64_t go = spec.group_order();
  std::vector<SubgroupRecord> out;
  for (auto& w : subs) {
    bool ok = true;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
    pairs.reserve(w.elements.size());
    for (std::uint32_t e : w.elements) pairs.push_back({e / go, e % go});
    for (auto& [g1, h1] : pairs) {
      if (spec.u_value(g1, h1) != 0) { ok = false; break; }
    }
    for (size_t a = 0; a < pairs.size() && ok; ++a)
      for (size_t b = 0; b < pairs.size() && ok; ++b)
        if (spec.b_value(pairs[a].first, pairs[a].second, pairs[b].first, pairs[b].second) != 0)
          ok = false;
    if (ok) out.push_back(w);
  }
  return out;
}

}  // namespace

std::uint64_t trivial_part_census(const PairingSpec& spec, int n) {
  const std::uint64_t go = spec.group_order();
  if (spec.flavor == PairingFlavor::U1B1_NonSymmetric) {
    // sum over H <= G of #{tuples generating H} * |H^perp|^n
    auto subs = enumerate_subgroups(spec.tab);
    unsigned __int128 total = 0;
    for (auto& h : subs) {
      std::uint64_t perp = 0;
      for (std::uint64_t x = 0; x < go; ++x) {
        bool in_perp = true;
        for (std::uint32_t e : h.elements)
          if (spec.dot(x, e) != 0) { in_perp = false; break; }
        if (in_perp) ++perp;
      }
      unsigned __int128 perp_pow = 1;
      for (int t = 0; t < n; ++t) perp_pow *= perp;
      total += generating_tuple_count(spec.tab, h, n) * perp_pow;
    }
    return static_cast<std::uint64_t>(total);
  }

  AbelianTable sq = AbelianTable::square_of(spec.g);
  if (spec.flavor == PairingFlavor::U4B4_Graph) {
    // Coset criterion: tuples whose differences generate an isotropic W of
    // U2-vanishing type; g_n ranges over all of G^2.
    PairingSpec sym(PairingFlavor::U2B2_Symmetric, spec.g, spec.d);
    auto isos = iso_u_vanishing(sym, sq);
    unsigned __int128 total = 0;
    for (auto& w : isos) total += generating_tuple_count(sq, w, n - 1);
    return static_cast<std::uint64_t>(total * (go * go));
  }

  auto isos = iso_u_vanishing(spec, sq);
  unsigned __int128 total = 0;
  for (auto& w : isos) total += generating_tuple_count(sq, w, n);
  return static_cast<std::uint64_t>(total);
}

IsotropicCensus isotropic_census(const PGroupType& g, IsotropicFlavor flavor) {
  IsotropicCensus out;
  out.g = g;
  out.flavor = flavor;
  const int d = std::max(1, g.lambda.largest());
  PairingSpec spec(flavor == IsotropicFlavor::B_Alt ? PairingFlavor::U3B3_Alternating
                                                    : PairingFlavor::U2B2_Symmetric,
                   g, d);
  AbelianTable sq = AbelianTable::square_of(g);
  if (sq.size > kEnumerationGuard)
    fail(Errc::GroupTooLarge, "G^2 beyond the enumeration guard");
  const std::uint64_t go = spec.group_order();
  auto subs = enumerate_subgroups(sq);
  for (auto& w : subs) {
    if (w.size() != go) continue;  // maximal isotropic subgroups have |W| = |G|
    bool ok = true;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
    for (std::uint32_t e : w.elements) pairs.push_back({e / go, e % go});
    if (flavor == IsotropicFlavor::B_Sym_P_vanishing) {
      for (auto& [g1, h1] : pairs)
        if (spec.dot(g1, h1) != 0) { ok = false; break; }
    }
    for (size_t a = 0; a < pairs.size() && ok; ++a)
      for (size_t b = 0; b < pairs.size() && ok; ++b)
        if (spec.b_value(pairs[a].first, pairs[a].second, pairs[b].first, pairs[b].second) != 0)
          ok = false;
    if (ok) out.subgroups.push_back(w);
  }
  // Formula side, computed independently from the subgroup lattice of G and
  // the closed-form orders.
  auto gsubs = enumerate_subgroups(spec.tab);
  unsigned __int128 formula = 0;
  for (auto& h : gsubs) {
    PGroupType ht(g.p, h.type(g.p));
    formula += flavor == IsotropicFlavor::B_Alt ? sym_square_order(ht) : ext_square_order(ht);
  }
  out.max_count = static_cast<std::uint64_t>(formula);
  return out;
}

// ---------------------------------------------------------------------------
// sin^2 identity and the zero-column bound
// ---------------------------------------------------------------------------

long double sin_sum_check(const SubgroupRecord& h,
                          const std::function<std::uint64_t(std::uint32_t)>& L,
                          std::uint64_t m) {
  if (!h.ambient) fail(Errc::BadConfig, "subgroup record without ambient");
  const std::uint64_t c = L(h.elements.front()) % m;  // L(0)
  bool constant = true;
  for (std::uint32_t e : h.elements)
    if (L(e) % m != c) { constant = false; break; }
  if (constant) fail(Errc::ConstantMap, "affine map is constant on H");
  // Affinity: L(x + y) = L(x) + L(y) - L(0) mod m.
  for (std::uint32_t x : h.elements)
    for (std::uint32_t y : h.elements) {
      std::uint64_t lhs = L(static_cast<std::uint32_t>(h.ambient->add(x, y))) % m;
      std::uint64_t rhs = (L(x) % m + L(y) % m + 2 * m - c) % m;
      if (lhs != rhs) fail(Errc::BadConfig, "map is not affine on H");
    }
  const long double pi = 3.14159265358979323846264338327950288L;
  long double sum = 0;
  for (std::uint32_t e : h.elements) {
    long double s = std::sin(pi * static_cast<long double>(L(e) % m) / m);
    sum += s * s;
  }
  return sum;
}

Rational zero_column_bound(int k) {
  if (k < 1) fail(Errc::BadConfig, "zero-column bound needs k >= 1");
  if (k > 18) fail(Errc::Overflow, "factorial too large");
  std::int64_t f = 1;
  for (int i = 2; i <= k + 1; ++i) f *= i;
  return Rational(1, f);
}

// ---------------------------------------------------------------------------
// Exhaustive |Aut| oracles
// ---------------------------------------------------------------------------

namespace {

struct BitVec {
  std::vector<std::uint64_t> w;
  explicit BitVec(std::uint64_t n) : w((n + 63) / 64, 0) {}
  void set(std::uint64_t i) { w[i >> 6] |= 1ull << (i & 63); }
  bool test(std::uint64_t i) const { return (w[i >> 6] >> (i & 63)) & 1; }
  std::uint64_t popcount_and(const BitVec& o) const {
    std::uint64_t c = 0;
    for (size_t t = 0; t < w.size(); ++t) c += __builtin_popcountll(w[t] & o.w[t]);
    return c;
  }
};

// #subspaces of F_p^r of dimension k, by summing p^(#free cells) over RREF
// pivot-column patterns.
std::uint64_t subspace_count(std::uint64_t p, int r, int k) {
  std::uint64_t total = 0;
  std::vector<int> pivots(k);
  std::function<void(int, int)> rec = [&](int idx, int from) {
    if (idx == k) {
      int free_cells = 0;
      for (int i = 0; i < k; ++i) {
        int later_pivots = k - i - 1;
        free_cells += r - pivots[i] - 1 - later_pivots;
      }
      total += checked_pow(p, free_cells);
      return;
    }
    for (int c = from; c <= r - (k - idx); ++c) {
      pivots[idx] = c;
      rec(idx + 1, c + 1);
    }
  };
  if (k == 0) return 1;
  rec(0, 0);
  return total;
}

// Moebius values m_j of the subspace lattice bottom-to-top, from the counted
// subspace numbers alone.
std::vector<std::int64_t> subspace_moebius(std::uint64_t p, int r) {
  std::vector<std::int64_t> m(r + 1, 0);
  m[0] = 1;
  for (int j = 1; j <= r; ++j) {
    __int128 acc = 0;
    for (int k = 1; k <= j; ++k)
      acc += static_cast<__int128>(subspace_count(p, j, k)) * m[j - k];
    m[j] = static_cast<std::int64_t>(-acc);
  }
  return m;
}

// Enumerates subspaces of F_p^r as RREF row sets; f(rows) with each row a
// length-r digit vector over F_p.
void for_each_subspace(std::uint64_t p, int r,
                       const std::function<void(const std::vector<std::vector<std::uint8_t>>&)>& f) {
  std::vector<std::vector<std::uint8_t>> rows;
  f(rows);  // dimension 0
  for (int k = 1; k <= r; ++k) {
    std::vector<int> pivots(k);
    std::vector<std::pair<int, int>> free_cells;
    std::function<void(int, int)> choose = [&](int idx, int from) {
      if (idx == k) {
        free_cells.clear();
        std::vector<bool> is_pivot(r, false);
        for (int i = 0; i < k; ++i) is_pivot[pivots[i]] = true;
        for (int i = 0; i < k; ++i)
          for (int c = pivots[i] + 1; c < r; ++c)
            if (!is_pivot[c]) free_cells.push_back({i, c});
        rows.assign(k, std::vector<std::uint8_t>(r, 0));
        for (int i = 0; i < k; ++i) rows[i][pivots[i]] = 1;
        std::vector<std::uint8_t> odo(free_cells.size(), 0);
        while (true) {
          for (size_t t = 0; t < free_cells.size(); ++t)
            rows[free_cells[t].first][free_cells[t].second] = odo[t];
          f(rows);
          size_t t = 0;
          while (t < odo.size() && ++odo[t] == p) odo[t++] = 0;
          if (t == odo.size()) break;
        }
        return;
      }
      for (int c = from; c <= r - (k - idx); ++c) {
        pivots[idx] = c;
        choose(idx + 1, c + 1);
      }
    };
    choose(0, 0);
  }
}

}  // namespace

std::uint64_t aut_order_exhaustive(const PGroupType& g) {
  if (g.trivial()) return 1;
  const AbelianTable tab = AbelianTable::of(g);
  const std::uint64_t N = tab.size;
  if (N > kEnumerationGuard) fail(Errc::GroupTooLarge, "exhaustive Aut beyond guard");
  const int r = g.lambda.length();
  const std::uint64_t p = g.p;
  const std::uint64_t pr = checked_pow(p, r);

  // pi : G -> G/pG as a base-p index.
  std::vector<std::uint32_t> pi_index(N);
  std::vector<std::uint32_t> digits(r);
  for (std::uint64_t x = 0; x < N; ++x) {
    tab.decode(x, digits.data());
    std::uint32_t idx = 0;
    for (int i = 0; i < r; ++i) idx = static_cast<std::uint32_t>(idx * p + digits[i] % p);
    pi_index[x] = idx;
  }

  // Torsion masks per distinct constraint exponent.
  std::map<int, BitVec> torsion;
  for (int l : g.lambda.parts)
    if (!torsion.count(l)) {
      BitVec mask(N);
      std::uint64_t pl = checked_pow(p, l);
      for (std::uint64_t x = 0; x < N; ++x)
        if (tab.scalar_mul(pl, x) == 0) mask.set(x);
      torsion.emplace(l, std::move(mask));
    }

  const std::vector<std::int64_t> moeb = subspace_moebius(p, r);

  __int128 acc = 0;
  BitVec span(pr);
  std::vector<std::uint32_t> combo(r, 0);
  for_each_subspace(p, r, [&](const std::vector<std::vector<std::uint8_t>>& rows) {
    const int k = static_cast<int>(rows.size());
    // Span of the subspace as a bitset over base-p indices.
    std::fill(span.w.begin(), span.w.end(), 0);
    std::vector<std::uint8_t> vec(r, 0);
    std::vector<std::uint8_t> odo(k, 0);
    while (true) {
      std::fill(vec.begin(), vec.end(), 0);
      for (int i = 0; i < k; ++i)
        if (odo[i])
          for (int c = 0; c < r; ++c)
            vec[c] = static_cast<std::uint8_t>((vec[c] + odo[i] * rows[i][c]) % p);
      std::uint32_t idx = 0;
      for (int c = 0; c < r; ++c) idx = static_cast<std::uint32_t>(idx * p + vec[c]);
      span.set(idx);
      size_t t = 0;
      while (t < odo.size() && ++odo[t] == p) odo[t++] = 0;
      if (t == odo.size() || odo.empty()) break;
    }
    // Preimage of the subspace in G, intersected with each torsion mask.
    BitVec pre(N);
    for (std::uint64_t x = 0; x < N; ++x)
      if (span.test(pi_index[x])) pre.set(x);
    unsigned __int128 tuple_count = 1;
    for (int l : g.lambda.parts) tuple_count *= pre.popcount_and(torsion.at(l));
    acc += static_cast<__int128>(moeb[r - k]) * static_cast<__int128>(tuple_count);
  });
  if (acc < 0) fail(Errc::Overflow, "negative tuple count");
  if (acc > static_cast<__int128>(UINT64_MAX)) fail(Errc::Overflow, "Aut count overflows");
  return static_cast<std::uint64_t>(acc);
}

std::uint64_t aut_order_lattice_sieve(const PGroupType& g) {
  if (g.trivial()) return 1;
  const AbelianTable tab = AbelianTable::of(g);
  auto subs = enumerate_subgroups(tab);
  if (subs.size() > 20000) fail(Errc::GroupTooLarge, "lattice too large for the sieve");
  const std::uint64_t p = g.p;
  std::vector<unsigned __int128> gen(subs.size(), 0);
  unsigned __int128 top = 0;
  for (size_t i = 0; i < subs.size(); ++i) {
    unsigned __int128 total = 1;
    for (int l : g.lambda.parts) {
      std::uint64_t pl = checked_pow(p, l);
      std::uint64_t cnt = 0;
      for (std::uint32_t e : subs[i].elements)
        if (tab.scalar_mul(pl, e) == 0) ++cnt;
      total *= cnt;
    }
    unsigned __int128 below = 0;
    for (size_t j = 0; j < i; ++j)
      if (subs[j].size() < subs[i].size() && subs[i].contains_all(subs[j])) below += gen[j];
    gen[i] = total - below;
    if (subs[i].size() == tab.size) top = gen[i];
  }
  if (top > static_cast<unsigned __int128>(UINT64_MAX)) fail(Errc::Overflow, "Aut overflows");
  return static_cast<std::uint64_t>(top);
}

std::uint64_t aut_order_tuple_enumeration(const PGroupType& g) {
  if (g.trivial()) return 1;
  const AbelianTable tab = AbelianTable::of(g);
  const std::uint64_t N = tab.size;
  const int r = g.lambda.length();
  std::vector<std::vector<std::uint32_t>> candidates(r);
  unsigned __int128 space = 1;
  for (int i = 0; i < r; ++i) {
    std::uint64_t pl = checked_pow(g.p, g.lambda.parts[i]);
    for (std::uint64_t x = 0; x < N; ++x)
      if (tab.scalar_mul(pl, x) == 0) candidates[i].push_back(static_cast<std::uint32_t>(x));
    space *= candidates[i].size();
    if (space * N > 400000000ull)
      fail(Errc::GroupTooLarge, "tuple enumeration beyond budget");
  }
  std::vector<size_t> odo(r, 0);
  std::uint64_t count = 0;
  std::vector<std::uint64_t> spanbits((N + 63) / 64);
  std::vector<std::uint32_t> span_elems, base;
  while (true) {
    // Span of the tuple: extend the subgroup built so far one generator at a
    // time, adding whole cosets of the snapshot (the running set is only a
    // union of cosets, so membership of jx alone would stop too early).
    std::fill(spanbits.begin(), spanbits.end(), 0);
    spanbits[0] |= 1;
    span_elems.assign(1, 0);
    for (int i = 0; i < r && span_elems.size() < N; ++i) {
      std::uint64_t x = candidates[i][odo[i]];
      base = span_elems;
      std::uint64_t y = x;
      while (!((spanbits[y >> 6] >> (y & 63)) & 1)) {
        for (std::uint32_t e : base) {
          std::uint64_t z = tab.add(e, y);
          if (!((spanbits[z >> 6] >> (z & 63)) & 1)) {
            spanbits[z >> 6] |= 1ull << (z & 63);
            span_elems.push_back(static_cast<std::uint32_t>(z));
          }
        }
        y = tab.add(y, x);
      }
    }
    if (span_elems.size() == N) ++count;
    size_t t = 0;
    while (t < odo.size() && ++odo[t] == candidates[t].size()) odo[t++] = 0;
    if (t == odo.size()) break;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Tensor-square presentations
// ---------------------------------------------------------------------------

namespace {

std::uint64_t presentation_order(int coords, std::uint64_t m,
                                 const std::vector<std::vector<std::uint64_t>>& relation_cols,
                                 std::uint64_t p) {
  const int cols = static_cast<int>(relation_cols.size());
  std::vector<std::uint64_t> w(static_cast<size_t>(coords) * cols, 0);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < coords; ++i) w[static_cast<size_t>(i) * cols + j] = relation_cols[j][i];
  std::vector<int> exps = snf_exponents_rect(coords, cols, m, std::move(w));
  // |cok| = prod p^(v_i) with zero rows counted at full level.
  auto [pp, d] = prime_power_split(m);
  (void)pp;
  int total = 0;
  int got = static_cast<int>(exps.size());
  for (int v : exps) total += v;
  total += (coords - got) * d;
  return checked_pow(p, total);
}

}  // namespace

namespace {

// Defining relations of G (x) G on the r^2 coordinates e_i (x) e_j:
// p^(l_i) and p^(l_j) annihilate e_i (x) e_j.
std::vector<std::vector<std::uint64_t>> tensor_relations(const PGroupType& g, std::uint64_t m) {
  const int r = g.lambda.length();
  std::vector<std::vector<std::uint64_t>> cols;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      std::vector<std::uint64_t> ci(static_cast<size_t>(r) * r, 0);
      ci[static_cast<size_t>(i) * r + j] = checked_pow(g.p, g.lambda.parts[i]) % m;
      cols.push_back(std::move(ci));
      std::vector<std::uint64_t> cj(static_cast<size_t>(r) * r, 0);
      cj[static_cast<size_t>(i) * r + j] = checked_pow(g.p, g.lambda.parts[j]) % m;
      cols.push_back(std::move(cj));
    }
  return cols;
}

}  // namespace

std::uint64_t tensor_square_order_bruteforce(const PGroupType& g) {
  if (g.trivial()) return 1;
  const int r = g.lambda.length();
  const std::uint64_t m = g.exponent();
  return presentation_order(r * r, m, tensor_relations(g, m), g.p);
}

std::uint64_t ext_square_order_bruteforce(const PGroupType& g) {
  if (g.trivial()) return 1;
  const int r = g.lambda.length();
  const std::uint64_t m = g.exponent();
  const AbelianTable tab = AbelianTable::of(g);
  if (tab.size > kEnumerationGuard) fail(Errc::GroupTooLarge, "beyond guard");
  auto cols = tensor_relations(g, m);
  // g (x) g for every g in G.
  std::vector<std::uint32_t> dig(r);
  for (std::uint64_t x = 0; x < tab.size; ++x) {
    tab.decode(x, dig.data());
    std::vector<std::uint64_t> c(static_cast<size_t>(r) * r, 0);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        c[static_cast<size_t>(i) * r + j] =
            static_cast<std::uint64_t>(dig[i]) * dig[j] % m;
    cols.push_back(std::move(c));
  }
  return presentation_order(r * r, m, cols, g.p);
}

std::uint64_t sym_square_order_bruteforce(const PGroupType& g) {
  if (g.trivial()) return 1;
  const int r = g.lambda.length();
  const std::uint64_t m = g.exponent();
  auto cols = tensor_relations(g, m);
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      std::vector<std::uint64_t> c(static_cast<size_t>(r) * r, 0);
      c[static_cast<size_t>(i) * r + j] = 1;
      c[static_cast<size_t>(j) * r + i] = m - 1;
      cols.push_back(std::move(c));
    }
  return presentation_order(r * r, m, cols, g.p);
}

}  // namespace coklab
