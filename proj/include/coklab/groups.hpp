#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "coklab/common.hpp"

namespace coklab {

// Hard cap on explicit enumeration (subgroup lattices, pairing tables).
inline constexpr std::uint64_t kEnumerationGuard = 4096;

// ---------------------------------------------------------------------------
// Partitions
// ---------------------------------------------------------------------------

struct Partition {
  std::vector<int> parts;  // weakly decreasing, every part >= 1

  Partition() = default;
  explicit Partition(std::vector<int> p);

  int sum() const;
  int length() const { return static_cast<int>(parts.size()); }
  int largest() const { return parts.empty() ? 0 : parts.front(); }
  Partition conjugate() const;
  bool empty() const { return parts.empty(); }
  std::string str() const;

  friend bool operator==(const Partition& a, const Partition& b) { return a.parts == b.parts; }
  friend bool operator!=(const Partition& a, const Partition& b) { return !(a == b); }
  friend bool operator<(const Partition& a, const Partition& b) { return a.parts < b.parts; }
};

Partition conjugate(const Partition& lambda);

// All partitions of every total in [0, max_sum].
std::vector<Partition> partitions_up_to(int max_sum);

// ---------------------------------------------------------------------------
// Group types
// ---------------------------------------------------------------------------

// Finite abelian p-group Z/p^{l1} x ... x Z/p^{lr} given by its type.
struct PGroupType {
  std::uint64_t p = 2;
  Partition lambda;

  PGroupType() = default;
  PGroupType(std::uint64_t prime, Partition l);

  std::uint64_t order() const;      // p^(sum lambda)
  std::uint64_t exponent() const;   // p^(lambda_1), 1 for the trivial group
  bool trivial() const { return lambda.empty(); }
  // |G[p^v]| = p^(sum_i min(lambda_i, v))
  std::uint64_t torsion_order(int v) const;
  // True when every multiplicity in lambda is even, i.e. G = K x K.
  bool is_square() const;
  PGroupType square_root() const;  // the K above; requires is_square()
  std::string str() const;

  friend bool operator==(const PGroupType& a, const PGroupType& b) {
    return a.p == b.p && a.lambda == b.lambda;
  }
  friend bool operator<(const PGroupType& a, const PGroupType& b) {
    return a.p != b.p ? a.p < b.p : a.lambda < b.lambda;
  }
};

// Finite abelian group as a map prime -> partition (no trivial components).
struct AbGroupType {
  std::map<std::uint64_t, Partition> components;

  AbGroupType() = default;
  explicit AbGroupType(std::map<std::uint64_t, Partition> c);
  PGroupType primary(std::uint64_t p) const;  // trivial type when p absent
  std::uint64_t order() const;
  std::string str() const;
};

// ---------------------------------------------------------------------------
// Closed-form orders
// ---------------------------------------------------------------------------

// |wedge^2 G| = p^(sum_j l'_j (l'_j - 1) / 2)
std::uint64_t ext_square_order(const PGroupType& g);
// |Sym^2 G| = p^(sum_j l'_j (l'_j + 1) / 2)
std::uint64_t sym_square_order(const PGroupType& g);

// |Aut(G)| by the classical closed form for abelian p-groups.
std::uint64_t aut_order(const PGroupType& g);
// ln |Aut(G)|, usable far beyond the 64-bit range.
long double log_aut_order(const PGroupType& g);

// ---------------------------------------------------------------------------
// Explicit groups: element tables, subgroups, Moebius, pairings
// ---------------------------------------------------------------------------

// Explicit finite abelian group, elements encoded as mixed-radix indices over
// the given cyclic moduli. Addition is decode/add/encode; no tables kept.
struct AbelianTable {
  std::vector<std::uint32_t> mods;  // cyclic factor moduli, each >= 2 (or empty group = trivial)
  std::uint64_t size = 1;

  AbelianTable() = default;
  explicit AbelianTable(std::vector<std::uint32_t> moduli);

  static AbelianTable of(const PGroupType& g);
  static AbelianTable square_of(const PGroupType& g);  // G x G with duplicated moduli

  std::uint32_t rank() const { return static_cast<std::uint32_t>(mods.size()); }
  void decode(std::uint64_t e, std::uint32_t* digits) const;
  std::uint64_t encode(const std::uint32_t* digits) const;
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const;
  std::uint64_t neg(std::uint64_t a) const;
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return add(a, neg(b)); }
  std::uint64_t scalar_mul(std::uint64_t k, std::uint64_t a) const;
  std::uint64_t order_of(std::uint64_t a) const;
  std::uint64_t generator(std::uint32_t i) const;  // e_i
};

// A subgroup as an explicit sorted element set of its ambient table.
struct SubgroupRecord {
  const AbelianTable* ambient = nullptr;
  std::vector<std::uint32_t> elements;  // sorted, contains 0

  std::uint64_t size() const { return elements.size(); }
  bool contains(std::uint32_t e) const;
  bool contains_all(const SubgroupRecord& other) const;
  // Isomorphism type as a partition of p-exponents (ambient must be a p-group).
  Partition type(std::uint64_t p) const;
};

// Every subgroup exactly once, by closure BFS. Throws GroupTooLarge beyond the
// enumeration guard.
std::vector<SubgroupRecord> enumerate_subgroups(const AbelianTable& tab);
std::vector<SubgroupRecord> enumerate_subgroups(const PGroupType& g);

// Moebius function of the subgroup lattice, mu(K, G), via the downward
// recursion mu(G,G) = 1, sum_{K<=L<=G} mu(L,G) = 0. Throws NotASubgroup.
std::int64_t moebius(const SubgroupRecord& k, const PGroupType& g);

// Subgroup lattice of G with precomputed mu(K, G) and types; reusable across
// many queries (thread-safe once built). The table lives behind a stable
// pointer so records stay valid when the lattice moves.
struct SubgroupLattice {
  std::shared_ptr<AbelianTable> tab;
  std::vector<SubgroupRecord> subgroups;
  std::vector<std::int64_t> mu;       // mu(subgroups[i], G)
  std::vector<Partition> types;

  static SubgroupLattice build(const PGroupType& g);
};

// Number of symmetric bilinear perfect pairings H x H -> C^* by brute force
// over Gram matrices. Throws GroupTooLarge beyond the guard.
std::uint64_t count_symmetric_perfect_pairings(const PGroupType& h);

// Same count against an arbitrary ordering of the cyclic factors (the result
// depends only on the isomorphism type; tests exercise this).
std::uint64_t count_symmetric_perfect_pairings_mods(std::uint64_t p,
                                                    const std::vector<int>& exponents);

// |Sp(H)| for H = G x G: automorphisms preserving the standard hyperbolic
// alternating perfect pairing, counted by constrained enumeration.
// Throws NotInSp when the type has an odd multiplicity.
std::uint64_t sp_order(const PGroupType& h);

// Same count against a caller-supplied alternating perfect Gram matrix on the
// standard generators (for checking independence of the pairing choice).
std::uint64_t sp_order_with_gram(const PGroupType& h,
                                 const std::vector<std::vector<std::uint64_t>>& gram);

// Standard perfect pairing of Section-independent shape: G x G -> Z/p^d,
// (x, y) -> sum_i p^(d - l_i) x_i y_i, with d = l_1 (or given level).
std::uint64_t dot_pairing(const AbelianTable& tab, std::uint64_t p, int d,
                          std::uint64_t a, std::uint64_t b);

}  // namespace coklab
