#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "coklab/groups.hpp"
#include "coklab/linalg.hpp"
#include "coklab/models.hpp"
#include "coklab/rational.hpp"
#include "coklab/universal.hpp"

namespace coklab {

// ---------------------------------------------------------------------------
// The unified (U, B) framework on G^2
// ---------------------------------------------------------------------------

enum class PairingFlavor { U1B1_NonSymmetric, U2B2_Symmetric, U3B3_Alternating, U4B4_Graph };

// U : G^2 -> Z/p^d and B : G^2 x G^2 -> Z/p^d for the four instantiations.
// Elements of G^2 are pairs of element indices of the underlying table.
struct PairingSpec {
  PairingFlavor flavor;
  PGroupType g;
  int d;  // p^d G = 0

  PairingSpec(PairingFlavor f, const PGroupType& grp, int level);

  std::uint64_t group_order() const { return tab.size; }
  std::uint64_t dot(std::uint64_t x, std::uint64_t y) const;  // standard pairing on G
  std::uint64_t u_value(std::uint64_t gk, std::uint64_t hk) const;
  std::uint64_t b_value(std::uint64_t gk, std::uint64_t hk, std::uint64_t gl,
                        std::uint64_t hl) const;
  bool omega_is_ordered_pairs() const { return flavor == PairingFlavor::U1B1_NonSymmetric; }

  AbelianTable tab;
  std::uint64_t pd;
  std::vector<std::uint32_t> dot_table;  // |G| x |G|
};

// ---------------------------------------------------------------------------
// Hom / Sur counts from cokernel classes
// ---------------------------------------------------------------------------

// #Hom(X, G) for X of the given class, requiring exponent(G) <= p^(d-1) so a
// saturated part always acts as a full copy of G. Throws LevelTooLow.
std::uint64_t hom_count_from_class(const CokernelClass& c, const PGroupType& g);

// Same product when the class is exact at its level (matrix over Z/p^d, or
// any source with p^d G = 0); only requires exponent(G) <= p^d.
std::uint64_t hom_count_modlevel(const CokernelClass& c, const PGroupType& g);

// #Sur(X, G) by Moebius inversion over the subgroup lattice of G.
std::uint64_t sur_count(const CokernelClass& x_class, const PGroupType& g);

// Precomputed lattice + Moebius weights for per-trial Sur counting.
struct SurTable {
  SubgroupLattice lat;
  PGroupType g;

  static SurTable build(const PGroupType& g);
  unsigned __int128 sur(const CokernelClass& c) const;
  unsigned __int128 hom(const CokernelClass& c) const;
};

// ---------------------------------------------------------------------------
// Moment oracles
// ---------------------------------------------------------------------------

// Exact E(#Hom(cok(A(n)), G)) by total enumeration of the free entries with
// exact rational probabilities. Requires dist modulus p^d with p^d G = 0.
Rational exact_hom_moment(const MatrixModel& model, const PGroupType& g, int d);

// Graph flavor: weighted Erdos-Renyi adjacency with the given edge-weight
// distribution; sandpile group of the reduced weighted Laplacian.
Rational exact_hom_moment_graph(int n, const EntryDistribution& edge_dist,
                                const PGroupType& g, int d);

// The character-sum side of the same moments. Imaginary residue above 1e-9
// throws ImaginaryResidue.
long double fourier_hom_moment(const MatrixModel& model, const PGroupType& g, int d);
long double fourier_hom_moment_graph(int n, const EntryDistribution& edge_dist,
                                     const PGroupType& g, int d);

// ---------------------------------------------------------------------------
// Trivial part and isotropic censuses
// ---------------------------------------------------------------------------

// |G_tr| by exhaustive enumeration of (G^2)^n.
std::uint64_t trivial_part_count(const PairingSpec& spec, int n);

// The same count assembled from the subgroup census (generating-tuple sieve
// over the relevant isotropic subgroups); the exhaustive count must match.
std::uint64_t trivial_part_census(const PairingSpec& spec, int n);

// #{n-tuples generating exactly W} for a subgroup W, by subtraction sieve
// over the subgroup lattice of W.
unsigned __int128 generating_tuple_count(const AbelianTable& tab,
                                         const SubgroupRecord& w, int n);

enum class IsotropicFlavor { B_Alt, B_Sym_P_vanishing };

struct IsotropicCensus {
  PGroupType g;
  IsotropicFlavor flavor;
  std::vector<SubgroupRecord> subgroups;  // the maximal isotropic ones found
  std::uint64_t max_count = 0;            // the independent formula-side count
};

// Enumerates maximal isotropic subgroups of (G^2, B_Alt), or maximal isotropic
// of P-vanishing type for B_Sym. max_count carries the independent side:
// sum_{H <= G} |Sym^2 H| resp. sum_{H <= G} |wedge^2 H|.
IsotropicCensus isotropic_census(const PGroupType& g, IsotropicFlavor flavor);

// ---------------------------------------------------------------------------
// Small identities
// ---------------------------------------------------------------------------

// Sum over H of sin^2(pi L(h) / m) for an affine map L given pointwise.
// Throws ConstantMap when L is constant on H; complains when not affine.
long double sin_sum_check(const SubgroupRecord& h,
                          const std::function<std::uint64_t(std::uint32_t)>& L, std::uint64_t m);

// 1/(k+1)!, the asserted lower bound for >= k zero columns at the critical scale.
Rational zero_column_bound(int k);

// ---------------------------------------------------------------------------
// Independent algebra oracles
// ---------------------------------------------------------------------------

// |Aut(G)| by exhaustive counting of constrained generating tuples via the
// Frattini-quotient subspace lattice (enumerated, not formulaic).
std::uint64_t aut_order_exhaustive(const PGroupType& g);
// Same count by the subtraction sieve over the explicit subgroup lattice.
std::uint64_t aut_order_lattice_sieve(const PGroupType& g);
// Literal tuple enumeration with a work budget (small groups only).
std::uint64_t aut_order_tuple_enumeration(const PGroupType& g);

// |G (x) G|, |wedge^2 G|, |Sym^2 G| from explicit presentations (relation
// matrices fed to SNF), independent of the closed forms.
std::uint64_t tensor_square_order_bruteforce(const PGroupType& g);
std::uint64_t ext_square_order_bruteforce(const PGroupType& g);
std::uint64_t sym_square_order_bruteforce(const PGroupType& g);

}  // namespace coklab
