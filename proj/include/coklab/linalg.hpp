#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "coklab/common.hpp"
#include "coklab/groups.hpp"

namespace coklab {

enum class Symmetry { general, symmetric, alternating };

std::string symmetry_name(Symmetry s);
Symmetry symmetry_from_name(const std::string& name);

// Square matrix over Z/m with a symmetry tag.
struct ModMatrix {
  int n = 0;
  std::uint64_t m = 2;
  Symmetry sym = Symmetry::general;
  std::vector<std::uint32_t> a;  // row-major residues in [0, m)

  ModMatrix() = default;
  ModMatrix(int dim, std::uint64_t modulus, Symmetry s)
      : n(dim), m(modulus), sym(s), a(static_cast<size_t>(dim) * dim, 0) {}

  std::uint32_t& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
  std::uint32_t at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

  // Checks the symmetry-class invariants.
  bool invariants_hold() const;
};

// Square integer matrix (reduced graph Laplacians, multi-prime inputs).
struct IntMatrix {
  int n = 0;
  std::vector<std::int64_t> a;

  IntMatrix() = default;
  explicit IntMatrix(int dim) : n(dim), a(static_cast<size_t>(dim) * dim, 0) {}
  std::int64_t& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
  std::int64_t at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

  ModMatrix reduce_mod(std::uint64_t m, Symmetry sym = Symmetry::general) const;
};

// Isomorphism type of cok(A) tensor Z/p^d: a d-capped partition. Parts equal
// to d are "saturated": the true elementary divisor is only known to be >= d.
struct CokernelClass {
  std::uint64_t p = 2;
  int d = 1;
  Partition capped_lambda;
  int saturated_parts = 0;

  std::string key() const;  // stable histogram key
  friend bool operator==(const CokernelClass& x, const CokernelClass& y) {
    return x.p == y.p && x.d == y.d && x.capped_lambda == y.capped_lambda &&
           x.saturated_parts == y.saturated_parts;
  }
};

// --- Smith normal form over Z/p^d -----------------------------------------

// Reference implementation: valuation pivoting (minimal valuation, then
// smallest row, then smallest column), full row and column clearing. Returns
// the d-capped exponents v_1 <= ... <= v_n. Throws NotPrimePower.
std::vector<int> smith_normal_form(const ModMatrix& A);

// Optimized kernel: unit-pivot elimination with level peeling and an F2
// bitset path. Same exponent multiset as the reference. `a` is row-major
// n*n, destroyed. Returns counts[v] = #exponents equal to v, v in [0, d].
struct SnfWorkspace {
  std::vector<std::uint8_t*> rows;
  std::vector<std::uint64_t> bits;
  std::vector<int> bitrowidx;
};
void snf_exponent_counts_u8(std::uint8_t* a, int n, std::uint64_t p, int d,
                            std::vector<int>& counts, SnfWorkspace& ws);

// Convenience: fast path when m <= 255, else reference. Returns ascending
// capped exponents.
std::vector<int> snf_exponents_fast(const ModMatrix& A);

CokernelClass cokernel_class(const ModMatrix& A, std::uint64_t p, int d);
CokernelClass cokernel_class_from_counts(std::uint64_t p, int d, const std::vector<int>& counts);
CokernelClass cokernel_class_int(const IntMatrix& A, std::uint64_t p, int d);

// Rectangular SNF exponents over Z/m (m = p^d), same pivot rule as the
// square reference; used by presentation-style cokernel computations.
std::vector<int> snf_exponents_rect(int rows, int cols, std::uint64_t m,
                                    std::vector<std::uint64_t> w);

// Rank of A mod p by Gaussian elimination over F_p.
int rank_mod_p(const ModMatrix& A, std::uint64_t p);

// F2 rank of packed bit rows (destructive). words = ceil(ncols / 64).
int rank_f2_inplace(std::vector<std::uint64_t>& rows, int nrows, int ncols);

// Per-prime reduction of an integer matrix followed by classification.
std::map<std::uint64_t, CokernelClass> multi_prime_cokernel(
    const IntMatrix& A, const std::map<std::uint64_t, int>& primes_with_levels);

// Unit inverse mod m (m a prime power, u a unit).
std::uint64_t inverse_mod(std::uint64_t u, std::uint64_t m);

}  // namespace coklab
