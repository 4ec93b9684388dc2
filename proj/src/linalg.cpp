#include "coklab/linalg.hpp"

#include <algorithm>
#include <cstring>

namespace coklab {

std::string symmetry_name(Symmetry s) {
  switch (s) {
    case Symmetry::general: return "general";
    case Symmetry::symmetric: return "symmetric";
    case Symmetry::alternating: return "alternating";
  }
  return "?";
}

Symmetry symmetry_from_name(const std::string& name) {
  if (name == "general" || name == "non-symmetric" || name == "nonsymmetric")
    return Symmetry::general;
  if (name == "symmetric") return Symmetry::symmetric;
  if (name == "alternating") return Symmetry::alternating;
  fail(Errc::BadConfig, "unknown symmetry class: " + name);
}

bool ModMatrix::invariants_hold() const {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (at(i, j) >= m) return false;
      if (sym == Symmetry::symmetric && at(i, j) != at(j, i)) return false;
      if (sym == Symmetry::alternating) {
        if (i == j && at(i, i) != 0) return false;
        if (at(i, j) != (m - at(j, i)) % m) return false;
      }
    }
  return true;
}

ModMatrix IntMatrix::reduce_mod(std::uint64_t m, Symmetry sym) const {
  ModMatrix out(n, m, sym);
  for (size_t i = 0; i < a.size(); ++i) {
    std::int64_t r = a[i] % static_cast<std::int64_t>(m);
    if (r < 0) r += static_cast<std::int64_t>(m);
    out.a[i] = static_cast<std::uint32_t>(r);
  }
  return out;
}

std::string CokernelClass::key() const {
  return std::to_string(p) + "^" + capped_lambda.str() + "s" + std::to_string(saturated_parts);
}

std::uint64_t inverse_mod(std::uint64_t u, std::uint64_t m) {
  std::int64_t t = 0, newt = 1;
  std::int64_t r = static_cast<std::int64_t>(m), newr = static_cast<std::int64_t>(u % m);
  while (newr != 0) {
    std::int64_t q = r / newr;
    std::int64_t tmp = t - q * newt;
    t = newt;
    newt = tmp;
    tmp = r - q * newr;
    r = newr;
    newr = tmp;
  }
  if (r != 1) fail(Errc::BadConfig, "not a unit mod m");
  if (t < 0) t += static_cast<std::int64_t>(m);
  return static_cast<std::uint64_t>(t);
}

// ---------------------------------------------------------------------------
// Reference SNF
// ---------------------------------------------------------------------------

static int valuation(std::uint64_t x, std::uint64_t p, int cap) {
  if (x == 0) return cap;
  int v = 0;
  while (x % p == 0) { x /= p; ++v; }
  return v;
}

std::vector<int> snf_exponents_rect(int rows, int cols, std::uint64_t m,
                                    std::vector<std::uint64_t> w) {
  auto [p, d] = prime_power_split(m);
  auto at = [&](int i, int j) -> std::uint64_t& { return w[static_cast<size_t>(i) * cols + j]; };
  const int steps = std::min(rows, cols);
  std::vector<int> exps;
  for (int k = 0; k < steps; ++k) {
    // Pivot: minimal valuation, ties broken row-major.
    int bi = -1, bj = -1, bv = d + 1;
    for (int i = k; i < rows; ++i)
      for (int j = k; j < cols; ++j) {
        int v = valuation(at(i, j), p, d);
        if (v < bv) { bv = v; bi = i; bj = j; }
      }
    if (bv >= d) {
      for (int t = k; t < steps; ++t) exps.push_back(d);
      break;
    }
    if (bi != k)
      for (int j = 0; j < cols; ++j) std::swap(at(bi, j), at(k, j));
    if (bj != k)
      for (int i = 0; i < rows; ++i) std::swap(at(i, bj), at(i, k));

    const std::uint64_t pv = checked_pow(p, bv);
    const std::uint64_t unit = at(k, k) / pv % (m / pv);
    const std::uint64_t uinv = inverse_mod(unit, m / pv);
    // Clear column k with row operations; the pivot divides every entry.
    for (int i = k + 1; i < rows; ++i) {
      if (at(i, k) == 0) continue;
      std::uint64_t f = at(i, k) / pv % (m / pv) * uinv % (m / pv);
      for (int j = k; j < cols; ++j)
        at(i, j) = (at(i, j) + (m - f * at(k, j) % m)) % m;
    }
    // Clear row k with column operations.
    for (int j = k + 1; j < cols; ++j) {
      if (at(k, j) == 0) continue;
      std::uint64_t f = at(k, j) / pv % (m / pv) * uinv % (m / pv);
      for (int i = k; i < rows; ++i)
        at(i, j) = (at(i, j) + (m - f * at(i, k) % m)) % m;
    }
    exps.push_back(bv);
  }
  std::sort(exps.begin(), exps.end());
  return exps;
}

std::vector<int> smith_normal_form(const ModMatrix& A) {
  prime_power_split(A.m);
  return snf_exponents_rect(A.n, A.n, A.m, std::vector<std::uint64_t>(A.a.begin(), A.a.end()));
}

// ---------------------------------------------------------------------------
// Optimized kernel
// ---------------------------------------------------------------------------

int rank_f2_inplace(std::vector<std::uint64_t>& rows, int nrows, int ncols) {
  const int words = (ncols + 63) / 64;
  int rank = 0;
  for (int col = 0; col < ncols && rank < nrows; ++col) {
    const int w = col >> 6;
    const std::uint64_t mask = 1ull << (col & 63);
    int piv = -1;
    for (int r = rank; r < nrows; ++r)
      if (rows[static_cast<size_t>(r) * words + w] & mask) { piv = r; break; }
    if (piv < 0) continue;
    if (piv != rank)
      for (int t = 0; t < words; ++t)
        std::swap(rows[static_cast<size_t>(piv) * words + t],
                  rows[static_cast<size_t>(rank) * words + t]);
    for (int r = rank + 1; r < nrows; ++r)
      if (rows[static_cast<size_t>(r) * words + w] & mask)
        for (int t = w; t < words; ++t)
          rows[static_cast<size_t>(r) * words + t] ^=
              rows[static_cast<size_t>(rank) * words + t];
    ++rank;
  }
  return rank;
}

namespace {

// Row operation specialized for power-of-two moduli (maskable).
inline void row_sub_mask(std::uint8_t* x, const std::uint8_t* y, std::uint8_t f,
                         std::uint8_t mask, int len) {
  for (int t = 0; t < len; ++t)
    x[t] = static_cast<std::uint8_t>(x[t] - f * y[t]) & mask;
}

inline void row_sub_mod(std::uint8_t* x, const std::uint8_t* y, std::uint32_t f,
                        std::uint32_t m, int len) {
  for (int t = 0; t < len; ++t)
    x[t] = static_cast<std::uint8_t>((x[t] + (m - f * y[t] % m) * 1u) % m);
}

}  // namespace

void snf_exponent_counts_u8(std::uint8_t* a, int n, std::uint64_t p, int d,
                            std::vector<int>& counts, SnfWorkspace& ws) {
  counts.assign(d + 1, 0);
  if (n == 0) return;
  ws.rows.resize(n);
  for (int i = 0; i < n; ++i) ws.rows[i] = a + static_cast<size_t>(i) * n;
  std::uint8_t** rows = ws.rows.data();

  int r0 = 0;    // first active row
  int lead = 0;  // first active column
  const bool p2 = (p == 2);

  for (int level = 0; level < d; ++level) {
    const std::uint32_t mlevel = static_cast<std::uint32_t>(checked_pow(p, d - level));
    const bool maskable = p2;  // power-of-two modulus
    const std::uint8_t mask = static_cast<std::uint8_t>(mlevel - 1);

    if (p2 && mlevel == 2) {
      // F2 endgame: pack the residual into bit rows and rank it.
      const int size = n - r0;
      const int words = (size + 63) / 64;
      ws.bits.assign(static_cast<size_t>(size) * words, 0);
      for (int i = 0; i < size; ++i) {
        const std::uint8_t* src = rows[r0 + i] + lead;
        std::uint64_t* dst = ws.bits.data() + static_cast<size_t>(i) * words;
        for (int j = 0; j < size; ++j)
          if (src[j] & 1) dst[j >> 6] |= 1ull << (j & 63);
      }
      const int rk = rank_f2_inplace(ws.bits, size, size);
      counts[level] += rk;
      counts[d] += size - rk;
      return;
    }

    // Unit-pivot phase at this level.
    while (r0 < n) {
      int pi = -1, pj = -1;
      for (int j = lead; j < n && pi < 0; ++j)
        for (int i = r0; i < n; ++i)
          if (rows[i][j] % p != 0) { pi = i; pj = j; break; }
      if (pi < 0) break;  // no unit left at this level
      if (pi != r0) std::swap(rows[pi], rows[r0]);
      if (pj != lead)
        for (int i = r0; i < n; ++i) std::swap(rows[i][pj], rows[i][lead]);
      const std::uint32_t u = rows[r0][lead] % mlevel;
      const std::uint32_t uinv = static_cast<std::uint32_t>(inverse_mod(u, mlevel));
      const int len = n - lead;
      for (int i = r0 + 1; i < n; ++i) {
        const std::uint32_t f = rows[i][lead] % mlevel * uinv % mlevel;
        if (!f) continue;
        if (maskable)
          row_sub_mask(rows[i] + lead, rows[r0] + lead, static_cast<std::uint8_t>(f), mask, len);
        else
          row_sub_mod(rows[i] + lead, rows[r0] + lead, f, mlevel, len);
      }
      ++counts[level];
      ++r0;
      ++lead;
    }
    if (r0 == n) return;
    // Everything left is divisible by p; peel one level.
    for (int i = r0; i < n; ++i)
      for (int j = lead; j < n; ++j)
        rows[i][j] = static_cast<std::uint8_t>((rows[i][j] % mlevel) / p);
  }
  counts[d] += n - r0;
}

std::vector<int> snf_exponents_fast(const ModMatrix& A) {
  auto [p, d] = prime_power_split(A.m);
  if (A.m > 255) return smith_normal_form(A);
  std::vector<std::uint8_t> buf(A.a.size());
  for (size_t i = 0; i < A.a.size(); ++i) buf[i] = static_cast<std::uint8_t>(A.a[i]);
  SnfWorkspace ws;
  std::vector<int> counts;
  snf_exponent_counts_u8(buf.data(), A.n, p, d, counts, ws);
  std::vector<int> exps;
  for (int v = 0; v <= d; ++v)
    for (int c = 0; c < counts[v]; ++c) exps.push_back(v);
  return exps;
}

// ---------------------------------------------------------------------------
// Cokernel classes
// ---------------------------------------------------------------------------

CokernelClass cokernel_class_from_counts(std::uint64_t p, int d, const std::vector<int>& counts) {
  CokernelClass c;
  c.p = p;
  c.d = d;
  std::vector<int> parts;
  for (int v = d; v >= 1; --v)
    for (int k = 0; k < counts[v]; ++k) parts.push_back(v);
  c.capped_lambda = Partition(std::move(parts));
  c.saturated_parts = counts[d];
  return c;
}

CokernelClass cokernel_class(const ModMatrix& A, std::uint64_t p, int d) {
  if (A.m != checked_pow(p, d))
    fail(Errc::BadConfig, "matrix modulus does not equal p^d");
  std::vector<int> exps = snf_exponents_fast(A);
  std::vector<int> counts(d + 1, 0);
  for (int v : exps) ++counts[v];
  return cokernel_class_from_counts(p, d, counts);
}

CokernelClass cokernel_class_int(const IntMatrix& A, std::uint64_t p, int d) {
  return cokernel_class(A.reduce_mod(checked_pow(p, d)), p, d);
}

int rank_mod_p(const ModMatrix& A, std::uint64_t p) {
  const int n = A.n;
  if (p == 2) {
    const int words = (n + 63) / 64;
    std::vector<std::uint64_t> rows(static_cast<size_t>(n) * words, 0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (A.at(i, j) & 1)
          rows[static_cast<size_t>(i) * words + (j >> 6)] |= 1ull << (j & 63);
    return rank_f2_inplace(rows, n, n);
  }
  std::vector<std::uint32_t> w(A.a.size());
  for (size_t i = 0; i < w.size(); ++i) w[i] = static_cast<std::uint32_t>(A.a[i] % p);
  auto at = [&](int i, int j) -> std::uint32_t& { return w[static_cast<size_t>(i) * n + j]; };
  int rank = 0;
  for (int col = 0; col < n && rank < n; ++col) {
    int piv = -1;
    for (int r = rank; r < n; ++r)
      if (at(r, col) != 0) { piv = r; break; }
    if (piv < 0) continue;
    for (int t = 0; t < n; ++t) std::swap(at(piv, t), at(rank, t));
    std::uint64_t inv = inverse_mod(at(rank, col), p);
    for (int r = rank + 1; r < n; ++r) {
      std::uint64_t f = at(r, col) * inv % p;
      if (f)
        for (int t = col; t < n; ++t)
          at(r, t) = static_cast<std::uint32_t>((at(r, t) + (p - f) * at(rank, t)) % p);
    }
    ++rank;
  }
  return rank;
}

std::map<std::uint64_t, CokernelClass> multi_prime_cokernel(
    const IntMatrix& A, const std::map<std::uint64_t, int>& primes_with_levels) {
  std::map<std::uint64_t, CokernelClass> out;
  for (const auto& [p, d] : primes_with_levels) {
    if (!is_prime_u64(p)) fail(Errc::BadConfig, "non-prime in prime set");
    if (d < 1) fail(Errc::BadConfig, "level must be >= 1");
    out.emplace(p, cokernel_class_int(A, p, d));
  }
  return out;
}

}  // namespace coklab
