#include "coklab/groups.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <numeric>
#include <unordered_map>

namespace coklab {

// ---------------------------------------------------------------------------
// Partition
// ---------------------------------------------------------------------------

Partition::Partition(std::vector<int> p) : parts(std::move(p)) {
  for (size_t i = 0; i < parts.size(); ++i) {
    if (parts[i] < 1) fail(Errc::BadConfig, "partition parts must be >= 1");
    if (i + 1 < parts.size() && parts[i] < parts[i + 1])
      fail(Errc::BadConfig, "partition parts must be weakly decreasing");
  }
}

int Partition::sum() const {
  int s = 0;
  for (int x : parts) s += x;
  return s;
}

Partition Partition::conjugate() const {
  std::vector<int> out;
  for (int j = 1; j <= largest(); ++j) {
    int c = 0;
    for (int x : parts)
      if (x >= j) ++c;
    out.push_back(c);
  }
  return Partition(std::move(out));
}

std::string Partition::str() const {
  std::string s = "[";
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(parts[i]);
  }
  return s + "]";
}

Partition conjugate(const Partition& lambda) { return lambda.conjugate(); }

static void gen_partitions(int remaining, int max_part, std::vector<int>& cur,
                           std::vector<Partition>& out) {
  out.push_back(Partition(cur));
  for (int next = std::min(remaining, max_part); next >= 1; --next) {
    cur.push_back(next);
    gen_partitions(remaining - next, next, cur, out);
    cur.pop_back();
  }
}

std::vector<Partition> partitions_up_to(int max_sum) {
  std::vector<Partition> out;
  std::vector<int> cur;
  gen_partitions(max_sum, max_sum, cur, out);
  std::sort(out.begin(), out.end(), [](const Partition& a, const Partition& b) {
    if (a.sum() != b.sum()) return a.sum() < b.sum();
    return a.parts < b.parts;
  });
  return out;
}

// ---------------------------------------------------------------------------
// PGroupType / AbGroupType
// ---------------------------------------------------------------------------

PGroupType::PGroupType(std::uint64_t prime, Partition l) : p(prime), lambda(std::move(l)) {
  if (!is_prime_u64(p)) fail(Errc::BadConfig, "p = " + std::to_string(p) + " is not prime");
}

std::uint64_t PGroupType::order() const { return checked_pow(p, lambda.sum()); }

std::uint64_t PGroupType::exponent() const { return checked_pow(p, lambda.largest()); }

std::uint64_t PGroupType::torsion_order(int v) const {
  int e = 0;
  for (int x : lambda.parts) e += std::min(x, v);
  return checked_pow(p, e);
}

bool PGroupType::is_square() const {
  size_t i = 0;
  while (i < lambda.parts.size()) {
    size_t j = i;
    while (j < lambda.parts.size() && lambda.parts[j] == lambda.parts[i]) ++j;
    if ((j - i) % 2 != 0) return false;
    i = j;
  }
  return true;
}

PGroupType PGroupType::square_root() const {
  if (!is_square()) fail(Errc::NotInSp, "type " + lambda.str() + " is not of the form K x K");
  std::vector<int> half;
  for (size_t i = 0; i < lambda.parts.size(); i += 2) half.push_back(lambda.parts[i]);
  return PGroupType(p, Partition(std::move(half)));
}

std::string PGroupType::str() const {
  return "{p=" + std::to_string(p) + ", lambda=" + lambda.str() + "}";
}

AbGroupType::AbGroupType(std::map<std::uint64_t, Partition> c) : components(std::move(c)) {
  for (const auto& [p, lam] : components) {
    if (!is_prime_u64(p)) fail(Errc::BadConfig, "non-prime key in group type");
    if (lam.empty()) fail(Errc::BadConfig, "trivial component in multi-prime type");
  }
}

PGroupType AbGroupType::primary(std::uint64_t p) const {
  auto it = components.find(p);
  if (it == components.end()) return PGroupType(p, Partition{});
  return PGroupType(p, it->second);
}

std::uint64_t AbGroupType::order() const {
  std::uint64_t o = 1;
  for (const auto& [p, lam] : components) {
    unsigned __int128 t = static_cast<unsigned __int128>(o) * checked_pow(p, lam.sum());
    if (t > UINT64_MAX) fail(Errc::Overflow, "group order overflows");
    o = static_cast<std::uint64_t>(t);
  }
  return o;
}

std::string AbGroupType::str() const {
  std::string s = "{";
  bool first = true;
  for (const auto& [p, lam] : components) {
    if (!first) s += ", ";
    first = false;
    s += std::to_string(p) + ": " + lam.str();
  }
  return s + "}";
}

// ---------------------------------------------------------------------------
// Closed-form orders
// ---------------------------------------------------------------------------

std::uint64_t ext_square_order(const PGroupType& g) {
  Partition c = g.lambda.conjugate();
  std::uint64_t e = 0;
  for (int lj : c.parts) e += static_cast<std::uint64_t>(lj) * (lj - 1) / 2;
  return checked_pow(g.p, e);
}

std::uint64_t sym_square_order(const PGroupType& g) {
  Partition c = g.lambda.conjugate();
  std::uint64_t e = 0;
  for (int lj : c.parts) e += static_cast<std::uint64_t>(lj) * (lj + 1) / 2;
  return checked_pow(g.p, e);
}

// Exponent bookkeeping shared by aut_order and log_aut_order. The type is
// rewritten ascending (e_1 <= ... <= e_n); d_k = max{l : e_l = e_k},
// c_k = min{l : e_l = e_k}.
struct AutFactors {
  std::vector<int> e, c, d;
  int n;
};

static AutFactors aut_factors(const Partition& lambda) {
  AutFactors f;
  f.e.assign(lambda.parts.rbegin(), lambda.parts.rend());
  f.n = static_cast<int>(f.e.size());
  f.c.resize(f.n);
  f.d.resize(f.n);
  for (int k = 0; k < f.n; ++k) {
    int lo = k, hi = k;
    while (lo > 0 && f.e[lo - 1] == f.e[k]) --lo;
    while (hi + 1 < f.n && f.e[hi + 1] == f.e[k]) ++hi;
    f.c[k] = lo + 1;
    f.d[k] = hi + 1;
  }
  return f;
}

std::uint64_t aut_order(const PGroupType& g) {
  AutFactors f = aut_factors(g.lambda);
  unsigned __int128 acc = 1;
  auto mul = [&acc](unsigned __int128 x) {
    acc *= x;
    if (acc > static_cast<unsigned __int128>(UINT64_MAX))
      fail(Errc::Overflow, "|Aut| overflows 64 bits");
  };
  for (int k = 0; k < f.n; ++k)
    mul(checked_pow(g.p, f.d[k]) - checked_pow(g.p, k));
  for (int j = 0; j < f.n; ++j)
    mul(checked_pow(g.p, static_cast<std::uint64_t>(f.e[j]) * (f.n - f.d[j])));
  for (int i = 0; i < f.n; ++i)
    mul(checked_pow(g.p, static_cast<std::uint64_t>(f.e[i] - 1) * (f.n - f.c[i] + 1)));
  return static_cast<std::uint64_t>(acc);
}

long double log_aut_order(const PGroupType& g) {
  AutFactors f = aut_factors(g.lambda);
  long double lp = std::log(static_cast<long double>(g.p));
  long double s = 0;
  for (int k = 0; k < f.n; ++k)
    s += f.d[k] * lp + std::log1p(-std::exp((k - f.d[k]) * lp));
  for (int j = 0; j < f.n; ++j)
    s += static_cast<long double>(f.e[j]) * (f.n - f.d[j]) * lp;
  for (int i = 0; i < f.n; ++i)
    s += static_cast<long double>(f.e[i] - 1) * (f.n - f.c[i] + 1) * lp;
  return s;
}

// ---------------------------------------------------------------------------
// AbelianTable
// ---------------------------------------------------------------------------

AbelianTable::AbelianTable(std::vector<std::uint32_t> moduli) : mods(std::move(moduli)) {
  size = 1;
  for (std::uint32_t m : mods) {
    if (m < 2) fail(Errc::BadConfig, "cyclic modulus must be >= 2");
    size *= m;
  }
}

AbelianTable AbelianTable::of(const PGroupType& g) {
  std::vector<std::uint32_t> mods;
  for (int l : g.lambda.parts)
    mods.push_back(static_cast<std::uint32_t>(checked_pow(g.p, l)));
  return AbelianTable(std::move(mods));
}

AbelianTable AbelianTable::square_of(const PGroupType& g) {
  AbelianTable one = of(g);
  std::vector<std::uint32_t> mods = one.mods;
  mods.insert(mods.end(), one.mods.begin(), one.mods.end());
  return AbelianTable(std::move(mods));
}

void AbelianTable::decode(std::uint64_t e, std::uint32_t* digits) const {
  for (size_t i = mods.size(); i-- > 0;) {
    digits[i] = static_cast<std::uint32_t>(e % mods[i]);
    e /= mods[i];
  }
}

std::uint64_t AbelianTable::encode(const std::uint32_t* digits) const {
  std::uint64_t e = 0;
  for (size_t i = 0; i < mods.size(); ++i) e = e * mods[i] + digits[i];
  return e;
}

std::uint64_t AbelianTable::add(std::uint64_t a, std::uint64_t b) const {
  std::uint64_t out = 0;
  for (size_t i = mods.size(); i-- > 0;) {
    std::uint64_t da = a % mods[i], db = b % mods[i];
    a /= mods[i];
    b /= mods[i];
    std::uint64_t ds = da + db;
    if (ds >= mods[i]) ds -= mods[i];
    std::uint64_t place = 1;
    for (size_t j = mods.size(); j-- > i + 1;) place *= mods[j];
    out += ds * place;
  }
  return out;
}

std::uint64_t AbelianTable::neg(std::uint64_t a) const {
  std::uint64_t out = 0;
  for (size_t i = mods.size(); i-- > 0;) {
    std::uint64_t da = a % mods[i];
    a /= mods[i];
    std::uint64_t dn = da == 0 ? 0 : mods[i] - da;
    std::uint64_t place = 1;
    for (size_t j = mods.size(); j-- > i + 1;) place *= mods[j];
    out += dn * place;
  }
  return out;
}

std::uint64_t AbelianTable::scalar_mul(std::uint64_t k, std::uint64_t a) const {
  std::uint64_t out = 0;
  for (size_t i = mods.size(); i-- > 0;) {
    std::uint64_t da = a % mods[i];
    a /= mods[i];
    std::uint64_t dm = (da * (k % mods[i])) % mods[i];
    std::uint64_t place = 1;
    for (size_t j = mods.size(); j-- > i + 1;) place *= mods[j];
    out += dm * place;
  }
  return out;
}

std::uint64_t AbelianTable::order_of(std::uint64_t a) const {
  std::uint64_t ord = 1;
  for (size_t i = mods.size(); i-- > 0;) {
    std::uint64_t da = a % mods[i];
    a /= mods[i];
    std::uint64_t g = std::gcd<std::uint64_t, std::uint64_t>(da, mods[i]);
    std::uint64_t oi = mods[i] / g;
    ord = ord / std::gcd(ord, oi) * oi;
  }
  return ord;
}

std::uint64_t AbelianTable::generator(std::uint32_t i) const {
  std::uint64_t place = 1;
  for (size_t j = mods.size(); j-- > i + 1;) place *= mods[j];
  return place;
}

// ---------------------------------------------------------------------------
// Subgroups
// ---------------------------------------------------------------------------

bool SubgroupRecord::contains(std::uint32_t e) const {
  return std::binary_search(elements.begin(), elements.end(), e);
}

bool SubgroupRecord::contains_all(const SubgroupRecord& other) const {
  return std::includes(elements.begin(), elements.end(), other.elements.begin(),
                       other.elements.end());
}

Partition SubgroupRecord::type(std::uint64_t p) const {
  if (!ambient) fail(Errc::BadConfig, "subgroup record without ambient table");
  int dmax = 0;
  {
    std::uint64_t e = 1;
    std::uint32_t mmax = 0;
    for (std::uint32_t m : ambient->mods) mmax = std::max(mmax, m);
    while (e < mmax) { e *= p; ++dmax; }
  }
  std::vector<int> logs(dmax + 1, 0);  // logs[j] = log_p |K[p^j]|
  for (int j = 1; j <= dmax; ++j) {
    std::uint64_t pj = checked_pow(p, j);
    std::uint64_t cnt = 0;
    for (std::uint32_t e : elements)
      if (ambient->scalar_mul(pj, e) == 0) ++cnt;
    int lg = 0;
    while (cnt > 1) { cnt /= p; ++lg; }
    logs[j] = lg;
  }
  std::vector<int> conj;  // conjugate partition entries mu'_j
  for (int j = 1; j <= dmax; ++j) {
    int mj = logs[j] - logs[j - 1];
    if (mj > 0) conj.push_back(mj);
  }
  return Partition(std::move(conj)).conjugate();
}

namespace {

struct BitsetHash {
  size_t operator()(const std::vector<std::uint64_t>& v) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint64_t w : v) {
      h ^= w;
      h *= 1099511628211ull;
      h ^= h >> 29;
    }
    return static_cast<size_t>(h);
  }
};

struct BitSubgroup {
  std::vector<std::uint64_t> bits;
  std::vector<std::uint32_t> elems;
};

bool bit_test(const std::vector<std::uint64_t>& b, std::uint64_t i) {
  return (b[i >> 6] >> (i & 63)) & 1;
}
void bit_set(std::vector<std::uint64_t>& b, std::uint64_t i) { b[i >> 6] |= 1ull << (i & 63); }

}  // namespace

std::vector<SubgroupRecord> enumerate_subgroups(const AbelianTable& tab) {
  if (tab.size > kEnumerationGuard)
    fail(Errc::GroupTooLarge, "group of order " + std::to_string(tab.size) +
                                  " exceeds the enumeration guard");
  const size_t words = (tab.size + 63) / 64;
  std::unordered_map<std::vector<std::uint64_t>, size_t, BitsetHash> seen;
  std::vector<BitSubgroup> out;

  BitSubgroup triv;
  triv.bits.assign(words, 0);
  bit_set(triv.bits, 0);
  triv.elems = {0};
  seen.emplace(triv.bits, 0);
  out.push_back(triv);

  std::deque<size_t> queue = {0};
  while (!queue.empty()) {
    size_t si = queue.front();
    queue.pop_front();
    for (std::uint64_t g = 1; g < tab.size; ++g) {
      const BitSubgroup& s = out[si];  // re-fetch: out may have grown
      if (bit_test(s.bits, g)) continue;
      BitSubgroup t;
      t.bits = s.bits;
      t.elems = s.elems;
      std::uint64_t x = g;
      while (!bit_test(t.bits, x)) {
        for (std::uint32_t e : s.elems) {
          std::uint64_t y = tab.add(e, x);
          if (!bit_test(t.bits, y)) {
            bit_set(t.bits, y);
            t.elems.push_back(static_cast<std::uint32_t>(y));
          }
        }
        x = tab.add(x, g);
      }
      auto [it, fresh] = seen.emplace(t.bits, out.size());
      if (fresh) {
        std::sort(t.elems.begin(), t.elems.end());
        out.push_back(std::move(t));
        queue.push_back(out.size() - 1);
      }
    }
  }

  std::vector<SubgroupRecord> recs;
  recs.reserve(out.size());
  for (auto& b : out) {
    SubgroupRecord r;
    r.ambient = &tab;
    r.elements = std::move(b.elems);
    std::sort(r.elements.begin(), r.elements.end());
    recs.push_back(std::move(r));
  }
  std::sort(recs.begin(), recs.end(), [](const SubgroupRecord& a, const SubgroupRecord& b) {
    if (a.elements.size() != b.elements.size()) return a.elements.size() < b.elements.size();
    return a.elements < b.elements;
  });
  // Records point at the caller-owned table; re-point after sort is a no-op
  // here since all share one ambient.
  return recs;
}

std::vector<SubgroupRecord> enumerate_subgroups(const PGroupType& g) {
  // Keepalive with stable addresses; convenience path for tests and small
  // censuses, where the handful of leaked tables is immaterial.
  static thread_local std::deque<AbelianTable> keepalive;
  keepalive.push_back(AbelianTable::of(g));
  const AbelianTable& tab = keepalive.back();
  auto recs = enumerate_subgroups(tab);
  for (auto& r : recs) r.ambient = &tab;
  return recs;
}

static bool subgroup_is_closed(const SubgroupRecord& k) {
  if (k.elements.empty() || k.elements.front() != 0) return false;
  for (std::uint32_t a : k.elements)
    for (std::uint32_t b : k.elements)
      if (!k.contains(static_cast<std::uint32_t>(k.ambient->add(a, b)))) return false;
  return true;
}

std::int64_t moebius(const SubgroupRecord& k, const PGroupType& g) {
  AbelianTable tab = AbelianTable::of(g);
  if (!k.ambient || k.ambient->mods != tab.mods || !subgroup_is_closed(k))
    fail(Errc::NotASubgroup, "record is not a subgroup of the given group");
  SubgroupLattice lat = SubgroupLattice::build(g);
  for (size_t i = 0; i < lat.subgroups.size(); ++i)
    if (lat.subgroups[i].elements == k.elements) return lat.mu[i];
  fail(Errc::NotASubgroup, "subgroup not found in lattice");
}

SubgroupLattice SubgroupLattice::build(const PGroupType& g) {
  SubgroupLattice lat;
  lat.tab = std::make_shared<AbelianTable>(AbelianTable::of(g));
  lat.subgroups = enumerate_subgroups(*lat.tab);
  for (auto& s : lat.subgroups) s.ambient = lat.tab.get();
  const size_t n = lat.subgroups.size();
  lat.mu.assign(n, 0);
  // Subgroups are sorted by size ascending; walk from the top down.
  for (size_t i = n; i-- > 0;) {
    if (lat.subgroups[i].size() == lat.tab->size) {
      lat.mu[i] = 1;
      continue;
    }
    std::int64_t acc = 0;
    for (size_t j = i + 1; j < n; ++j)
      if (lat.subgroups[j].size() > lat.subgroups[i].size() &&
          lat.subgroups[j].contains_all(lat.subgroups[i]))
        acc += lat.mu[j];
    lat.mu[i] = -acc;
  }
  lat.types.reserve(n);
  for (auto& s : lat.subgroups) lat.types.push_back(s.type(g.p));
  return lat;
}

// ---------------------------------------------------------------------------
// Pairings
// ---------------------------------------------------------------------------

std::uint64_t dot_pairing(const AbelianTable& tab, std::uint64_t p, int d,
                          std::uint64_t a, std::uint64_t b) {
  const std::uint64_t pd = checked_pow(p, d);
  unsigned __int128 acc = 0;
  for (size_t i = tab.mods.size(); i-- > 0;) {
    std::uint64_t da = a % tab.mods[i], db = b % tab.mods[i];
    a /= tab.mods[i];
    b /= tab.mods[i];
    std::uint64_t scale = pd / tab.mods[i];  // p^(d - e_i)
    acc += static_cast<unsigned __int128>(da) * db % pd * scale;
  }
  return static_cast<std::uint64_t>(acc % pd);
}

std::uint64_t count_symmetric_perfect_pairings_mods(std::uint64_t p,
                                                    const std::vector<int>& exponents) {
  if (exponents.empty()) return 1;
  const int r = static_cast<int>(exponents.size());
  int d = 0;
  std::vector<std::uint32_t> mods;
  unsigned __int128 order = 1;
  for (int e : exponents) {
    if (e < 1) fail(Errc::BadConfig, "exponents must be >= 1");
    d = std::max(d, e);
    mods.push_back(static_cast<std::uint32_t>(checked_pow(p, e)));
    order *= mods.back();
  }
  if (order > kEnumerationGuard)
    fail(Errc::GroupTooLarge, "pairing enumeration beyond guard");
  const std::uint64_t pd = checked_pow(p, d);
  const AbelianTable tab(mods);

  // Candidate Gram entries: b_ij = p^(d - m_ij) * t with t < p^(m_ij),
  // m_ij = min(e_i, e_j). Enumerate the upper triangle.
  std::vector<std::pair<int, int>> slots;
  std::vector<std::uint64_t> slot_card;
  unsigned __int128 total = 1;
  for (int i = 0; i < r; ++i)
    for (int j = i; j < r; ++j) {
      std::uint64_t card = checked_pow(p, std::min(exponents[i], exponents[j]));
      slots.push_back({i, j});
      slot_card.push_back(card);
      total *= card;
      if (total > (1u << 26))
        fail(Errc::GroupTooLarge, "pairing Gram enumeration beyond guard");
    }

  const bool elementary = d == 1;
  std::vector<std::uint64_t> gram(static_cast<size_t>(r) * r, 0);
  std::vector<std::uint64_t> odo(slots.size(), 0);
  std::uint64_t count = 0;
  std::vector<std::uint32_t> dig(r);

  auto perfect = [&]() -> bool {
    if (elementary) {
      // Gram over F_p; perfect iff invertible. Gaussian elimination.
      std::vector<std::uint64_t> m = gram;
      int rank = 0;
      for (int col = 0; col < r && rank < r; ++col) {
        int piv = -1;
        for (int row = rank; row < r; ++row)
          if (m[row * r + col] % p != 0) { piv = row; break; }
        if (piv < 0) return false;
        for (int t = 0; t < r; ++t) std::swap(m[rank * r + t], m[piv * r + t]);
        std::uint64_t inv = 1, base = m[rank * r + col] % p;
        for (std::uint64_t e = 1; e < p - 1; ++e) inv = inv * base % p;
        for (int row = rank + 1; row < r; ++row) {
          std::uint64_t f = m[row * r + col] % p * inv % p;
          if (f)
            for (int t = col; t < r; ++t)
              m[row * r + t] = (m[row * r + t] + (p - f) * m[rank * r + t]) % p;
        }
        ++rank;
      }
      return rank == r;
    }
    // General case: the induced map g -> (h -> b(g, h)) must be injective.
    for (std::uint64_t g = 1; g < tab.size; ++g) {
      tab.decode(g, dig.data());
      bool kernel = true;
      for (int j = 0; j < r && kernel; ++j) {
        unsigned __int128 acc = 0;
        for (int i = 0; i < r; ++i)
          acc += static_cast<unsigned __int128>(dig[i]) * gram[i * r + j];
        if (acc % pd != 0) kernel = false;
      }
      if (kernel) return false;
    }
    return true;
  };

  while (true) {
    for (size_t s = 0; s < slots.size(); ++s) {
      auto [i, j] = slots[s];
      int mij = std::min(exponents[i], exponents[j]);
      std::uint64_t val = (pd / checked_pow(p, mij)) * odo[s] % pd;
      gram[i * r + j] = val;
      gram[j * r + i] = val;
    }
    if (perfect()) ++count;
    size_t s = 0;
    while (s < slots.size() && ++odo[s] == slot_card[s]) odo[s++] = 0;
    if (s == slots.size()) break;
  }
  return count;
}

std::uint64_t count_symmetric_perfect_pairings(const PGroupType& h) {
  return count_symmetric_perfect_pairings_mods(h.p, h.lambda.parts);
}

namespace {

// Counts tuples of generator images preserving a fixed perfect alternating
// Gram, by depth-first search with a work budget. Form preservation against a
// perfect pairing forces injectivity, so every counted tuple is an
// automorphism.
struct SpSearch {
  const AbelianTable& tab;
  std::uint64_t p;
  int d;
  std::uint64_t pd;
  const std::vector<std::vector<std::uint64_t>>& gram;
  std::vector<std::uint64_t> images;
  std::uint64_t count = 0;
  std::uint64_t work = 0;
  static constexpr std::uint64_t kBudget = 400000000ull;

  SpSearch(const AbelianTable& t, std::uint64_t prime, int level,
           const std::vector<std::vector<std::uint64_t>>& g)
      : tab(t), p(prime), d(level), pd(checked_pow(prime, level)), gram(g) {}

  std::uint64_t pair(std::uint64_t a, std::uint64_t b) const {
    // Hyperbolic pairing on G x G realized on the doubled table:
    // B((x,y),(x',y')) = P(x,y') - P(x',y). The doubled table interleaves
    // first-copy digits then second-copy digits.
    const size_t k = tab.mods.size() / 2;
    std::vector<std::uint32_t> da(tab.mods.size()), db(tab.mods.size());
    tab.decode(a, da.data());
    tab.decode(b, db.data());
    unsigned __int128 acc = 0;
    for (size_t i = 0; i < k; ++i) {
      std::uint64_t scale = pd / tab.mods[i];
      std::uint64_t fwd = static_cast<std::uint64_t>(da[i]) * db[k + i] % pd;
      std::uint64_t bwd = static_cast<std::uint64_t>(db[i]) * da[k + i] % pd;
      acc += scale % pd * ((fwd + pd - bwd) % pd) % pd;
    }
    return static_cast<std::uint64_t>(acc % pd);
  }

  void dfs(size_t t) {
    const size_t n = tab.mods.size();
    if (t == n) {
      ++count;
      return;
    }
    for (std::uint64_t cand = 0; cand < tab.size; ++cand) {
      if (++work > kBudget)
        fail(Errc::GroupTooLarge, "Sp enumeration exceeded its work budget");
      if (tab.scalar_mul(tab.mods[t], cand) != 0) continue;
      bool ok = true;
      for (size_t s = 0; s < t && ok; ++s)
        if (pair(images[s], cand) != gram[s][t]) ok = false;
      if (!ok) continue;
      images.push_back(cand);
      dfs(t + 1);
      images.pop_back();
    }
  }
};

}  // namespace

std::uint64_t sp_order_with_gram(const PGroupType& h,
                                 const std::vector<std::vector<std::uint64_t>>& gram) {
  if (h.trivial()) return 1;
  if (!h.is_square()) fail(Errc::NotInSp, "type " + h.lambda.str() + " has an odd multiplicity");
  if (h.order() > kEnumerationGuard * 4)
    fail(Errc::GroupTooLarge, "Sp enumeration beyond guard for " + h.str());
  PGroupType half = h.square_root();
  AbelianTable tab = AbelianTable::square_of(half);
  SpSearch search(tab, h.p, half.lambda.largest(), gram);
  // Reference Gram for validation of the caller's matrix shape.
  const size_t n = tab.mods.size();
  if (gram.size() != n) fail(Errc::BadConfig, "Gram size mismatch");
  for (size_t i = 0; i < n; ++i) {
    if (gram[i].size() != n) fail(Errc::BadConfig, "Gram size mismatch");
    if (gram[i][i] != 0) fail(Errc::BadConfig, "Gram is not alternating");
  }
  search.dfs(0);
  return search.count;
}

std::uint64_t sp_order(const PGroupType& h) {
  if (h.trivial()) return 1;
  if (!h.is_square()) fail(Errc::NotInSp, "type " + h.lambda.str() + " has an odd multiplicity");
  PGroupType half = h.square_root();
  AbelianTable tab = AbelianTable::square_of(half);
  const size_t k = half.lambda.parts.size();
  const int d = half.lambda.largest();
  const std::uint64_t pd = checked_pow(h.p, d);
  // Hyperbolic Gram on generators (e_1..e_k, f_1..f_k):
  // B(e_i, f_i) = p^(d - mu_i), all other generator pairs 0.
  std::vector<std::vector<std::uint64_t>> gram(2 * k, std::vector<std::uint64_t>(2 * k, 0));
  for (size_t i = 0; i < k; ++i) {
    std::uint64_t v = pd / checked_pow(h.p, half.lambda.parts[i]);
    v %= pd;
    gram[i][k + i] = v;
    gram[k + i][i] = (pd - v) % pd;
  }
  return sp_order_with_gram(h, gram);
}

}  // namespace coklab
