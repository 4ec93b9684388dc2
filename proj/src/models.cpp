#include "coklab/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace coklab {

double alpha_schedule(double c, int n) {
  if (c <= 0) fail(Errc::BadConfig, "alpha schedule needs c > 0");
  if (n < 2) fail(Errc::BadConfig, "alpha schedule needs n >= 2");
  double a = c * std::log(static_cast<double>(n)) / n;
  return std::min(a, 0.5);
}

// ---------------------------------------------------------------------------
// EntryDistribution
// ---------------------------------------------------------------------------

EntryDistribution::EntryDistribution(std::uint64_t modulus,
                                     std::vector<std::pair<std::uint32_t, Rational>> sup)
    : m(modulus), support(std::move(sup)) {
  if (m < 2) fail(Errc::BadConfig, "modulus must be >= 2");
  Rational total(0);
  for (auto& [r, pr] : support) {
    if (r >= m) fail(Errc::BadConfig, "support residue out of range");
    if (!(Rational(0) < pr) || Rational(1) < pr)
      fail(Errc::BadConfig, "support probabilities must lie in (0, 1]");
    total += pr;
  }
  if (total != Rational(1)) fail(Errc::BadConfig, "support probabilities must sum to 1");
  std::sort(support.begin(), support.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 0; i + 1 < support.size(); ++i)
    if (support[i].first == support[i + 1].first)
      fail(Errc::BadConfig, "duplicate residue in support");
  finalize();
}

void EntryDistribution::finalize() {
  cum_.clear();
  cum_nonzero_.clear();
  nonzero_vals_.clear();
  double acc = 0;
  Rational zp(0);
  for (auto& [r, pr] : support) {
    acc += pr.to_double();
    cum_.push_back(acc);
    if (r == 0) zp = pr;
  }
  cum_.back() = 1.0;
  zero_prob_ = zp.to_double();
  double accnz = 0;
  const double nzmass = 1.0 - zero_prob_;
  for (auto& [r, pr] : support) {
    if (r == 0) continue;
    accnz += pr.to_double() / nzmass;
    cum_nonzero_.push_back(accnz);
    nonzero_vals_.push_back(r);
  }
  if (!cum_nonzero_.empty()) cum_nonzero_.back() = 1.0;
  sparse_ = zero_prob_ >= 0.5 && !nonzero_vals_.empty();
  log1m_nonzero_ = sparse_ ? std::log(zero_prob_) : 0.0;
}

Rational EntryDistribution::alpha_of() const {
  // Reduction mod p for every prime p | m; the certificate is the worst case.
  Rational best_max(0);
  std::uint64_t rem = m;
  for (std::uint64_t p = 2; p <= rem; ++p) {
    if (rem % p != 0) continue;
    while (rem % p == 0) rem /= p;
    std::vector<Rational> cls(p, Rational(0));
    for (auto& [r, pr] : support) cls[r % p] += pr;
    for (auto& c : cls)
      if (best_max < c) best_max = c;
  }
  return Rational(1) - best_max;
}

Rational EntryDistribution::prob_of(std::uint32_t residue) const {
  for (auto& [r, pr] : support)
    if (r == residue) return pr;
  return Rational(0);
}

std::uint32_t EntryDistribution::sample(RngStream& rng) const {
  double u = rng.next_unit();
  size_t i = 0;
  while (i + 1 < cum_.size() && u >= cum_[i]) ++i;
  return support[i].first;
}

std::uint32_t EntryDistribution::sample_nonzero(RngStream& rng) const {
  double u = rng.next_unit();
  size_t i = 0;
  while (i + 1 < cum_nonzero_.size() && u >= cum_nonzero_[i]) ++i;
  return nonzero_vals_[i];
}

EntryDistribution EntryDistribution::spike01(const Rational& alpha, std::uint64_t m) {
  if (!(Rational(0) < alpha) || Rational(1, 2) < alpha)
    fail(Errc::BadConfig, "spike01 needs alpha in (0, 1/2]");
  std::vector<std::pair<std::uint32_t, Rational>> sup = {{0u, Rational(1) - alpha},
                                                         {1u, alpha}};
  return EntryDistribution(m, std::move(sup));
}

EntryDistribution EntryDistribution::spike_uniform(const Rational& alpha, std::uint64_t m) {
  if (!(Rational(0) < alpha) || Rational(1, 2) < alpha)
    fail(Errc::BadConfig, "spike_uniform needs alpha in (0, 1/2]");
  std::vector<std::pair<std::uint32_t, Rational>> sup;
  sup.push_back({0u, Rational(1) - alpha});
  Rational each = alpha / Rational(static_cast<std::int64_t>(m - 1));
  for (std::uint32_t r = 1; r < m; ++r) sup.push_back({r, each});
  return EntryDistribution(m, std::move(sup));
}

EntryDistribution EntryDistribution::uniform(std::uint64_t m) {
  std::vector<std::pair<std::uint32_t, Rational>> sup;
  for (std::uint32_t r = 0; r < m; ++r)
    sup.push_back({r, Rational(1, static_cast<std::int64_t>(m))});
  return EntryDistribution(m, std::move(sup));
}

// ---------------------------------------------------------------------------
// Matrix sampling
// ---------------------------------------------------------------------------

const EntryDistribution& MatrixModel::dist_at(int i, int j) const {
  for (const auto& o : overrides)
    if (o.row == i && o.col == j) return o.dist;
  return dist;
}

namespace {

// Visits the free entries of the symmetry class in row-major order.
template <typename F>
void for_free_entries(Symmetry sym, int n, F&& f) {
  switch (sym) {
    case Symmetry::general:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f(i, j);
      break;
    case Symmetry::symmetric:
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) f(i, j);
      break;
    case Symmetry::alternating:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) f(i, j);
      break;
  }
}

}  // namespace

namespace {

// Shared sampling core: identical draw sequence for every output sink.
template <typename Place>
void sample_core(const MatrixModel& model, RngStream& rng, Place&& place) {
  const int n = model.n;
  if (model.overrides.empty() && model.dist.sparse_plan()) {
    // Geometric jumps over the row-major free-entry sequence.
    std::uint64_t total = 0;
    switch (model.kind) {
      case Symmetry::general: total = static_cast<std::uint64_t>(n) * n; break;
      case Symmetry::symmetric: total = static_cast<std::uint64_t>(n) * (n + 1) / 2; break;
      case Symmetry::alternating: total = static_cast<std::uint64_t>(n) * (n - 1) / 2; break;
    }
    auto entry_at = [&](std::uint64_t pos) -> std::pair<int, int> {
      if (model.kind == Symmetry::general)
        return {static_cast<int>(pos / n), static_cast<int>(pos % n)};
      // Triangular row-major walk.
      std::uint64_t i = 0;
      std::uint64_t rowlen = model.kind == Symmetry::symmetric ? n : n - 1;
      std::uint64_t base = model.kind == Symmetry::symmetric ? 0 : 1;
      while (pos >= rowlen) {
        pos -= rowlen;
        ++i;
        --rowlen;
      }
      return {static_cast<int>(i), static_cast<int>(i + base + pos)};
    };
    const double log1m = model.dist.log1m_nonzero_prob();
    std::uint64_t pos = rng.next_geometric_gap(log1m);
    while (pos < total) {
      auto [i, j] = entry_at(pos);
      place(i, j, model.dist.sample_nonzero(rng));
      pos += 1 + rng.next_geometric_gap(log1m);
    }
    return;
  }
  for_free_entries(model.kind, n, [&](int i, int j) {
    place(i, j, model.dist_at(i, j).sample(rng));
  });
}

}  // namespace

ModMatrix sample_matrix(const MatrixModel& model, RngStream& rng) {
  ModMatrix out(model.n, model.dist.m, model.kind);
  sample_core(model, rng, [&](int i, int j, std::uint32_t v) {
    out.at(i, j) = v;
    if (model.kind == Symmetry::symmetric && i != j) out.at(j, i) = v;
    if (model.kind == Symmetry::alternating)
      out.at(j, i) = static_cast<std::uint32_t>((out.m - v) % out.m);
  });
  return out;
}

void sample_matrix_u8(const MatrixModel& model, RngStream& rng, std::uint8_t* out) {
  const int n = model.n;
  const std::uint64_t m = model.dist.m;
  if (m > 255) fail(Errc::BadConfig, "byte sampler needs m <= 255");
  std::memset(out, 0, static_cast<size_t>(n) * n);
  sample_core(model, rng, [&](int i, int j, std::uint32_t v) {
    out[static_cast<size_t>(i) * n + j] = static_cast<std::uint8_t>(v);
    if (model.kind == Symmetry::symmetric && i != j)
      out[static_cast<size_t>(j) * n + i] = static_cast<std::uint8_t>(v);
    if (model.kind == Symmetry::alternating)
      out[static_cast<size_t>(j) * n + i] = static_cast<std::uint8_t>((m - v) % m);
  });
}

// ---------------------------------------------------------------------------
// Graph sampling
// ---------------------------------------------------------------------------

double GraphModel::beta_value() const {
  if (beta) return beta->to_double();
  if (beta_c0) return (std::log(static_cast<double>(n)) + *beta_c0) / n;
  fail(Errc::BadConfig, "graph model needs beta or a beta schedule");
}

bool graph_connected(int n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  if (n <= 1) return true;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  int comps = n;
  for (auto [u, v] : edges) {
    int ru = find(static_cast<int>(u)), rv = find(static_cast<int>(v));
    if (ru != rv) {
      parent[ru] = rv;
      --comps;
    }
  }
  return comps == 1;
}

GraphSample sample_graph(const GraphModel& model, RngStream& rng) {
  const int n = model.n;
  if (n < 2) fail(Errc::BadConfig, "graph model needs n >= 2");
  const double beta = model.beta_value();
  if (!(beta > 0.0) || !(beta < 1.0)) fail(Errc::BadConfig, "beta must lie in (0, 1)");

  GraphSample g;
  g.n = n;
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  auto pair_at = [&](std::uint64_t pos) -> std::pair<std::uint32_t, std::uint32_t> {
    // Row-major strict upper triangle.
    std::uint64_t i = 0, rowlen = n - 1;
    while (pos >= rowlen) {
      pos -= rowlen;
      ++i;
      --rowlen;
    }
    return {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i + 1 + pos)};
  };

  if (beta <= 0.5) {
    const double log1m = std::log1p(-beta);
    std::uint64_t pos = rng.next_geometric_gap(log1m);
    while (pos < total) {
      g.edges.push_back(pair_at(pos));
      pos += 1 + rng.next_geometric_gap(log1m);
    }
  } else {
    for (std::uint64_t pos = 0; pos < total; ++pos)
      if (rng.next_unit() < beta) g.edges.push_back(pair_at(pos));
  }
  g.connected = graph_connected(n, g.edges);
  return g;
}

IntMatrix reduced_laplacian(const GraphSample& g) {
  const int n = g.n;
  IntMatrix L(n - 1);
  for (auto [u, v] : g.edges) {
    if (u < static_cast<std::uint32_t>(n - 1) && v < static_cast<std::uint32_t>(n - 1)) {
      L.at(u, v) -= 1;
      L.at(v, u) -= 1;
    }
    if (u < static_cast<std::uint32_t>(n - 1)) L.at(u, u) += 1;
    if (v < static_cast<std::uint32_t>(n - 1)) L.at(v, v) += 1;
  }
  return L;
}

IntMatrix reduced_laplacian_weighted(int n, const std::vector<std::int64_t>& upper_weights) {
  if (upper_weights.size() != static_cast<size_t>(n) * (n - 1) / 2)
    fail(Errc::BadConfig, "weight count mismatch");
  IntMatrix L(n - 1);
  size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++idx) {
      std::int64_t w = upper_weights[idx];
      if (w == 0) continue;
      if (i < n - 1 && j < n - 1) {
        L.at(i, j) -= w;
        L.at(j, i) -= w;
      }
      if (i < n - 1) L.at(i, i) += w;
      if (j < n - 1) L.at(j, j) += w;
    }
  return L;
}

}  // namespace coklab
