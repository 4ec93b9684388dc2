#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coklab/common.hpp"
#include "coklab/linalg.hpp"
#include "coklab/rational.hpp"
#include "coklab/rng.hpp"

namespace coklab {

// alpha_n = c * ln(n) / n, clamped into (0, 1/2].
double alpha_schedule(double c, int n);

// Finite-support distribution on Z/m with exact rational probabilities.
struct EntryDistribution {
  std::uint64_t m = 2;
  std::vector<std::pair<std::uint32_t, Rational>> support;  // residue -> prob, probs sum to 1

  EntryDistribution() = default;
  EntryDistribution(std::uint64_t modulus, std::vector<std::pair<std::uint32_t, Rational>> sup);

  // Certified balancedness: 1 - max over primes p | m and residue classes a
  // of P(x = a mod p).
  Rational alpha_of() const;
  Rational prob_of(std::uint32_t residue) const;

  std::uint32_t sample(RngStream& rng) const;

  static EntryDistribution spike01(const Rational& alpha, std::uint64_t m);
  static EntryDistribution spike_uniform(const Rational& alpha, std::uint64_t m);
  static EntryDistribution uniform(std::uint64_t m);

  // Sampling plan, precomputed on construction:
  //  - dense: one uniform draw per entry against cumulative thresholds;
  //  - sparse (P(0) >= 1/2): geometric gaps between nonzero entries.
  bool sparse_plan() const { return sparse_; }
  double zero_prob() const { return zero_prob_; }
  double log1m_nonzero_prob() const { return log1m_nonzero_; }
  std::uint32_t sample_nonzero(RngStream& rng) const;

private:
  void finalize();
  std::vector<double> cum_;                 // cumulative probabilities
  std::vector<double> cum_nonzero_;         // cumulative over nonzero support
  std::vector<std::uint32_t> nonzero_vals_;
  double zero_prob_ = 0;
  double log1m_nonzero_ = 0;
  bool sparse_ = false;
};

// Per-index override honoring non-identically-distributed entries.
struct EntryOverride {
  int row;
  int col;  // refers to the free entry at (row, col) of the symmetry class
  EntryDistribution dist;
};

struct MatrixModel {
  Symmetry kind = Symmetry::general;
  int n = 1;
  EntryDistribution dist;
  std::vector<EntryOverride> overrides;

  const EntryDistribution& dist_at(int i, int j) const;
};

// Deterministic given the stream: free entries are drawn in row-major order
// (sparse-plan distributions use geometric gap draws over the same order).
ModMatrix sample_matrix(const MatrixModel& model, RngStream& rng);

// Same draws written into a caller-owned row-major byte buffer (m <= 255);
// the Monte Carlo kernels run on these to avoid per-trial allocation.
void sample_matrix_u8(const MatrixModel& model, RngStream& rng, std::uint8_t* out);

struct GraphModel {
  int n = 2;
  // Either a fixed edge probability or the schedule (ln n + c0)/n.
  std::optional<Rational> beta;
  std::optional<double> beta_c0;

  double beta_value() const;
};

struct GraphSample {
  int n = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  bool connected = false;
};

GraphSample sample_graph(const GraphModel& model, RngStream& rng);

// Reduced Laplacian (last row and column deleted) of an unweighted graph.
IntMatrix reduced_laplacian(const GraphSample& g);

// Weighted variant used by the exact oracle: strict-upper weights w_{kl},
// Laplacian D - W with D the diagonal of row sums, last row/column deleted.
IntMatrix reduced_laplacian_weighted(int n, const std::vector<std::int64_t>& upper_weights);

bool graph_connected(int n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges);

}  // namespace coklab
