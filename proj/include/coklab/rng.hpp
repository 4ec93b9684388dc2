#pragma once

#include <cmath>
#include <cstdint>

namespace coklab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Counter-based stream keyed by (master_seed, experiment_id, trial_index).
// Distinct trials never share state, so trials can run on any worker in any
// order and still produce identical draws. Within a trial the draw counter
// advances sequentially.
class RngStream {
public:
  RngStream(std::uint64_t master_seed, std::uint64_t experiment_id, std::uint64_t trial) {
    state_ = splitmix64(splitmix64(splitmix64(master_seed) ^ experiment_id) ^ (trial * 0x9e3779b97f4a7c15ull + 1));
    counter_ = 0;
  }

  std::uint64_t next_u64() {
    return splitmix64(state_ + (++counter_) * 0x9e3779b97f4a7c15ull);
  }

  // Uniform in [0, 1).
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n); n >= 1. Fixed-point multiply keeps it branch-free and
  // deterministic (bias ~ n / 2^64, irrelevant at these sizes).
  std::uint32_t next_below(std::uint32_t n) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Geometric gap with success probability p in (0, 1): number of failures
  // before the next success. Exact inversion of the geometric law.
  std::uint64_t next_geometric_gap(double log1m_p) {
    double u = 1.0 - next_unit();  // (0, 1]
    double g = std::floor(std::log(u) / log1m_p);
    if (g < 0) g = 0;
    if (g > 9.0e18) g = 9.0e18;
    return static_cast<std::uint64_t>(g);
  }

private:
  std::uint64_t state_;
  std::uint64_t counter_;
};

}  // namespace coklab
