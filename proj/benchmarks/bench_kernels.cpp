// Throughput comparison: reference SNF vs the optimized kernel, and the
// experiment runner serial vs OpenMP.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "coklab/experiments.hpp"
#include "coklab/linalg.hpp"
#include "coklab/models.hpp"
#include "coklab/rng.hpp"

using namespace coklab;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void bench_snf(int n, int trials) {
  MatrixModel model{Symmetry::general, n,
                    EntryDistribution::spike01(dyadic_approx(alpha_schedule(1.5, n)), 4),
                    {}};
  // Reference path.
  auto t0 = std::chrono::steady_clock::now();
  std::uint64_t acc_ref = 0;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(42, 7, static_cast<std::uint64_t>(t));
    ModMatrix A = sample_matrix(model, rng);
    acc_ref += smith_normal_form(A).back();
  }
  double ref_s = seconds_since(t0);

  // Optimized kernel on the same draws.
  t0 = std::chrono::steady_clock::now();
  std::uint64_t acc_fast = 0;
  std::vector<std::uint8_t> buf(static_cast<size_t>(n) * n);
  SnfWorkspace ws;
  std::vector<int> counts;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(42, 7, static_cast<std::uint64_t>(t));
    sample_matrix_u8(model, rng, buf.data());
    snf_exponent_counts_u8(buf.data(), n, 2, 2, counts, ws);
    for (int v = 2; v >= 0; --v)
      if (counts[v] > 0) { acc_fast += v; break; }
  }
  double fast_s = seconds_since(t0);
  // The largest exponent agrees by construction; acc values keep the work alive.
  std::printf("snf n=%d trials=%d  reference %.3fs (%.2f ms/trial)  kernel %.3fs "
              "(%.2f ms/trial)  speedup %.1fx  [checksums %llu %llu]\n",
              n, trials, ref_s, 1e3 * ref_s / trials, fast_s, 1e3 * fast_s / trials,
              ref_s / fast_s, static_cast<unsigned long long>(acc_ref),
              static_cast<unsigned long long>(acc_fast));
}

void bench_runner(int n, int trials) {
  ojson j;
  j["kind"] = "cok-dist";
  j["model"] = "general";
  j["n"] = n;
  j["p"] = 2;
  j["d"] = 2;
  j["distribution"] = ojson{{"type", "spike01"}, {"alpha_c", 1.5}};
  j["target"] = ojson{{"p", 2}, {"lambda", ojson::array()}};
  j["trials"] = trials;
  j["seed"] = 1;

  for (int workers : {1, 2, 4}) {
    j["workers"] = workers;
    ExperimentConfig cfg = ExperimentConfig::from_json(j);
    auto t0 = std::chrono::steady_clock::now();
    EstimateReport rep = run_experiment(cfg);
    double s = seconds_since(t0);
    std::printf("runner n=%d trials=%d workers=%d  %.3fs  estimate=%.5f\n", n, trials,
                workers, s, rep.rows.front().estimate);
  }
}

}  // namespace

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 200;
  int trials = argc > 2 ? std::atoi(argv[2]) : 200;
#ifdef _OPENMP
  std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("openmp not enabled\n");
#endif
  bench_snf(n, trials);
  bench_runner(n, trials);
  return 0;
}
