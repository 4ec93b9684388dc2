// Acceptance gates for the laboratory: exact-oracle equivalences are hard
// gates, Monte Carlo convergence checks are statistical gates with pinned
// tolerances. One line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "coklab/experiments.hpp"
#include "coklab/oracle.hpp"
#include "coklab/universal.hpp"

using namespace coklab;

namespace {

int failures = 0;

void gate(int idx, const std::string& name, bool pass, const std::string& detail) {
  std::printf("criterion %d [%s] %s  %s\n", idx, pass ? "PASS" : "FAIL", name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double now_minus(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

// --- criterion 1: exact vs fourier across all four flavors ------------------

void criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  long double worst = 0;
  int configs = 0;
  bool ok = true;
  try {
    for (auto [p, d] : std::vector<std::pair<std::uint64_t, int>>{{2, 1}, {3, 1}, {2, 2}}) {
      const std::uint64_t m = checked_pow(p, d);
      std::vector<PGroupType> gs = {PGroupType(p, Partition{})};
      for (const Partition& lam : partitions_up_to(4)) {
        if (lam.empty()) continue;
        PGroupType g(p, lam);
        if (g.order() <= 4 && g.lambda.largest() <= d) gs.push_back(g);
      }
      std::vector<EntryDistribution> dists = {
          EntryDistribution::spike01(Rational(3, 10), m),
          EntryDistribution::spike_uniform(Rational(3, 10), m)};
      for (const auto& g : gs)
        for (int n = 1; n <= 2; ++n)
          for (const auto& dist : dists) {
            for (Symmetry sym :
                 {Symmetry::general, Symmetry::symmetric, Symmetry::alternating}) {
              MatrixModel model{sym, n, dist, {}};
              long double diff = std::abs(exact_hom_moment(model, g, d).to_long_double() -
                                          fourier_hom_moment(model, g, d));
              worst = std::max(worst, diff);
              ++configs;
            }
            long double diff =
                std::abs(exact_hom_moment_graph(n, dist, g, d).to_long_double() -
                         fourier_hom_moment_graph(n, dist, g, d));
            worst = std::max(worst, diff);
            ++configs;
          }
    }
  } catch (const std::exception& e) {
    ok = false;
  }
  double secs = now_minus(t0);
  ok = ok && worst <= 1e-9L && secs <= 60.0;
  gate(1, "oracle equivalence (exact vs fourier, 4 flavors)", ok,
       "configs=" + std::to_string(configs) + " worst=" + fmt(static_cast<double>(worst)) +
           " tol=1e-9 time=" + fmt(secs) + "s (cap 60s)");
}

// --- criterion 2: algebra oracles -------------------------------------------

void criterion2() {
  auto t0 = std::chrono::steady_clock::now();
  bool aut_ok = true;
  int aut_checked = 0;
  for (auto [p, cap] : std::vector<std::pair<std::uint64_t, int>>{{2, 8}, {3, 5}}) {
    for (const Partition& lam : partitions_up_to(cap)) {
      PGroupType g(p, lam);
      if (aut_order(g) != aut_order_exhaustive(g)) aut_ok = false;
      ++aut_checked;
    }
  }

  bool sq_ok = true;
  int sq_checked = 0;
  for (std::uint64_t p : {2ull, 3ull})
    for (const Partition& lam : partitions_up_to(6)) {
      PGroupType g(p, lam);
      if (ext_square_order(g) * sym_square_order(g) != tensor_square_order_bruteforce(g))
        sq_ok = false;
      if (ext_square_order(g) != ext_square_order_bruteforce(g)) sq_ok = false;
      if (sym_square_order(g) != sym_square_order_bruteforce(g)) sq_ok = false;
      ++sq_checked;
    }

  bool hs_ok = true;
  int hs_checked = 0;
  std::vector<PGroupType> gs;
  for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull})
    for (const Partition& lam : partitions_up_to(4))
      if (checked_pow(p, lam.sum()) <= 16) gs.push_back(PGroupType(p, lam));
  std::vector<Partition> classes;
  for (const Partition& lam : partitions_up_to(12))
    if (lam.largest() <= 3 && lam.length() <= 4) classes.push_back(lam);
  for (const auto& g : gs) {
    SurTable table = SurTable::build(g);
    std::vector<SurTable> sub_tables;
    for (size_t i = 0; i < table.lat.subgroups.size(); ++i)
      sub_tables.push_back(SurTable::build(PGroupType(g.p, table.lat.types[i])));
    const int d = std::max(4, g.lambda.largest() + 1);
    for (const Partition& cl : classes) {
      CokernelClass c;
      c.p = g.p;
      c.d = d;
      c.capped_lambda = cl;
      unsigned __int128 rhs = 0;
      for (const auto& sub : sub_tables) rhs += sub.sur(c);
      if (table.hom(c) != rhs) hs_ok = false;
      ++hs_checked;
    }
  }

  bool ok = aut_ok && sq_ok && hs_ok;
  gate(2, "algebra oracles (|Aut| / square orders / hom-sur)", ok,
       "aut_groups=" + std::to_string(aut_checked) + (aut_ok ? "" : " AUT-MISMATCH") +
           " square_groups=" + std::to_string(sq_checked) + (sq_ok ? "" : " SQ-MISMATCH") +
           " homsur_pairs=" + std::to_string(hs_checked) + (hs_ok ? "" : " HS-MISMATCH") +
           " time=" + fmt(now_minus(t0)) + "s");
}

// --- criterion 3: isotropic bijections --------------------------------------

void criterion3() {
  auto t0 = std::chrono::steady_clock::now();
  struct Want {
    PGroupType g;
    std::uint64_t alt, sym;
  };
  const std::vector<Want> wants = {
      {PGroupType(2, Partition({1})), 3, 2},
      {PGroupType(3, Partition({1})), 4, 2},
      {PGroupType(2, Partition({2})), 7, 3},
      {PGroupType(2, Partition({1, 1})), 15, 6},
  };
  bool ok = true;
  std::string detail;
  for (const auto& w : wants) {
    IsotropicCensus alt = isotropic_census(w.g, IsotropicFlavor::B_Alt);
    IsotropicCensus sym = isotropic_census(w.g, IsotropicFlavor::B_Sym_P_vanishing);
    bool match = alt.subgroups.size() == alt.max_count &&
                 sym.subgroups.size() == sym.max_count &&
                 alt.subgroups.size() == w.alt && sym.subgroups.size() == w.sym;
    if (!match) ok = false;
    detail += w.g.lambda.str() + ":" + std::to_string(alt.subgroups.size()) + "/" +
              std::to_string(sym.subgroups.size()) + " ";
  }
  double secs = now_minus(t0);
  ok = ok && secs <= 120.0;
  gate(3, "isotropic censuses vs formula sums", ok,
       detail + "time=" + fmt(secs) + "s (cap 120s)");
}

// --- statistical criteria -----------------------------------------------------

struct McResult {
  double estimate, se, limit;
  double secs;
};

McResult run_cok(const std::string& dist_type, Symmetry model, int n, int d,
                 std::uint64_t trials, std::uint64_t seed) {
  ojson j;
  j["kind"] = "cok-dist";
  j["model"] = symmetry_name(model);
  j["n"] = n;
  j["p"] = 2;
  j["d"] = d;
  j["distribution"] = ojson{{"type", dist_type}, {"alpha_c", 1.5}};
  j["target"] = ojson{{"p", 2}, {"lambda", ojson::array()}};
  j["trials"] = trials;
  j["seed"] = seed;
  auto t0 = std::chrono::steady_clock::now();
  EstimateReport rep = run_experiment(ExperimentConfig::from_json(j));
  const ReportRow& r = rep.rows.front();
  return {r.estimate, r.std_error, r.limit, now_minus(t0)};
}

void criterion4() {
  McResult spike = run_cok("spike01", Symmetry::general, 400, 2, 20000, 1);
  McResult uni = run_cok("spike_uniform", Symmetry::general, 400, 2, 20000, 1);
  const double limit = 0.2887880951;
  double gate1 = 3 * spike.se + 0.02;
  double gate2 = 3 * uni.se + 0.02;
  double cross_se = std::sqrt(spike.se * spike.se + uni.se * uni.se);
  bool ok = std::abs(spike.estimate - limit) <= gate1 &&
            std::abs(uni.estimate - limit) <= gate2 &&
            std::abs(spike.estimate - uni.estimate) <= 3 * cross_se;
  gate(4, "non-symmetric universality across entry laws", ok,
       "spike01=" + fmt(spike.estimate) + " spike_uniform=" + fmt(uni.estimate) +
           " limit=" + fmt(limit) + " gate=" + fmt(gate1) +
           " cross_gate=" + fmt(3 * cross_se) + " time=" + fmt(spike.secs + uni.secs) + "s");
}

void criterion5() {
  // Symmetric corank 0 over F_2 and alternating-even trivial cokernel.
  ojson j;
  j["kind"] = "rank-dist";
  j["model"] = "symmetric";
  j["n"] = 400;
  j["p"] = 2;
  j["d"] = 1;
  j["distribution"] = ojson{{"type", "spike01"}, {"alpha_c", 1.5}};
  j["trials"] = 20000;
  j["seed"] = 2;
  j["max_corank"] = 4;
  auto t0 = std::chrono::steady_clock::now();
  EstimateReport sym = run_experiment(ExperimentConfig::from_json(j));
  const ReportRow& symrow = sym.rows.front();  // k = 0

  McResult alt = run_cok("spike01", Symmetry::alternating, 400, 1, 20000, 3);
  const double limit = 0.4194224418;
  bool ok = std::abs(symrow.estimate - limit) <= 3 * symrow.std_error + 0.02 &&
            std::abs(alt.estimate - limit) <= 3 * alt.se + 0.02;
  gate(5, "symmetric corank-0 and alternating-even trivial cokernel", ok,
       "sym=" + fmt(symrow.estimate) + " alt=" + fmt(alt.estimate) + " limit=" + fmt(limit) +
           " time=" + fmt(now_minus(t0)) + "s");
}

// Exact finite-n expectation of #Sur(cok(A(n)), Z/2) for spike entries: the
// count is 2^(left corank mod 2) - 1, so the expectation is a sum over
// kernel-vector weights; the symmetric/alternating shared entries enter via a
// subset Fourier expansion. This is a test-side oracle, independent of the
// Monte Carlo path it judges.
double exact_finite_sur_moment(Symmetry sym, int n, double alpha) {
  const long double g = 1 - 2 * static_cast<long double>(alpha);
  std::vector<long double> lg(n + 1, 0);
  for (int i = 1; i <= n; ++i) lg[i] = lg[i - 1] + std::log(static_cast<long double>(i));
  auto logC = [&](int N, int k) { return lg[N] - lg[k] - lg[N - k]; };
  long double total = 0;
  for (int k = 1; k <= n; ++k) {
    long double qk = (1 + std::pow(g, static_cast<long double>(k))) / 2;
    if (sym == Symmetry::general) {
      total += std::exp(logC(n, k) + n * std::log(qk));
      continue;
    }
    long double inner = 0;
    for (int t = 0; t <= k; ++t) {
      long double e = sym == Symmetry::symmetric
                          ? static_cast<long double>(t) * (k - t + 1)
                          : static_cast<long double>(t) * (k - t);
      inner += std::exp(logC(k, t) + e * std::log(g));
    }
    total += std::exp(logC(n, k) + (n - k) * std::log(qk) - k * std::log(2.0L) +
                      std::log(inner));
  }
  return static_cast<double>(total);
}

void criterion6() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  const double alpha = alpha_schedule(1.5, 400);
  for (auto [model, want] : std::vector<std::pair<std::string, double>>{
           {"general", 1.0}, {"symmetric", 1.0}, {"alternating", 2.0}}) {
    ojson j;
    j["kind"] = "moment";
    j["model"] = model;
    j["n"] = 400;
    j["p"] = 2;
    j["d"] = 2;
    j["distribution"] = ojson{{"type", "spike01"}, {"alpha_c", 1.5}};
    j["target"] = ojson{{"p", 2}, {"lambda", {1}}};
    j["trials"] = 20000;
    j["seed"] = 4;
    EstimateReport rep = run_experiment(ExperimentConfig::from_json(j));
    const ReportRow& r = rep.rows.front();
    bool pass = std::abs(r.estimate - want) <= 3 * r.std_error + 0.05 && r.limit == want;
    if (!pass) ok = false;
    // Independent cross-check: the estimator must match the exact finite-n
    // expectation even when the limit gate itself is out of reach.
    Symmetry s = symmetry_from_name(model);
    double exact = exact_finite_sur_moment(s, 400, alpha);
    double drift_to_exact = std::abs(r.estimate - exact);
    detail += model + "=" + fmt(r.estimate) + "(limit " + fmt(want) + ", exact_n400 " +
              fmt(exact) + (drift_to_exact <= 3 * r.std_error ? ", estimator ok" : ", ESTIMATOR OFF") +
              ") ";
  }
  gate(6, "Sur-moment limits E[#Sur(cok, Z/2)]", ok,
       detail + "time=" + fmt(now_minus(t0)) + "s");
}

void criterion7() {
  auto t0 = std::chrono::steady_clock::now();
  ojson j;
  j["kind"] = "sandpile";
  j["n"] = 400;
  j["p"] = 2;
  j["d"] = 1;
  j["beta"] = "1/2";
  j["target"] = ojson{{"p", 2}, {"lambda", ojson::array()}};
  j["trials"] = 20000;
  j["seed"] = 5;
  EstimateReport rep = run_experiment(ExperimentConfig::from_json(j));
  const ReportRow& r = rep.rows.front();
  const double limit = 0.4194224418;
  bool main_ok = std::abs(r.estimate - limit) <= 3 * r.std_error + 0.02;

  ojson jc;
  jc["kind"] = "sandpile";
  jc["n"] = 2000;
  jc["p"] = 2;
  jc["d"] = 1;
  jc["beta_schedule"] = ojson{{"c0", 1.0}};
  jc["connectivity_only"] = true;
  jc["trials"] = 3000;
  jc["seed"] = 6;
  EstimateReport conn = run_experiment(ExperimentConfig::from_json(jc));
  double disconnected = conn.extra["disconnected_fraction"]["2000"].get<double>();
  const double want_disc = 1.0 - std::exp(-std::exp(-1.0));
  bool conn_ok = std::abs(disconnected - want_disc) <= 0.05;

  gate(7, "sandpile Sylow-2 distribution and connectivity threshold", main_ok && conn_ok,
       "P(trivial)=" + fmt(r.estimate) + " limit=" + fmt(limit) +
           " disconnected=" + fmt(disconnected) + " want=" + fmt(want_disc) +
           " time=" + fmt(now_minus(t0)) + "s");
}

void criterion8() {
  auto t0 = std::chrono::steady_clock::now();
  ojson j;
  j["kind"] = "sharpness";
  j["model"] = "general";
  j["n"] = 3000;
  j["p"] = 2;
  j["k"] = 3;
  j["trials"] = 50000;
  j["seed"] = 7;
  EstimateReport rep = run_experiment(ExperimentConfig::from_json(j));
  const ReportRow& r = rep.rows.front();
  double mean = rep.extra["mean_zero_columns"]["3000"].get<double>();
  double tail = rep.extra["universal_corank_tail"]["3000"].get<double>();
  bool ok = std::abs(mean - 1.0) <= 0.1 && r.estimate >= 0.03 && tail < 0.01 &&
            r.estimate > tail;
  gate(8, "sharpness at the critical scale alpha = ln(n)/n", ok,
       "mean_zero_cols=" + fmt(mean) + " P(>=3)=" + fmt(r.estimate) +
           " universal_tail=" + fmt(tail) + " bound=1/24 time=" + fmt(now_minus(t0)) + "s");
}

void criterion9() {
  auto t0 = std::chrono::steady_clock::now();
  ojson j;
  j["kind"] = "cok-dist";
  j["model"] = "general";
  j["n"] = 120;
  j["p"] = 2;
  j["d"] = 2;
  j["distribution"] = ojson{{"type", "spike01"}, {"alpha_c", 1.5}};
  j["target"] = ojson{{"p", 2}, {"lambda", ojson::array()}};
  j["trials"] = 2000;
  j["seed"] = 8;

  auto slurp = [](const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };

  std::string base_json, base_csv;
  bool ok = true;
  for (int workers : {1, 4, 8}) {
    j["workers"] = workers;
    EstimateReport rep = run_experiment(ExperimentConfig::from_json(j));
    std::string dir = (std::filesystem::temp_directory_path() /
                       ("coklab_accept_w" + std::to_string(workers)))
                          .string();
    std::filesystem::remove_all(dir);
    write_report(rep, dir);
    std::string rj = slurp(dir + "/report.json");
    std::string rc = slurp(dir + "/rows.csv");
    if (base_json.empty()) {
      base_json = rj;
      base_csv = rc;
    } else if (rj != base_json || rc != base_csv) {
      ok = false;
    }
  }
  gate(9, "byte-identical reports at worker counts {1,4,8}", ok,
       "bytes=" + std::to_string(base_json.size() + base_csv.size()) +
           " time=" + fmt(now_minus(t0)) + "s");
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  std::printf("acceptance: %d/9 criteria passed, %.1fs total\n", 9 - failures,
              now_minus(t0));
  return failures == 0 ? 0 : 1;
}
