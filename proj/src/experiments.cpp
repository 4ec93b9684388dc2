#include "coklab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "coklab/linalg.hpp"
#include "coklab/oracle.hpp"
#include "coklab/rng.hpp"

namespace coklab {

std::string experiment_kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::CokDist: return "cok-dist";
    case ExperimentKind::RankDist: return "rank-dist";
    case ExperimentKind::Moment: return "moment";
    case ExperimentKind::Sandpile: return "sandpile";
    case ExperimentKind::Sharpness: return "sharpness";
  }
  return "?";
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
  if (name == "cok-dist") return ExperimentKind::CokDist;
  if (name == "rank-dist") return ExperimentKind::RankDist;
  if (name == "moment") return ExperimentKind::Moment;
  if (name == "sandpile") return ExperimentKind::Sandpile;
  if (name == "sharpness") return ExperimentKind::Sharpness;
  fail(Errc::BadConfig, "unknown experiment kind: " + name);
}

// ---------------------------------------------------------------------------
// DistSpec
// ---------------------------------------------------------------------------

EntryDistribution DistSpec::build(std::uint64_t m, int n) const {
  if (type == "explicit") return EntryDistribution(m, explicit_support);
  if (type == "uniform") return EntryDistribution::uniform(m);

  Rational a;
  if (alpha) {
    a = *alpha;
  } else if (alpha_c) {
    a = dyadic_approx(alpha_schedule(*alpha_c, n));
  } else {
    fail(Errc::BadConfig, "distribution needs alpha or alpha_c");
  }

  if (type == "spike01") return EntryDistribution::spike01(a, m);
  if (type == "spike_uniform") {
    // Rescale the raw parameter so the certified mod-p balancedness equals
    // the requested alpha: alpha_of(spike_uniform(raw, m)) =
    // raw * m * (1 - 1/p) / (m - 1).
    auto [p, d] = prime_power_split(m);
    (void)d;
    Rational raw = a * Rational(static_cast<std::int64_t>(m - 1)) *
                   Rational(static_cast<std::int64_t>(p)) /
                   (Rational(static_cast<std::int64_t>(m)) *
                    Rational(static_cast<std::int64_t>(p - 1)));
    if (Rational(1, 2) < raw) raw = Rational(1, 2);
    return EntryDistribution::spike_uniform(raw, m);
  }
  fail(Errc::BadConfig, "unknown distribution type: " + type);
}

std::string DistSpec::label() const {
  std::string s = type;
  if (alpha_c) s += "/c=" + std::to_string(*alpha_c);
  if (alpha) s += "/a=" + alpha->str();
  return s;
}

DistSpec DistSpec::from_json(const ojson& j) {
  DistSpec d;
  d.type = j.value("type", "spike01");
  if (j.contains("alpha_c")) d.alpha_c = j["alpha_c"].get<double>();
  if (j.contains("alpha")) {
    if (j["alpha"].is_string())
      d.alpha = Rational::parse(j["alpha"].get<std::string>());
    else
      d.alpha = dyadic_approx(j["alpha"].get<double>());
  }
  if (j.contains("support")) {
    for (const auto& item : j["support"]) {
      std::uint32_t r = item[0].get<std::uint32_t>();
      Rational pr = item[1].is_string() ? Rational::parse(item[1].get<std::string>())
                                        : dyadic_approx(item[1].get<double>());
      d.explicit_support.push_back({r, pr});
    }
    d.type = "explicit";
  }
  return d;
}

ojson DistSpec::to_json() const {
  ojson j;
  j["type"] = type;
  if (alpha_c) j["alpha_c"] = *alpha_c;
  if (alpha) j["alpha"] = alpha->str();
  if (!explicit_support.empty()) {
    ojson sup = ojson::array();
    for (auto& [r, pr] : explicit_support) sup.push_back({r, pr.str()});
    j["support"] = sup;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

static PGroupType pgroup_from_json(const ojson& j) {
  std::uint64_t p = j.at("p").get<std::uint64_t>();
  std::vector<int> parts;
  for (const auto& x : j.at("lambda")) parts.push_back(x.get<int>());
  return PGroupType(p, Partition(parts));
}

static ojson pgroup_to_json(const PGroupType& g) {
  ojson j;
  j["p"] = g.p;
  j["lambda"] = g.lambda.parts;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const ojson& j) {
  ExperimentConfig c;
  if (j.contains("kind")) c.kind = experiment_kind_from_name(j["kind"].get<std::string>());
  if (j.contains("model")) {
    std::string m = j["model"].get<std::string>();
    if (m == "graph") {
      c.graph = true;
    } else {
      c.model = symmetry_from_name(m);
    }
  }
  if (c.kind == ExperimentKind::Sandpile) c.graph = true;
  if (j.contains("n")) {
    if (j["n"].is_array())
      for (const auto& x : j["n"]) c.ns.push_back(x.get<int>());
    else
      c.ns.push_back(j["n"].get<int>());
  }
  if (c.ns.empty()) fail(Errc::BadConfig, "config needs at least one n");
  c.p = j.value("p", 2);
  if (!is_prime_u64(c.p)) fail(Errc::BadConfig, "p must be prime");
  c.d = j.value("d", 1);
  if (c.d < 1) fail(Errc::BadConfig, "d must be >= 1");
  if (j.contains("distribution")) c.dist = DistSpec::from_json(j["distribution"]);
  if (j.contains("beta")) {
    const auto& b = j["beta"];
    if (b.is_object() && b.contains("c0"))
      c.beta_c0 = b["c0"].get<double>();
    else if (b.is_string())
      c.beta = Rational::parse(b.get<std::string>());
    else
      c.beta = dyadic_approx(b.get<double>());
  }
  if (j.contains("beta_schedule")) c.beta_c0 = j["beta_schedule"].at("c0").get<double>();
  if (j.contains("target") && !j["target"].is_null()) c.target = pgroup_from_json(j["target"]);
  c.connectivity_only = j.value("connectivity_only", false);
  c.max_corank = j.value("max_corank", 8);
  c.k = j.value("k", 3);
  c.trials = j.value("trials", 1000);
  if (c.trials < 1) fail(Errc::BadConfig, "trials must be >= 1");
  c.master_seed = j.value("seed", 1);
  c.workers = j.value("workers", 1);
  if (c.workers < 1) fail(Errc::BadConfig, "workers must be >= 1");
  c.drift = j.value("drift", 0.02);
  c.z = j.value("z", 3.0);

  if (c.target) {
    if (c.target->p != c.p) fail(Errc::BadConfig, "target prime must match p");
    if (c.kind == ExperimentKind::CokDist || c.kind == ExperimentKind::Sandpile) {
      int need = c.target->lambda.largest() + 1;
      if (c.model == Symmetry::alternating && !c.graph)
        for (int n : c.ns)
          if (n % 2 == 1) need = c.target->lambda.largest() + 2;  // extra cyclic part
      if (c.d < need)
        fail(Errc::BadConfig, "level d must be >= " + std::to_string(need) +
                                  " for this target (got d=" + std::to_string(c.d) + ")");
    }
    if (c.kind == ExperimentKind::Moment && c.d < c.target->lambda.largest() + 1)
      fail(Errc::BadConfig, "moment runs need d >= exponent(G) + 1");
  }
  return c;
}

ojson ExperimentConfig::echo() const {
  ojson j;
  j["kind"] = experiment_kind_name(kind);
  j["model"] = graph ? "graph" : symmetry_name(model);
  j["n"] = ns;
  j["p"] = p;
  j["d"] = d;
  j["distribution"] = dist.to_json();
  if (beta) j["beta"] = beta->str();
  if (beta_c0) j["beta_schedule"] = ojson{{"c0", *beta_c0}};
  if (target) j["target"] = pgroup_to_json(*target);
  if (connectivity_only) j["connectivity_only"] = true;
  if (kind == ExperimentKind::RankDist) j["max_corank"] = max_corank;
  if (kind == ExperimentKind::Sharpness) j["k"] = k;
  j["trials"] = trials;
  j["seed"] = master_seed;
  // The worker count is an execution knob, not part of the experiment
  // identity; reports must be byte-identical at any worker count.
  j["drift"] = drift;
  j["z"] = z;
  return j;
}

// ---------------------------------------------------------------------------
// Intervals
// ---------------------------------------------------------------------------

double binomial_std_error(double phat, std::uint64_t trials) {
  return std::sqrt(std::max(phat * (1 - phat), 0.0) / static_cast<double>(trials));
}

Interval normal_interval(double phat, std::uint64_t trials, double z) {
  double se = binomial_std_error(phat, trials);
  return {phat - z * se, phat + z * se};
}

Interval wilson_interval(double phat, std::uint64_t trials, double z) {
  double nn = static_cast<double>(trials);
  double z2 = z * z;
  double denom = 1 + z2 / nn;
  double center = (phat + z2 / (2 * nn)) / denom;
  double half = z * std::sqrt(phat * (1 - phat) / nn + z2 / (4 * nn * nn)) / denom;
  return {center - half, center + half};
}

// ---------------------------------------------------------------------------
// Parallel trial harness
// ---------------------------------------------------------------------------

namespace {

std::uint64_t experiment_stream_id(const ExperimentConfig& cfg, int n) {
  std::string label = experiment_kind_name(cfg.kind) + "|" +
                      (cfg.graph ? "graph" : symmetry_name(cfg.model)) + "|n=" +
                      std::to_string(n) + "|p=" + std::to_string(cfg.p) +
                      "|d=" + std::to_string(cfg.d) + "|" + cfg.dist.label();
  return fnv1a64(label);
}

// Integer-counter accumulator: everything merged across workers is a counter,
// so merge order cannot affect the result.
struct TrialCounters {
  std::map<std::string, std::uint64_t> hist;
  std::map<int, std::uint64_t> int_hist;
  unsigned __int128 sum = 0;
  unsigned __int128 sum_sq = 0;
  std::uint64_t events = 0;

  void merge(const TrialCounters& o) {
    for (auto& [k, v] : o.hist) hist[k] += v;
    for (auto& [k, v] : o.int_hist) int_hist[k] += v;
    sum += o.sum;
    sum_sq += o.sum_sq;
    events += o.events;
  }
};

template <typename PerTrial>
TrialCounters run_trials(const ExperimentConfig& cfg, std::uint64_t stream_id,
                         PerTrial&& per_trial) {
  TrialCounters total;
#ifdef _OPENMP
  if (cfg.workers > 1) {
#pragma omp parallel num_threads(cfg.workers)
    {
      TrialCounters local;
#pragma omp for schedule(static)
      for (long long t = 0; t < static_cast<long long>(cfg.trials); ++t) {
        RngStream rng(cfg.master_seed, stream_id, static_cast<std::uint64_t>(t));
        per_trial(rng, local);
      }
#pragma omp critical
      total.merge(local);
    }
    return total;
  }
#endif
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    RngStream rng(cfg.master_seed, stream_id, t);
    per_trial(rng, total);
  }
  return total;
}

// Per-thread scratch for the classification kernels.
struct ClassifyScratch {
  std::vector<std::uint8_t> buf;
  SnfWorkspace ws;
  std::vector<int> counts;
};

CokernelClass classify_u8(std::uint8_t* buf, int n, std::uint64_t p, int d,
                          ClassifyScratch& scratch) {
  snf_exponent_counts_u8(buf, n, p, d, scratch.counts, scratch.ws);
  return cokernel_class_from_counts(p, d, scratch.counts);
}

std::string target_key_for(const ExperimentConfig& cfg, int n) {
  if (!cfg.target) fail(Errc::BadConfig, "experiment needs a target group");
  CokernelClass c;
  c.p = cfg.p;
  c.d = cfg.d;
  if (cfg.model == Symmetry::alternating && !cfg.graph && n % 2 == 1) {
    // Odd alternating: the event tracks Z_p x H, one saturated part of size d.
    std::vector<int> parts = {cfg.d};
    for (int x : cfg.target->lambda.parts) parts.push_back(x);
    std::sort(parts.rbegin(), parts.rend());
    c.capped_lambda = Partition(parts);
    c.saturated_parts = 1;
  } else {
    c.capped_lambda = cfg.target->lambda;
    c.saturated_parts = 0;
  }
  return c.key();
}

double limit_for_cok_dist(const ExperimentConfig& cfg, int n) {
  LimitKind kind = LimitKind::NonSymmetric;
  if (cfg.model == Symmetry::symmetric) kind = LimitKind::Symmetric;
  if (cfg.model == Symmetry::alternating)
    kind = n % 2 == 0 ? LimitKind::AlternatingEven : LimitKind::AlternatingOdd;
  return static_cast<double>(cokernel_limit_prob(kind, *cfg.target).value);
}

ReportRow make_prob_row(const ExperimentConfig& cfg, int n, std::optional<int> k,
                        std::uint64_t hits, double limit) {
  ReportRow row;
  row.n = n;
  row.k = k;
  row.trials = cfg.trials;
  row.estimate = static_cast<double>(hits) / static_cast<double>(cfg.trials);
  row.std_error = binomial_std_error(row.estimate, cfg.trials);
  Interval ci = normal_interval(row.estimate, cfg.trials, cfg.z);
  Interval wi = wilson_interval(row.estimate, cfg.trials, cfg.z);
  row.ci_lo = ci.lo;
  row.ci_hi = ci.hi;
  row.wilson_lo = wi.lo;
  row.wilson_hi = wi.hi;
  row.limit = limit;
  row.abs_error = std::abs(row.estimate - limit);
  row.pass = row.abs_error <= cfg.z * row.std_error + cfg.drift;
  return row;
}

// ---------------------------------------------------------------------------
// Experiment kinds
// ---------------------------------------------------------------------------

void run_cok_dist_for_n(const ExperimentConfig& cfg, int n, EstimateReport& rep) {
  const std::uint64_t m = checked_pow(cfg.p, cfg.d);
  if (m > 255) fail(Errc::BadConfig, "Monte Carlo runs need p^d <= 255");
  MatrixModel model{cfg.model, n, cfg.dist.build(m, n), {}};
  const std::uint64_t sid = experiment_stream_id(cfg, n);

  TrialCounters counters = run_trials(cfg, sid, [&](RngStream& rng, TrialCounters& acc) {
    thread_local ClassifyScratch sc;
    sc.buf.resize(static_cast<size_t>(n) * n);
    sample_matrix_u8(model, rng, sc.buf.data());
    CokernelClass c = classify_u8(sc.buf.data(), n, cfg.p, cfg.d, sc);
    acc.hist[c.key()] += 1;
  });

  rep.histograms[n] = counters.hist;
  std::string key = target_key_for(cfg, n);
  std::uint64_t hits = counters.hist.count(key) ? counters.hist.at(key) : 0;
  rep.rows.push_back(make_prob_row(cfg, n, std::nullopt, hits, limit_for_cok_dist(cfg, n)));
}

void run_rank_dist_for_n(const ExperimentConfig& cfg, int n, EstimateReport& rep) {
  const std::uint64_t m = cfg.p;
  if (m > 255) fail(Errc::BadConfig, "Monte Carlo runs need p <= 255");
  MatrixModel model{cfg.model, n, cfg.dist.build(m, n), {}};
  const std::uint64_t sid = experiment_stream_id(cfg, n);

  TrialCounters counters = run_trials(cfg, sid, [&](RngStream& rng, TrialCounters& acc) {
    thread_local ClassifyScratch sc;
    sc.buf.resize(static_cast<size_t>(n) * n);
    sample_matrix_u8(model, rng, sc.buf.data());
    snf_exponent_counts_u8(sc.buf.data(), n, cfg.p, 1, sc.counts, sc.ws);
    int corank = sc.counts[1];
    acc.int_hist[corank] += 1;
  });

  for (auto& [corank, cnt] : counters.int_hist)
    rep.histograms[n]["corank=" + std::to_string(corank)] = cnt;
  if (cfg.model == Symmetry::alternating) {
    std::uint64_t odd_rank = 0;
    for (auto& [corank, cnt] : counters.int_hist)
      if ((n - corank) % 2 == 1) odd_rank += cnt;
    rep.extra["odd_rank_trials"][std::to_string(n)] = odd_rank;
  }
  for (int k = 0; k <= cfg.max_corank; ++k) {
    double limit = 0;
    if (cfg.model == Symmetry::general) {
      limit = static_cast<double>(rank_limit_prob(LimitKind::NonSymmetric, cfg.p, k).value);
    } else if (cfg.model == Symmetry::symmetric) {
      limit = static_cast<double>(rank_limit_prob(LimitKind::Symmetric, cfg.p, k).value);
    } else {
      // Alternating ranks are even: corank parity is forced by n.
      if (n % 2 == 0)
        limit = k % 2 == 0
                    ? static_cast<double>(
                          rank_limit_prob(LimitKind::AlternatingEven, cfg.p, k / 2).value)
                    : 0.0;
      else
        limit = k % 2 == 1
                    ? static_cast<double>(
                          rank_limit_prob(LimitKind::AlternatingOdd, cfg.p, (k - 1) / 2).value)
                    : 0.0;
    }
    std::uint64_t hits = counters.int_hist.count(k) ? counters.int_hist.at(k) : 0;
    rep.rows.push_back(make_prob_row(cfg, n, k, hits, limit));
  }
}

void run_moment_for_n(const ExperimentConfig& cfg, int n, EstimateReport& rep) {
  if (!cfg.target) fail(Errc::BadConfig, "moment runs need a target group G");
  const std::uint64_t m = checked_pow(cfg.p, cfg.d);
  if (m > 255) fail(Errc::BadConfig, "Monte Carlo runs need p^d <= 255");
  const SurTable table = SurTable::build(*cfg.target);
  const std::uint64_t sid = experiment_stream_id(cfg, n);

  TrialCounters counters;
  if (cfg.graph) {
    GraphModel gm{n, cfg.beta, cfg.beta_c0};
    counters = run_trials(cfg, sid, [&](RngStream& rng, TrialCounters& acc) {
      thread_local ClassifyScratch sc;
      GraphSample gs = sample_graph(gm, rng);
      const int nn = n - 1;
      sc.buf.assign(static_cast<size_t>(nn) * nn, 0);
      std::vector<std::uint32_t> deg(n, 0);
      for (auto [u, v] : gs.edges) {
        if (u < static_cast<std::uint32_t>(nn) && v < static_cast<std::uint32_t>(nn)) {
          sc.buf[static_cast<size_t>(u) * nn + v] = static_cast<std::uint8_t>(m - 1);
          sc.buf[static_cast<size_t>(v) * nn + u] = static_cast<std::uint8_t>(m - 1);
        }
        ++deg[u];
        ++deg[v];
      }
      for (int i = 0; i < nn; ++i)
        sc.buf[static_cast<size_t>(i) * nn + i] = static_cast<std::uint8_t>(deg[i] % m);
      CokernelClass c = classify_u8(sc.buf.data(), nn, cfg.p, cfg.d, sc);
      unsigned __int128 s = table.sur(c);
      unsigned __int128 h = table.hom(c);
      if (h > (1ull << 40)) fail(Errc::Overflow, "hom count too large for aggregation");
      acc.sum += s;
      acc.sum_sq += s * s;
      acc.events += static_cast<std::uint64_t>(h);
    });
  } else {
    MatrixModel model{cfg.model, n, cfg.dist.build(m, n), {}};
    counters = run_trials(cfg, sid, [&](RngStream& rng, TrialCounters& acc) {
      thread_local ClassifyScratch sc;
      sc.buf.resize(static_cast<size_t>(n) * n);
      sample_matrix_u8(model, rng, sc.buf.data());
      CokernelClass c = classify_u8(sc.buf.data(), n, cfg.p, cfg.d, sc);
      unsigned __int128 s = table.sur(c);
      unsigned __int128 h = table.hom(c);
      if (h > (1ull << 40)) fail(Errc::Overflow, "hom count too large for aggregation");
      acc.sum += s;
      acc.sum_sq += s * s;
      acc.events += static_cast<std::uint64_t>(h);
    });
  }

  MomentKind mk = MomentKind::NonSymmetric;
  if (cfg.graph)
    mk = MomentKind::Graph;
  else if (cfg.model == Symmetry::symmetric)
    mk = MomentKind::Symmetric;
  else if (cfg.model == Symmetry::alternating)
    mk = MomentKind::Alternating;
  const double limit = static_cast<double>(moment_limit(mk, *cfg.target));

  ReportRow row;
  row.n = n;
  row.trials = cfg.trials;
  const double tn = static_cast<double>(cfg.trials);
  row.estimate = static_cast<double>(counters.sum) / tn;
  double mean_sq = static_cast<double>(counters.sum_sq) / tn;
  double var = std::max(mean_sq - row.estimate * row.estimate, 0.0);
  row.std_error = std::sqrt(var / tn);
  row.ci_lo = row.estimate - cfg.z * row.std_error;
  row.ci_hi = row.estimate + cfg.z * row.std_error;
  row.wilson_lo = row.ci_lo;  // Wilson applies to proportions; mirror the normal CI
  row.wilson_hi = row.ci_hi;
  row.limit = limit;
  row.abs_error = std::abs(row.estimate - limit);
  row.pass = row.abs_error <= cfg.z * row.std_error + cfg.drift;
  rep.rows.push_back(row);
  rep.extra["hom_moment_mean"][std::to_string(n)] =
      static_cast<double>(counters.events) / tn;
}

void run_sandpile_for_n(const ExperimentConfig& cfg, int n, EstimateReport& rep) {
  GraphModel gm{n, cfg.beta, cfg.beta_c0};
  const std::uint64_t sid = experiment_stream_id(cfg, n);
  const std::uint64_t m = checked_pow(cfg.p, cfg.d);
  if (!cfg.connectivity_only && m > 255)
    fail(Errc::BadConfig, "Monte Carlo runs need p^d <= 255");

  TrialCounters counters = run_trials(cfg, sid, [&](RngStream& rng, TrialCounters& acc) {
    thread_local ClassifyScratch sc;
    GraphSample gs = sample_graph(gm, rng);
    if (!gs.connected) {
      acc.hist["disconnected"] += 1;
      return;
    }
    acc.events += 1;  // connected
    if (cfg.connectivity_only) return;
    const int nn = n - 1;
    sc.buf.assign(static_cast<size_t>(nn) * nn, 0);
    std::vector<std::uint32_t> deg(n, 0);
    for (auto [u, v] : gs.edges) {
      if (u < static_cast<std::uint32_t>(nn) && v < static_cast<std::uint32_t>(nn)) {
        sc.buf[static_cast<size_t>(u) * nn + v] = static_cast<std::uint8_t>(m - 1);
        sc.buf[static_cast<size_t>(v) * nn + u] = static_cast<std::uint8_t>(m - 1);
      }
      ++deg[u];
      ++deg[v];
    }
    for (int i = 0; i < nn; ++i)
      sc.buf[static_cast<size_t>(i) * nn + i] = static_cast<std::uint8_t>(deg[i] % m);
    CokernelClass c = classify_u8(sc.buf.data(), nn, cfg.p, cfg.d, sc);
    acc.hist[c.key()] += 1;
  });

  const double tn = static_cast<double>(cfg.trials);
  std::uint64_t disconnected =
      counters.hist.count("disconnected") ? counters.hist.at("disconnected") : 0;
  rep.extra["disconnected_fraction"][std::to_string(n)] =
      static_cast<double>(disconnected) / tn;
  rep.histograms[n] = counters.hist;

  if (cfg.connectivity_only) {
    ReportRow row;
    row.n = n;
    row.trials = cfg.trials;
    row.estimate = static_cast<double>(counters.events) / tn;  // connected fraction
    row.std_error = binomial_std_error(row.estimate, cfg.trials);
    Interval ci = normal_interval(row.estimate, cfg.trials, cfg.z);
    Interval wi = wilson_interval(row.estimate, cfg.trials, cfg.z);
    row.ci_lo = ci.lo;
    row.ci_hi = ci.hi;
    row.wilson_lo = wi.lo;
    row.wilson_hi = wi.hi;
    row.limit = cfg.beta_c0 ? std::exp(-std::exp(-*cfg.beta_c0)) : 0.0;
    row.abs_error = std::abs(row.estimate - row.limit);
    row.pass = !cfg.beta_c0 || row.abs_error <= cfg.z * row.std_error + cfg.drift;
    rep.rows.push_back(row);
    return;
  }

  if (!cfg.target) fail(Errc::BadConfig, "sandpile classification needs a target group");
  CokernelClass tc;
  tc.p = cfg.p;
  tc.d = cfg.d;
  tc.capped_lambda = cfg.target->lambda;
  tc.saturated_parts = 0;
  std::uint64_t hits = counters.hist.count(tc.key()) ? counters.hist.at(tc.key()) : 0;
  double limit = static_cast<double>(sandpile_limit_prob(*cfg.target).value);
  rep.rows.push_back(make_prob_row(cfg, n, std::nullopt, hits, limit));
}

void run_sharpness_for_n(const ExperimentConfig& cfg, int n, EstimateReport& rep) {
  // Critical scale: alpha = ln(n)/n exactly (c = 1).
  const double alpha = alpha_schedule(1.0, n);
  const std::uint64_t sid = experiment_stream_id(cfg, n);
  const int kk = cfg.k;

  TrialCounters counters;
  if (cfg.model == Symmetry::general) {
    // Columns are independent; a column is zero with probability (1-a)^n.
    // Geometric skipping over the n columns samples the exact law of the
    // zero-column count.
    const double qcol = std::exp(static_cast<double>(n) * std::log1p(-alpha));
    const double log1m = std::log1p(-qcol);
    counters = run_trials(cfg, sid, [&](RngStream& rng, TrialCounters& acc) {
      int zero_cols = 0;
      std::uint64_t pos = rng.next_geometric_gap(log1m);
      while (pos < static_cast<std::uint64_t>(n)) {
        ++zero_cols;
        pos += 1 + rng.next_geometric_gap(log1m);
      }
      acc.sum += zero_cols;
      acc.sum_sq += static_cast<unsigned __int128>(zero_cols) * zero_cols;
      if (zero_cols >= kk) acc.events += 1;
    });
  } else {
    // Shared entries across columns: sample the nonzero pattern sparsely and
    // count columns with no incident nonzero.
    const double log1m = std::log1p(-alpha);
    const bool diag = cfg.model == Symmetry::symmetric;
    counters = run_trials(cfg, sid, [&](RngStream& rng, TrialCounters& acc) {
      thread_local std::vector<std::uint32_t> colcount;
      colcount.assign(n, 0);
      const std::uint64_t total = diag ? static_cast<std::uint64_t>(n) * (n + 1) / 2
                                       : static_cast<std::uint64_t>(n) * (n - 1) / 2;
      std::uint64_t pos = rng.next_geometric_gap(log1m);
      while (pos < total) {
        std::uint64_t p2 = pos;
        std::uint64_t i = 0, rowlen = diag ? n : n - 1;
        while (p2 >= rowlen) {
          p2 -= rowlen;
          ++i;
          --rowlen;
        }
        std::uint64_t j = i + (diag ? 0 : 1) + p2;
        ++colcount[i];
        if (j != i) ++colcount[j];
        pos += 1 + rng.next_geometric_gap(log1m);
      }
      int zero_cols = 0;
      for (int c = 0; c < n; ++c)
        if (colcount[c] == 0) ++zero_cols;
      acc.sum += zero_cols;
      acc.sum_sq += static_cast<unsigned __int128>(zero_cols) * zero_cols;
      if (zero_cols >= kk) acc.events += 1;
    });
  }

  const double tn = static_cast<double>(cfg.trials);
  LimitKind lk = cfg.model == Symmetry::general    ? LimitKind::NonSymmetric
                 : cfg.model == Symmetry::symmetric ? LimitKind::Symmetric
                 : n % 2 == 0                       ? LimitKind::AlternatingEven
                                                    : LimitKind::AlternatingOdd;
  // Universal-model tail P(corank >= k), with alternating coranks mapped to
  // their even/odd ladder (corank 2j on even sizes, 2j+1 on odd).
  double universal_tail;
  if (cfg.model == Symmetry::alternating) {
    int j0 = n % 2 == 0 ? (kk + 1) / 2 : kk / 2;
    universal_tail = static_cast<double>(rank_limit_tail(lk, cfg.p, j0).value);
  } else {
    universal_tail = static_cast<double>(rank_limit_tail(lk, cfg.p, kk).value);
  }

  ReportRow row;
  row.n = n;
  row.k = kk;
  row.trials = cfg.trials;
  row.estimate = static_cast<double>(counters.events) / tn;  // P(>= k zero columns)
  row.std_error = binomial_std_error(row.estimate, cfg.trials);
  Interval ci = normal_interval(row.estimate, cfg.trials, cfg.z);
  Interval wi = wilson_interval(row.estimate, cfg.trials, cfg.z);
  row.ci_lo = ci.lo;
  row.ci_hi = ci.hi;
  row.wilson_lo = wi.lo;
  row.wilson_hi = wi.hi;
  row.limit = universal_tail;
  row.abs_error = std::abs(row.estimate - universal_tail);
  row.pass = row.estimate > universal_tail;  // sharpness shows the excess
  rep.rows.push_back(row);

  rep.extra["mean_zero_columns"][std::to_string(n)] =
      static_cast<double>(counters.sum) / tn;
  rep.extra["zero_column_bound"][std::to_string(n)] = zero_column_bound(kk).to_double();
  rep.extra["universal_corank_tail"][std::to_string(n)] = universal_tail;
}

}  // namespace

// ---------------------------------------------------------------------------
// Entry point and report serialization
// ---------------------------------------------------------------------------

EstimateReport run_experiment(const ExperimentConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  EstimateReport rep;
  rep.config_echo = cfg.echo();
  // Seed lineage: the master seed plus the derived per-n stream ids.
  ojson lineage;
  lineage["master_seed"] = cfg.master_seed;
  ojson ids;
  for (int n : cfg.ns) ids[std::to_string(n)] = experiment_stream_id(cfg, n);
  lineage["experiment_ids"] = ids;
  rep.extra["seed_lineage"] = lineage;
  for (int n : cfg.ns) {
    switch (cfg.kind) {
      case ExperimentKind::CokDist: run_cok_dist_for_n(cfg, n, rep); break;
      case ExperimentKind::RankDist: run_rank_dist_for_n(cfg, n, rep); break;
      case ExperimentKind::Moment: run_moment_for_n(cfg, n, rep); break;
      case ExperimentKind::Sandpile: run_sandpile_for_n(cfg, n, rep); break;
      case ExperimentKind::Sharpness: run_sharpness_for_n(cfg, n, rep); break;
    }
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

ojson EstimateReport::to_json() const {
  ojson j;
  j["config"] = config_echo;
  ojson rows_json = ojson::array();
  for (const auto& r : rows) {
    ojson rj;
    rj["n"] = r.n;
    if (r.k) rj["k"] = *r.k;
    rj["estimate"] = r.estimate;
    rj["std_error"] = r.std_error;
    rj["ci"] = ojson{{"lo", r.ci_lo}, {"hi", r.ci_hi}};
    rj["wilson"] = ojson{{"lo", r.wilson_lo}, {"hi", r.wilson_hi}};
    rj["limit"] = r.limit;
    rj["abs_error"] = r.abs_error;
    rj["trials"] = r.trials;
    rj["pass"] = r.pass;
    rows_json.push_back(rj);
  }
  j["rows"] = rows_json;
  if (!histograms.empty()) {
    ojson h;
    for (const auto& [n, hist] : histograms) {
      ojson hn;
      for (const auto& [k, v] : hist) hn[k] = v;
      h[std::to_string(n)] = hn;
    }
    j["classes"] = h;
  }
  if (!extra.empty()) j["extra"] = extra;
  return j;
}

std::string EstimateReport::to_csv() const {
  std::string out = "n,k,estimate,std_error,ci_lo,ci_hi,wilson_lo,wilson_hi,limit,abs_error,"
                    "trials,pass\r\n";
  auto num = [](double x) {
    char buf[64];
    snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    out += std::to_string(r.n) + ",";
    out += (r.k ? std::to_string(*r.k) : "") + ",";
    out += num(r.estimate) + "," + num(r.std_error) + "," + num(r.ci_lo) + "," +
           num(r.ci_hi) + "," + num(r.wilson_lo) + "," + num(r.wilson_hi) + "," +
           num(r.limit) + "," + num(r.abs_error) + "," + std::to_string(r.trials) + "," +
           (r.pass ? "true" : "false") + "\r\n";
  }
  return out;
}

void write_report(const EstimateReport& rep, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream f(out_dir + "/report.json", std::ios::binary);
    f << rep.to_json().dump(2) << "\n";
  }
  {
    std::ofstream f(out_dir + "/rows.csv", std::ios::binary);
    f << rep.to_csv();
  }
  {
    ojson t;
    t["wall_seconds"] = rep.wall_seconds;
    std::ofstream f(out_dir + "/timing.json", std::ios::binary);
    f << t.dump(2) << "\n";
  }
}

}  // namespace coklab
