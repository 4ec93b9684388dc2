#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coklab/models.hpp"
#include "coklab/universal.hpp"

namespace coklab {

using ojson = nlohmann::ordered_json;

enum class ExperimentKind { CokDist, RankDist, Moment, Sandpile, Sharpness };

std::string experiment_kind_name(ExperimentKind k);
ExperimentKind experiment_kind_from_name(const std::string& name);

// Distribution spec as it appears in config files. Schedule-driven alphas are
// resolved per matrix size; the certified balancedness alpha_of is pinned to
// the schedule value (raw parameters are rescaled so the mod-p certificate
// matches), and the resulting exact rationals drive the sampler.
struct DistSpec {
  std::string type = "spike01";  // spike01 | spike_uniform | uniform | explicit
  std::optional<double> alpha_c;
  std::optional<Rational> alpha;
  std::vector<std::pair<std::uint32_t, Rational>> explicit_support;

  EntryDistribution build(std::uint64_t m, int n) const;
  std::string label() const;
  static DistSpec from_json(const ojson& j);
  ojson to_json() const;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::CokDist;
  bool graph = false;  // moment over the graph model / sandpile
  Symmetry model = Symmetry::general;
  std::vector<int> ns;
  std::uint64_t p = 2;
  int d = 1;
  DistSpec dist;
  std::optional<Rational> beta;
  std::optional<double> beta_c0;
  std::optional<PGroupType> target;  // H (cok-dist, sandpile) or G (moment)
  bool connectivity_only = false;
  int max_corank = 8;
  int k = 3;  // sharpness column threshold
  std::uint64_t trials = 1000;
  std::uint64_t master_seed = 1;
  int workers = 1;
  double drift = 0.02;
  double z = 3.0;

  static ExperimentConfig from_json(const ojson& j);
  ojson echo() const;
};

struct ReportRow {
  int n = 0;
  std::optional<int> k;
  double estimate = 0;
  double std_error = 0;
  double ci_lo = 0, ci_hi = 0;
  double wilson_lo = 0, wilson_hi = 0;
  double limit = 0;
  double abs_error = 0;
  std::uint64_t trials = 0;
  bool pass = true;
};

struct EstimateReport {
  ojson config_echo;
  std::vector<ReportRow> rows;
  // Per-n class histograms; integer counters only, so reports are identical
  // at any worker count.
  std::map<int, std::map<std::string, std::uint64_t>> histograms;
  ojson extra;
  double wall_seconds = 0;  // written to the timing sidecar, not the report

  ojson to_json() const;
  std::string to_csv() const;
};

EstimateReport run_experiment(const ExperimentConfig& cfg);

// Writes report.json, rows.csv and timing.json under out_dir.
void write_report(const EstimateReport& rep, const std::string& out_dir);

// Confidence helpers (normal approximation and Wilson).
struct Interval {
  double lo, hi;
};
double binomial_std_error(double phat, std::uint64_t trials);
Interval normal_interval(double phat, std::uint64_t trials, double z);
Interval wilson_interval(double phat, std::uint64_t trials, double z);

}  // namespace coklab
