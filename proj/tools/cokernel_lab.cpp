// cokernel-lab: seeded Monte Carlo experiments on cokernels of random
// matrices over Z/p^d and sandpile groups of random graphs, exact limit
// formula evaluation, and the verification battery.

#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "coklab/experiments.hpp"
#include "coklab/oracle.hpp"
#include "coklab/universal.hpp"
#include "coklab/verify.hpp"

using coklab::ojson;

namespace {

ojson load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  ojson j;
  f >> j;
  return j;
}

coklab::PGroupType pgroup_from_string(const std::string& s) {
  ojson j = ojson::parse(s);
  std::uint64_t p = j.at("p").get<std::uint64_t>();
  std::vector<int> parts;
  for (const auto& x : j.at("lambda")) parts.push_back(x.get<int>());
  return coklab::PGroupType(p, coklab::Partition(parts));
}

int run_experiment_command(coklab::ExperimentKind kind, const std::string& config_path,
                           std::int64_t seed_override, int workers_override,
                           const std::string& out_dir) {
  ojson j = config_path.empty() ? ojson::object() : load_json_file(config_path);
  if (!j.contains("kind")) j["kind"] = coklab::experiment_kind_name(kind);
  coklab::ExperimentConfig cfg = coklab::ExperimentConfig::from_json(j);
  if (cfg.kind != kind)
    throw std::runtime_error("config kind does not match the subcommand");
  if (seed_override >= 0) cfg.master_seed = static_cast<std::uint64_t>(seed_override);
  if (workers_override > 0) cfg.workers = workers_override;

  coklab::EstimateReport rep = coklab::run_experiment(cfg);
  if (!out_dir.empty()) coklab::write_report(rep, out_dir);
  std::cout << rep.to_json().dump(2) << "\n";
  std::cerr << "wall_seconds=" << rep.wall_seconds << "\n";
  for (const auto& row : rep.rows)
    if (!row.pass) return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cokernel-lab: random-matrix cokernel and sandpile-group laboratory"};
  app.require_subcommand(1);

  struct ExpOpts {
    std::string config;
    std::int64_t seed = -1;
    int workers = 0;
    std::string out;
  };

  std::map<std::string, coklab::ExperimentKind> kinds = {
      {"cok-dist", coklab::ExperimentKind::CokDist},
      {"rank-dist", coklab::ExperimentKind::RankDist},
      {"moment", coklab::ExperimentKind::Moment},
      {"sandpile", coklab::ExperimentKind::Sandpile},
      {"sharpness", coklab::ExperimentKind::Sharpness},
  };
  std::map<std::string, ExpOpts> opts;
  for (auto& [name, kind] : kinds) {
    auto* sub = app.add_subcommand(name, name + " experiment");
    auto& o = opts[name];
    sub->add_option("--config", o.config, "experiment config (JSON)")->required();
    sub->add_option("--seed", o.seed, "master seed override");
    sub->add_option("--workers", o.workers, "worker count override");
    sub->add_option("--out", o.out, "output directory for report.json / rows.csv");
  }

  // verify
  auto* verify = app.add_subcommand("verify", "run the oracle battery");
  std::string suite = "all";
  std::string verify_out;
  bool inject_aut = false, quick = false;
  verify->add_option("--suite", suite, "all | algebra | oracles | linalg | formulas");
  verify->add_option("--out", verify_out, "write the JSON report here");
  verify->add_flag("--inject-aut-defect", inject_aut,
                   "negative control: corrupt one |Aut| value");
  verify->add_flag("--quick", quick, "trim the heaviest grids");

  // formulas eval
  auto* formulas = app.add_subcommand("formulas", "evaluate limit formulas");
  auto* eval = formulas->add_subcommand("eval", "evaluate one formula");
  std::string kind_name, h_json, g_json, multi_json, primes_csv;
  std::int64_t corank = -1;
  std::uint64_t prime = 2;
  bool moment_flag = false;
  eval->add_option("--kind", kind_name,
                   "non-symmetric | symmetric | alternating-even | alternating-odd | "
                   "sandpile | graph")
      ->required();
  eval->add_option("--H", h_json, "target group, e.g. {\"p\":2,\"lambda\":[1]}");
  eval->add_option("--G", g_json, "moment group (with --moment)");
  eval->add_option("--corank", corank, "evaluate the F_p corank formula");
  eval->add_option("--p", prime, "prime for the corank formula");
  eval->add_flag("--moment", moment_flag, "evaluate the Sur-moment limit");
  eval->add_option("--multi", multi_json,
                   "multi-prime group as {\"2\":[1],\"3\":[1]}");
  eval->add_option("--primes", primes_csv, "prime set for --multi, e.g. 2,3");

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [name, kind] : kinds)
      if (app.got_subcommand(name)) {
        auto& o = opts[name];
        return run_experiment_command(kind, o.config, o.seed, o.workers, o.out);
      }

    if (app.got_subcommand("verify")) {
      coklab::VerifyOptions vo;
      vo.suite = suite;
      vo.inject_aut_defect = inject_aut;
      vo.quick = quick;
      auto results = coklab::run_verify(vo);
      ojson rep = coklab::verify_report(results);
      if (!verify_out.empty()) {
        std::ofstream f(verify_out, std::ios::binary);
        f << rep.dump(2) << "\n";
      }
      std::cout << rep.dump(2) << "\n";
      return rep["pass"].get<bool>() ? 0 : 1;
    }

    if (app.got_subcommand("formulas")) {
      ojson outj;
      outj["kind"] = kind_name;
      coklab::LimitFormulaResult res;
      if (!multi_json.empty()) {
        std::map<std::uint64_t, coklab::Partition> comps;
        ojson mj = ojson::parse(multi_json);
        for (auto it = mj.begin(); it != mj.end(); ++it) {
          std::vector<int> parts;
          for (const auto& x : it.value()) parts.push_back(x.get<int>());
          if (!parts.empty())
            comps.emplace(std::stoull(it.key()), coklab::Partition(parts));
        }
        std::set<std::uint64_t> primes;
        size_t pos = 0;
        while (pos < primes_csv.size()) {
          size_t comma = primes_csv.find(',', pos);
          if (comma == std::string::npos) comma = primes_csv.size();
          primes.insert(std::stoull(primes_csv.substr(pos, comma - pos)));
          pos = comma + 1;
        }
        res = coklab::multi_prime_limit_prob(coklab::limit_kind_from_name(kind_name),
                                             coklab::AbGroupType(comps), primes);
        outj["query"] = "multi-prime";
      } else if (moment_flag) {
        coklab::PGroupType g = pgroup_from_string(g_json.empty() ? h_json : g_json);
        coklab::MomentKind mk = coklab::MomentKind::NonSymmetric;
        if (kind_name == "symmetric") mk = coklab::MomentKind::Symmetric;
        if (kind_name == "alternating" || kind_name == "alternating-even" ||
            kind_name == "alternating-odd")
          mk = coklab::MomentKind::Alternating;
        if (kind_name == "graph" || kind_name == "sandpile") mk = coklab::MomentKind::Graph;
        std::uint64_t v = coklab::moment_limit(mk, g);
        outj["query"] = "moment";
        outj["value"] = v;
        outj["tail_bound"] = 0.0;
        std::cout << outj.dump(2) << "\n";
        return 0;
      } else if (corank >= 0) {
        res = coklab::rank_limit_prob(coklab::limit_kind_from_name(kind_name), prime,
                                      static_cast<int>(corank));
        outj["query"] = "corank";
        outj["p"] = prime;
        outj["corank"] = corank;
      } else {
        coklab::PGroupType h = pgroup_from_string(h_json);
        if (kind_name == "sandpile" || kind_name == "graph")
          res = coklab::sandpile_limit_prob(h);
        else
          res = coklab::cokernel_limit_prob(coklab::limit_kind_from_name(kind_name), h);
        outj["query"] = "cokernel";
        outj["H"] = ojson::parse(h_json);
      }
      outj["value"] = static_cast<double>(res.value);
      outj["tail_bound"] = static_cast<double>(res.tail_bound);
      outj["truncation_index"] = res.truncation_index;
      std::cout << outj.dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
