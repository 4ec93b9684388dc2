#pragma once

// JSON forms of the domain types: group types as {"p":2,"lambda":[2,1]}
// (multi-prime as a map from decimal prime strings to partitions), matrices
// as row-major residue arrays with modulus and symmetry tag, cokernel classes
// as {"p":2,"d":3,"lambda":[2,1],"saturated":0}.

#include <json.hpp>

#include "coklab/groups.hpp"
#include "coklab/linalg.hpp"

namespace coklab {

using sjson = nlohmann::ordered_json;

inline sjson to_json(const PGroupType& g) {
  return sjson{{"p", g.p}, {"lambda", g.lambda.parts}};
}

inline PGroupType pgroup_from_json(const sjson& j) {
  std::vector<int> parts;
  for (const auto& x : j.at("lambda")) parts.push_back(x.get<int>());
  return PGroupType(j.at("p").get<std::uint64_t>(), Partition(std::move(parts)));
}

inline sjson to_json(const AbGroupType& g) {
  sjson j = sjson::object();
  for (const auto& [p, lam] : g.components) j[std::to_string(p)] = lam.parts;
  return j;
}

inline AbGroupType abgroup_from_json(const sjson& j) {
  std::map<std::uint64_t, Partition> comps;
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::vector<int> parts;
    for (const auto& x : it.value()) parts.push_back(x.get<int>());
    if (!parts.empty()) comps.emplace(std::stoull(it.key()), Partition(std::move(parts)));
  }
  return AbGroupType(std::move(comps));
}

inline sjson to_json(const ModMatrix& m) {
  return sjson{{"n", m.n},
               {"modulus", m.m},
               {"symmetry", symmetry_name(m.sym)},
               {"entries", m.a}};
}

inline ModMatrix modmatrix_from_json(const sjson& j) {
  ModMatrix m(j.at("n").get<int>(), j.at("modulus").get<std::uint64_t>(),
              symmetry_from_name(j.at("symmetry").get<std::string>()));
  size_t i = 0;
  for (const auto& x : j.at("entries")) {
    if (i >= m.a.size()) fail(Errc::BadConfig, "entry array too long");
    m.a[i++] = x.get<std::uint32_t>();
  }
  if (i != m.a.size()) fail(Errc::BadConfig, "entry array too short");
  return m;
}

inline sjson to_json(const CokernelClass& c) {
  return sjson{{"p", c.p},
               {"d", c.d},
               {"lambda", c.capped_lambda.parts},
               {"saturated", c.saturated_parts}};
}

inline CokernelClass cokclass_from_json(const sjson& j) {
  CokernelClass c;
  c.p = j.at("p").get<std::uint64_t>();
  c.d = j.at("d").get<int>();
  std::vector<int> parts;
  for (const auto& x : j.at("lambda")) parts.push_back(x.get<int>());
  c.capped_lambda = Partition(std::move(parts));
  c.saturated_parts = j.at("saturated").get<int>();
  return c;
}

}  // namespace coklab
