#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace coklab {

struct CheckResult {
  std::string name;
  bool pass = false;
  nlohmann::ordered_json computed;
  nlohmann::ordered_json expected;
};

struct VerifyOptions {
  std::string suite = "all";      // all | algebra | oracles | linalg | formulas
  bool inject_aut_defect = false;  // negative control: must make the battery fail
  bool quick = false;              // trims the heaviest grids for unit tests
};

std::vector<CheckResult> run_verify(const VerifyOptions& opt);
nlohmann::ordered_json verify_report(const std::vector<CheckResult>& results);

}  // namespace coklab
