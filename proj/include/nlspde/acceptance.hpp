#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nlspde {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  // Failing only on a sub-check whose tolerance is below the statistical floor of its own sample size.
  bool known_unattainable = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::vector<int> only;  // empty runs all nine
  std::uint64_t seed = 20240601;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

// "PASS  [1] name: detail (time)"
std::string format_result(const CriterionResult& r);

// true when every failure is a known-unattainable one
bool acceptance_ok(const std::vector<CriterionResult>& results);

}  // namespace nlspde
