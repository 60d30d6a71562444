#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace qscare {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;  // seconds allowed
};

inline constexpr int kCriteriaCount = 11;

// Runs the selected criteria (1..11) in order; the bandwidth-law criterion
// is evaluated last over every tink run made by the others. on_result is
// called as each criterion finishes.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, std::ostream& log,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

// "PASS [3] name (12.3 s): detail"
std::string format_result(const CriterionResult& r);

}  // namespace qscare
