// One PASS/FAIL line per criterion on stdout, progress on stderr.
//   qscare_acceptance            all criteria
//   qscare_acceptance 3 7 11     a subset
#include "qscare/acceptance.hpp"

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    try {
      ids.push_back(std::stoi(argv[i]));
    } catch (const std::exception&) {
      std::cerr << "usage: qscare_acceptance [criterion ...]\n";
      return 2;
    }
  }
  if (ids.empty())
    for (int i = 1; i <= qscare::kCriteriaCount; ++i) ids.push_back(i);

  std::vector<qscare::CriterionResult> res;
  try {
    res = qscare::run_acceptance(ids, std::cerr, [](const qscare::CriterionResult& r) {
      std::cout << qscare::format_result(r) << std::endl;
    });
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  int failed = 0;
  for (const auto& r : res) failed += r.pass ? 0 : 1;
  std::cout << res.size() - failed << "/" << res.size() << " criteria passed\n";
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
