// All eight acceptance checks, one PASS/FAIL line each. Exits 1 if any fails.

#include <cstdio>

#include "coalmine/verification.hpp"

int main() {
  using namespace coalmine::verification;
  SuiteOptions options;
  options.log = [](const std::string& line) {
    std::fprintf(stderr, "  .. %s\n", line.c_str());
  };
  int failed = 0;
  for (int id : all_criteria()) {
    const CriterionResult result = run_criterion(id, options);
    std::printf("%s\n", format(result).c_str());
    std::fflush(stdout);
    failed += result.pass ? 0 : 1;
  }
  std::printf("%zu criteria, %d failed\n", all_criteria().size(), failed);
  return failed == 0 ? 0 : 1;
}
