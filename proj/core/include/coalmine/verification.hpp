#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace coalmine::verification {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // one line
  double seconds = 0.0;
};

/// Knobs for the acceptance checks. Defaults are the full-size runs.
struct SuiteOptions {
  std::uint64_t seed = 20240601;
  int erc_instances = 1000;
  int formation_instances = 200;
  int trend_seeds = 100;
  int ordering_seeds = 100;
  int search_seeds = 5;
  int monotonicity_seeds = 50;
  /// Sweep worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
  /// Receives progress notes while long checks run; may be empty.
  std::function<void(const std::string&)> log;
};

CriterionResult erc_oracle_equivalence(const SuiteOptions& options);
CriterionResult closed_form_identity(const SuiteOptions& options);
CriterionResult formation_stability(const SuiteOptions& options);
CriterionResult price_trends(const SuiteOptions& options);
CriterionResult mode_ordering(const SuiteOptions& options);
CriterionResult price_search(const SuiteOptions& options);
CriterionResult model_formulas(const SuiteOptions& options);
CriterionResult parameter_monotonicity(const SuiteOptions& options);

/// Ids 1 to 8 in order.
std::vector<int> all_criteria();
/// The checks that finish in a few minutes: 1, 2, 3 and 7.
std::vector<int> quick_criteria();

/// Runs criterion `id`, timing it. Exceptions become a FAIL with the message.
CriterionResult run_criterion(int id, const SuiteOptions& options);

/// `PASS [3] formation stability: ... (12.3 s)`
std::string format(const CriterionResult& result);

}  // namespace coalmine::verification
