#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coalmine/erc.hpp"
#include "coalmine/ocf.hpp"

namespace coalmine::oracle {

// Slow, direct checks used by the tests and the acceptance suite. None of
// them call into the solvers they verify.

/// Largest strategy space brute_force_erc() agrees to enumerate.
inline constexpr std::uint64_t kMaxProfiles = 10'000'000;

/// Every integer bid profile from which no coalition has a strictly better
/// integer deviation. Throws std::invalid_argument when the product of
/// (cap + 1) exceeds kMaxProfiles.
std::vector<std::vector<long>> brute_force_erc(const ErcInput& input);

/// Per coalition: best payoff over every integer bid in [0, cap] against the
/// others' bids in `profile`, minus the payoff of the bid it holds.
std::vector<double> deviation_gains(const ErcInput& input, const std::vector<long>& profile);

struct IterationReport {
  enum class Outcome { fixed_point, cycle, exhausted, no_best_response };
  Outcome outcome = Outcome::exhausted;
  std::vector<double> nonce;  // last iterate
  int iterations = 0;
  int period = 0;  // cycle length when outcome == cycle
};

/// Synchronous real-valued best responses from every coalition bidding
/// min(1, cap), each bid moving `damping` of the way to its reply. Stops at a
/// fixed point (max change <= 1e-9, relative to max(1, |bid|)), when the
/// iterate revisits one of its last 8 states, or when some coalition faces
/// no opposing bids (its payoff has no maximizer there).
IterationReport best_response_iteration(const ErcInput& input, int max_iters = 100'000,
                                        double damping = 1.0);

/// Central difference of the relaxed coalition payoff in its own bid.
double finite_difference_gradient(double theta, double others, double price, double nonce,
                                  double h = 1e-4);

struct Witness {
  int mu = 0;
  std::string move;  // human readable
  double gain = 0.0;  // actor's utility change
  std::string structure_after;
};

struct OracleReport {
  bool pass = true;
  std::optional<Witness> witness;

  /// `PASS`, or `FAIL` followed by the witness on the same line.
  std::string to_string() const;
};

/// Tries every miner against every atomic move over every coalition,
/// re-evaluating the structure from scratch after each. Fails with the first
/// admissible move found.
OracleReport brute_force_stability(const CoalitionStructure& structure, double price,
                                   const MarketContext& market);

}  // namespace coalmine::oracle
