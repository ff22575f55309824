#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "coalmine/ocf.hpp"

namespace coalmine {

/// Search state in normalized price o = p / p-bar.
struct PricingState {
  double o = 1.0;
  double o_pre = 0.0;
  double step = 0.25;
  int iteration = 0;
  CoalitionStructure snapshot;
};

/// One outer iteration of the price search.
struct TrajectoryRecord {
  int iteration = 0;
  std::array<double, 3> prices{};       // low, mid, high
  std::array<double, 3> ecp_utility{};  // at each probe
  std::array<bool, 3> stable{true, true, true};  // formation settled before the cap
  double o_next = 0.0;
};

struct StackelbergResult {
  double p_star = 0.0;
  StructureEvaluation final;
  std::vector<TrajectoryRecord> trajectory;
  int unstable_probes = 0;  // probes scored at the pass cap instead of a stable structure

  const CoalitionStructure& final_structure() const { return final.structure; }
  const ErcEquilibrium& final_equilibrium() const { return final.equilibrium; }
  double ecp_utility() const { return final.ecp_utility; }
};

struct StackelbergOptions {
  double eps = 1e-3;
  double step0 = 0.25;
  int max_iterations = 2000;
  /// false: miners never move (every miner mines alone).
  bool cooperative = true;
  /// true: a probe whose coalition formation hits the pass cap aborts the
  /// search with ConvergenceError. false: the probe is scored on the last
  /// structure reached and counted in `unstable_probes`.
  bool require_stable = false;
  OcfOptions ocf{};
};

/// Probes are lifted to this fraction of the price cap to keep demand finite.
inline constexpr double kPriceFloorFraction = 1e-6;

/// Price actually evaluated for normalized price `o` (clamped to [0, 1]).
double probe_price_for(double o, const SystemParams& params);

/// Stable outcome at price `price`, starting from `state.snapshot`.
StructureEvaluation probe_price(double price, const PricingState& state, const MarketContext& market,
                                std::uint64_t seed, const StackelbergOptions& options = {});

/// Moves o toward the best of the three probes (evals: low, mid, high),
/// clamped to [0, 1]; the centre wins ties. Decays the step by 0.99 and
/// adopts the winning probe's structure as the next snapshot.
PricingState pricing_step(const PricingState& state,
                          const std::array<const StructureEvaluation*, 3>& evals);

/// Alternating search: three probes around o per iteration until
/// |o - o_pre| <= eps. Starts from o = 1 and the all-singleton structure.
/// Child seeds per probe derive from (seed, iteration, probe index).
/// Throws ConvergenceError past `max_iterations`.
StackelbergResult solve_stackelberg(const MarketContext& market, std::uint64_t seed,
                                    const StackelbergOptions& options = {});

}  // namespace coalmine
