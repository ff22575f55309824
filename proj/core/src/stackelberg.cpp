#include "coalmine/stackelberg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <optional>
#include <string>

#include "coalmine/error.hpp"
#include "coalmine/rng.hpp"

namespace coalmine {
namespace {

enum class Winner { low, mid, high };

Winner pick_winner(double low, double mid, double high) {
  if (high > mid && high >= low) return Winner::high;
  if (low > mid && low > high) return Winner::low;
  return Winner::mid;
}

struct Probe {
  StructureEvaluation eval;
  bool stable = true;
};

Probe probe_with(StructureEvaluator& evaluator, double price, const CoalitionStructure& snapshot,
                 std::uint64_t seed, const StackelbergOptions& options) {
  evaluator.set_price(price);
  if (!options.cooperative) return {evaluator(snapshot), true};
  if (options.require_stable) return {converge_structure(snapshot, evaluator, seed, options.ocf), true};
  FormationRun run = run_formation(snapshot, evaluator, seed, options.ocf);
  return {std::move(run.evaluation), run.stable};
}

Winner winner_of(const std::array<const StructureEvaluation*, 3>& evals) {
  return pick_winner(evals[0]->ecp_utility, evals[1]->ecp_utility, evals[2]->ecp_utility);
}

}  // namespace

double probe_price_for(double o, const SystemParams& params) {
  const double clamped = std::clamp(o, 0.0, 1.0);
  return std::max(clamped * params.price_cap, kPriceFloorFraction * params.price_cap);
}

StructureEvaluation probe_price(double price, const PricingState& state, const MarketContext& market,
                                std::uint64_t seed, const StackelbergOptions& options) {
  StructureEvaluator evaluator(market, std::max(price, kPriceFloorFraction * market.params.price_cap));
  return probe_with(evaluator, evaluator.price(), state.snapshot, seed, options).eval;
}

PricingState pricing_step(const PricingState& state,
                          const std::array<const StructureEvaluation*, 3>& evals) {
  for (const auto* e : evals) {
    if (e == nullptr) throw std::invalid_argument("pricing_step: missing probe evaluation");
  }
  PricingState next = state;
  switch (winner_of(evals)) {
    case Winner::high:
      next.o = std::min(state.o_pre + state.step, 1.0);
      next.snapshot = evals[2]->structure;
      break;
    case Winner::low:
      next.o = std::max(state.o_pre - state.step, 0.0);
      next.snapshot = evals[0]->structure;
      break;
    case Winner::mid:
      next.o = state.o_pre;
      next.snapshot = evals[1]->structure;
      break;
  }
  next.step = 0.99 * state.step;
  next.iteration = state.iteration + 1;
  return next;
}

StackelbergResult solve_stackelberg(const MarketContext& market, std::uint64_t seed,
                                    const StackelbergOptions& options) {
  if (!(options.eps > 0.0)) throw std::invalid_argument("solve_stackelberg: eps must be > 0");
  if (!(options.step0 > 0.0 && options.step0 <= 1.0)) {
    throw std::invalid_argument("solve_stackelberg: step0 must lie in (0, 1]");
  }
  const SystemParams& params = market.params;
  PricingState state;
  state.o = 1.0;
  state.o_pre = 0.0;
  state.step = options.step0;
  state.snapshot = CoalitionStructure::singletons(params.n_mus);

  StructureEvaluator evaluator(market, params.price_cap);
  StackelbergResult result;
  std::optional<StructureEvaluation> adopted;
  while (std::abs(state.o - state.o_pre) > options.eps) {
    if (state.iteration >= options.max_iterations) {
      throw ConvergenceError("price search did not converge within " +
                                 std::to_string(options.max_iterations) + " iterations",
                             {state.snapshot.to_string()});
    }
    state.o_pre = state.o;
    const std::array<double, 3> normalized{std::max(state.o_pre - state.step, 0.0), state.o_pre,
                                           std::min(state.o_pre + state.step, 1.0)};
    std::array<StructureEvaluation, 3> evals;
    TrajectoryRecord record;
    record.iteration = state.iteration;
    for (std::size_t k = 0; k < 3; ++k) {
      record.prices[k] = probe_price_for(normalized[k], params);
      const auto child = derive_seed(seed, {static_cast<std::uint64_t>(state.iteration), k});
      Probe probe = probe_with(evaluator, record.prices[k], state.snapshot, child, options);
      evals[k] = std::move(probe.eval);
      record.ecp_utility[k] = evals[k].ecp_utility;
      record.stable[k] = probe.stable;
      if (!probe.stable) ++result.unstable_probes;
    }
    const std::array<const StructureEvaluation*, 3> ptrs{&evals[0], &evals[1], &evals[2]};
    const auto won = static_cast<std::size_t>(winner_of(ptrs));
    state = pricing_step(state, ptrs);
    record.o_next = state.o;
    result.trajectory.push_back(record);
    adopted = std::move(evals[won]);
  }
  result.p_star = state.o * params.price_cap;
  result.final = adopted ? std::move(*adopted)
                         : probe_with(evaluator, probe_price_for(state.o, params), state.snapshot,
                                      derive_seed(seed, {0xf1a1ULL}), options)
                               .eval;
  return result;
}

}  // namespace coalmine
