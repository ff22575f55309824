#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "coalmine/erc.hpp"
#include "coalmine/model.hpp"
#include "coalmine/params.hpp"
#include "coalmine/structure.hpp"
#include "coalmine/transactions.hpp"

namespace coalmine {

/// Immutable scenario shared by every evaluation: parameters, the
/// transaction pool and what each miner collected.
struct MarketContext {
  SystemParams params;
  TransactionPool pool;
  std::vector<MinerProfile> profiles;
  FeeIndex fees;
  long cap = 0;  // nonce cap, identical for every coalition

  MarketContext(SystemParams params, TransactionPool pool, std::vector<MinerProfile> profiles);

  /// Validates `params`, then draws the pool and the per-miner collections
  /// from streams derived from `seed`.
  static MarketContext generate(const SystemParams& params, std::uint64_t seed);

  /// Copy with a different collaboration factor.
  MarketContext with_capacity(int collaboration_factor) const;
};

struct StructureEvaluation {
  CoalitionStructure structure;
  double price = 0.0;
  std::vector<double> theta;
  ErcEquilibrium equilibrium;
  std::vector<double> xi;  // per-miner total utility
  double ecp_utility = 0.0;
  double avg_members = 0.0;

  double mu_utility_total() const;
  /// Miners' utilities plus the provider's.
  double system_utility() const { return mu_utility_total() + ecp_utility; }
};

/// Evaluates structures at a price, memoizing reward factors by member set
/// (they do not depend on the price, so the cache survives set_price()).
/// Not thread-safe; use one per thread.
class StructureEvaluator {
 public:
  StructureEvaluator(const MarketContext& market, double price);

  StructureEvaluation operator()(const CoalitionStructure& structure);
  /// Same, but leaves the per-miner allocation lists empty (xi is filled).
  StructureEvaluation score(const CoalitionStructure& structure);
  double theta(const Members& members);

  const MarketContext& market() const noexcept { return *market_; }
  double price() const noexcept { return price_; }
  void set_price(double price);

 private:
  const MarketContext* market_;
  double price_;
  std::unordered_map<std::uint64_t, double> theta_cache_;
};

/// Runs the resource competition for `structure` at `price` and assembles
/// each miner's total utility. A coalition that cannot meet the block-time
/// budget (nonce cap 0) pays its members nothing.
StructureEvaluation evaluate_structure(const CoalitionStructure& structure, double price,
                                       const MarketContext& market);

enum class MoveKind { merge_a, merge_b, split_a, split_b, leave };

const char* to_string(MoveKind kind);

/// Atomic strategy of one miner. `source` is the coalition the actor leaves,
/// `target` the one it joins (indices into the structure the move was
/// enumerated against).
struct MoveProposal {
  int actor = 0;
  MoveKind kind = MoveKind::merge_a;
  std::optional<std::size_t> source;
  std::optional<std::size_t> target;

  friend bool operator==(const MoveProposal&, const MoveProposal&) = default;
};

std::string to_string(const MoveProposal& move);

/// Form-admissible moves of `actor` in kind order (merge_a, merge_b, split_a,
/// split_b, leave; then by target and source index).
///
/// With `coalition` set, moves are relative to that one coalition: joining it
/// when the actor is outside, or leaving it (to join another, to go solo or
/// to drop out) when the actor is inside. Without it, every coalition is
/// considered. Moves that would exceed `capacity` memberships are omitted.
std::vector<MoveProposal> enumerate_moves(int actor, const CoalitionStructure& structure,
                                          int capacity,
                                          std::optional<std::size_t> coalition = std::nullopt);

CoalitionStructure apply_move(const CoalitionStructure& structure, const MoveProposal& move);

/// Utility comparisons treat differences within this relative band as ties.
inline constexpr double kUtilityTolerance = 1e-9;

/// The actor must strictly gain; joining moves also need every incumbent of
/// the joined coalition to be no worse off.
bool admissible(const MoveProposal& move, const StructureEvaluation& before,
                const StructureEvaluation& after);

enum class Exploration {
  one_random,  // each miner tests moves against one random coalition per pass
  exhaustive,  // each miner tests moves against every coalition
};

struct OcfOptions {
  Exploration exploration = Exploration::one_random;
  int max_passes = 10000;
};

struct FormationRun {
  StructureEvaluation evaluation;  // last structure reached
  int passes = 0;
  bool stable = false;  // false: stopped at the pass cap
  std::vector<std::string> recent;  // last structures visited, oldest first
};

/// The move dynamics of converge_structure() without the throw: reports
/// whether an individually stable structure was reached within the cap.
FormationRun run_formation(const CoalitionStructure& initial, StructureEvaluator& evaluator,
                           std::uint64_t seed, const OcfOptions& options = {});

/// Individually stable structure reached from `initial` by atomic moves.
///
/// Each pass visits miners in a seed-determined order; a miner applies the
/// admissible move with the largest own gain (ties by kind order, then lowest
/// target index). Stops once an exhaustive scan finds no admissible move.
/// Throws ConvergenceError after `max_passes` passes.
StructureEvaluation converge_structure(const CoalitionStructure& initial, double price,
                                       const MarketContext& market, std::uint64_t seed,
                                       const OcfOptions& options = {});

/// Same, sharing a caller-owned evaluator (and its reward-factor cache).
StructureEvaluation converge_structure(const CoalitionStructure& initial,
                                       StructureEvaluator& evaluator, std::uint64_t seed,
                                       const OcfOptions& options = {});

/// First admissible move found by an exhaustive scan, if any.
std::optional<MoveProposal> find_admissible_move(const StructureEvaluation& current,
                                                 StructureEvaluator& evaluator);

bool is_stable(const CoalitionStructure& structure, double price, const MarketContext& market);

}  // namespace coalmine
