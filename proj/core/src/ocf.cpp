#include "coalmine/ocf.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "coalmine/error.hpp"
#include "coalmine/rng.hpp"

namespace coalmine {

MarketContext::MarketContext(SystemParams p, TransactionPool tx_pool,
                             std::vector<MinerProfile> miner_profiles)
    : params(std::move(p)), pool(std::move(tx_pool)), profiles(std::move(miner_profiles)) {
  if (profiles.size() != static_cast<std::size_t>(params.n_mus)) {
    throw std::invalid_argument("market: one profile per miner required");
  }
  fees = FeeIndex(profiles, pool, params.block_tx_count);
  cap = nonce_cap(params);
}

MarketContext MarketContext::generate(const SystemParams& params, std::uint64_t seed) {
  params.validate();
  auto pool = generate_pool(seed, params);
  auto profiles = assign_transactions(seed, pool, params);
  return {params, std::move(pool), std::move(profiles)};
}

MarketContext MarketContext::with_capacity(int collaboration_factor) const {
  MarketContext copy = *this;
  copy.params.collaboration_factor = collaboration_factor;
  return copy;
}

double StructureEvaluation::mu_utility_total() const {
  return std::accumulate(xi.begin(), xi.end(), 0.0);
}

StructureEvaluator::StructureEvaluator(const MarketContext& market, double price)
    : market_(&market), price_(0.0) {
  set_price(price);
}

void StructureEvaluator::set_price(double price) {
  if (!(price > 0.0)) throw std::invalid_argument("evaluate_structure: price must be > 0");
  price_ = price;
}

double StructureEvaluator::theta(const Members& members) {
  const bool cacheable = market_->params.n_mus <= 64;
  std::uint64_t key = 0;
  if (cacheable) {
    for (int n : members) key |= std::uint64_t{1} << n;
    if (auto it = theta_cache_.find(key); it != theta_cache_.end()) return it->second;
  }
  const double value = reward_factor(market_->fees.coalition_fee(members), market_->params);
  if (cacheable) theta_cache_.emplace(key, value);
  return value;
}

StructureEvaluation StructureEvaluator::operator()(const CoalitionStructure& structure) {
  StructureEvaluation ev = score(structure);
  allocate_uniform(ev.equilibrium, ev.structure);
  return ev;
}

StructureEvaluation StructureEvaluator::score(const CoalitionStructure& structure) {
  if (structure.n_mus() != market_->params.n_mus) {
    throw std::invalid_argument("evaluate_structure: structure size does not match the market");
  }
  StructureEvaluation ev;
  ev.structure = structure;
  ev.price = price_;
  ev.avg_members = avg_members(structure);
  ev.xi.assign(static_cast<std::size_t>(structure.n_mus()), 0.0);

  ErcInput input;
  input.price = price_;
  input.theta.reserve(structure.size());
  for (const auto& members : structure.coalitions()) input.theta.push_back(theta(members));
  input.caps.assign(structure.size(), market_->cap);
  ev.theta = input.theta;

  ev.equilibrium = solve_erc(input);
  for (std::size_t m = 0; m < structure.size(); ++m) {
    // a coalition that cannot finish within the block time earns nothing
    if (input.caps[m] == 0) continue;
    // same arithmetic as allocate_uniform(): even shares, residue to the last
    const auto& members = structure.members(m);
    const double total = ev.equilibrium.utility[m];
    const double share = total / static_cast<double>(members.size());
    double left = total;
    for (std::size_t i = 0; i + 1 < members.size(); ++i) {
      ev.xi[static_cast<std::size_t>(members[i])] += share;
      left -= share;
    }
    ev.xi[static_cast<std::size_t>(members.back())] += left;
  }
  ev.ecp_utility = ecp_utility(static_cast<double>(ev.equilibrium.total_nonce), price_,
                               market_->params.unit_cost);
  return ev;
}

StructureEvaluation evaluate_structure(const CoalitionStructure& structure, double price,
                                       const MarketContext& market) {
  StructureEvaluator evaluator(market, price);
  return evaluator(structure);
}

const char* to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::merge_a: return "merge_a";
    case MoveKind::merge_b: return "merge_b";
    case MoveKind::split_a: return "split_a";
    case MoveKind::split_b: return "split_b";
    case MoveKind::leave: return "leave";
  }
  return "?";
}

std::string to_string(const MoveProposal& move) {
  std::ostringstream out;
  out << "mu " << move.actor << ' ' << to_string(move.kind);
  if (move.source) out << " from " << *move.source;
  if (move.target) out << " into " << *move.target;
  return out.str();
}

std::vector<MoveProposal> enumerate_moves(int actor, const CoalitionStructure& structure,
                                          int capacity, std::optional<std::size_t> coalition) {
  if (actor < 0 || actor >= structure.n_mus()) {
    throw std::invalid_argument("enumerate_moves: actor out of range");
  }
  if (coalition && *coalition >= structure.size()) {
    throw std::invalid_argument("enumerate_moves: coalition out of range");
  }
  const std::vector<std::size_t> mine = structure.coalitions_of(actor);
  const bool spare = static_cast<int>(mine.size()) < capacity;
  const bool has_solo = structure.find(Members{actor}) != structure.size();
  auto in = [&](std::size_t m) { return std::binary_search(mine.begin(), mine.end(), m); };

  std::vector<MoveProposal> merge_a, merge_b, split_b, leave;
  auto consider = [&](std::size_t m) {
    if (!in(m)) {
      if (spare) merge_a.push_back({actor, MoveKind::merge_a, std::nullopt, m});
      for (std::size_t s : mine) merge_b.push_back({actor, MoveKind::merge_b, s, m});
    } else {
      for (std::size_t t = 0; t < structure.size(); ++t) {
        if (!in(t)) merge_b.push_back({actor, MoveKind::merge_b, m, t});
      }
      if (structure.members(m).size() > 1) split_b.push_back({actor, MoveKind::split_b, m, std::nullopt});
      leave.push_back({actor, MoveKind::leave, m, std::nullopt});
    }
  };
  if (coalition) {
    consider(*coalition);
  } else {
    for (std::size_t m = 0; m < structure.size(); ++m) consider(m);
  }

  auto by_target = [](const MoveProposal& a, const MoveProposal& b) {
    return std::tie(a.target, a.source) < std::tie(b.target, b.source);
  };
  std::sort(merge_b.begin(), merge_b.end(), by_target);
  merge_b.erase(std::unique(merge_b.begin(), merge_b.end()), merge_b.end());
  std::sort(merge_a.begin(), merge_a.end(), by_target);

  std::vector<MoveProposal> out;
  out.reserve(merge_a.size() + merge_b.size() + split_b.size() + leave.size() + 1);
  out.insert(out.end(), merge_a.begin(), merge_a.end());
  out.insert(out.end(), merge_b.begin(), merge_b.end());
  if (spare && !has_solo) out.push_back({actor, MoveKind::split_a, std::nullopt, std::nullopt});
  out.insert(out.end(), split_b.begin(), split_b.end());
  out.insert(out.end(), leave.begin(), leave.end());
  return out;
}

CoalitionStructure apply_move(const CoalitionStructure& structure, const MoveProposal& move) {
  std::vector<Members> cs = structure.coalitions();
  const int a = move.actor;
  auto remove_from = [&](std::size_t m) {
    auto& c = cs.at(m);
    c.erase(std::remove(c.begin(), c.end(), a), c.end());
  };
  switch (move.kind) {
    case MoveKind::merge_a:
      cs.at(move.target.value()).push_back(a);
      break;
    case MoveKind::merge_b:
      cs.at(move.target.value()).push_back(a);
      remove_from(move.source.value());
      break;
    case MoveKind::split_a:
      cs.push_back({a});
      break;
    case MoveKind::split_b:
      remove_from(move.source.value());
      cs.push_back({a});
      break;
    case MoveKind::leave:
      remove_from(move.source.value());
      break;
  }
  std::erase_if(cs, [](const Members& c) { return c.empty(); });
  return {structure.n_mus(), std::move(cs)};
}

namespace {

bool improves(double after, double before) {
  return after - before > kUtilityTolerance * std::max(1.0, std::abs(before));
}

bool no_worse(double after, double before) {
  return before - after <= kUtilityTolerance * std::max(1.0, std::abs(before));
}

struct Candidate {
  MoveProposal move;
  StructureEvaluation after;
  double gain;
};

std::optional<Candidate> best_move(int actor, const StructureEvaluation& current,
                                   StructureEvaluator& evaluator, int capacity,
                                   std::optional<std::size_t> coalition) {
  std::optional<Candidate> best;
  const double before = current.xi[static_cast<std::size_t>(actor)];
  for (const auto& move : enumerate_moves(actor, current.structure, capacity, coalition)) {
    auto after = evaluator.score(apply_move(current.structure, move));
    if (!admissible(move, current, after)) continue;
    const double gain = after.xi[static_cast<std::size_t>(actor)] - before;
    if (!best || gain > best->gain) best = Candidate{move, std::move(after), gain};
  }
  return best;
}

}  // namespace

bool admissible(const MoveProposal& move, const StructureEvaluation& before,
                const StructureEvaluation& after) {
  const auto a = static_cast<std::size_t>(move.actor);
  if (!improves(after.xi[a], before.xi[a])) return false;
  if (move.kind == MoveKind::merge_a || move.kind == MoveKind::merge_b) {
    for (int incumbent : before.structure.members(move.target.value())) {
      const auto n = static_cast<std::size_t>(incumbent);
      if (!no_worse(after.xi[n], before.xi[n])) return false;
    }
  }
  return true;
}

std::optional<MoveProposal> find_admissible_move(const StructureEvaluation& current,
                                                 StructureEvaluator& evaluator) {
  const int capacity = evaluator.market().params.collaboration_factor;
  for (int actor = 0; actor < current.structure.n_mus(); ++actor) {
    for (const auto& move : enumerate_moves(actor, current.structure, capacity)) {
      if (admissible(move, current, evaluator.score(apply_move(current.structure, move)))) return move;
    }
  }
  return std::nullopt;
}

FormationRun run_formation(const CoalitionStructure& initial, StructureEvaluator& evaluator,
                           std::uint64_t seed, const OcfOptions& options) {
  const MarketContext& market = evaluator.market();
  const int capacity = market.params.collaboration_factor;
  if (!initial.within_capacity(capacity)) {
    throw std::invalid_argument("converge_structure: initial structure exceeds the collaboration factor");
  }
  Rng rng(seed);
  FormationRun run;
  run.evaluation = evaluator.score(initial);
  StructureEvaluation& current = run.evaluation;
  std::vector<int> order(static_cast<std::size_t>(market.params.n_mus));
  std::iota(order.begin(), order.end(), 0);
  std::deque<std::string> recent;

  for (; run.passes < options.max_passes; ++run.passes) {
    rng.shuffle(order.begin(), order.end());
    bool moved = false;
    for (int actor : order) {
      std::optional<std::size_t> coalition;
      if (options.exploration == Exploration::one_random && !current.structure.empty()) {
        coalition = static_cast<std::size_t>(rng.below(current.structure.size()));
      }
      if (auto best = best_move(actor, current, evaluator, capacity, coalition)) {
        current = std::move(best->after);
        moved = true;
      }
    }
    if (!moved && (options.exploration == Exploration::exhaustive ||
                   !find_admissible_move(current, evaluator))) {
      run.stable = true;
      break;
    }
    recent.push_back(current.structure.to_string());
    if (recent.size() > 8) recent.pop_front();
  }
  run.recent.assign(recent.begin(), recent.end());
  allocate_uniform(current.equilibrium, current.structure);
  return run;
}

StructureEvaluation converge_structure(const CoalitionStructure& initial,
                                       StructureEvaluator& evaluator, std::uint64_t seed,
                                       const OcfOptions& options) {
  FormationRun run = run_formation(initial, evaluator, seed, options);
  if (!run.stable) {
    throw ConvergenceError("coalition formation did not stabilize within " +
                               std::to_string(options.max_passes) + " passes",
                           std::move(run.recent));
  }
  return std::move(run.evaluation);
}

StructureEvaluation converge_structure(const CoalitionStructure& initial, double price,
                                       const MarketContext& market, std::uint64_t seed,
                                       const OcfOptions& options) {
  StructureEvaluator evaluator(market, price);
  return converge_structure(initial, evaluator, seed, options);
}

bool is_stable(const CoalitionStructure& structure, double price, const MarketContext& market) {
  StructureEvaluator evaluator(market, price);
  return !find_admissible_move(evaluator.score(structure), evaluator).has_value();
}

}  // namespace coalmine
