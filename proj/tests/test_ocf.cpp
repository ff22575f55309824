#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "coalmine/error.hpp"
#include "coalmine/model.hpp"
#include "coalmine/ocf.hpp"
#include "coalmine/oracle.hpp"
#include "coalmine/rng.hpp"

using namespace coalmine;

namespace {

// Every miner holds the same transactions, so every coalition has the same theta.
MarketContext identical_market(int n_mus, int capacity = 1, SystemParams p = {}) {
  p.n_mus = n_mus;
  p.collaboration_factor = capacity;
  TransactionPool pool;
  for (int i = 0; i < 20; ++i) pool.txs.push_back({i, static_cast<double>(5 * i)});
  std::vector<MinerProfile> profiles;
  for (int n = 0; n < n_mus; ++n) profiles.push_back({n, {0, 3, 7, 12, 19}});
  return {p, pool, profiles};
}

MarketContext random_market(int n_mus, int capacity, std::uint64_t seed) {
  SystemParams p;
  p.n_mus = n_mus;
  p.collaboration_factor = capacity;
  return MarketContext::generate(p, seed);
}

StructureEvaluation with_xi(const CoalitionStructure& s, std::vector<double> xi) {
  StructureEvaluation e;
  e.structure = s;
  e.xi = std::move(xi);
  return e;
}

std::size_t count_kind(const std::vector<MoveProposal>& moves, MoveKind kind) {
  return static_cast<std::size_t>(
      std::count_if(moves.begin(), moves.end(), [kind](const MoveProposal& m) { return m.kind == kind; }));
}

}  // namespace

TEST(Structure, CanonicalForm) {
  const CoalitionStructure a(4, {{3, 1}, {0}, {1, 3}, {2, 0}});
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a.members(0), (Members{0}));
  EXPECT_EQ(a.members(1), (Members{0, 2}));
  EXPECT_EQ(a.members(2), (Members{1, 3}));
  EXPECT_EQ(a.to_string(), "0: 0\n1: 0 2\n2: 1 3\n");
  EXPECT_EQ(CoalitionStructure::parse(4, a.to_string()), a);
  EXPECT_EQ(a.memberships(0), 2);
  EXPECT_TRUE(a.within_capacity(2));
  EXPECT_FALSE(a.within_capacity(1));
}

TEST(Structure, RejectsInvalid) {
  EXPECT_THROW(CoalitionStructure(3, {{}}), std::invalid_argument);
  EXPECT_THROW(CoalitionStructure(3, {{0, 3}}), std::invalid_argument);
  EXPECT_THROW(CoalitionStructure(3, {{-1}}), std::invalid_argument);
}

TEST(Structure, AverageMembers) {
  EXPECT_NEAR(avg_members(CoalitionStructure(5, {{1, 2}, {2, 3}, {4}})), 5.0 / 3.0, 1e-15);
  EXPECT_EQ(avg_members(CoalitionStructure::singletons(6)), 1.0);
  EXPECT_EQ(avg_members(CoalitionStructure::grand(6)), 6.0);
}

TEST(Evaluate, SymmetricSingletons) {
  const auto market = identical_market(2);
  const auto e = evaluate_structure(CoalitionStructure::singletons(2), 100.0, market);
  EXPECT_DOUBLE_EQ(e.xi[0], e.xi[1]);
  EXPECT_DOUBLE_EQ(e.theta[0], e.theta[1]);
}

TEST(Evaluate, ZeroCapPaysNothing) {
  SystemParams p;
  p.header_size = 1e12;
  const auto market = identical_market(3, 1, p);
  ASSERT_EQ(market.cap, 0);
  const auto e = evaluate_structure(CoalitionStructure(3, {{0, 1}, {2}}), 10.0, market);
  for (double x : e.xi) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(e.equilibrium.total_nonce, 0);
}

TEST(Evaluate, HandComposedThreeMiners) {
  SystemParams p;
  p.n_mus = 3;
  TransactionPool pool;
  for (int i = 0; i < 30; ++i) pool.txs.push_back({i, static_cast<double>(i)});
  // miners 0 and 1 share the top fees; miner 2 holds only small ones
  const std::vector<MinerProfile> profiles{
      {0, {20, 21, 22, 23, 24, 25, 26, 27, 28, 29}}, {1, {10, 11, 12, 13, 14, 25, 26, 27, 28, 29}}, {2, {0, 1, 2, 3, 4}}};
  const MarketContext market(p, pool, profiles);
  const double price = 100.0;
  const auto e = evaluate_structure(CoalitionStructure(3, {{0, 1}, {2}}), price, market);

  const double shrink = std::exp(-p.latency_factor * p.block_tx_count / p.avg_block_time) * std::pow(2.0, -p.difficulty);
  const double t0 = (1000.0 + (20 + 21 + 22 + 23 + 24 + 25 + 26 + 27 + 28 + 29)) * shrink;
  const double t1 = (1000.0 + (0 + 1 + 2 + 3 + 4)) * shrink;
  EXPECT_NEAR(e.theta[0], t0, 1e-9);
  EXPECT_NEAR(e.theta[1], t1, 1e-9);

  // two-player interior solution, then rounding in index order
  const double psi = 1.0 / (price * (1 / t0 + 1 / t1));
  const double l0 = psi - price * psi * psi / t0;
  const double l1 = psi - price * psi * psi / t1;
  auto u = [price](double own, double others, double theta) { return theta * own / (own + others) - price * own; };
  const double r0 = u(std::ceil(l0), l1, t0) > u(std::floor(l0), l1, t0) ? std::ceil(l0) : std::floor(l0);
  const double r1 = u(std::ceil(l1), r0, t1) > u(std::floor(l1), r0, t1) ? std::ceil(l1) : std::floor(l1);
  EXPECT_EQ(e.equilibrium.nonce[0], static_cast<long>(r0));
  EXPECT_EQ(e.equilibrium.nonce[1], static_cast<long>(r1));
  EXPECT_NEAR(e.xi[0], u(r0, r1, t0) / 2, 1e-9);
  EXPECT_NEAR(e.xi[1], u(r0, r1, t0) / 2, 1e-9);
  EXPECT_NEAR(e.xi[2], u(r1, r0, t1), 1e-9);
  EXPECT_NEAR(e.ecp_utility, (r0 + r1) * (price - p.unit_cost), 1e-9);
  EXPECT_NEAR(e.system_utility(), e.xi[0] + e.xi[1] + e.xi[2] + e.ecp_utility, 1e-9);
}

TEST(Evaluate, ScoreMatchesFullEvaluation) {
  const auto market = random_market(8, 3, 4);
  StructureEvaluator ev(market, 120.0);
  Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    std::vector<Members> cs(4);
    for (int n = 0; n < 8; ++n) cs[rng.below(4)].push_back(n);
    std::erase_if(cs, [](const Members& c) { return c.empty(); });
    const CoalitionStructure s(8, cs);
    const auto full = ev(s);
    const auto fast = ev.score(s);
    EXPECT_EQ(full.xi, fast.xi);
    EXPECT_EQ(full.equilibrium.nonce, fast.equilibrium.nonce);
    for (std::size_t m = 0; m < s.size(); ++m) {
      double sum = 0.0;
      for (const auto& share : full.equilibrium.allocations[m]) sum += share.utility;
      EXPECT_NEAR(sum, full.equilibrium.utility[m], 1e-9 * std::max(1.0, std::abs(sum)));
    }
  }
}

TEST(Moves, SingletonUnderJ1) {
  const auto s = CoalitionStructure::singletons(3);
  const auto moves = enumerate_moves(0, s, 1);
  EXPECT_EQ(count_kind(moves, MoveKind::merge_a), 0u);
  EXPECT_EQ(count_kind(moves, MoveKind::merge_b), 2u);
  EXPECT_EQ(count_kind(moves, MoveKind::split_a), 0u);
  EXPECT_EQ(count_kind(moves, MoveKind::split_b), 0u);
  EXPECT_EQ(count_kind(moves, MoveKind::leave), 1u);
}

TEST(Moves, AllKindsWithSpareCapacity) {
  const CoalitionStructure s(3, {{0, 1}, {2}});
  const auto moves = enumerate_moves(0, s, 2);
  for (auto kind : {MoveKind::merge_a, MoveKind::merge_b, MoveKind::split_a, MoveKind::split_b, MoveKind::leave}) {
    EXPECT_GE(count_kind(moves, kind), 1u) << to_string(kind);
  }
}

TEST(Moves, HandEnumeration) {
  const CoalitionStructure s(3, {{0, 1}, {2}});
  const std::vector<MoveProposal> expected{
      {1, MoveKind::merge_a, std::nullopt, 1}, {1, MoveKind::merge_b, 0, 1},
      {1, MoveKind::split_a, std::nullopt, std::nullopt}, {1, MoveKind::split_b, 0, std::nullopt},
      {1, MoveKind::leave, 0, std::nullopt}};
  EXPECT_EQ(enumerate_moves(1, s, 2), expected);
  // restricted to the coalition the actor is not in: joining it, or opening a solo one
  const std::vector<MoveProposal> toward{{1, MoveKind::merge_a, std::nullopt, 1}, {1, MoveKind::merge_b, 0, 1},
                                         {1, MoveKind::split_a, std::nullopt, std::nullopt}};
  EXPECT_EQ(enumerate_moves(1, s, 2, 1), toward);
  EXPECT_THROW(enumerate_moves(3, s, 2), std::invalid_argument);
  EXPECT_THROW(enumerate_moves(0, s, 2, 5), std::invalid_argument);
}

TEST(Moves, ApplyKeepsStructureValid) {
  const CoalitionStructure s(4, {{0, 1}, {2}, {3}});
  EXPECT_EQ(apply_move(s, {2, MoveKind::merge_b, 1, 0}), CoalitionStructure(4, {{0, 1, 2}, {3}}));
  EXPECT_EQ(apply_move(s, {1, MoveKind::split_b, 0, std::nullopt}), CoalitionStructure(4, {{0}, {1}, {2}, {3}}));
  EXPECT_EQ(apply_move(s, {3, MoveKind::leave, 2, std::nullopt}), CoalitionStructure(4, {{0, 1}, {2}}));
  EXPECT_EQ(apply_move(s, {2, MoveKind::merge_a, std::nullopt, 0}), CoalitionStructure(4, {{0, 1, 2}, {2}, {3}}));
  // joining a coalition whose member set then equals another's merges the two
  const CoalitionStructure t(3, {{0, 1}, {1}});
  EXPECT_EQ(apply_move(t, {0, MoveKind::leave, 0, std::nullopt}).size(), 1u);
}

TEST(Admissible, NeedsStrictGain) {
  const CoalitionStructure s(2, {{0}, {1}});
  const MoveProposal m{0, MoveKind::leave, 0, std::nullopt};
  EXPECT_FALSE(admissible(m, with_xi(s, {5, 5}), with_xi(s, {5, 5})));
  EXPECT_FALSE(admissible(m, with_xi(s, {5, 5}), with_xi(s, {5 + 1e-12, 5})));
  EXPECT_TRUE(admissible(m, with_xi(s, {5, 5}), with_xi(s, {6, 5})));
}

TEST(Admissible, MergeNeedsConsent) {
  const CoalitionStructure s(3, {{0}, {1, 2}});
  const MoveProposal join{0, MoveKind::merge_b, 0, 1};
  EXPECT_FALSE(admissible(join, with_xi(s, {1, 5, 5}), with_xi(s, {3, 5, 4})));
  EXPECT_TRUE(admissible(join, with_xi(s, {1, 5, 5}), with_xi(s, {3, 5, 5})));
  const MoveProposal split{1, MoveKind::split_b, 1, std::nullopt};
  EXPECT_TRUE(admissible(split, with_xi(s, {1, 5, 5}), with_xi(s, {1, 6, 0})));
}

TEST(Converge, SingleMinerIsStable) {
  const auto market = identical_market(1);
  const auto e = converge_structure(CoalitionStructure::singletons(1), 100.0, market, 1);
  EXPECT_EQ(e.structure, CoalitionStructure::singletons(1));
}

TEST(Converge, ProfitableMergeHappens) {
  const auto market = identical_market(2);
  const double price = 400.0;
  const auto apart = evaluate_structure(CoalitionStructure::singletons(2), price, market);
  const auto together = evaluate_structure(CoalitionStructure::grand(2), price, market);
  ASSERT_GT(together.xi[0], apart.xi[0]);
  ASSERT_GT(together.xi[1], apart.xi[1]);
  EXPECT_FALSE(is_stable(CoalitionStructure::singletons(2), price, market));
  EXPECT_TRUE(is_stable(CoalitionStructure::grand(2), price, market));
  const auto e = converge_structure(CoalitionStructure::singletons(2), price, market, 9);
  EXPECT_EQ(e.structure, CoalitionStructure::grand(2));
}

TEST(Converge, OutputPassesOracleAndIsDeterministic) {
  int converged = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const int capacity = 1 + static_cast<int>(seed % 3);
    const auto market = random_market(5, capacity, seed);
    const double price = 20.0 + 40.0 * static_cast<double>(seed);
    StructureEvaluator ev(market, price);
    const auto run = run_formation(CoalitionStructure::singletons(5), ev, seed, {Exploration::one_random, 2000});
    const auto again = run_formation(CoalitionStructure::singletons(5), ev, seed, {Exploration::one_random, 2000});
    EXPECT_EQ(run.evaluation.structure, again.evaluation.structure);
    EXPECT_EQ(run.passes, again.passes);
    EXPECT_TRUE(run.evaluation.structure.within_capacity(capacity));
    for (const auto& c : run.evaluation.structure.coalitions()) EXPECT_FALSE(c.empty());
    if (!run.stable) continue;
    ++converged;
    EXPECT_TRUE(is_stable(run.evaluation.structure, price, market));
    EXPECT_TRUE(oracle::brute_force_stability(run.evaluation.structure, price, market).pass);
  }
  EXPECT_GT(converged, 0);
}

TEST(Converge, CapOverflowCarriesRecentStates) {
  bool thrown = false;
  for (std::uint64_t seed = 0; seed < 20 && !thrown; ++seed) {
    const auto market = random_market(8, 2, seed);
    try {
      converge_structure(CoalitionStructure::singletons(8), 150.0, market, seed, {Exploration::one_random, 1});
    } catch (const ConvergenceError& e) {
      thrown = true;
      EXPECT_FALSE(e.recent_states().empty());
    }
  }
  EXPECT_TRUE(thrown);
}

TEST(Converge, RejectsOverCapacityStart) {
  const auto market = identical_market(3, 1);
  EXPECT_THROW(converge_structure(CoalitionStructure(3, {{0, 1}, {0, 2}}), 50.0, market, 0), std::invalid_argument);
}

TEST(Stability, AgreesWithOracleOnRandomStructures) {
  Rng rng(77);
  for (int t = 0; t < 60; ++t) {
    const int n = 3 + static_cast<int>(rng.below(3));
    const int capacity = 1 + static_cast<int>(rng.below(3));
    const auto market = random_market(n, capacity, static_cast<std::uint64_t>(t));
    std::vector<Members> cs(static_cast<std::size_t>(n));
    for (int mu = 0; mu < n; ++mu) {
      const auto k = 1 + rng.below(static_cast<std::uint64_t>(capacity));
      for (std::uint64_t i = 0; i < k; ++i) cs[rng.below(cs.size())].push_back(mu);
    }
    std::erase_if(cs, [](const Members& c) { return c.empty(); });
    const CoalitionStructure s(n, cs);
    if (!s.within_capacity(capacity)) continue;
    const double price = rng.uniform(1, 500);
    EXPECT_EQ(is_stable(s, price, market), oracle::brute_force_stability(s, price, market).pass) << s.to_string();
  }
}
