#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coalmine/harness.hpp"

using namespace coalmine;

namespace {

RunRecord record(Mode mode, double value, std::uint64_t seed, double sys, double ecp = 0.0) {
  RunRecord r;
  r.mode = mode;
  r.value = value;
  r.seed = seed;
  r.system_utility = sys;
  r.ecp_utility = ecp;
  return r;
}

SweepSpec tiny_sweep(SweepVariable variable, std::vector<double> grid) {
  SweepSpec spec;
  spec.variable = variable;
  spec.grid = std::move(grid);
  spec.modes = {Mode::non_cooperative, Mode::j1, Mode::j3};
  spec.seeds = 3;
  spec.base.params.n_mus = 6;
  return spec;
}

}  // namespace

TEST(Modes, Parse) {
  EXPECT_EQ(parse_mode("noncoop"), Mode::non_cooperative);
  EXPECT_EQ(parse_mode("non_cooperative"), Mode::non_cooperative);
  EXPECT_EQ(parse_mode("J=1"), Mode::j1);
  EXPECT_EQ(parse_mode("j2"), Mode::j2);
  EXPECT_EQ(parse_mode(" 3 "), Mode::j3);
  EXPECT_THROW(parse_mode("J=4"), std::invalid_argument);
  EXPECT_EQ(parse_modes("J=3,noncoop,J3"), (std::vector<Mode>{Mode::j3, Mode::non_cooperative}));
  EXPECT_THROW(parse_modes(","), std::invalid_argument);
  for (Mode m : {Mode::non_cooperative, Mode::j1, Mode::j2, Mode::j3}) EXPECT_EQ(parse_mode(to_string(m)), m);
  EXPECT_EQ(capacity(Mode::non_cooperative), 1);
  EXPECT_EQ(capacity(Mode::j3), 3);
}

TEST(Variables, ParseAndApply) {
  for (auto v : {SweepVariable::price, SweepVariable::n_mus, SweepVariable::tx_count, SweepVariable::block_reward}) {
    EXPECT_EQ(parse_variable(to_string(v)), v);
  }
  EXPECT_THROW(parse_variable("latency"), std::invalid_argument);
  const SystemParams base;
  EXPECT_EQ(with_value(base, SweepVariable::n_mus, 14).n_mus, 14);
  EXPECT_EQ(with_value(base, SweepVariable::tx_count, 4).block_tx_count, 4);
  EXPECT_EQ(with_value(base, SweepVariable::block_reward, 250).block_reward, 250.0);
  EXPECT_THROW(with_value(base, SweepVariable::n_mus, 2.5), std::invalid_argument);
  EXPECT_EQ(default_grid(SweepVariable::price).size(), 8u);
}

TEST(Stats, MeanCi) {
  const auto s = mean_ci95({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.ci95, 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-12);
  EXPECT_EQ(mean_ci95({7}).ci95, 0.0);
  EXPECT_EQ(mean_ci95({}).mean, 0.0);
}

TEST(Stats, PairedImprovement) {
  const std::vector<RunRecord> rs{record(Mode::j1, 10, 0, 110), record(Mode::non_cooperative, 10, 0, 100),
                                  record(Mode::j1, 10, 1, 300), record(Mode::non_cooperative, 10, 1, 200),
                                  record(Mode::j1, 10, 2, 999)};
  EXPECT_NEAR(paired_improvement(rs, Mode::j1, Mode::non_cooperative, 10), 0.3, 1e-12);
  EXPECT_THROW(paired_improvement(rs, Mode::j3, Mode::non_cooperative, 10), std::invalid_argument);
}

TEST(Stats, AggregateIgnoresRecordOrder) {
  std::vector<RunRecord> rs;
  for (std::uint64_t s = 0; s < 5; ++s) {
    rs.push_back(record(Mode::j1, 1, s, 10.0 + 0.1 * static_cast<double>(s), 1.0 / (1.0 + static_cast<double>(s))));
    rs.push_back(record(Mode::j3, 1, s, 20.0 + 0.3 * static_cast<double>(s), 3.0));
  }
  const auto forward = aggregate(rs, SweepVariable::price);
  std::vector<RunRecord> shuffled(rs.begin(), rs.end());
  std::swap(shuffled[0], shuffled[8]);
  std::swap(shuffled[2], shuffled[4]);
  const auto back = aggregate(shuffled, SweepVariable::price);
  ASSERT_EQ(forward.size(), 2u);
  for (std::size_t i = 0; i < forward.size(); ++i) {
    EXPECT_EQ(forward[i].u_ecp_mean, back[i].u_ecp_mean);
    EXPECT_EQ(forward[i].sys_utility_ci95, back[i].sys_utility_ci95);
  }
  EXPECT_EQ(forward[0].seeds, 5);
}

TEST(Csv, GoldenOutput) {
  SweepRow r;
  r.mode = Mode::j1;
  r.variable = SweepVariable::price;
  r.value = 10;
  r.seeds = 3;
  r.u_ecp_mean = 1234.5678;
  r.u_ecp_ci95 = 0.5;
  r.sys_utility_mean = 1234567.0;
  r.sys_utility_ci95 = 1e-7;
  r.total_nonce_mean = 0;
  r.n_avg_mean = 1.0 / 3.0;
  r.p_star_mean = 10;
  std::ostringstream out;
  emit_csv({r}, out);
  EXPECT_EQ(out.str(),
            "mode,variable,value,seeds,u_ecp_mean,u_ecp_ci95,sys_utility_mean,sys_utility_ci95,"
            "total_nonce_mean,n_avg_mean,p_star_mean\n"
            "J=1,price,10.0000,3,1234.57,0.500000,1.23457e+06,1.00000e-07,0.00000,0.333333,10.0000\n");
}

TEST(Csv, EmptyTableIsHeaderOnly) {
  std::ostringstream out;
  emit_csv({}, out);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
}

TEST(Trace, Format) {
  TrajectoryRecord t;
  t.iteration = 0;
  t.prices = {250, 500, 500};
  t.ecp_utility = {1, 2, 3};
  t.o_next = 1;
  std::ostringstream out;
  emit_trace({t}, out);
  EXPECT_EQ(out.str(),
            "tau,p_low,p_mid,p_high,u_ecp_low,u_ecp_mid,u_ecp_high,o_next\n"
            "0,250.000,500.000,500.000,1.00000,2.00000,3.00000,1.00000\n");
}

TEST(RunMode, DeterministicAndWithinCapacity) {
  SystemParams p;
  p.n_mus = 6;
  const auto market = MarketContext::generate(p, 5);
  const auto a = run_mode(Mode::j1, market, 120.0, 5);
  const auto b = run_mode(Mode::j1, market, 120.0, 5);
  EXPECT_EQ(a.system_utility, b.system_utility);
  EXPECT_EQ(a.total_nonce, b.total_nonce);
  EXPECT_EQ(a.p_star, 120.0);
  EXPECT_NEAR(a.ecp_utility, a.total_nonce * (120.0 - p.unit_cost), 1e-9);
}

TEST(RunMode, NonCooperativeMatchesSingletons) {
  SystemParams p;
  p.n_mus = 6;
  const auto market = MarketContext::generate(p, 6);
  const auto r = run_mode(Mode::non_cooperative, market, 80.0, 6);
  const auto e = evaluate_structure(CoalitionStructure::singletons(6), 80.0, market);
  EXPECT_EQ(r.system_utility, e.system_utility());
  EXPECT_EQ(r.n_avg, 1.0);
  EXPECT_TRUE(r.stable);
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  auto spec = tiny_sweep(SweepVariable::price, {50, 200});
  spec.threads = 1;
  const auto one = run_sweep(spec);
  spec.threads = 3;
  const auto three = run_sweep(spec);
  ASSERT_EQ(one.records.size(), 2u * 3u * 3u);
  ASSERT_EQ(one.records.size(), three.records.size());
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    EXPECT_EQ(one.records[i].mode, three.records[i].mode);
    EXPECT_EQ(one.records[i].seed, three.records[i].seed);
    EXPECT_EQ(one.records[i].system_utility, three.records[i].system_utility);
  }
  EXPECT_EQ(one.rows.size(), 6u);
}

TEST(Sweep, SearchedVariableReportsPrices) {
  auto spec = tiny_sweep(SweepVariable::block_reward, {500});
  spec.seeds = 1;
  spec.modes = {Mode::j1};
  const auto r = run_sweep(spec);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_GT(r.records[0].p_star, 0.0);
  EXPECT_LE(r.records[0].p_star, spec.base.params.price_cap);
}

TEST(Sweep, Validation) {
  auto spec = tiny_sweep(SweepVariable::price, {200, 50});
  EXPECT_THROW(run_sweep(spec), std::invalid_argument);
  spec.grid = {};
  EXPECT_THROW(run_sweep(spec), std::invalid_argument);
  spec.grid = {50};
  spec.modes = {};
  EXPECT_THROW(run_sweep(spec), std::invalid_argument);
}
