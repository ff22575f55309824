#include "coalmine/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "coalmine/erc.hpp"
#include "coalmine/harness.hpp"
#include "coalmine/model.hpp"
#include "coalmine/ocf.hpp"
#include "coalmine/oracle.hpp"
#include "coalmine/rng.hpp"
#include "coalmine/stackelberg.hpp"

namespace coalmine::verification {
namespace {

bool near(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

void note(const SuiteOptions& options, const std::string& text) {
  if (options.log) options.log(text);
}

// Random instance drawn from the ranges of the oracle comparison.
ErcInput random_instance(Rng& rng) {
  ErcInput input;
  const auto count = 1 + rng.below(6);
  for (std::uint64_t m = 0; m < count; ++m) {
    input.theta.push_back(rng.uniform(10.0, 2000.0));
    input.caps.push_back(5 + static_cast<long>(rng.below(46)));
  }
  input.price = rng.uniform(1.0, 500.0);
  return input;
}

bool has_monopoly(const RealSolution& real) {
  return std::find(real.regime.begin(), real.regime.end(), Regime::monopoly) != real.regime.end();
}

// Reference-scale market: every parameter at its default.
SystemParams reference_params() { return SystemParams{}; }

SweepSpec sweep(SweepVariable variable, std::vector<double> grid, std::vector<Mode> modes, int seeds,
                const SuiteOptions& options) {
  SweepSpec spec;
  spec.variable = variable;
  spec.grid = std::move(grid);
  spec.modes = std::move(modes);
  spec.seeds = seeds;
  spec.first_seed = options.seed;
  spec.base.params = reference_params();
  spec.threads = options.threads;
  return spec;
}

Progress progress_for(const SuiteOptions& options, const std::string& label) {
  if (!options.log) return {};
  return [&options, label, last = std::size_t{0}](std::size_t done, std::size_t total) mutable {
    const std::size_t decile = done * 10 / std::max<std::size_t>(total, 1);
    if (decile != last) {
      last = decile;
      options.log(label + ": " + std::to_string(done) + "/" + std::to_string(total));
    }
  };
}

// Rows of one mode in grid order.
std::vector<SweepRow> rows_of(const SweepResult& result, Mode mode) {
  std::vector<SweepRow> out;
  for (const auto& row : result.rows) {
    if (row.mode == mode) out.push_back(row);
  }
  std::sort(out.begin(), out.end(), [](const SweepRow& a, const SweepRow& b) { return a.value < b.value; });
  return out;
}

int unstable_runs(const SweepResult& result) {
  return static_cast<int>(std::count_if(result.records.begin(), result.records.end(),
                                        [](const RunRecord& r) { return !r.stable; }));
}

std::string value_label(double v) { return fmt("%g", v); }

// Non-decreasing (sign +1) or non-increasing (sign -1) along the rows;
// returns the first violation or an empty string.
template <typename Field>
std::string monotone(const std::vector<SweepRow>& rows, Field field, int sign, const std::string& what) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double prev = field(rows[i - 1]);
    const double cur = field(rows[i]);
    if (sign * (cur - prev) < -1e-9 * std::max(1.0, std::abs(prev))) {
      return what + " " + fmt("%.6g", prev) + " at " + value_label(rows[i - 1].value) + " -> " +
             fmt("%.6g", cur) + " at " + value_label(rows[i].value);
    }
  }
  return {};
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

// Random structure: every miner joins between 1 and `capacity` coalitions
// picked among `n_mus` slots.
CoalitionStructure random_structure(int n_mus, int capacity, Rng& rng) {
  std::vector<Members> slots(static_cast<std::size_t>(n_mus));
  std::vector<std::size_t> index(slots.size());
  std::iota(index.begin(), index.end(), std::size_t{0});
  for (int n = 0; n < n_mus; ++n) {
    const auto k = 1 + rng.below(static_cast<std::uint64_t>(capacity));
    rng.shuffle(index.begin(), index.end());
    for (std::uint64_t i = 0; i < k; ++i) slots[index[i]].push_back(n);
  }
  std::erase_if(slots, [](const Members& c) { return c.empty(); });
  return {n_mus, std::move(slots)};
}

}  // namespace

CriterionResult erc_oracle_equivalence(const SuiteOptions& options) {
  CriterionResult r{1, "ERC oracle equivalence", true, {}, 0.0};
  Rng rng(derive_seed(options.seed, {1}));
  int compared = 0;
  int excess = 0;
  int mismatched = 0;
  double worst_ratio = 0.0;
  std::string first;
  for (int i = 0; i < options.erc_instances; ++i) {
    const ErcInput input = random_instance(rng);
    const RealSolution real = closed_form_ne(input);
    const ErcEquilibrium eq = integer_ne(real, input);
    const auto gains = oracle::deviation_gains(input, eq.nonce);
    for (std::size_t m = 0; m < gains.size(); ++m) {
      const double others = static_cast<double>(eq.total_nonce - eq.nonce[m]);
      const double bound = gap_bound(input.theta[m], others, input.price, input.caps[m]);
      if (std::isfinite(bound) && bound > 0.0) worst_ratio = std::max(worst_ratio, gains[m] / bound);
      if (gains[m] > bound * (1.0 + 1e-9) + 1e-12) {
        ++excess;
        if (first.empty()) {
          first = "instance " + std::to_string(i) + " coalition " + std::to_string(m) + " gains " +
                  fmt("%.6g", gains[m]) + " > G " + fmt("%.6g", bound);
        }
      }
    }
    if (has_monopoly(real)) continue;
    const auto br = oracle::best_response_iteration(input, 100'000, 0.3);
    if (br.outcome != oracle::IterationReport::Outcome::fixed_point) continue;
    ++compared;
    for (std::size_t m = 0; m < real.nonce.size(); ++m) {
      if (!near(real.nonce[m], br.nonce[m], 1e-6)) {
        ++mismatched;
        if (first.empty()) {
          first = "instance " + std::to_string(i) + " coalition " + std::to_string(m) + " closed form " +
                  fmt("%.10g", real.nonce[m]) + " vs iteration " + fmt("%.10g", br.nonce[m]);
        }
        break;
      }
    }
  }
  r.pass = excess == 0 && mismatched == 0 && compared > 0;
  r.detail = std::to_string(options.erc_instances) + " instances, " + std::to_string(excess) +
             " gap violations (worst gain/G " + fmt("%.3g", worst_ratio) + "), " + std::to_string(compared) +
             " fixed points compared, " + std::to_string(mismatched) + " mismatched";
  if (!first.empty()) r.detail += "; first: " + first;
  return r;
}

CriterionResult closed_form_identity(const SuiteOptions& options) {
  CriterionResult r{2, "closed-form identity", true, {}, 0.0};
  Rng rng(derive_seed(options.seed, {2}));
  int interior = 0;
  int failures = 0;
  double worst_sum = 0.0;
  double worst_fixed = 0.0;
  std::string first;
  for (int i = 0; i < options.erc_instances; ++i) {
    const ErcInput input = random_instance(rng);
    if (input.theta.size() < 2) continue;
    const RealSolution real = closed_form_ne(input);
    if (!std::all_of(real.regime.begin(), real.regime.end(), [](Regime g) { return g == Regime::interior; })) {
      continue;
    }
    ++interior;
    const double m = static_cast<double>(input.theta.size());
    double inverse = 0.0;
    for (double t : input.theta) inverse += 1.0 / t;
    const double expected = (m - 1.0) / (input.price * inverse);
    const double sum = std::accumulate(real.nonce.begin(), real.nonce.end(), 0.0);
    const double sum_err = std::abs(sum - expected) / std::abs(expected);
    worst_sum = std::max(worst_sum, sum_err);
    bool ok = sum_err <= 1e-9;
    for (std::size_t j = 0; j < real.nonce.size(); ++j) {
      const double others = sum - real.nonce[j];
      const double mapped = std::sqrt(input.theta[j] * others / input.price) - others;
      const double err = std::abs(mapped - real.nonce[j]) / std::max(1.0, std::abs(real.nonce[j]));
      worst_fixed = std::max(worst_fixed, err);
      const double slope = oracle::finite_difference_gradient(input.theta[j], others, input.price, real.nonce[j]);
      if (err > 1e-9 || std::abs(slope) > 1e-5 * std::max(1.0, input.price)) ok = false;
    }
    if (!ok) {
      ++failures;
      if (first.empty()) first = "instance " + std::to_string(i);
    }
  }
  r.pass = failures == 0 && interior > 0;
  r.detail = std::to_string(interior) + " interior instances, worst sum error " + fmt("%.2e", worst_sum) +
             ", worst fixed-point error " + fmt("%.2e", worst_fixed) + ", " + std::to_string(failures) + " failed";
  if (!first.empty()) r.detail += "; first: " + first;
  return r;
}

CriterionResult formation_stability(const SuiteOptions& options) {
  CriterionResult r{3, "OCF convergence and stability", true, {}, 0.0};
  constexpr int kSizes[] = {4, 8, 12};
  const OcfOptions ocf{};
  int capped = 0;
  int rejected = 0;
  long passes = 0;
  std::map<std::pair<int, int>, int> failed_by_cell;
  std::string first;
  for (int i = 0; i < options.formation_instances; ++i) {
    const int n_mus = kSizes[i % 3];
    const int capacity = 1 + (i / 3) % 3;
    const std::uint64_t seed = derive_seed(options.seed, {3, static_cast<std::uint64_t>(i)});
    SystemParams params = reference_params();
    params.n_mus = n_mus;
    params.collaboration_factor = capacity;
    const MarketContext market = MarketContext::generate(params, seed);
    Rng rng(derive_seed(seed, {1}));
    const double price = rng.uniform(params.unit_cost, params.price_cap);
    const CoalitionStructure start = random_structure(n_mus, capacity, rng);

    StructureEvaluator evaluator(market, price);
    const FormationRun run = run_formation(start, evaluator, derive_seed(seed, {2}), ocf);
    passes += run.passes;
    std::string why;
    if (!run.stable) {
      ++capped;
      why = "hit the " + std::to_string(ocf.max_passes) + "-pass cap";
    } else {
      const auto report = oracle::brute_force_stability(run.evaluation.structure, price, market);
      if (!report.pass) {
        ++rejected;
        why = "oracle " + report.to_string();
      }
    }
    if (!why.empty()) {
      ++failed_by_cell[{n_mus, capacity}];
      if (first.empty()) {
        first = "instance " + std::to_string(i) + " (N=" + std::to_string(n_mus) + " J=" +
                std::to_string(capacity) + " p=" + fmt("%.4g", price) + ") " + why;
      }
    }
    if ((i + 1) % 20 == 0) note(options, "criterion 3: " + std::to_string(i + 1) + " structures");
  }
  r.pass = capped == 0 && rejected == 0;
  r.detail = std::to_string(options.formation_instances - capped - rejected) + "/" +
             std::to_string(options.formation_instances) + " stable, " + std::to_string(capped) +
             " hit the pass cap, " + std::to_string(rejected) + " rejected by the oracle, " +
             std::to_string(passes) + " passes in total";
  if (!failed_by_cell.empty()) {
    std::vector<std::string> cells;
    for (const auto& [cell, count] : failed_by_cell) {
      cells.push_back("N" + std::to_string(cell.first) + "J" + std::to_string(cell.second) + ":" +
                      std::to_string(count));
    }
    r.detail += "; failures by cell " + join(cells, " ") + "; first: " + first;
  }
  return r;
}

CriterionResult price_trends(const SuiteOptions& options) {
  CriterionResult r{4, "price trends at reference scale", true, {}, 0.0};
  const std::vector<Mode> modes{Mode::non_cooperative, Mode::j1, Mode::j3};
  const auto result = run_sweep(sweep(SweepVariable::price, {10, 25, 50, 100, 200, 300, 400, 500}, modes,
                                      options.trend_seeds, options),
                                progress_for(options, "criterion 4"));
  std::vector<std::string> problems;
  std::vector<std::string> peaks;
  for (Mode mode : modes) {
    const auto rows = rows_of(result, mode);
    const std::string tag = to_string(mode) + ":";
    problems.push_back(monotone(rows, [](const SweepRow& s) { return s.u_ecp_mean; }, +1, tag + " u_ECP"));
    problems.push_back(monotone(rows, [](const SweepRow& s) { return s.total_nonce_mean; }, -1, tag + " total nonce"));
    const auto peak = std::max_element(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
      return a.sys_utility_mean < b.sys_utility_mean;
    });
    peaks.push_back(to_string(mode) + " peak " + value_label(peak->value));
    if (peak == rows.begin() || peak + 1 == rows.end()) {
      problems.push_back(tag + " system utility peaks at the grid edge p=" + value_label(peak->value));
    }
    std::vector<SweepRow> tail;
    for (const auto& row : rows) {
      if (row.value >= 300) tail.push_back(row);
    }
    for (std::size_t i = 1; i < tail.size(); ++i) {
      if (!(tail[i].sys_utility_mean < tail[i - 1].sys_utility_mean)) {
        problems.push_back(tag + " system utility " + fmt("%.6g", tail[i - 1].sys_utility_mean) + " at " +
                           value_label(tail[i - 1].value) + " -> " + fmt("%.6g", tail[i].sys_utility_mean) +
                           " at " + value_label(tail[i].value));
      }
    }
  }
  const std::string failed = join(problems, "; ");
  r.pass = failed.empty();
  r.detail = join(peaks, ", ") + ", " + std::to_string(unstable_runs(result)) + " runs at the pass cap";
  if (!failed.empty()) r.detail += "; violations: " + failed;
  return r;
}

CriterionResult mode_ordering(const SuiteOptions& options) {
  CriterionResult r{5, "mode ordering with searched prices", true, {}, 0.0};
  const std::vector<double> grid{12, 14, 16, 18, 20, 22, 24};
  const auto result = run_sweep(
      sweep(SweepVariable::n_mus, grid, {Mode::non_cooperative, Mode::j1, Mode::j3}, options.ordering_seeds, options),
      progress_for(options, "criterion 5"));
  const auto nc = rows_of(result, Mode::non_cooperative);
  const auto j1 = rows_of(result, Mode::j1);
  const auto j3 = rows_of(result, Mode::j3);
  std::vector<std::string> problems;
  double lo1 = std::numeric_limits<double>::infinity(), hi1 = -lo1, lo3 = lo1, hi3 = -lo1;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(nc[i].sys_utility_mean <= j1[i].sys_utility_mean && j1[i].sys_utility_mean <= j3[i].sys_utility_mean)) {
      problems.push_back("N=" + value_label(grid[i]) + ": " + fmt("%.6g", nc[i].sys_utility_mean) + " / " +
                         fmt("%.6g", j1[i].sys_utility_mean) + " / " + fmt("%.6g", j3[i].sys_utility_mean));
    }
    const double g1 = 100.0 * paired_improvement(result.records, Mode::j1, Mode::non_cooperative, grid[i]);
    const double g3 = 100.0 * paired_improvement(result.records, Mode::j3, Mode::j1, grid[i]);
    lo1 = std::min(lo1, g1), hi1 = std::max(hi1, g1);
    lo3 = std::min(lo3, g3), hi3 = std::max(hi3, g3);
  }
  // reported against the published ranges widened by 5 points, never asserted
  const bool band1 = lo1 >= 10.42 - 5 && hi1 <= 12.48 + 5;
  const bool band3 = lo3 >= 12.64 - 5 && hi3 <= 17.63 + 5;
  r.pass = problems.empty();
  r.detail = "J=1 over non-coop " + fmt("%.2f", lo1) + "%.." + fmt("%.2f", hi1) + "% (" +
             (band1 ? "inside" : "outside") + " band), J=3 over J=1 " + fmt("%.2f", lo3) + "%.." +
             fmt("%.2f", hi3) + "% (" + (band3 ? "inside" : "outside") + " band), " +
             std::to_string(unstable_runs(result)) + " solves with capped probes";
  if (!problems.empty()) r.detail += "; order violated (non-coop / J=1 / J=3) at " + join(problems, ", ");
  return r;
}

CriterionResult price_search(const SuiteOptions& options) {
  CriterionResult r{6, "price search convergence", true, {}, 0.0};
  const SystemParams params = reference_params();
  const SearchSettings search{};
  constexpr int kGridPoints = 50;
  int solves = 0;
  std::vector<std::string> problems;
  double worst_share = std::numeric_limits<double>::infinity();
  for (Mode mode : {Mode::non_cooperative, Mode::j1, Mode::j3}) {
    for (int s = 0; s < options.search_seeds; ++s) {
      const std::uint64_t seed = derive_seed(options.seed, {6, static_cast<std::uint64_t>(s)});
      const MarketContext market = MarketContext::generate(params, seed).with_capacity(capacity(mode));
      StackelbergOptions so;
      so.eps = search.eps;
      so.step0 = search.step0;
      so.cooperative = mode != Mode::non_cooperative;
      so.ocf.max_passes = search.max_passes;
      const auto result = solve_stackelberg(market, derive_seed(seed, {1}), so);
      ++solves;
      const std::string tag = to_string(mode) + " seed " + std::to_string(s);

      double o_prev = 1.0;
      double last_move = 0.0;
      for (const auto& rec : result.trajectory) {
        last_move = std::abs(rec.o_next - o_prev);
        const double bound = so.step0 * std::pow(0.99, rec.iteration);
        if (last_move > bound * (1.0 + 1e-12)) {
          problems.push_back(tag + " step " + fmt("%.4g", last_move) + " > " + fmt("%.4g", bound) + " at iteration " +
                             std::to_string(rec.iteration));
          break;
        }
        o_prev = rec.o_next;
      }
      if (last_move > so.eps) problems.push_back(tag + " stopped with |o - o_pre| = " + fmt("%.3g", last_move));

      PricingState state;
      state.snapshot = CoalitionStructure::singletons(params.n_mus);
      double best = -std::numeric_limits<double>::infinity();
      for (int k = 1; k <= kGridPoints; ++k) {
        const double price = params.price_cap * k / kGridPoints;
        const auto probe =
            probe_price(price, state, market, derive_seed(seed, {2, static_cast<std::uint64_t>(k)}), so);
        best = std::max(best, probe.ecp_utility);
      }
      const double share = result.ecp_utility() / best;
      worst_share = std::min(worst_share, share);
      if (share < 0.95) {
        problems.push_back(tag + " u_ECP " + fmt("%.6g", result.ecp_utility()) + " vs grid max " + fmt("%.6g", best));
      }
    }
    note(options, "criterion 6: " + to_string(mode) + " done");
  }
  r.pass = problems.empty();
  r.detail = std::to_string(solves) + " solves, worst u_ECP / grid max " + fmt("%.4f", worst_share);
  if (!problems.empty()) r.detail += "; " + join(problems, "; ");
  return r;
}

CriterionResult model_formulas(const SuiteOptions&) {
  CriterionResult r{7, "model formulas", true, {}, 0.0};
  const SystemParams params = reference_params();
  const double orphan = orphan_probability(params);
  const double rate = transmission_rate(params);
  const long cap = nonce_cap(params);
  const bool ok_orphan = near(orphan, 8.3329861207559719e-5, 1e-6);
  const bool ok_rate = std::abs(rate - 2.6576e8) <= 1e-4 * 2.6576e8;
  const bool ok_cap = cap == 599;
  r.pass = ok_orphan && ok_rate && ok_cap;
  char buf[160];
  std::snprintf(buf, sizeof buf, "orphan %.10e%s, rate %.6e bit/s%s, nonce cap %ld%s", orphan, ok_orphan ? "" : " (off)",
                rate, ok_rate ? "" : " (off)", cap, ok_cap ? "" : " (off)");
  r.detail = buf;
  return r;
}

CriterionResult parameter_monotonicity(const SuiteOptions& options) {
  CriterionResult r{8, "utility monotone in I and B", true, {}, 0.0};
  const std::vector<Mode> modes{Mode::non_cooperative, Mode::j1, Mode::j3};
  std::vector<std::string> problems;
  int unstable = 0;
  for (auto [variable, grid] : {std::pair{SweepVariable::tx_count, std::vector<double>{2, 4, 6, 8, 10}},
                                std::pair{SweepVariable::block_reward, std::vector<double>{250, 500, 1000, 2000}}}) {
    const auto result = run_sweep(sweep(variable, grid, modes, options.monotonicity_seeds, options),
                                  progress_for(options, "criterion 8 " + to_string(variable)));
    unstable += unstable_runs(result);
    for (Mode mode : modes) {
      problems.push_back(monotone(rows_of(result, mode), [](const SweepRow& s) { return s.sys_utility_mean; }, +1,
                                  to_string(mode) + " " + to_string(variable) + ": system utility"));
    }
  }
  const std::string failed = join(problems, "; ");
  r.pass = failed.empty();
  r.detail = std::to_string(options.monotonicity_seeds) + " seeds per point, " + std::to_string(unstable) +
             " solves with capped probes";
  if (!failed.empty()) r.detail += "; violations: " + failed;
  return r;
}

std::vector<int> all_criteria() { return {1, 2, 3, 4, 5, 6, 7, 8}; }

std::vector<int> quick_criteria() { return {1, 2, 3, 7}; }

CriterionResult run_criterion(int id, const SuiteOptions& options) {
  using Check = CriterionResult (*)(const SuiteOptions&);
  static constexpr Check kChecks[] = {erc_oracle_equivalence, closed_form_identity, formation_stability,
                                      price_trends,           mode_ordering,        price_search,
                                      model_formulas,         parameter_monotonicity};
  if (id < 1 || id > 8) throw std::invalid_argument("unknown criterion " + std::to_string(id));
  const auto start = std::chrono::steady_clock::now();
  CriterionResult result;
  try {
    result = kChecks[id - 1](options);
  } catch (const std::exception& e) {
    result = CriterionResult{id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what(), 0.0};
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::string format(const CriterionResult& result) {
  std::ostringstream out;
  out << (result.pass ? "PASS" : "FAIL") << " [" << result.id << "] " << result.name << ": " << result.detail << " ("
      << fmt("%.1f", result.seconds) << " s)";
  return out.str();
}

}  // namespace coalmine::verification
