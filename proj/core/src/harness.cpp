#include "coalmine/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "coalmine/rng.hpp"

namespace coalmine {
namespace {

constexpr std::uint64_t kOcfStream = 0x6f6366;
constexpr std::uint64_t kPriceStream = 0x7072696365;

std::string lower(std::string text) {
  std::string out;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  return out;
}

// Always six significant digits, trailing zeros kept: 10 -> 10.0000.
std::string fmt6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.6g", value);
  return buf;
}

int as_count(double value, const char* what) {
  const double rounded = std::round(value);
  if (std::abs(value - rounded) > 1e-9 || rounded < 0.0) {
    throw std::invalid_argument(std::string("sweep: ") + what + " must be a whole number");
  }
  return static_cast<int>(rounded);
}

}  // namespace

int capacity(Mode mode) {
  switch (mode) {
    case Mode::non_cooperative: return 1;
    case Mode::j1: return 1;
    case Mode::j2: return 2;
    case Mode::j3: return 3;
  }
  return 1;
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::non_cooperative: return "non_cooperative";
    case Mode::j1: return "J=1";
    case Mode::j2: return "J=2";
    case Mode::j3: return "J=3";
  }
  return "?";
}

Mode parse_mode(const std::string& text) {
  const std::string t = lower(text);
  if (t == "noncoop" || t == "non_cooperative" || t == "non-cooperative" || t == "nc") {
    return Mode::non_cooperative;
  }
  for (auto [digit, mode] : {std::pair{'1', Mode::j1}, {'2', Mode::j2}, {'3', Mode::j3}}) {
    const std::string d(1, digit);
    if (t == d || t == "j" + d || t == "j=" + d) return mode;
  }
  throw std::invalid_argument("unknown mode '" + text + "' (expected noncoop, J=1, J=2 or J=3)");
}

std::vector<Mode> parse_modes(const std::string& list) {
  std::vector<Mode> modes;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = std::min(list.find(',', start), list.size());
    const std::string item = list.substr(start, comma - start);
    if (!lower(item).empty()) {
      const Mode mode = parse_mode(item);
      if (std::find(modes.begin(), modes.end(), mode) == modes.end()) modes.push_back(mode);
    }
    start = comma + 1;
  }
  if (modes.empty()) throw std::invalid_argument("no modes given");
  return modes;
}

std::string to_string(SweepVariable variable) {
  switch (variable) {
    case SweepVariable::price: return "price";
    case SweepVariable::n_mus: return "mus";
    case SweepVariable::tx_count: return "tx";
    case SweepVariable::block_reward: return "reward";
  }
  return "?";
}

SweepVariable parse_variable(const std::string& text) {
  const std::string t = lower(text);
  if (t == "price") return SweepVariable::price;
  if (t == "mus" || t == "n_mus") return SweepVariable::n_mus;
  if (t == "tx" || t == "tx_count" || t == "block_tx_count") return SweepVariable::tx_count;
  if (t == "reward" || t == "block_reward") return SweepVariable::block_reward;
  throw std::invalid_argument("unknown sweep variable '" + text + "' (expected price, mus, tx or reward)");
}

std::vector<double> default_grid(SweepVariable variable) {
  switch (variable) {
    case SweepVariable::price: return {10, 25, 50, 100, 200, 300, 400, 500};
    case SweepVariable::n_mus: return {12, 14, 16, 18, 20, 22, 24};
    case SweepVariable::tx_count: return {2, 4, 6, 8, 10};
    case SweepVariable::block_reward: return {250, 500, 1000, 2000};
  }
  return {};
}

SystemParams with_value(const SystemParams& base, SweepVariable variable, double value) {
  SystemParams p = base;
  switch (variable) {
    case SweepVariable::price: break;
    case SweepVariable::n_mus: p.n_mus = as_count(value, "n_mus"); break;
    case SweepVariable::tx_count: p.block_tx_count = as_count(value, "block_tx_count"); break;
    case SweepVariable::block_reward: p.block_reward = value; break;
  }
  return p;
}

RunRecord run_mode(Mode mode, const MarketContext& market, PriceChoice price, std::uint64_t seed,
                   const SearchSettings& search) {
  const MarketContext arm = market.with_capacity(capacity(mode));
  const bool cooperative = mode != Mode::non_cooperative;
  const auto start = CoalitionStructure::singletons(arm.params.n_mus);

  StructureEvaluation eval;
  double p_star = 0.0;
  bool stable = true;
  if (price) {
    StructureEvaluator evaluator(arm, *price);
    if (cooperative) {
      OcfOptions ocf;
      ocf.max_passes = search.max_passes;
      FormationRun run = run_formation(start, evaluator, derive_seed(seed, {kOcfStream}), ocf);
      eval = std::move(run.evaluation);
      stable = run.stable;
    } else {
      eval = evaluator(start);
    }
    p_star = *price;
  } else {
    StackelbergOptions options;
    options.eps = search.eps;
    options.step0 = search.step0;
    options.cooperative = cooperative;
    options.ocf.max_passes = search.max_passes;
    auto result = solve_stackelberg(arm, derive_seed(seed, {kPriceStream}), options);
    p_star = result.p_star;
    stable = result.unstable_probes == 0;
    eval = std::move(result.final);
  }

  RunRecord record;
  record.mode = mode;
  record.seed = seed;
  record.ecp_utility = eval.ecp_utility;
  record.system_utility = eval.system_utility();
  record.total_nonce = static_cast<double>(eval.equilibrium.total_nonce);
  record.n_avg = eval.avg_members;
  record.p_star = p_star;
  record.stable = stable;
  return record;
}

RunRecord run_mode(Mode mode, const SystemParams& params, PriceChoice price, std::uint64_t seed,
                   const SearchSettings& search) {
  return run_mode(mode, MarketContext::generate(params, seed), price, seed, search);
}

void SweepSpec::validate() const {
  if (grid.empty()) throw std::invalid_argument("sweep: grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("sweep: grid must be sorted");
  if (seeds < 1) throw std::invalid_argument("sweep: seeds must be >= 1");
  if (modes.empty()) throw std::invalid_argument("sweep: no modes given");
}

SweepResult run_sweep(const SweepSpec& spec, const Progress& progress) {
  spec.validate();
  const std::size_t n_modes = spec.modes.size();
  const std::size_t n_seeds = static_cast<std::size_t>(spec.seeds);
  const std::size_t tasks = spec.grid.size() * n_seeds;

  std::vector<SystemParams> scenario;
  for (double value : spec.grid) {
    scenario.push_back(with_value(spec.base.params, spec.variable, value));
    scenario.back().validate();
  }

  SweepResult result;
  result.records.resize(tasks * n_modes);
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex lock;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= tasks) return;
      const std::size_t g = task / n_seeds;
      const std::uint64_t seed = spec.first_seed + task % n_seeds;
      try {
        const auto market = MarketContext::generate(scenario[g], seed);
        const PriceChoice price =
            spec.variable == SweepVariable::price ? PriceChoice{spec.grid[g]} : std::nullopt;
        for (std::size_t k = 0; k < n_modes; ++k) {
          RunRecord r = run_mode(spec.modes[k], market, price, seed, spec.base.search);
          r.value = spec.grid[g];
          result.records[task * n_modes + k] = r;
        }
      } catch (...) {
        std::lock_guard guard(lock);
        if (!failure) failure = std::current_exception();
        next.store(tasks);
        return;
      }
      std::lock_guard guard(lock);
      ++done;
      if (progress) progress(done, tasks);
    }
  };

  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  result.rows = aggregate(result.records, spec.variable);
  return result;
}

MeanCi mean_ci95(const std::vector<double>& samples) {
  MeanCi out;
  if (samples.empty()) return out;
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double x : samples) sum += x;
  out.mean = sum / n;
  if (samples.size() < 2) return out;
  double ss = 0.0;
  for (double x : samples) ss += (x - out.mean) * (x - out.mean);
  out.ci95 = 1.96 * std::sqrt(ss / (n - 1.0) / n);
  return out;
}

std::vector<SweepRow> aggregate(const std::vector<RunRecord>& records, SweepVariable variable) {
  // keep first-seen order of values and modes; sort samples by seed so the
  // result does not depend on record order
  std::vector<double> values;
  std::vector<Mode> modes;
  for (const auto& r : records) {
    if (std::find(values.begin(), values.end(), r.value) == values.end()) values.push_back(r.value);
    if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
  }
  std::vector<SweepRow> rows;
  for (double value : values) {
    for (Mode mode : modes) {
      std::vector<const RunRecord*> group;
      for (const auto& r : records) {
        if (r.value == value && r.mode == mode) group.push_back(&r);
      }
      if (group.empty()) continue;
      std::sort(group.begin(), group.end(), [](auto* a, auto* b) { return a->seed < b->seed; });
      std::vector<double> ecp, sys;
      double nonce = 0.0, members = 0.0, price = 0.0;
      for (const auto* r : group) {
        ecp.push_back(r->ecp_utility);
        sys.push_back(r->system_utility);
        nonce += r->total_nonce;
        members += r->n_avg;
        price += r->p_star;
      }
      const double n = static_cast<double>(group.size());
      const MeanCi e = mean_ci95(ecp);
      const MeanCi s = mean_ci95(sys);
      rows.push_back({mode, variable, value, static_cast<int>(group.size()), e.mean, e.ci95, s.mean,
                      s.ci95, nonce / n, members / n, price / n});
    }
  }
  return rows;
}

double paired_improvement(const std::vector<RunRecord>& records, Mode better, Mode base, double value) {
  std::map<std::uint64_t, std::pair<const RunRecord*, const RunRecord*>> pairs;
  for (const auto& r : records) {
    if (r.value != value) continue;
    if (r.mode == better) pairs[r.seed].first = &r;
    if (r.mode == base) pairs[r.seed].second = &r;
  }
  double sum = 0.0;
  int count = 0;
  for (const auto& [seed, pair] : pairs) {
    if (!pair.first || !pair.second) continue;
    sum += (pair.first->system_utility - pair.second->system_utility) / pair.second->system_utility;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("paired_improvement: no seed has both modes");
  return sum / count;
}

void emit_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "mode,variable,value,seeds,u_ecp_mean,u_ecp_ci95,sys_utility_mean,sys_utility_ci95,"
         "total_nonce_mean,n_avg_mean,p_star_mean\n";
  for (const auto& r : rows) {
    out << to_string(r.mode) << ',' << to_string(r.variable) << ',' << fmt6(r.value) << ',' << r.seeds
        << ',' << fmt6(r.u_ecp_mean) << ',' << fmt6(r.u_ecp_ci95) << ',' << fmt6(r.sys_utility_mean)
        << ',' << fmt6(r.sys_utility_ci95) << ',' << fmt6(r.total_nonce_mean) << ','
        << fmt6(r.n_avg_mean) << ',' << fmt6(r.p_star_mean) << '\n';
  }
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void write_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  emit_csv(rows, out);
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void emit_trace(const std::vector<TrajectoryRecord>& trajectory, std::ostream& out) {
  out << "tau,p_low,p_mid,p_high,u_ecp_low,u_ecp_mid,u_ecp_high,o_next\n";
  for (const auto& t : trajectory) {
    out << t.iteration;
    for (double p : t.prices) out << ',' << fmt6(p);
    for (double u : t.ecp_utility) out << ',' << fmt6(u);
    out << ',' << fmt6(t.o_next) << '\n';
  }
}

void write_trace(const std::vector<TrajectoryRecord>& trajectory, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  emit_trace(trajectory, out);
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace coalmine
