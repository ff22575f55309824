// coalmine: parameter sweeps, single price-search traces and the acceptance suite.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "coalmine/config.hpp"
#include "coalmine/error.hpp"
#include "coalmine/harness.hpp"
#include "coalmine/rng.hpp"
#include "coalmine/stackelberg.hpp"
#include "coalmine/verification.hpp"

namespace {

using namespace coalmine;

constexpr int kUsageError = 2;
constexpr std::uint64_t kSearchStream = 0x7072696365;  // same stream label the sweeps use

Config config_or_default(const std::string& path) { return path.empty() ? Config{} : load_config(path); }

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("bad grid value '" + item + "'");
    grid.push_back(v);
  }
  if (grid.empty()) throw std::invalid_argument("grid is empty");
  return grid;
}

struct SweepArgs {
  std::string variable;
  std::string config;
  std::string modes = "noncoop,J=1,J=3";
  int seeds = 500;
  std::uint64_t first_seed = 0;
  std::string grid;
  std::string out;
  unsigned threads = 0;
  bool quiet = false;
};

int run_sweep_command(const SweepArgs& a) {
  SweepSpec spec;
  spec.variable = parse_variable(a.variable);
  spec.base = config_or_default(a.config);
  spec.modes = parse_modes(a.modes);
  spec.seeds = a.seeds;
  spec.first_seed = a.first_seed;
  spec.grid = a.grid.empty() ? default_grid(spec.variable) : parse_grid(a.grid);
  spec.threads = a.threads;

  Progress progress;
  if (!a.quiet) {
    progress = [last = std::size_t{101}](std::size_t done, std::size_t total) mutable {
      const std::size_t pct = done * 100 / total;
      if (pct != last) {
        last = pct;
        std::fprintf(stderr, "\rsweep: %zu/%zu", done, total);
        if (done == total) std::fputc('\n', stderr);
      }
    };
  }
  const SweepResult result = run_sweep(spec, progress);
  write_csv(result.rows, a.out);

  std::size_t capped = 0;
  for (const auto& r : result.records) capped += r.stable ? 0 : 1;
  if (capped > 0) {
    std::fprintf(stderr, "note: %zu of %zu runs scored a structure that was still moving at the %d-pass cap\n",
                 capped, result.records.size(), spec.base.search.max_passes);
  }
  std::fprintf(stderr, "wrote %zu rows to %s\n", result.rows.size(), a.out.c_str());
  return 0;
}

struct ConvergeArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::string mode = "J=1";
  std::string trace;
};

int run_converge_command(const ConvergeArgs& a) {
  const Config cfg = config_or_default(a.config);
  const Mode mode = parse_mode(a.mode);
  const MarketContext market = MarketContext::generate(cfg.params, a.seed).with_capacity(capacity(mode));

  StackelbergOptions options;
  options.eps = cfg.search.eps;
  options.step0 = cfg.search.step0;
  options.cooperative = mode != Mode::non_cooperative;
  options.ocf.max_passes = cfg.search.max_passes;
  const StackelbergResult result = solve_stackelberg(market, derive_seed(a.seed, {kSearchStream}), options);
  write_trace(result.trajectory, a.trace);

  std::printf("mode            %s\n", to_string(mode).c_str());
  std::printf("iterations      %zu\n", result.trajectory.size());
  std::printf("p*              %.6f\n", result.p_star);
  std::printf("u_ECP           %.6f\n", result.ecp_utility());
  std::printf("system utility  %.6f\n", result.final.system_utility());
  std::printf("total nonce     %ld\n", result.final_equilibrium().total_nonce);
  std::printf("capped probes   %d\n", result.unstable_probes);
  std::printf("structure       %s\n", result.final_structure().to_string().c_str());
  return 0;
}

struct VerifyArgs {
  bool full = false;
  std::vector<int> criteria;
  unsigned threads = 0;
  bool quiet = false;
};

int run_verify_command(const VerifyArgs& a) {
  verification::SuiteOptions options;
  options.threads = a.threads;
  if (!a.quiet) options.log = [](const std::string& line) { std::fprintf(stderr, "  .. %s\n", line.c_str()); };
  const std::vector<int> ids =
      !a.criteria.empty() ? a.criteria : (a.full ? verification::all_criteria() : verification::quick_criteria());
  int failed = 0;
  for (int id : ids) {
    const auto result = verification::run_criterion(id, options);
    std::printf("%s\n", verification::format(result).c_str());
    std::fflush(stdout);
    failed += result.pass ? 0 : 1;
  }
  std::printf("%zu criteria, %d failed\n", ids.size(), failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coalmine: coalition mining market with a pricing edge provider"};
  app.require_subcommand(1);

  SweepArgs sweep;
  auto* s = app.add_subcommand("sweep", "Sweep one parameter across modes and seeds, write a CSV summary");
  s->add_option("--variable", sweep.variable, "price, mus, tx or reward")->required();
  s->add_option("--config", sweep.config, "JSON parameter file (reference values when omitted)");
  s->add_option("--modes", sweep.modes, "Comma list of noncoop, J=1, J=2, J=3")->capture_default_str();
  s->add_option("--seeds", sweep.seeds, "Scenarios per grid value")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--first-seed", sweep.first_seed, "Seed of the first scenario")->capture_default_str();
  s->add_option("--grid", sweep.grid, "Comma list overriding the default grid");
  s->add_option("--out", sweep.out, "CSV output path")->required();
  s->add_option("--threads", sweep.threads, "Worker threads (0: all cores)")->capture_default_str();
  s->add_flag("--quiet", sweep.quiet, "No progress on stderr");

  ConvergeArgs converge;
  auto* c = app.add_subcommand("converge", "Run one price search and write its trajectory");
  c->add_option("--config", converge.config, "JSON parameter file (reference values when omitted)");
  c->add_option("--seed", converge.seed, "Scenario seed")->capture_default_str();
  c->add_option("--mode", converge.mode, "noncoop, J=1, J=2 or J=3")->capture_default_str();
  c->add_option("--trace", converge.trace, "CSV trajectory output path")->required();

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Run the acceptance checks (quick subset unless --full)");
  v->add_flag("--full", verify.full, "Run all eight checks, including the long sweeps");
  v->add_option("--criteria", verify.criteria, "Run only these checks (ids 1-8)")->delimiter(',')->check(CLI::Range(1, 8));
  v->add_option("--threads", verify.threads, "Worker threads for the sweeps (0: all cores)")->capture_default_str();
  v->add_flag("--quiet", verify.quiet, "No progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*s) return run_sweep_command(sweep);
    if (*c) return run_converge_command(converge);
    return run_verify_command(verify);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "coalmine: config error: %s\n", e.what());
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "coalmine: %s\n", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "coalmine: %s\n", e.what());
    return 1;
  }
}
