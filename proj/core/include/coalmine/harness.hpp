#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coalmine/config.hpp"
#include "coalmine/stackelberg.hpp"

namespace coalmine {

/// How miners may cooperate in one experiment arm.
enum class Mode {
  non_cooperative,  // everyone mines alone, no moves
  j1,
  j2,
  j3,
};

/// Collaboration factor of a cooperative mode (1 for non_cooperative).
int capacity(Mode mode);
std::string to_string(Mode mode);
/// Accepts `noncoop`, `non_cooperative`, `J=1`, `J1`, `j1`, `1` and so on.
/// Throws std::invalid_argument on anything else.
Mode parse_mode(const std::string& text);
/// Comma-separated list of modes, duplicates removed, order kept.
std::vector<Mode> parse_modes(const std::string& list);

enum class SweepVariable { price, n_mus, tx_count, block_reward };

/// CSV spelling: price, mus, tx, reward.
std::string to_string(SweepVariable variable);
SweepVariable parse_variable(const std::string& text);
/// Grid the reference experiments use for each variable.
std::vector<double> default_grid(SweepVariable variable);
/// Copy of `base` with `variable` set to `value`.
SystemParams with_value(const SystemParams& base, SweepVariable variable, double value);

struct RunRecord {
  Mode mode = Mode::non_cooperative;
  double value = 0.0;
  std::uint64_t seed = 0;
  double ecp_utility = 0.0;
  double system_utility = 0.0;
  double total_nonce = 0.0;
  double n_avg = 0.0;
  double p_star = 0.0;  // the fixed price when no search ran
  /// False when formation hit the pass cap (at a probe, for searched prices).
  bool stable = true;
};

/// Fixed price, or nullopt to let the provider search for one.
using PriceChoice = std::optional<double>;

/// One arm on one scenario. Cooperative modes start from all singletons and
/// run at most `search.max_passes` formation passes per price.
RunRecord run_mode(Mode mode, const MarketContext& market, PriceChoice price, std::uint64_t seed,
                   const SearchSettings& search = {});
/// Same, generating the scenario from (params, seed) first.
RunRecord run_mode(Mode mode, const SystemParams& params, PriceChoice price, std::uint64_t seed,
                   const SearchSettings& search = {});

struct SweepSpec {
  SweepVariable variable = SweepVariable::price;
  std::vector<double> grid;
  std::vector<Mode> modes;
  int seeds = 500;
  std::uint64_t first_seed = 0;
  Config base;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;

  /// Throws std::invalid_argument unless the grid is non-empty and sorted,
  /// seeds >= 1 and at least one mode is given.
  void validate() const;
};

struct SweepRow {
  Mode mode = Mode::non_cooperative;
  SweepVariable variable = SweepVariable::price;
  double value = 0.0;
  int seeds = 0;
  double u_ecp_mean = 0.0;
  double u_ecp_ci95 = 0.0;
  double sys_utility_mean = 0.0;
  double sys_utility_ci95 = 0.0;
  double total_nonce_mean = 0.0;
  double n_avg_mean = 0.0;
  double p_star_mean = 0.0;
};

struct SweepResult {
  std::vector<RunRecord> records;  // grid-major, then seed, then mode
  std::vector<SweepRow> rows;      // grid-major, then mode
};

using Progress = std::function<void(std::size_t done, std::size_t total)>;

/// Price sweeps hold the price fixed at each grid value; every other
/// variable runs the price search. Results do not depend on `threads`.
SweepResult run_sweep(const SweepSpec& spec, const Progress& progress = {});

struct MeanCi {
  double mean = 0.0;
  double ci95 = 0.0;  // 1.96 standard errors; 0 for a single sample
};

MeanCi mean_ci95(const std::vector<double>& samples);

/// Rows for every (value, mode) present in `records`.
std::vector<SweepRow> aggregate(const std::vector<RunRecord>& records, SweepVariable variable);

/// Mean over seeds of (u_sys(better) - u_sys(base)) / u_sys(base) at `value`,
/// pairing records by seed. Throws if no seed has both arms.
double paired_improvement(const std::vector<RunRecord>& records, Mode better, Mode base, double value);

/// Header plus one line per row; numbers carry exactly six significant digits.
void emit_csv(const std::vector<SweepRow>& rows, std::ostream& out);
void write_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

/// Header plus one line per price-search iteration.
void emit_trace(const std::vector<TrajectoryRecord>& trajectory, std::ostream& out);
void write_trace(const std::vector<TrajectoryRecord>& trajectory, const std::filesystem::path& path);

}  // namespace coalmine
