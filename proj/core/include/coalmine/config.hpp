#pragma once

#include <filesystem>
#include <string>

#include "coalmine/params.hpp"

namespace coalmine {

/// Price-search knobs that may be overridden from a config file.
struct SearchSettings {
  double eps = 1e-3;
  double step0 = 0.25;
  /// Formation passes per run before the last structure is scored as is.
  int max_passes = 500;
};

struct Config {
  SystemParams params;
  SearchSettings search;
};

/// Parses a JSON config keyed by SystemParams field names.
///
/// Values use the human units of the reference parameter table and are
/// normalized to SI on load:
///   noise_power      dBm          -> W
///   bandwidth        MHz          -> Hz
///   ecp_freq         GHz          -> cycles/s
///   cycles_per_nonce Mega cycles  -> cycles
/// All other fields are taken as-is. Missing keys keep their defaults; unknown
/// keys and invariant violations throw ConfigError naming the key.
Config parse_config(const std::string& json_text);

/// Reads and parses `path`; a missing or unreadable file throws ConfigError
/// whose message names the path.
Config load_config(const std::filesystem::path& path);

double dbm_to_watts(double dbm);

}  // namespace coalmine
