#include "coalmine/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "coalmine/error.hpp"
#include "json.hpp"

namespace coalmine {
namespace {

using nlohmann::json;

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  return v.get<int>();
}

}  // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

Config parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed config: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("", "config root must be an object");

  Config cfg;
  SystemParams& p = cfg.params;
  for (const auto& [key, v] : root.items()) {
    if (key == "n_mus") {
      p.n_mus = integer(v, key);
    } else if (key == "collaboration_factor") {
      p.collaboration_factor = integer(v, key);
    } else if (key == "block_reward") {
      p.block_reward = number(v, key);
    } else if (key == "block_tx_count") {
      p.block_tx_count = integer(v, key);
    } else if (key == "difficulty") {
      p.difficulty = number(v, key);
    } else if (key == "nonce_bits") {
      p.nonce_bits = integer(v, key);
    } else if (key == "avg_block_time") {
      p.avg_block_time = number(v, key);
    } else if (key == "latency_factor") {
      p.latency_factor = number(v, key);
    } else if (key == "header_size") {
      p.header_size = number(v, key);
    } else if (key == "tx_power") {
      p.tx_power = number(v, key);
    } else if (key == "channel_gain") {
      p.channel_gain = number(v, key);
    } else if (key == "noise_power") {
      p.noise_power = dbm_to_watts(number(v, key));
    } else if (key == "bandwidth") {
      p.bandwidth = number(v, key) * 1e6;
    } else if (key == "ecp_freq") {
      p.ecp_freq = number(v, key) * 1e9;
    } else if (key == "cycles_per_nonce") {
      p.cycles_per_nonce = number(v, key) * 1e6;
    } else if (key == "unit_cost") {
      p.unit_cost = number(v, key);
    } else if (key == "price_cap") {
      p.price_cap = number(v, key);
    } else if (key == "tx_pool_size") {
      p.tx_pool_size = integer(v, key);
    } else if (key == "fee_range") {
      if (!v.is_array() || v.size() != 2) throw ConfigError(key, "expected [min, max]");
      p.fee_range = {number(v[0], key), number(v[1], key)};
    } else if (key == "tx_per_mu") {
      p.tx_per_mu = integer(v, key);
    } else if (key == "search_eps") {
      cfg.search.eps = number(v, key);
    } else if (key == "search_step0") {
      cfg.search.step0 = number(v, key);
    } else if (key == "formation_max_passes") {
      cfg.search.max_passes = integer(v, key);
    } else {
      throw ConfigError(key, "unknown config key");
    }
  }

  p.validate();
  if (!(cfg.search.eps > 0.0)) throw ConfigError("search_eps", "must be > 0");
  if (!(cfg.search.step0 > 0.0 && cfg.search.step0 <= 1.0))
    throw ConfigError("search_step0", "must lie in (0, 1]");
  if (cfg.search.max_passes < 1) throw ConfigError("formation_max_passes", "must be >= 1");
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(e.key(), e.detail(), path.string());
  }
}

}  // namespace coalmine
