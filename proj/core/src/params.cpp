#include "coalmine/params.hpp"

#include <cmath>
#include <string>

#include "coalmine/error.hpp"

namespace coalmine {
namespace {

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

void require_positive(double v, const char* key) {
  require(std::isfinite(v) && v > 0.0, key, "must be a finite value > 0");
}

void require_nonnegative(double v, const char* key) {
  require(std::isfinite(v) && v >= 0.0, key, "must be a finite value >= 0");
}

}  // namespace

void SystemParams::validate() const {
  require(n_mus >= 1, "n_mus", "must be >= 1");
  require(collaboration_factor >= 1, "collaboration_factor", "must be >= 1");
  require_nonnegative(block_reward, "block_reward");
  require(block_tx_count >= 1, "block_tx_count", "must be >= 1");
  require_nonnegative(difficulty, "difficulty");
  require(nonce_bits >= 1, "nonce_bits", "must be >= 1");
  require(difficulty <= nonce_bits, "difficulty", "must not exceed nonce_bits");
  require_positive(avg_block_time, "avg_block_time");
  require_positive(latency_factor, "latency_factor");
  require_positive(header_size, "header_size");
  require_positive(tx_power, "tx_power");
  require_positive(channel_gain, "channel_gain");
  require_positive(noise_power, "noise_power");
  require_positive(bandwidth, "bandwidth");
  require_positive(ecp_freq, "ecp_freq");
  require_positive(cycles_per_nonce, "cycles_per_nonce");
  require_nonnegative(unit_cost, "unit_cost");
  require_positive(price_cap, "price_cap");
  require(unit_cost < price_cap, "unit_cost", "must be below price_cap");
  require(tx_pool_size >= 1, "tx_pool_size", "must be >= 1");
  require(block_tx_count <= tx_pool_size, "block_tx_count", "must not exceed tx_pool_size");
  require(std::isfinite(fee_range.min) && std::isfinite(fee_range.max) && fee_range.min >= 0.0 &&
              fee_range.min <= fee_range.max,
          "fee_range", "must satisfy 0 <= min <= max");
  require(tx_per_mu >= 1, "tx_per_mu", "must be >= 1");
  require(tx_per_mu <= tx_pool_size, "tx_per_mu", "must not exceed tx_pool_size");
}

}  // namespace coalmine
