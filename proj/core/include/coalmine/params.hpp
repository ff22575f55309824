#pragma once

#include <cstdint>

namespace coalmine {

struct FeeRange {
  double min = 0.0;
  double max = 100.0;
};

/// Every physical and economic constant of the mining market, in SI units.
///
/// Defaults reproduce the reference scenario: N=20 miners, B=1000, I=10,
/// a 1000-transaction pool with fees uniform on [0, 100].
struct SystemParams {
  int n_mus = 20;                      // N
  int collaboration_factor = 1;        // J, max coalitions per miner
  double block_reward = 1000.0;        // B
  int block_tx_count = 10;             // I
  double difficulty = 0.5;             // pi, bits
  int nonce_bits = 32;                 // phi, documentation only
  double avg_block_time = 600.0;       // T', s
  double latency_factor = 5e-3;        // z, s per transaction
  double header_size = 608.0;          // D, bits
  double tx_power = 0.1;               // rho, W
  double channel_gain = 1e-8;          // h
  double noise_power = 1e-13;          // N0, W (-100 dBm)
  double bandwidth = 20e6;             // W, Hz
  double ecp_freq = 1e9;               // f_E, cycles/s
  double cycles_per_nonce = 1e9;       // omega, cycles
  double unit_cost = 0.8;              // c
  double price_cap = 500.0;            // p-bar
  int tx_pool_size = 1000;
  FeeRange fee_range{};
  int tx_per_mu = 100;                 // K

  /// Poisson block rate; derived so that rate * T' == 1.
  double poisson_rate() const noexcept { return 1.0 / avg_block_time; }

  /// Throws ConfigError naming the first violated field.
  void validate() const;
};

}  // namespace coalmine
