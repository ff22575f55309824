#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coalmine/params.hpp"

namespace coalmine {

struct Transaction {
  int id = 0;
  double fee = 0.0;
};

/// Global fee-bearing transactions; `txs[i].id == i`.
struct TransactionPool {
  std::vector<Transaction> txs;

  std::size_t size() const noexcept { return txs.size(); }
  double fee(int id) const { return txs.at(static_cast<std::size_t>(id)).fee; }
};

/// Transactions one miner has collected (sorted ids).
struct MinerProfile {
  int id = 0;
  std::vector<int> collected;
};

/// `tx_pool_size` transactions with fees i.i.d. uniform on `fee_range`.
TransactionPool generate_pool(std::uint64_t seed, const SystemParams& params);

/// Each of the N miners samples `tx_per_mu` distinct transactions uniformly.
/// Miner n's subset depends only on (seed, n), so growing N keeps earlier
/// miners' collections unchanged. Throws ConfigError if tx_per_mu exceeds
/// the pool size.
std::vector<MinerProfile> assign_transactions(std::uint64_t seed, const TransactionPool& pool,
                                              const SystemParams& params);

}  // namespace coalmine
