#pragma once

#include <span>
#include <utility>
#include <vector>

#include "coalmine/params.hpp"
#include "coalmine/transactions.hpp"

namespace coalmine {

// Mining, offloading and utility formulas. All functions are pure.

/// Sum of the `block_tx_count` largest fees in the deduplicated union of the
/// members' collected transactions (all of them when the union is smaller).
double coalition_fee(std::span<const int> members, std::span<const MinerProfile> profiles,
                     const TransactionPool& pool, int block_tx_count);

/// 1 - exp(-lambda z I): a mined block loses the propagation race.
double orphan_probability(const SystemParams& params);

/// exp(-lambda z I).
double success_probability(const SystemParams& params);

/// Expected per-share reward theta = (B + F) exp(-lambda z I) 2^-pi.
double reward_factor(double coalition_fee, const SystemParams& params);
double reward_factor(std::span<const int> members, std::span<const MinerProfile> profiles,
                     const TransactionPool& pool, const SystemParams& params);

/// rho h / N0. Radio parameters are shared by all coalitions, so the SNR does
/// not depend on membership.
double coalition_snr(const SystemParams& params);

/// W log2(1 + snr).
double transmission_rate(const SystemParams& params);

/// Header upload time plus computing time for `nonce` hashes, in seconds.
double mining_delay(double nonce, const SystemParams& params);

/// Coalition payoff l/(l + others) theta - l p; zero when nobody mines.
double coalition_utility(double nonce, double others_nonce, double theta, double price);

/// Miner payoff for `mu_nonce` hashes out of a system total `total_nonce`.
double mu_utility(double mu_nonce, double total_nonce, double theta, double price);

/// total (p - c).
double ecp_utility(double total_nonce, double price, double unit_cost);

/// Per-miner top-I fee lists, precomputed so coalition fees cost
/// O(|members| * I) instead of a scan over every collected transaction.
class FeeIndex {
 public:
  FeeIndex() = default;
  FeeIndex(std::span<const MinerProfile> profiles, const TransactionPool& pool, int block_tx_count);

  /// Same value as coalition_fee() for the indexed profiles.
  double coalition_fee(std::span<const int> members) const;

  int block_tx_count() const noexcept { return block_tx_count_; }

 private:
  int block_tx_count_ = 0;
  // (fee, id) sorted by fee descending, at most I entries per miner
  std::vector<std::vector<std::pair<double, int>>> top_;
};

}  // namespace coalmine
