#include "coalmine/transactions.hpp"

#include <algorithm>
#include <numeric>

#include "coalmine/error.hpp"
#include "coalmine/rng.hpp"

namespace coalmine {

TransactionPool generate_pool(std::uint64_t seed, const SystemParams& params) {
  Rng rng(derive_seed(seed, {0x706f6f6cULL}));
  TransactionPool pool;
  pool.txs.reserve(static_cast<std::size_t>(params.tx_pool_size));
  for (int i = 0; i < params.tx_pool_size; ++i) {
    pool.txs.push_back({i, rng.uniform(params.fee_range.min, params.fee_range.max)});
  }
  return pool;
}

std::vector<MinerProfile> assign_transactions(std::uint64_t seed, const TransactionPool& pool,
                                              const SystemParams& params) {
  if (params.tx_per_mu < 1) throw ConfigError("tx_per_mu", "must be >= 1");
  const auto k = static_cast<std::size_t>(params.tx_per_mu);
  if (k > pool.size()) throw ConfigError("tx_per_mu", "exceeds the transaction pool size");

  std::vector<int> ids(pool.size());
  std::vector<MinerProfile> profiles;
  profiles.reserve(static_cast<std::size_t>(params.n_mus));
  for (int n = 0; n < params.n_mus; ++n) {
    Rng rng(derive_seed(seed, {0x6d696e6572ULL, static_cast<std::uint64_t>(n)}));
    std::iota(ids.begin(), ids.end(), 0);
    // partial Fisher-Yates: the first k slots end up a uniform k-subset
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + rng.below(ids.size() - i);
      std::swap(ids[i], ids[j]);
    }
    MinerProfile profile{n, std::vector<int>(ids.begin(), ids.begin() + static_cast<long>(k))};
    std::sort(profile.collected.begin(), profile.collected.end());
    profiles.push_back(std::move(profile));
  }
  return profiles;
}

}  // namespace coalmine
