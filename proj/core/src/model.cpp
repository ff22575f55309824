#include "coalmine/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace coalmine {
namespace {

double sum_top(std::vector<double>& fees, int count) {
  const auto k = std::min(fees.size(), static_cast<std::size_t>(std::max(count, 0)));
  std::partial_sort(fees.begin(), fees.begin() + static_cast<long>(k), fees.end(), std::greater<>());
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) total += fees[i];
  return total;
}

}  // namespace

double coalition_fee(std::span<const int> members, std::span<const MinerProfile> profiles,
                     const TransactionPool& pool, int block_tx_count) {
  std::vector<int> ids;
  for (int n : members) {
    const auto& c = profiles[static_cast<std::size_t>(n)].collected;
    ids.insert(ids.end(), c.begin(), c.end());
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<double> fees;
  fees.reserve(ids.size());
  for (int id : ids) fees.push_back(pool.fee(id));
  return sum_top(fees, block_tx_count);
}

double orphan_probability(const SystemParams& params) {
  const double exponent = params.poisson_rate() * params.latency_factor * params.block_tx_count;
  return -std::expm1(-exponent);
}

double success_probability(const SystemParams& params) {
  return 1.0 - orphan_probability(params);
}

double reward_factor(double coalition_fee, const SystemParams& params) {
  return (params.block_reward + coalition_fee) * success_probability(params) *
         std::exp2(-params.difficulty);
}

double reward_factor(std::span<const int> members, std::span<const MinerProfile> profiles,
                     const TransactionPool& pool, const SystemParams& params) {
  return reward_factor(coalition_fee(members, profiles, pool, params.block_tx_count), params);
}

double coalition_snr(const SystemParams& params) {
  return params.tx_power * params.channel_gain / params.noise_power;
}

double transmission_rate(const SystemParams& params) {
  return params.bandwidth * std::log2(1.0 + coalition_snr(params));
}

double mining_delay(double nonce, const SystemParams& params) {
  if (nonce < 0.0) throw std::invalid_argument("mining_delay: nonce must be >= 0");
  return params.header_size / transmission_rate(params) +
         params.cycles_per_nonce * nonce / params.ecp_freq;
}

double coalition_utility(double nonce, double others_nonce, double theta, double price) {
  const double total = nonce + others_nonce;
  if (total <= 0.0) return 0.0;
  return nonce / total * theta - nonce * price;
}

double mu_utility(double mu_nonce, double total_nonce, double theta, double price) {
  if (total_nonce <= 0.0) return 0.0;
  return mu_nonce / total_nonce * theta - mu_nonce * price;
}

double ecp_utility(double total_nonce, double price, double unit_cost) {
  return total_nonce * (price - unit_cost);
}

FeeIndex::FeeIndex(std::span<const MinerProfile> profiles, const TransactionPool& pool,
                   int block_tx_count)
    : block_tx_count_(block_tx_count) {
  top_.reserve(profiles.size());
  const auto k = static_cast<std::size_t>(std::max(block_tx_count, 0));
  for (const auto& profile : profiles) {
    std::vector<std::pair<double, int>> entries;
    entries.reserve(profile.collected.size());
    for (int id : profile.collected) entries.emplace_back(pool.fee(id), id);
    const auto keep = std::min(k, entries.size());
    std::partial_sort(entries.begin(), entries.begin() + static_cast<long>(keep), entries.end(),
                      std::greater<>());
    entries.resize(keep);
    top_.push_back(std::move(entries));
  }
}

double FeeIndex::coalition_fee(std::span<const int> members) const {
  // Any transaction in the union's top I is within the top I of whichever
  // member holds it, so merging the per-member lists is exact.
  if (members.size() == 1) {
    double total = 0.0;
    for (const auto& e : top_[static_cast<std::size_t>(members[0])]) total += e.first;
    return total;
  }
  std::vector<std::pair<double, int>> merged;
  merged.reserve(members.size() * static_cast<std::size_t>(block_tx_count_));
  for (int n : members) {
    const auto& t = top_[static_cast<std::size_t>(n)];
    merged.insert(merged.end(), t.begin(), t.end());
  }
  std::sort(merged.begin(), merged.end(), std::greater<>());
  double total = 0.0;
  int taken = 0;
  for (std::size_t i = 0; i < merged.size() && taken < block_tx_count_; ++i) {
    if (i > 0 && merged[i].second == merged[i - 1].second) continue;
    total += merged[i].first;
    ++taken;
  }
  return total;
}

}  // namespace coalmine
