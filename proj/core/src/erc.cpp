#include "coalmine/erc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "coalmine/model.hpp"

namespace coalmine {
namespace {

constexpr double kRelTol = 1e-12;

void check_input(const ErcInput& in) {
  if (in.theta.size() != in.caps.size()) {
    throw std::invalid_argument("erc: theta and caps differ in length");
  }
  if (!(in.price > 0.0) || !std::isfinite(in.price)) {
    throw std::invalid_argument("erc: price must be > 0");
  }
  for (std::size_t m = 0; m < in.theta.size(); ++m) {
    if (!(in.theta[m] > 0.0) || !std::isfinite(in.theta[m])) {
      throw std::invalid_argument("erc: reward factors must be > 0");
    }
    if (in.caps[m] < 0) throw std::invalid_argument("erc: nonce caps must be >= 0");
  }
}

// Total bid S when the interior set has `count` members with sum of 1/theta
// equal to `inv_sum`, and the pinned coalitions contribute `fixed`:
//   p inv_sum S^2 - (count - 1) S - fixed = 0.
double interior_total(std::size_t count, double inv_sum, double fixed, double price) {
  if (count == 0) return fixed;
  const double k1 = static_cast<double>(count) - 1.0;
  if (fixed <= 0.0) return k1 / (price * inv_sum);
  return (k1 + std::sqrt(k1 * k1 + 4.0 * price * fixed * inv_sum)) / (2.0 * price * inv_sum);
}

}  // namespace

long nonce_cap(const SystemParams& params) {
  const double rate = transmission_rate(params);
  const double budget = params.avg_block_time * rate - params.header_size;
  if (!(budget > 0.0)) return 0;
  const double cap = params.ecp_freq * budget / (params.cycles_per_nonce * rate);
  return static_cast<long>(std::floor(cap));
}

BestResponse best_response(double theta, double others, double price, long cap) {
  if (price <= 0.0) return {static_cast<double>(cap), true};
  const double raw = std::sqrt(theta * others / price) - others;
  return {std::clamp(raw, 0.0, static_cast<double>(cap)), false};
}

double utility_gradient(double theta, double others, double price, double nonce) {
  const double total = nonce + others;
  return theta * others / (total * total) - price;
}

RealSolution closed_form_ne(const ErcInput& input) {
  check_input(input);
  const std::size_t count = input.theta.size();
  const double p = input.price;
  RealSolution sol;
  sol.nonce.assign(count, 0.0);
  sol.regime.assign(count, Regime::interior);
  if (count == 0) return sol;

  if (count == 1) {
    sol.regime[0] = Regime::monopoly;
    sol.nonce[0] = (input.theta[0] > p && input.caps[0] >= 1) ? 1.0 : 0.0;
    sol.total = sol.nonce[0];
    return sol;
  }

  for (std::size_t m = 0; m < count; ++m) {
    if (input.caps[m] == 0) sol.regime[m] = Regime::capped;
  }

  // Active-set iteration. Each pass fixes at most one inconsistency; the
  // bound is generous since every coalition settles after O(M) changes.
  const std::size_t max_passes = 8 * count * count + 16;
  double total = 0.0;
  for (std::size_t pass = 0;; ++pass) {
    if (pass == max_passes) throw std::runtime_error("erc: active-set iteration did not settle");

    std::size_t n_interior = 0;
    double inv_sum = 0.0;
    double fixed = 0.0;
    for (std::size_t m = 0; m < count; ++m) {
      if (sol.regime[m] == Regime::interior) {
        ++n_interior;
        inv_sum += 1.0 / input.theta[m];
      } else if (sol.regime[m] == Regime::capped) {
        fixed += static_cast<double>(input.caps[m]);
      }
    }
    total = interior_total(n_interior, inv_sum, fixed, p);
    for (std::size_t m = 0; m < count; ++m) {
      switch (sol.regime[m]) {
        case Regime::interior: sol.nonce[m] = total - p * total * total / input.theta[m]; break;
        case Regime::capped: sol.nonce[m] = static_cast<double>(input.caps[m]); break;
        default: sol.nonce[m] = 0.0; break;
      }
    }

    const double tol = kRelTol * std::max(total, 1.0);
    std::size_t pick = count;
    // 1. interior bids below zero: drop the most negative
    for (std::size_t m = 0; m < count; ++m) {
      if (sol.regime[m] == Regime::interior && sol.nonce[m] < -tol &&
          (pick == count || sol.nonce[m] < sol.nonce[pick])) {
        pick = m;
      }
    }
    if (pick != count) {
      sol.regime[pick] = Regime::zeroed;
      continue;
    }
    // 2. interior bids above the cap: pin the largest overshoot
    double overshoot = 0.0;
    for (std::size_t m = 0; m < count; ++m) {
      const double over = sol.nonce[m] - static_cast<double>(input.caps[m]);
      if (sol.regime[m] == Regime::interior && over > tol && over > overshoot) {
        overshoot = over;
        pick = m;
      }
    }
    if (pick != count) {
      sol.regime[pick] = Regime::capped;
      continue;
    }
    // 3. zeroed coalitions that would now bid: readmit the strongest
    for (std::size_t m = 0; m < count; ++m) {
      if (sol.regime[m] == Regime::zeroed && input.theta[m] > p * total * (1.0 + kRelTol) &&
          (pick == count || input.theta[m] > input.theta[pick])) {
        pick = m;
      }
    }
    if (pick != count) {
      sol.regime[pick] = Regime::interior;
      continue;
    }
    // 4. pinned coalitions whose unconstrained bid fell below the cap
    for (std::size_t m = 0; m < count; ++m) {
      if (sol.regime[m] != Regime::capped || input.caps[m] == 0) continue;
      const double others = total - static_cast<double>(input.caps[m]);
      if (input.theta[m] * others < p * total * total * (1.0 - kRelTol)) {
        pick = m;
        break;
      }
    }
    if (pick != count) {
      sol.regime[pick] = Regime::interior;
      continue;
    }
    break;
  }

  // A lone unpinned bidder facing no demand from anyone else has no interior
  // optimum; it follows the monopoly rule.
  if (total <= 0.0) {
    for (std::size_t m = 0; m < count; ++m) {
      if (sol.regime[m] == Regime::interior) {
        sol.regime[m] = Regime::monopoly;
        sol.nonce[m] = (input.theta[m] > p && input.caps[m] >= 1) ? 1.0 : 0.0;
        total += sol.nonce[m];
      }
    }
  }
  sol.total = total;
  return sol;
}

ErcEquilibrium integer_ne(const RealSolution& real, const ErcInput& input) {
  check_input(input);
  const std::size_t count = input.theta.size();
  if (real.nonce.size() != count || real.regime.size() != count) {
    throw std::invalid_argument("erc: real solution does not match the input");
  }
  // opponents of coalition m: integers already chosen below m, real bids above
  std::vector<double> above(count + 1, 0.0);
  for (std::size_t m = count; m-- > 0;) above[m] = above[m + 1] + real.nonce[m];
  ErcEquilibrium eq;
  eq.nonce.assign(count, 0);
  for (std::size_t m = 0; m < count; ++m) {
    const double cap = static_cast<double>(input.caps[m]);
    const double target = std::clamp(real.nonce[m], 0.0, cap);
    const double lo = std::floor(target);
    const double hi = std::min(std::ceil(target), cap);
    double chosen = lo;
    if (hi > lo) {
      const double others = static_cast<double>(eq.total_nonce) + above[m + 1];
      const double u_lo = coalition_utility(lo, others, input.theta[m], input.price);
      const double u_hi = coalition_utility(hi, others, input.theta[m], input.price);
      chosen = u_hi > u_lo ? hi : lo;
    }
    eq.nonce[m] = static_cast<long>(chosen);
    eq.total_nonce += eq.nonce[m];
  }
  eq.utility.resize(count);
  for (std::size_t m = 0; m < count; ++m) {
    const double own = static_cast<double>(eq.nonce[m]);
    eq.utility[m] = coalition_utility(own, static_cast<double>(eq.total_nonce) - own,
                                      input.theta[m], input.price);
  }
  return eq;
}

ErcEquilibrium solve_erc(const ErcInput& input) { return integer_ne(closed_form_ne(input), input); }

void allocate_uniform(ErcEquilibrium& eq, const CoalitionStructure& structure) {
  if (eq.nonce.size() != structure.size()) {
    throw std::invalid_argument("allocate_uniform: equilibrium does not match the structure");
  }
  eq.allocations.assign(structure.size(), {});
  for (std::size_t m = 0; m < structure.size(); ++m) {
    const auto& members = structure.members(m);
    const double size = static_cast<double>(members.size());
    const double nonce = static_cast<double>(eq.nonce[m]);
    auto& shares = eq.allocations[m];
    shares.reserve(members.size());
    double nonce_left = nonce;
    double utility_left = eq.utility[m];
    for (std::size_t i = 0; i < members.size(); ++i) {
      MuShare s{members[i], nonce / size, eq.utility[m] / size};
      if (i + 1 == members.size()) {
        s.nonce = nonce_left;
        s.utility = utility_left;
      }
      nonce_left -= s.nonce;
      utility_left -= s.utility;
      shares.push_back(s);
    }
  }
}

double gap_bound(double theta, double others, double price, long cap) {
  if (others <= 0.0) return std::numeric_limits<double>::infinity();
  // the gradient is monotone decreasing in the own bid, so |gradient| peaks
  // at an end of [0, cap]
  return std::max(std::abs(utility_gradient(theta, others, price, 0.0)),
                  std::abs(utility_gradient(theta, others, price, static_cast<double>(cap))));
}

}  // namespace coalmine
