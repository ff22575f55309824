#include "coalmine/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "coalmine/model.hpp"

namespace coalmine::oracle {
namespace {

double payoff(double own, double others, double theta, double price) {
  const double total = own + others;
  return total > 0.0 ? theta * own / total - price * own : 0.0;
}

std::uint64_t profile_count(const ErcInput& input) {
  std::uint64_t count = 1;
  for (long cap : input.caps) {
    if (cap < 0) throw std::invalid_argument("oracle: negative cap");
    const auto width = static_cast<std::uint64_t>(cap) + 1;
    if (count > kMaxProfiles / width) {
      throw std::invalid_argument("oracle: strategy space exceeds the enumeration limit");
    }
    count *= width;
  }
  return count;
}

}  // namespace

std::vector<std::vector<long>> brute_force_erc(const ErcInput& input) {
  if (input.theta.size() != input.caps.size()) {
    throw std::invalid_argument("oracle: theta and caps differ in length");
  }
  profile_count(input);
  const std::size_t count = input.theta.size();
  std::vector<std::vector<long>> equilibria;
  if (count == 0) return {{}};

  // best attainable payoff of coalition m against a given opponent total
  std::vector<std::map<long, double>> best(count);
  auto best_against = [&](std::size_t m, long others) {
    auto [it, fresh] = best[m].try_emplace(others, 0.0);
    if (fresh) {
      double top = payoff(0.0, static_cast<double>(others), input.theta[m], input.price);
      for (long l = 1; l <= input.caps[m]; ++l) {
        top = std::max(top, payoff(static_cast<double>(l), static_cast<double>(others),
                                   input.theta[m], input.price));
      }
      it->second = top;
    }
    return it->second;
  };

  std::vector<long> profile(count, 0);
  for (;;) {
    long total = 0;
    for (long l : profile) total += l;
    bool stable = true;
    for (std::size_t m = 0; m < count && stable; ++m) {
      const long others = total - profile[m];
      const double held =
          payoff(static_cast<double>(profile[m]), static_cast<double>(others), input.theta[m], input.price);
      const double top = best_against(m, others);
      stable = top - held <= 1e-12 * std::max(1.0, std::abs(held));
    }
    if (stable) equilibria.push_back(profile);

    std::size_t digit = 0;
    while (digit < count && profile[digit] == input.caps[digit]) profile[digit++] = 0;
    if (digit == count) break;
    ++profile[digit];
  }
  return equilibria;
}

std::vector<double> deviation_gains(const ErcInput& input, const std::vector<long>& profile) {
  if (profile.size() != input.theta.size() || input.caps.size() != input.theta.size()) {
    throw std::invalid_argument("oracle: profile does not match the input");
  }
  long total = 0;
  for (long l : profile) total += l;
  std::vector<double> gains(profile.size(), 0.0);
  for (std::size_t m = 0; m < profile.size(); ++m) {
    const double others = static_cast<double>(total - profile[m]);
    const double held = payoff(static_cast<double>(profile[m]), others, input.theta[m], input.price);
    double top = held;
    for (long l = 0; l <= input.caps[m]; ++l) {
      top = std::max(top, payoff(static_cast<double>(l), others, input.theta[m], input.price));
    }
    gains[m] = top - held;
  }
  return gains;
}

IterationReport best_response_iteration(const ErcInput& input, int max_iters, double damping) {
  if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("oracle: damping must lie in (0, 1]");
  const std::size_t count = input.theta.size();
  IterationReport report;
  report.nonce.resize(count);
  for (std::size_t m = 0; m < count; ++m) {
    report.nonce[m] = std::min(1.0, static_cast<double>(input.caps[m]));
  }
  std::vector<std::vector<double>> history{report.nonce};
  auto close = [](const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i] - b[i]) > 1e-9 * std::max(1.0, std::abs(b[i]))) return false;
    }
    return true;
  };

  for (int it = 1; it <= max_iters; ++it) {
    double total = 0.0;
    for (double l : report.nonce) total += l;
    std::vector<double> next(count);
    for (std::size_t m = 0; m < count; ++m) {
      const double others = total - report.nonce[m];
      if (others <= 0.0 && count > 1) {
        // any positive bid beats 0 but smaller is always better: no maximizer
        report.iterations = it;
        report.outcome = IterationReport::Outcome::no_best_response;
        return report;
      }
      const double raw = std::sqrt(input.theta[m] * others / input.price) - others;
      const double reply = std::clamp(raw, 0.0, static_cast<double>(input.caps[m]));
      next[m] = (1.0 - damping) * report.nonce[m] + damping * reply;
    }
    report.iterations = it;
    if (close(next, report.nonce)) {
      report.nonce = std::move(next);
      report.outcome = IterationReport::Outcome::fixed_point;
      return report;
    }
    // history.back() is the current iterate; earlier entries give periods >= 2
    for (std::size_t back = 2; back <= history.size() && back <= 8; ++back) {
      if (close(next, history[history.size() - back])) {
        report.nonce = std::move(next);
        report.outcome = IterationReport::Outcome::cycle;
        report.period = static_cast<int>(back);
        return report;
      }
    }
    report.nonce = next;
    history.push_back(std::move(next));
    if (history.size() > 8) history.erase(history.begin());
  }
  report.outcome = IterationReport::Outcome::exhausted;
  return report;
}

double finite_difference_gradient(double theta, double others, double price, double nonce, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("oracle: step must be > 0");
  return (payoff(nonce + h, others, theta, price) - payoff(nonce - h, others, theta, price)) / (2.0 * h);
}

std::string OracleReport::to_string() const {
  if (pass) return "PASS";
  std::ostringstream out;
  out << "FAIL";
  if (witness) {
    out << ": mu " << witness->mu << ' ' << witness->move << " gains " << witness->gain;
  }
  return out.str();
}

namespace {

using Coalition = std::set<int>;
using Layout = std::set<Coalition>;

std::string describe(const Coalition& c) {
  std::ostringstream out;
  out << '{';
  bool first = true;
  for (int n : c) {
    out << (first ? "" : ",") << n;
    first = false;
  }
  out << '}';
  return out.str();
}

std::string describe(const Layout& layout) {
  std::string text;
  for (const auto& c : layout) text += describe(c) + ' ';
  return text;
}

// Per-miner utility of a layout, assembled from the coalition payoffs.
std::vector<double> miner_utilities(const Layout& layout, double price, const MarketContext& market) {
  ErcInput input;
  input.price = price;
  std::vector<const Coalition*> order;
  for (const auto& c : layout) {
    const std::vector<int> members(c.begin(), c.end());
    input.theta.push_back(reward_factor(members, market.profiles, market.pool, market.params));
    input.caps.push_back(nonce_cap(market.params));
    order.push_back(&c);
  }
  const ErcEquilibrium eq = solve_erc(input);
  std::vector<double> xi(static_cast<std::size_t>(market.params.n_mus), 0.0);
  for (std::size_t m = 0; m < order.size(); ++m) {
    if (input.caps[m] == 0) continue;
    const double share = eq.utility[m] / static_cast<double>(order[m]->size());
    for (int n : *order[m]) xi[static_cast<std::size_t>(n)] += share;
  }
  return xi;
}

Layout rebuild(std::vector<Coalition> coalitions) {
  Layout out;
  for (auto& c : coalitions) {
    if (!c.empty()) out.insert(std::move(c));
  }
  return out;
}

struct Candidate {
  std::string label;
  Layout after;
  std::optional<Coalition> joined;
};

}  // namespace

OracleReport brute_force_stability(const CoalitionStructure& structure, double price,
                                   const MarketContext& market) {
  const int n_mus = market.params.n_mus;
  const int capacity = market.params.collaboration_factor;
  if (structure.n_mus() != n_mus) throw std::invalid_argument("oracle: structure size mismatch");

  Layout layout;
  for (const auto& members : structure.coalitions()) layout.insert(Coalition(members.begin(), members.end()));
  const std::vector<Coalition> base(layout.begin(), layout.end());
  const std::vector<double> before = miner_utilities(layout, price, market);

  auto tolerance = [](double ref) { return 1e-9 * std::max(1.0, std::abs(ref)); };

  for (int n = 0; n < n_mus; ++n) {
    std::vector<std::size_t> inside, outside;
    for (std::size_t i = 0; i < base.size(); ++i) (base[i].count(n) ? inside : outside).push_back(i);
    const bool spare = static_cast<int>(inside.size()) < capacity;

    std::vector<Candidate> candidates;
    auto with = [&](auto&& edit, std::string label, std::optional<Coalition> joined) {
      std::vector<Coalition> cs = base;
      edit(cs);
      candidates.push_back({std::move(label), rebuild(std::move(cs)), std::move(joined)});
    };
    for (std::size_t t : outside) {
      if (spare) {
        with([&](auto& cs) { cs[t].insert(n); }, "joins " + describe(base[t]), base[t]);
      }
      for (std::size_t s : inside) {
        with([&](auto& cs) { cs[s].erase(n); cs[t].insert(n); },
             "moves from " + describe(base[s]) + " to " + describe(base[t]), base[t]);
      }
    }
    if (spare) with([&](auto& cs) { cs.push_back({n}); }, "opens a solo coalition", std::nullopt);
    for (std::size_t s : inside) {
      with([&](auto& cs) { cs[s].erase(n); cs.push_back({n}); }, "splits off from " + describe(base[s]),
           std::nullopt);
      with([&](auto& cs) { cs[s].erase(n); }, "leaves " + describe(base[s]), std::nullopt);
    }

    for (const auto& cand : candidates) {
      if (cand.after == layout) continue;
      int held = 0;
      for (const auto& c : cand.after) held += static_cast<int>(c.count(n));
      if (held > capacity) continue;
      const std::vector<double> after = miner_utilities(cand.after, price, market);
      const auto a = static_cast<std::size_t>(n);
      const double gain = after[a] - before[a];
      if (!(gain > tolerance(before[a]))) continue;
      bool consent = true;
      if (cand.joined) {
        for (int k : *cand.joined) {
          const auto i = static_cast<std::size_t>(k);
          if (before[i] - after[i] > tolerance(before[i])) consent = false;
        }
      }
      if (!consent) continue;
      OracleReport report;
      report.pass = false;
      report.witness = Witness{n, cand.label, gain, describe(cand.after)};
      return report;
    }
  }
  return {};
}

}  // namespace coalmine::oracle
