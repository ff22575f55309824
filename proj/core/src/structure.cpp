#include "coalmine/structure.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace coalmine {

CoalitionStructure::CoalitionStructure(int n_mus, std::vector<Members> coalitions)
    : n_mus_(n_mus), coalitions_(std::move(coalitions)) {
  if (n_mus < 0) throw std::invalid_argument("coalition structure: negative miner count");
  for (auto& c : coalitions_) {
    if (c.empty()) throw std::invalid_argument("coalition structure: empty coalition");
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    if (c.front() < 0 || c.back() >= n_mus) {
      throw std::invalid_argument("coalition structure: miner id out of range");
    }
  }
  std::sort(coalitions_.begin(), coalitions_.end());
  coalitions_.erase(std::unique(coalitions_.begin(), coalitions_.end()), coalitions_.end());
}

CoalitionStructure CoalitionStructure::singletons(int n_mus) {
  std::vector<Members> cs;
  for (int n = 0; n < n_mus; ++n) cs.push_back({n});
  return {n_mus, std::move(cs)};
}

CoalitionStructure CoalitionStructure::grand(int n_mus) {
  if (n_mus == 0) return {0, {}};
  Members all(static_cast<std::size_t>(n_mus));
  for (int n = 0; n < n_mus; ++n) all[static_cast<std::size_t>(n)] = n;
  return {n_mus, {std::move(all)}};
}

CoalitionStructure CoalitionStructure::parse(int n_mus, const std::string& text) {
  std::vector<Members> cs;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    std::istringstream ids(colon == std::string::npos ? line : line.substr(colon + 1));
    Members m;
    int id;
    while (ids >> id) m.push_back(id);
    if (!ids.eof()) throw std::invalid_argument("coalition structure: bad line '" + line + "'");
    cs.push_back(std::move(m));
  }
  return {n_mus, std::move(cs)};
}

bool CoalitionStructure::contains(std::size_t m, int mu) const {
  const auto& c = coalitions_.at(m);
  return std::binary_search(c.begin(), c.end(), mu);
}

int CoalitionStructure::memberships(int mu) const {
  int count = 0;
  for (const auto& c : coalitions_) count += std::binary_search(c.begin(), c.end(), mu) ? 1 : 0;
  return count;
}

std::vector<std::size_t> CoalitionStructure::coalitions_of(int mu) const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < coalitions_.size(); ++m) {
    if (contains(m, mu)) out.push_back(m);
  }
  return out;
}

std::size_t CoalitionStructure::find(const Members& members) const {
  const auto it = std::lower_bound(coalitions_.begin(), coalitions_.end(), members);
  if (it != coalitions_.end() && *it == members) return static_cast<std::size_t>(it - coalitions_.begin());
  return coalitions_.size();
}

int CoalitionStructure::max_memberships() const {
  std::vector<int> count(static_cast<std::size_t>(n_mus_), 0);
  for (const auto& c : coalitions_) {
    for (int n : c) ++count[static_cast<std::size_t>(n)];
  }
  return count.empty() ? 0 : *std::max_element(count.begin(), count.end());
}

bool CoalitionStructure::within_capacity(int j) const { return max_memberships() <= j; }

std::string CoalitionStructure::to_string() const {
  std::ostringstream out;
  for (std::size_t m = 0; m < coalitions_.size(); ++m) {
    out << m << ':';
    for (int n : coalitions_[m]) out << ' ' << n;
    out << '\n';
  }
  return out.str();
}

double avg_members(const CoalitionStructure& structure) {
  if (structure.empty()) return 0.0;
  std::size_t total = 0;
  for (const auto& c : structure.coalitions()) total += c.size();
  return static_cast<double>(total) / static_cast<double>(structure.size());
}

}  // namespace coalmine
