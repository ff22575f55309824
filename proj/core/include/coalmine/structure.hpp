#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace coalmine {

using Members = std::vector<int>;

/// An overlapping coalition structure over miners 0..N-1.
///
/// Coalitions are identified by their member sets: members are kept sorted,
/// duplicate member sets collapse into one, and the coalition list itself is
/// kept in lexicographic order so that a structure has exactly one
/// representation. Miners that belong to no coalition are idle.
class CoalitionStructure {
 public:
  CoalitionStructure() = default;

  /// Throws std::invalid_argument on an empty coalition or an out-of-range id.
  CoalitionStructure(int n_mus, std::vector<Members> coalitions);

  static CoalitionStructure singletons(int n_mus);
  static CoalitionStructure grand(int n_mus);

  /// Inverse of to_string(); the indices on each line are ignored.
  static CoalitionStructure parse(int n_mus, const std::string& text);

  int n_mus() const noexcept { return n_mus_; }
  std::size_t size() const noexcept { return coalitions_.size(); }
  bool empty() const noexcept { return coalitions_.empty(); }
  const Members& members(std::size_t m) const { return coalitions_.at(m); }
  const std::vector<Members>& coalitions() const noexcept { return coalitions_; }

  bool contains(std::size_t m, int mu) const;
  int memberships(int mu) const;
  std::vector<std::size_t> coalitions_of(int mu) const;
  /// Index of the coalition with exactly these (sorted) members, or size().
  std::size_t find(const Members& members) const;

  /// Every miner belongs to at most `j` coalitions.
  bool within_capacity(int j) const;
  int max_memberships() const;

  /// One line per coalition: `index: id id id`.
  std::string to_string() const;

  friend bool operator==(const CoalitionStructure&, const CoalitionStructure&) = default;

 private:
  int n_mus_ = 0;
  std::vector<Members> coalitions_;
};

/// Average coalition size: sum of member counts over the number of coalitions
/// (0 for an empty structure).
double avg_members(const CoalitionStructure& structure);

}  // namespace coalmine
