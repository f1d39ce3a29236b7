#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfish_lb/errors.hpp"
#include "selfish_lb/rat.hpp"

namespace slb {

/// Reported machine speeds and job sizes, jobs in arrival order.
struct Instance {
  std::vector<Rat> speeds;
  std::vector<Rat> jobs;

  std::size_t m() const { return speeds.size(); }
  std::size_t n() const { return jobs.size(); }
  /// Throws InputError unless m >= 1, n >= 1 and every value is positive.
  void validate() const;

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct MachineProfile {
  int id = 0;
  Rat reported_speed;
  Rat rounded_speed;  // 2^z <= reported_speed < 2^(z+1)
  bool active = false;
  std::optional<int> group;  // 1-based level index when active

  friend bool operator==(const MachineProfile&, const MachineProfile&) = default;
};

/// The K speed groups. Levels are 1-based: group(k), r(k) and prefix(k)
/// accept k in [1, K].
struct LevelStructure {
  int K = 0;
  long top_exponent = 0;  // log2 of the largest rounded speed
  std::vector<MachineProfile> machines;
  std::vector<Rat> group_speeds;
  std::vector<std::vector<int>> groups;
  std::vector<std::vector<int>> prefix_sets;  // M<=k ordered by level, then id
  std::vector<Rat> prefix_speed_sum;

  int m() const { return static_cast<int>(machines.size()); }
  const Rat& r(int k) const { return group_speeds.at(k - 1); }
  const std::vector<int>& group(int k) const { return groups.at(k - 1); }
  const std::vector<int>& prefix(int k) const { return prefix_sets.at(k - 1); }
  const Rat& speed_sum(int k) const { return prefix_speed_sum.at(k - 1); }
  const Rat& rounded(int i) const { return machines.at(i).rounded_speed; }
  /// Lowest-id machine of M_1; it belongs to every feasible set.
  int lead() const { return groups.front().front(); }
  int active_count() const;

  friend bool operator==(const LevelStructure&, const LevelStructure&) = default;
};

/// Largest power of two not exceeding s.
Rat round_speed(const Rat& s);

/// floor(log2 m) + 1 computed from the bit length of m.
int level_count(std::size_t m);

LevelStructure build_levels(const std::vector<Rat>& speeds);

}  // namespace slb
