#include "selfish_lb/core.hpp"

#include <bit>

namespace slb {

void Instance::validate() const {
  if (speeds.empty()) throw InputError("instance has no machines");
  if (jobs.empty()) throw InputError("instance has no jobs");
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    if (speeds[i].sign() <= 0) {
      throw InputError("speeds[" + std::to_string(i) + "] must be positive, got " + speeds[i].str());
    }
  }
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (jobs[j].sign() <= 0) {
      throw InputError("jobs[" + std::to_string(j) + "] must be positive, got " + jobs[j].str());
    }
  }
}

int LevelStructure::active_count() const {
  int c = 0;
  for (const auto& mp : machines) c += mp.active ? 1 : 0;
  return c;
}

Rat round_speed(const Rat& s) {
  if (s.sign() <= 0) throw InputError("speed must be positive, got " + s.str());
  return Rat::pow2(s.floor_log2());
}

int level_count(std::size_t m) {
  if (m == 0) throw InputError("machine count must be positive");
  return static_cast<int>(std::bit_width(m));
}

LevelStructure build_levels(const std::vector<Rat>& speeds) {
  if (speeds.empty()) throw InputError("instance has no machines");
  LevelStructure ls;
  const int m = static_cast<int>(speeds.size());
  ls.K = level_count(speeds.size());
  ls.machines.resize(m);

  std::vector<long> exps(m);
  long top = 0;
  for (int i = 0; i < m; ++i) {
    if (speeds[i].sign() <= 0) {
      throw InputError("speeds[" + std::to_string(i) + "] must be positive, got " + speeds[i].str());
    }
    exps[i] = speeds[i].floor_log2();
    if (i == 0 || exps[i] > top) top = exps[i];
    ls.machines[i].id = i;
    ls.machines[i].reported_speed = speeds[i];
    ls.machines[i].rounded_speed = Rat::pow2(exps[i]);
  }
  ls.top_exponent = top;

  ls.groups.assign(ls.K, {});
  for (int k = 1; k <= ls.K; ++k) ls.group_speeds.push_back(Rat::pow2(top - (k - 1)));

  // Active iff 2^(top - exp_i) <= m, i.e. the level top - exp_i + 1 <= K.
  for (int i = 0; i < m; ++i) {
    const long drop = top - exps[i];
    const bool active = ls.machines[i].rounded_speed * Rat(m) >= ls.group_speeds.front();
    ls.machines[i].active = active;
    if (active) {
      const int k = static_cast<int>(drop) + 1;
      if (k > ls.K) throw InvariantViolation("active machine outside the level range");
      ls.machines[i].group = k;
      ls.groups[k - 1].push_back(i);
    }
  }

  Rat sum = 0;
  std::vector<int> prefix;
  for (int k = 1; k <= ls.K; ++k) {
    for (int i : ls.groups[k - 1]) {
      prefix.push_back(i);
      sum += ls.machines[i].rounded_speed;
    }
    ls.prefix_sets.push_back(prefix);
    ls.prefix_speed_sum.push_back(sum);
  }
  return ls;
}

}  // namespace slb
