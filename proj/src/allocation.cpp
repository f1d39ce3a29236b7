#include "selfish_lb/allocation.hpp"

namespace slb {

Rat Row::sum() const {
  Rat s = 0;
  for (const auto& x : fractions) s += x;
  return s;
}

Rat Row::at(int machine) const {
  for (std::size_t t = 0; t < machines.size(); ++t) {
    if (machines[t] == machine) return fractions[t];
  }
  return Rat(0);
}

Rat Row::unit_time(const std::vector<Rat>& speeds) const {
  Rat u = 0;
  for (std::size_t t = 0; t < machines.size(); ++t) u += fractions[t] / speeds.at(machines[t]);
  return u;
}

std::vector<Rat> AllocationTrace::loads() const {
  std::vector<Rat> out(speeds.size(), Rat(0));
  for (const auto& rec : jobs) {
    for (std::size_t t = 0; t < rec.row.machines.size(); ++t) {
      out[rec.row.machines[t]] += rec.row.fractions[t] * rec.size;
    }
  }
  return out;
}

Rat AllocationTrace::makespan() const {
  const auto l = loads();
  Rat best = 0;
  for (std::size_t i = 0; i < l.size(); ++i) best = max(best, l[i] / speeds[i]);
  return best;
}

AllocationTrace run_online(OnlineAllocator& alloc, const std::vector<Rat>& jobs) {
  for (const auto& p : jobs) alloc.push(p);
  return alloc.trace();
}

}  // namespace slb
