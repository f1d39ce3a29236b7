#include "selfish_lb/rounding.hpp"

#include <random>

namespace slb {

Rat IntegralAssignment::makespan() const {
  Rat best = 0;
  for (const auto& c : completion) best = max(best, c);
  return best;
}

int sample_row(const Row& row, std::uint64_t draw) {
  if (row.machines.empty()) throw InvariantViolation("empty row");
  const Rat u = Rat(mpq_class(mpz_class(std::to_string(draw)), mpz_class(1) << 64));
  Rat cumulative = 0;
  for (std::size_t t = 0; t < row.machines.size(); ++t) {
    cumulative += row.fractions[t];
    if (u < cumulative) return row.machines[t];
  }
  return row.machines.back();
}

IntegralAssignment round_independent(const AllocationTrace& trace, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  IntegralAssignment out;
  out.seed = seed;
  out.loads.assign(trace.m(), Rat(0));
  out.assign.reserve(trace.n());
  for (std::size_t j = 0; j < trace.n(); ++j) {
    const auto& rec = trace.jobs[j];
    if (rec.row.sum() != Rat(1)) {
      throw InvariantViolation("row " + std::to_string(j) + " does not sum to 1");
    }
    const int i = sample_row(rec.row, gen());
    out.assign.push_back(i);
    out.loads[i] += rec.size;
  }
  out.completion.reserve(trace.m());
  for (std::size_t i = 0; i < trace.m(); ++i) out.completion.push_back(out.loads[i] / trace.speeds[i]);
  return out;
}

std::vector<Rat> expected_loads(const AllocationTrace& trace) { return trace.loads(); }

}  // namespace slb
