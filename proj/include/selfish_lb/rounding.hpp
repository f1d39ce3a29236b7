#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "selfish_lb/allocation.hpp"

namespace slb {

/// Generator used for every sampled assignment. Bumped whenever the sampling
/// procedure changes so stored assignments can be replayed.
inline constexpr const char* kRoundingGenerator = "mt19937_64/inverse-cdf/v1";

struct IntegralAssignment {
  std::vector<int> assign;       // machine of each job
  std::uint64_t seed = 0;
  std::string generator = kRoundingGenerator;
  std::vector<Rat> loads;        // total size per machine
  std::vector<Rat> completion;   // loads[i] / speeds[i]

  Rat makespan() const;
  friend bool operator==(const IntegralAssignment&, const IntegralAssignment&) = default;
};

/// Draws each job's machine independently from its row. The k-th 64-bit draw
/// u is read as the exact rational u / 2^64 and mapped through the cumulative
/// row. Throws InvariantViolation if a row does not sum to exactly 1.
IntegralAssignment round_independent(const AllocationTrace& trace, std::uint64_t seed);

/// Same draw for a single row; exposed for the incremental realized-cost mode.
int sample_row(const Row& row, std::uint64_t draw);

/// L_i = sum_j X[j][i] * p_j.
std::vector<Rat> expected_loads(const AllocationTrace& trace);

}  // namespace slb
