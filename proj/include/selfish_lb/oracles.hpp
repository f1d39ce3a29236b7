#pragma once

#include <optional>
#include <string>
#include <vector>

#include "selfish_lb/core.hpp"
#include "selfish_lb/lqnorm.hpp"

namespace slb {

/// Largest m^n the exhaustive oracles accept.
inline constexpr double kBruteforceGuard = 1e8;

enum class OptMethod { Bruteforce, LowerBound };

struct OptResult {
  double value = 0.0;
  std::optional<Rat> exact;             // set whenever the value is exact
  OptMethod method = OptMethod::Bruteforce;
  std::optional<std::vector<int>> witness;
};

/// Throws InputError naming the guard when m^n exceeds kBruteforceGuard.
void check_bruteforce_guard(const Instance& instance);

/// Exact minimum makespan over all integral assignments (true speeds).
OptResult opt_makespan_bruteforce(const Instance& instance);

/// max(sum p / sum s, max p / s_max).
Rat lb_makespan(const Instance& instance);

/// Minimum lq objective over integral assignments. Float comparisons with
/// tolerance 1e-9; ties go to the lexicographically smallest witness. q = 1
/// and q = inf are evaluated exactly.
OptResult opt_lq_bruteforce(const Instance& instance, const QParam& q);

/// max(sum p / (sum s^gamma)^(1/gamma), max p / s_max).
double lb_lq(const Instance& instance, const QParam& q);

/// lq objective of an integral assignment with the true speeds.
double lq_of_assignment(const Instance& instance, const std::vector<int>& assign, const QParam& q);

}  // namespace slb
