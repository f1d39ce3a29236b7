#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "selfish_lb/allocation.hpp"
#include "selfish_lb/mechanism.hpp"
#include "selfish_lb/rounding.hpp"

namespace slb {

// ---------------------------------------------------------------------------
// Job side

/// One constant piece of a job's allocation as a function of its reported
/// size: the row used for every p in (lo, hi], hi = nullopt meaning +inf.
struct CurvePiece {
  Rat lo;
  std::optional<Rat> hi;
  int level = 1;
  bool super_large = false;
  Row row;
  Rat unit_time;  // sum x_i / s_i with the true speeds
};

/// Step function p -> row for one arrival, pieces in increasing p.
struct JobCurve {
  std::vector<CurvePiece> pieces;

  const CurvePiece& at(const Rat& p) const;  // p > 0
  /// The right-limit at 0, i.e. the row of the smallest sizes.
  const CurvePiece& at_zero() const { return pieces.front(); }
  /// Integral of the unit processing time over (0, p].
  Rat integral_unit_time(const Rat& p) const;
  /// Finite piece endpoints in increasing order.
  std::vector<Rat> breakpoints() const;
};

/// Curve of a level-based allocator at an arrival with guessed optimum
/// `lambda`. Breakpoints sit at r_K*lambda < ... < r_1*lambda; sizes above
/// r_1*lambda form the super-large piece with the level-1 row.
JobCurve job_allocation_curve(const LevelStructure& levels, const Rat& lambda,
                              const std::vector<Rat>& speeds,
                              const std::function<Row(int)>& row_of_level);

/// Curve of the first job: its row does not depend on its size.
JobCurve constant_curve(const Row& row, const std::vector<Rat>& speeds);

/// Q_j(p) with Q_j(0) = 0. `completion` holds each machine's completion time
/// C_i^(j) just before the job arrives. Throws InputError for p < 0.
Rat job_charge(const JobCurve& curve, const std::vector<Rat>& completion, const Rat& p);

/// -(F + Q) for a job of true size `truth` reporting `report`, where F is its
/// expected completion time sum_i x_i (C_i + truth / s_i).
Rat job_utility(const JobCurve& curve, const std::vector<Rat>& completion,
                const std::vector<Rat>& speeds, const Rat& truth, const Rat& report);

// ---------------------------------------------------------------------------
// Machine side

/// L_i as a function of machine i's rounded report 2^t, sampled for t in
/// [lo_exp, hi_exp]. Below the range L = 0 (machine ignored) and above it
/// L = total job size; both plateaus are checked when the curve is built.
struct MachineLoadCurve {
  int machine = 0;
  long lo_exp = 0;
  long hi_exp = 0;
  std::vector<Rat> loads;  // loads[t - lo_exp]
  Rat total;               // sum of all job sizes
  bool single_machine = false;

  Rat load_at_exp(long t) const;
  Rat load_at(const Rat& speed) const { return load_at_exp(speed.floor_log2()); }
};

MachineLoadCurve machine_load_curve(const Instance& instance, int machine, const MechanismSpec& spec);

/// P(b) = b L(b) + integral_b^inf L(t) dt with b = 1 / reported_speed,
/// summed exactly over octave pieces. With a single machine the integral has
/// no slow plateau and is taken up to `bid_cap`, which is then required.
Rat machine_payment(const MachineLoadCurve& curve, const Rat& reported_speed,
                    const std::optional<Rat>& bid_cap = std::nullopt);

/// P(report) - L(report) / true_speed.
Rat machine_utility(const MachineLoadCurve& curve, const Rat& true_speed, const Rat& reported_speed,
                    const std::optional<Rat>& bid_cap = std::nullopt);

/// Default bid cap used for a single machine: 4m / s_bar, i.e. the slowest
/// octave the load curve of a multi-machine instance would sample.
Rat default_bid_cap(const Rat& reported_speed, std::size_t m);

// ---------------------------------------------------------------------------
// Ledger

/// Which completion times a job's charge is computed against.
enum class CostMode { Fractional, Realized };

struct PaymentOptions {
  CostMode mode = CostMode::Fractional;
  std::uint64_t seed = 0;          // used by CostMode::Realized
  std::optional<Rat> bid_cap;      // single-machine payment cap
};

struct PaymentLedger {
  std::string mechanism;
  CostMode mode = CostMode::Fractional;
  std::uint64_t seed = 0;
  std::optional<Rat> bid_cap;
  std::vector<Rat> job_charges;
  std::vector<JobCurve> job_curves;
  std::vector<std::vector<Rat>> completion_before;  // C_i^(j)
  std::vector<Rat> machine_payments;
  std::vector<Rat> machine_loads;
  std::vector<MachineLoadCurve> machine_curves;
  std::optional<IntegralAssignment> realized;
};

/// Requires a level-based mechanism (makespan or lq).
PaymentLedger compute_ledger(const Instance& instance, const MechanismSpec& spec,
                             const PaymentOptions& opts = {});

struct AgentUtilities {
  std::vector<Rat> machines;  // P_i - L_i / s_i
  std::vector<Rat> jobs;      // -(F_j + Q_j)
};

AgentUtilities utilities(const Instance& instance, const PaymentLedger& ledger);

/// Row of level k for a level-based mechanism on the given levels.
std::function<Row(int)> level_row_function(const MechanismSpec& spec, const std::vector<Rat>& speeds);

}  // namespace slb
