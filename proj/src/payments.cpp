#include "selfish_lb/payments.hpp"

#include <bit>
#include <memory>

namespace slb {

// ---------------------------------------------------------------------------
// Job side

const CurvePiece& JobCurve::at(const Rat& p) const {
  if (p.sign() <= 0) return pieces.front();
  for (const auto& piece : pieces) {
    if (!piece.hi || p <= *piece.hi) return piece;
  }
  return pieces.back();
}

Rat JobCurve::integral_unit_time(const Rat& p) const {
  Rat acc = 0;
  for (const auto& piece : pieces) {
    if (p <= piece.lo) break;
    const Rat top = piece.hi ? min(p, *piece.hi) : p;
    acc += (top - piece.lo) * piece.unit_time;
  }
  return acc;
}

std::vector<Rat> JobCurve::breakpoints() const {
  std::vector<Rat> out;
  for (const auto& piece : pieces) {
    if (piece.hi) out.push_back(*piece.hi);
  }
  return out;
}

JobCurve job_allocation_curve(const LevelStructure& levels, const Rat& lambda,
                              const std::vector<Rat>& speeds,
                              const std::function<Row(int)>& row_of_level) {
  if (lambda.sign() <= 0) throw InputError("lambda must be positive, got " + lambda.str());
  JobCurve curve;
  for (int k = levels.K; k >= 1; --k) {
    CurvePiece piece;
    piece.lo = k == levels.K ? Rat(0) : levels.r(k + 1) * lambda;
    piece.hi = levels.r(k) * lambda;
    piece.level = k;
    piece.row = row_of_level(k);
    piece.unit_time = piece.row.unit_time(speeds);
    curve.pieces.push_back(std::move(piece));
  }
  CurvePiece big;
  big.lo = levels.r(1) * lambda;
  big.level = 1;
  big.super_large = true;
  big.row = row_of_level(1);
  big.unit_time = big.row.unit_time(speeds);
  curve.pieces.push_back(std::move(big));
  return curve;
}

JobCurve constant_curve(const Row& row, const std::vector<Rat>& speeds) {
  CurvePiece piece;
  piece.lo = 0;
  piece.row = row;
  piece.unit_time = row.unit_time(speeds);
  return JobCurve{{piece}};
}

Rat job_charge(const JobCurve& curve, const std::vector<Rat>& completion, const Rat& p) {
  if (p.sign() < 0) throw InputError("reported size must be nonnegative, got " + p.str());
  if (p.is_zero()) return Rat(0);
  const CurvePiece& now = curve.at(p);
  const CurvePiece& zero = curve.at_zero();
  Rat shift = 0;
  for (std::size_t i = 0; i < completion.size(); ++i) {
    const int id = static_cast<int>(i);
    const Rat dx = now.row.at(id) - zero.row.at(id);
    if (!dx.is_zero()) shift += completion[i] * dx;
  }
  return -(shift + p * now.unit_time - curve.integral_unit_time(p));
}

Rat job_utility(const JobCurve& curve, const std::vector<Rat>& completion,
                const std::vector<Rat>& speeds, const Rat& truth, const Rat& report) {
  const CurvePiece& piece = curve.at(report);
  Rat waiting = 0;
  for (std::size_t t = 0; t < piece.row.machines.size(); ++t) {
    waiting += piece.row.fractions[t] * completion.at(piece.row.machines[t]);
  }
  const Rat f = waiting + truth * piece.row.unit_time(speeds);
  return -(f + job_charge(curve, completion, report));
}

// ---------------------------------------------------------------------------
// Machine side

Rat MachineLoadCurve::load_at_exp(long t) const {
  if (single_machine) return total;
  if (t < lo_exp) return Rat(0);
  if (t > hi_exp) return total;
  return loads.at(static_cast<std::size_t>(t - lo_exp));
}

MachineLoadCurve machine_load_curve(const Instance& instance, int machine, const MechanismSpec& spec) {
  instance.validate();
  const std::size_t m = instance.m();
  if (machine < 0 || static_cast<std::size_t>(machine) >= m) {
    throw InputError("machine index " + std::to_string(machine) + " out of range");
  }
  MachineLoadCurve curve;
  curve.machine = machine;
  for (const auto& p : instance.jobs) curve.total += p;

  auto load_with = [&](long t) {
    Instance probe = instance;
    probe.speeds[machine] = Rat::pow2(t);
    return run_mechanism(spec, probe).loads()[machine];
  };

  if (m == 1) {
    curve.single_machine = true;
    curve.lo_exp = curve.hi_exp = instance.speeds[0].floor_log2();
    curve.loads = {curve.total};
    return curve;
  }

  long t_other = 0;
  bool first = true;
  for (std::size_t i = 0; i < m; ++i) {
    if (static_cast<int>(i) == machine) continue;
    const long t = instance.speeds[i].floor_log2();
    if (first || t > t_other) t_other = t;
    first = false;
  }
  // ceil(log2(4m)) octaves on either side of the fastest competitor.
  const long width = static_cast<long>(std::bit_width(4 * m - 1));
  curve.lo_exp = t_other - width;
  curve.hi_exp = t_other + width;
  for (long t = curve.lo_exp; t <= curve.hi_exp; ++t) curve.loads.push_back(load_with(t));

  if (!curve.loads.front().is_zero()) {
    throw InvariantViolation("machine " + std::to_string(machine) + " still loaded at the slow end of its curve");
  }
  if (curve.loads.back() != curve.total) {
    throw InvariantViolation("machine " + std::to_string(machine) + " not saturated at the fast end of its curve");
  }
  return curve;
}

Rat default_bid_cap(const Rat& reported_speed, std::size_t m) {
  return Rat(static_cast<long>(4 * m)) / round_speed(reported_speed);
}

Rat machine_payment(const MachineLoadCurve& curve, const Rat& reported_speed, const std::optional<Rat>& bid_cap) {
  if (reported_speed.sign() <= 0) throw InputError("speed must be positive, got " + reported_speed.str());
  if (curve.single_machine) {
    if (!bid_cap) throw InputError("a single-machine payment needs a bid cap");
    return *bid_cap * curve.total;
  }
  const long tr = reported_speed.floor_log2();
  if (tr < curve.lo_exp) return Rat(0);

  const Rat here = curve.load_at_exp(tr);
  // Own octave: b * L + L * (2^-tr - b), independent of b.
  Rat pay = here * Rat::pow2(-tr);
  // Slower octaves t in [lo, tr-1], each of width 2^(-t-1). Past hi the load
  // is the total, which sums in closed form.
  const long top_sampled = std::min(tr - 1, curve.hi_exp);
  for (long t = curve.lo_exp; t <= top_sampled; ++t) {
    pay += curve.load_at_exp(t) * Rat::pow2(-t - 1);
  }
  if (tr - 1 > curve.hi_exp) {
    pay += curve.total * (Rat::pow2(-curve.hi_exp - 1) - Rat::pow2(-tr));
  }
  return pay;
}

Rat machine_utility(const MachineLoadCurve& curve, const Rat& true_speed, const Rat& reported_speed,
                    const std::optional<Rat>& bid_cap) {
  return machine_payment(curve, reported_speed, bid_cap) - curve.load_at(reported_speed) / true_speed;
}

// ---------------------------------------------------------------------------
// Ledger

std::function<Row(int)> level_row_function(const MechanismSpec& spec, const std::vector<Rat>& speeds) {
  if (!spec.is_level_based()) throw InputError("payments need a level-based mechanism, got " + spec.name());
  if (spec.kind == MechanismKind::Makespan || spec.q.is_inf()) {
    auto levels = std::make_shared<LevelStructure>(build_levels(speeds));
    return [levels](int k) { return proportional_row(k, *levels); };
  }
  auto alloc = std::make_shared<LqAllocator>(speeds, spec.q);
  return [alloc](int k) { return alloc->level_row(k); };
}

PaymentLedger compute_ledger(const Instance& instance, const MechanismSpec& spec, const PaymentOptions& opts) {
  instance.validate();
  if (!spec.is_level_based()) throw InputError("payments need a level-based mechanism, got " + spec.name());
  const auto& speeds = instance.speeds;
  const std::size_t m = instance.m();

  PaymentLedger ledger;
  ledger.mode = opts.mode;
  ledger.seed = opts.seed;

  const AllocationTrace trace = run_mechanism(spec, instance);
  ledger.mechanism = trace.mechanism;
  const auto row_of_level = level_row_function(spec, speeds);

  std::vector<int> realized_assign;
  if (opts.mode == CostMode::Realized) {
    ledger.realized = round_independent(trace, opts.seed);
    realized_assign = ledger.realized->assign;
  }

  std::vector<Rat> completion(m, Rat(0));
  for (std::size_t j = 0; j < trace.n(); ++j) {
    const JobRecord& rec = trace.jobs[j];
    JobCurve curve = j == 0 ? constant_curve(rec.row, speeds)
                            : job_allocation_curve(trace.levels, rec.lambda_at_arrival, speeds, row_of_level);
    if (curve.at(rec.size).row != rec.row) {
      throw InvariantViolation("allocation curve disagrees with the trace at job " + std::to_string(j));
    }
    ledger.completion_before.push_back(completion);
    ledger.job_charges.push_back(job_charge(curve, completion, rec.size));
    ledger.job_curves.push_back(std::move(curve));

    if (opts.mode == CostMode::Realized) {
      const int i = realized_assign[j];
      completion[i] += rec.size / speeds[i];
    } else {
      for (std::size_t t = 0; t < rec.row.machines.size(); ++t) {
        const int i = rec.row.machines[t];
        completion[i] += rec.row.fractions[t] * rec.size / speeds[i];
      }
    }
  }

  if (m == 1) ledger.bid_cap = opts.bid_cap ? *opts.bid_cap : default_bid_cap(speeds[0], m);
  ledger.machine_loads = trace.loads();
  for (std::size_t i = 0; i < m; ++i) {
    auto curve = machine_load_curve(instance, static_cast<int>(i), spec);
    if (curve.load_at(speeds[i]) != ledger.machine_loads[i]) {
      throw InvariantViolation("load curve disagrees with the trace at machine " + std::to_string(i));
    }
    ledger.machine_payments.push_back(machine_payment(curve, speeds[i], ledger.bid_cap));
    ledger.machine_curves.push_back(std::move(curve));
  }
  return ledger;
}

AgentUtilities utilities(const Instance& instance, const PaymentLedger& ledger) {
  AgentUtilities out;
  for (std::size_t i = 0; i < instance.m(); ++i) {
    out.machines.push_back(ledger.machine_payments.at(i) - ledger.machine_loads.at(i) / instance.speeds[i]);
  }
  for (std::size_t j = 0; j < instance.n(); ++j) {
    out.jobs.push_back(job_utility(ledger.job_curves.at(j), ledger.completion_before.at(j), instance.speeds,
                                   instance.jobs[j], instance.jobs[j]));
  }
  return out;
}

}  // namespace slb
