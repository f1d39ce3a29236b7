#include "selfish_lb/makespan.hpp"

#include <string>

namespace slb {

void PhaseState::double_lambda() {
  lambda *= Rat(2);
  ++lambda_exp;
}

void PhaseState::reset() {
  for (auto& level : C) {
    for (auto& c : level) c = Rat(0);
  }
  ++phase_index;
}

LevelChoice job_level(const Rat& p, const Rat& lambda, const LevelStructure& levels) {
  for (int k = levels.K; k >= 1; --k) {
    if (p <= levels.r(k) * lambda) return {k, false};
  }
  return {1, true};
}

Row proportional_row(int k, const LevelStructure& levels) {
  Row row;
  const auto& members = levels.prefix(k);
  if (members.empty()) throw InvariantViolation("empty feasible set at level " + std::to_string(k));
  const Rat& total = levels.speed_sum(k);
  row.machines = members;
  row.fractions.reserve(members.size());
  for (int i : members) row.fractions.push_back(levels.rounded(i) / total);
  return row;
}

Row allocate_job(const Rat& p, int k, const LevelStructure& levels, PhaseState& state) {
  Row row = proportional_row(k, levels);
  // x_ij * p / s_bar_i is the same p / S_k for every i in M<=k.
  const Rat inc = p / levels.speed_sum(k);
  for (auto& c : state.C.at(k - 1)) c += inc;
  return row;
}

bool maybe_double(PhaseState& state, const Rat& p, const LevelChoice& choice,
                  const LevelStructure& levels, const MakespanOptions& opts) {
  // Level K never saturates; a super-large job still raises Lambda when K = 1.
  if (choice.level > levels.K - 1 && !opts.double_with_last && !choice.super_large) return false;
  bool increased = false;
  const Rat threshold = p / levels.r(1);
  if (threshold > state.lambda) {
    while (state.lambda < threshold) state.double_lambda();
    increased = true;
  } else if (state.C.at(choice.level - 1).front() > state.lambda) {
    state.double_lambda();
    increased = true;
  }
  if (increased || opts.reset_without_doubling) state.reset();
  if (increased) state.lambda_history.push_back(state.lambda);
  return increased;
}

MakespanAllocator::MakespanAllocator(const std::vector<Rat>& speeds, MakespanOptions opts,
                                     std::string name)
    : opts_(opts) {
  trace_.mechanism = std::move(name);
  trace_.speeds = speeds;
  trace_.levels = build_levels(speeds);
  for (int k = 1; k <= trace_.levels.K; ++k) {
    state_.C.emplace_back(trace_.levels.prefix(k).size(), Rat(0));
  }
}

LevelChoice MakespanAllocator::choose(const Rat& size, Rat* lambda_used, bool* pre_doubled) const {
  const auto& lv = trace_.levels;
  LevelChoice choice = job_level(size, state_.lambda, lv);
  *lambda_used = state_.lambda;
  *pre_doubled = false;
  if (!opts_.double_before_allocate) return choice;
  if (choice.level > lv.K - 1 && !opts_.double_with_last && !choice.super_large) return choice;

  // Tentative post-allocation state decides whether to double first.
  const Rat threshold = size / lv.r(1);
  Rat lam = state_.lambda;
  if (threshold > lam) {
    while (lam < threshold) lam *= Rat(2);
  } else if (state_.C.at(choice.level - 1).front() + size / lv.speed_sum(choice.level) > lam) {
    lam *= Rat(2);
  }
  if (lam != state_.lambda) {
    *lambda_used = lam;
    *pre_doubled = true;
    choice = job_level(size, lam, lv);
  }
  return choice;
}

const JobRecord& MakespanAllocator::push(const Rat& size) {
  if (size.sign() <= 0) throw InputError("job size must be positive, got " + size.str());
  const auto& lv = trace_.levels;
  JobRecord rec;
  rec.size = size;

  if (trace_.jobs.empty()) {
    const auto& first = lv.group(1);
    const Rat share = Rat(1) / Rat(static_cast<long>(first.size()));
    for (int i : first) {
      rec.row.machines.push_back(i);
      rec.row.fractions.push_back(share);
    }
    state_.p1 = size;
    state_.lambda = size / lv.r(1);
    state_.lambda_exp = 0;
    state_.lambda_history = {state_.lambda};
    rec.lambda_at_arrival = state_.lambda;
    rec.lambda_after = state_.lambda;
  } else {
    rec.lambda_at_arrival = state_.lambda;
    Rat lam;
    bool pre_doubled = false;
    const LevelChoice choice = choose(size, &lam, &pre_doubled);
    if (pre_doubled) {
      while (state_.lambda < lam) state_.double_lambda();
      state_.reset();
      state_.lambda_history.push_back(state_.lambda);
      rec.doubled_after = true;
    }
    rec.level = choice.level;
    rec.super_large = choice.super_large;
    rec.row = allocate_job(size, choice.level, lv, state_);
    if (!opts_.double_before_allocate) {
      rec.doubled_after = maybe_double(state_, size, choice, lv, opts_);
    } else if (!pre_doubled && opts_.reset_without_doubling &&
               (choice.level <= lv.K - 1 || opts_.double_with_last)) {
      state_.reset();
    }
    rec.lambda_after = state_.lambda;
  }

  trace_.jobs.push_back(std::move(rec));
  trace_.final_lambda = state_.lambda;
  trace_.phases = static_cast<int>(state_.lambda_history.size());
  trace_.lambda_history = state_.lambda_history;
  return trace_.jobs.back();
}

Row MakespanAllocator::probe(const Rat& size) const {
  const auto& lv = trace_.levels;
  if (trace_.jobs.empty()) {
    Row row;
    const Rat share = Rat(1) / Rat(static_cast<long>(lv.group(1).size()));
    for (int i : lv.group(1)) {
      row.machines.push_back(i);
      row.fractions.push_back(share);
    }
    return row;
  }
  Rat lam;
  bool pre = false;
  return proportional_row(choose(size, &lam, &pre).level, lv);
}

std::unique_ptr<OnlineAllocator> MakespanAllocator::clone() const {
  return std::make_unique<MakespanAllocator>(*this);
}

AllocationTrace run_makespan(const Instance& instance, const MakespanOptions& opts) {
  instance.validate();
  MakespanAllocator alloc(instance.speeds, opts);
  return run_online(alloc, instance.jobs);
}

void check_makespan_trace(const AllocationTrace& trace) {
  const auto& lv = trace.levels;
  if (trace.jobs.empty()) return;
  const Rat& p1 = trace.jobs.front().size;
  Rat prev = trace.jobs.front().lambda_at_arrival;
  for (std::size_t j = 0; j < trace.jobs.size(); ++j) {
    const auto& rec = trace.jobs[j];
    const std::string where = "job " + std::to_string(j);
    if (rec.row.sum() != Rat(1)) throw InvariantViolation(where + ": row does not sum to 1");
    if (!(rec.lambda_at_arrival / p1).is_pow2() || !(rec.lambda_after / p1).is_pow2()) {
      throw InvariantViolation(where + ": Lambda not of the form p1 * 2^z");
    }
    if (rec.lambda_at_arrival < prev || rec.lambda_after < rec.lambda_at_arrival) {
      throw InvariantViolation(where + ": Lambda decreased");
    }
    prev = rec.lambda_after;
    const Rat ratio = rec.row.fractions.front() / lv.rounded(rec.row.machines.front());
    for (std::size_t t = 0; t < rec.row.machines.size(); ++t) {
      const int i = rec.row.machines[t];
      const auto& mp = lv.machines.at(i);
      if (!mp.active || *mp.group > rec.level) {
        throw InvariantViolation(where + ": machine " + std::to_string(i) + " outside M<=k");
      }
      if (rec.row.fractions[t].sign() <= 0) throw InvariantViolation(where + ": nonpositive fraction");
      if (rec.row.fractions[t] / mp.rounded_speed != ratio) {
        throw InvariantViolation(where + ": unequal x/s_bar within the row");
      }
    }
  }
}

}  // namespace slb
