#include "selfish_lb/baselines.hpp"

#include <algorithm>
#include <numeric>

namespace slb {

// ---------------------------------------------------------------------------
// Posted-price mechanism

Rat round_to_power(const Rat& s, const Rat& base) {
  if (s.sign() <= 0) throw InputError("speed must be positive, got " + s.str());
  if (base <= Rat(1)) throw InputError("rounding base must exceed 1, got " + base.str());
  Rat v = 1;
  if (s >= Rat(1)) {
    while (v * base <= s) v *= base;
  } else {
    while (v > s) v /= base;
  }
  return v;
}

LlwAllocator::LlwAllocator(const std::vector<Rat>& speeds, Rat base) : base_(std::move(base)) {
  trace_.mechanism = "llw";
  trace_.speeds = speeds;
  trace_.levels = build_levels(speeds);
  for (const auto& s : speeds) announced_.push_back(round_to_power(s, base_));
  C_.assign(speeds.size(), Rat(0));
}

LlwDecision LlwAllocator::decide(const Rat& size) const {
  const std::size_t m = announced_.size();
  LlwDecision d;
  d.rank.resize(m);
  std::iota(d.rank.begin(), d.rank.end(), 0);
  // Faster first; equal speeds put the larger makespan first.
  std::stable_sort(d.rank.begin(), d.rank.end(), [&](int a, int b) {
    if (announced_[a] != announced_[b]) return announced_[a] > announced_[b];
    return C_[a] > C_[b];
  });

  Rat rho = 0;
  for (std::size_t r = 0; r < m; ++r) {
    const int i = d.rank[r];
    if (r > 0) {
      const int prev = d.rank[r - 1];
      rho += announced_[i] / announced_[prev] * (C_[prev] - C_[i]);
    }
    d.makespans.push_back(C_[i]);
    d.prices.push_back(rho);
    d.costs.push_back(C_[i] + size / announced_[i] + rho);
  }

  std::size_t best = 0;
  for (std::size_t r = 1; r < m; ++r) {
    if (d.costs[r] < d.costs[best]) best = r;
  }
  d.chosen = d.rank[best];

  for (std::size_t r = 1; r < m; ++r) {
    const int i = d.rank[r];
    const int prev = d.rank[r - 1];
    if (announced_[prev] == announced_[i]) continue;
    const bool cheaper_here = d.costs[r - 1] >= d.costs[r];
    const bool gap = C_[prev] >= C_[i] + size / announced_[i];
    if (cheaper_here != gap) d.price_property = false;
  }
  return d;
}

const JobRecord& LlwAllocator::push(const Rat& size) {
  if (size.sign() <= 0) throw InputError("job size must be positive, got " + size.str());
  LlwDecision d = decide(size);
  C_[d.chosen] += size / announced_[d.chosen];
  JobRecord rec;
  rec.size = size;
  rec.row = Row::single(d.chosen);
  decisions_.push_back(std::move(d));
  trace_.jobs.push_back(std::move(rec));
  return trace_.jobs.back();
}

Row LlwAllocator::probe(const Rat& size) const { return Row::single(decide(size).chosen); }

std::unique_ptr<OnlineAllocator> LlwAllocator::clone() const {
  return std::make_unique<LlwAllocator>(*this);
}

LlwResult run_llw(const Instance& instance, const Rat& base) {
  instance.validate();
  LlwAllocator alloc(instance.speeds, base);
  LlwResult out;
  out.trace = run_online(alloc, instance.jobs);
  for (const auto& rec : out.trace.jobs) out.assign.push_back(rec.row.machines.front());
  out.loads = out.trace.loads();
  out.decisions = alloc.decisions();
  return out;
}

// ---------------------------------------------------------------------------
// Water-filling

WaterfillAllocator::WaterfillAllocator(const std::vector<Rat>& speeds) {
  trace_.mechanism = "waterfill";
  trace_.speeds = speeds;
  trace_.levels = build_levels(speeds);
  for (const auto& s : speeds) {
    if (s.sign() <= 0) throw InputError("speed must be positive, got " + s.str());
    fastest_ = max(fastest_, s);
  }
  water_.assign(speeds.size(), Rat(0));
}

const JobRecord& WaterfillAllocator::push(const Rat& size) {
  if (size.sign() <= 0) throw InputError("job size must be positive, got " + size.str());
  const auto& s = trace_.speeds;
  const std::size_t m = s.size();
  JobRecord rec;
  rec.size = size;
  std::vector<Rat> poured(m, Rat(0));

  if (trace_.jobs.empty()) {
    std::vector<int> top;
    for (std::size_t i = 0; i < m; ++i) {
      if (s[i] == fastest_) top.push_back(static_cast<int>(i));
    }
    const Rat share = size / Rat(static_cast<long>(top.size()));
    for (int i : top) {
      poured[i] = share;
      water_[i] += share / s[i];
    }
    lambda_ = size / fastest_;
    trace_.lambda_history = {lambda_};
    rec.lambda_at_arrival = lambda_;
  } else {
    rec.lambda_at_arrival = lambda_;
    Rat remaining = size;
    auto double_lambda = [&] {
      lambda_ *= Rat(2);
      trace_.lambda_history.push_back(lambda_);
      rec.doubled_after = true;
    };
    while (remaining.sign() > 0) {
      while (fastest_ * lambda_ < size) double_lambda();
      std::vector<std::size_t> feasible;
      for (std::size_t i = 0; i < m; ++i) {
        if (s[i] * lambda_ >= size) feasible.push_back(i);
      }
      Rat low = water_[feasible.front()];
      for (std::size_t i : feasible) low = min(low, water_[i]);
      if (low >= lambda_) {
        double_lambda();
        continue;
      }
      Rat next = lambda_;
      Rat width = 0;
      std::vector<std::size_t> bottom;
      for (std::size_t i : feasible) {
        if (water_[i] == low) {
          bottom.push_back(i);
          width += s[i];
        } else {
          next = min(next, water_[i]);
        }
      }
      const Rat room = (next - low) * width;
      const Rat rise = remaining <= room ? remaining / width : next - low;
      for (std::size_t i : bottom) {
        water_[i] += rise;
        poured[i] += rise * s[i];
      }
      remaining = remaining <= room ? Rat(0) : remaining - room;
      if (low + rise == lambda_) double_lambda();
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    if (poured[i].sign() > 0) {
      rec.row.machines.push_back(static_cast<int>(i));
      rec.row.fractions.push_back(poured[i] / size);
    }
  }
  rec.lambda_after = lambda_;
  trace_.jobs.push_back(std::move(rec));
  trace_.final_lambda = lambda_;
  trace_.phases = static_cast<int>(trace_.lambda_history.size());
  return trace_.jobs.back();
}

Row WaterfillAllocator::probe(const Rat& size) const {
  WaterfillAllocator copy(*this);
  return copy.push(size).row;
}

std::unique_ptr<OnlineAllocator> WaterfillAllocator::clone() const {
  return std::make_unique<WaterfillAllocator>(*this);
}

AllocationTrace run_waterfill(const Instance& instance) {
  instance.validate();
  WaterfillAllocator alloc(instance.speeds);
  return run_online(alloc, instance.jobs);
}

// ---------------------------------------------------------------------------
// Broken doubling orders

AllocationTrace run_variant_double_before_allocate(const Instance& instance) {
  instance.validate();
  MakespanOptions opts;
  opts.double_before_allocate = true;
  MakespanAllocator alloc(instance.speeds, opts, "variant-c");
  return run_online(alloc, instance.jobs);
}

AllocationTrace run_variant_double_with_last(const Instance& instance) {
  instance.validate();
  MakespanOptions opts;
  opts.double_with_last = true;
  MakespanAllocator alloc(instance.speeds, opts, "variant-d");
  return run_online(alloc, instance.jobs);
}

// ---------------------------------------------------------------------------
// Hard instances

HardInstance llw_hard_instance() {
  const Rat a = 2;
  const Rat k = Rat::pow2(20);
  const Rat eps = Rat::pow2(-20);
  const Rat ax = a * a;       // a^x, x = 2
  const Rat ax1 = ax * a;     // a^(x+1)
  HardInstance h;
  h.name = "llw";
  h.original.speeds = {ax1, ax, Rat(1)};
  h.original.jobs = {ax1, ax - eps, Rat(1), ax1 * k, ax * k + Rat(1) / a + eps / Rat(2), k / Rat(2)};
  h.deviation = h.original;
  h.deviation.speeds[2] = a;
  h.agent = 2;
  h.parameters = "a=2 x=2 k=2^20 eps=2^-20 rounding base a'=2";
  return h;
}

HardInstance waterfill_hard_instance() {
  const Rat eps = Rat::pow2(-20);
  const Rat delta = Rat::pow2(-60);
  HardInstance h;
  h.name = "waterfill";
  h.original.speeds = {Rat(64), Rat(32), Rat(16), Rat(4), Rat(2)};
  const Rat mid = Rat(8) - Rat(9, 56) * eps;
  h.original.jobs = {Rat(64), eps, Rat(32) - Rat(32, 54) * eps + delta, mid, mid,
                     Rat(8, 5) - Rat(9, 280) * eps};
  h.deviation = h.original;
  h.deviation.speeds[4] = Rat(4);
  h.agent = 4;
  h.parameters = "eps=2^-20 delta=2^-60";
  return h;
}

HardInstance variant_c_hard_instance() {
  HardInstance h;
  h.name = "variant-c";
  h.original.speeds = {Rat(8), Rat(4)};
  for (int t = 0; t < 6; ++t) h.original.speeds.push_back(Rat(2));
  h.original.jobs = {Rat(8), Rat(3), Rat(3), Rat(3), Rat(3)};
  h.deviation = h.original;
  h.deviation.jobs[4] = Rat(3) + Rat::pow2(-20);
  h.agent = 4;
  h.parameters = "probe job 4 reports 3 + 2^-20";
  return h;
}

HardInstance variant_d_hard_instance() {
  HardInstance h;
  h.name = "variant-d";
  h.original.speeds = {Rat(16), Rat(4)};
  for (int t = 0; t < 16; ++t) h.original.speeds.push_back(Rat(2));
  h.original.jobs = {Rat(16)};
  for (int t = 0; t < 3; ++t) h.original.jobs.push_back(Rat(8));
  for (int t = 0; t < 28; ++t) h.original.jobs.push_back(Rat(2));
  for (int t = 0; t < 49; ++t) h.original.jobs.push_back(Rat(1));
  h.deviation = h.original;
  h.deviation.speeds[1] = Rat(8);
  h.agent = 1;
  h.parameters = "machine 1 reports 8 instead of 4";
  return h;
}

}  // namespace slb
