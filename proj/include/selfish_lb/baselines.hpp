#pragma once

#include <memory>
#include <string>
#include <vector>

#include "selfish_lb/allocation.hpp"
#include "selfish_lb/makespan.hpp"

namespace slb {

// ---------------------------------------------------------------------------
// Posted-price well-behaved mechanism (integral).

/// One job's decision: machines in rank order with their prices and costs.
struct LlwDecision {
  std::vector<int> rank;
  std::vector<Rat> makespans;  // C before the job, rank order
  std::vector<Rat> prices;     // rho, rank order
  std::vector<Rat> costs;      // C + p/s + rho, rank order
  int chosen = 0;              // machine id
  /// cost(r-1) >= cost(r) <=> C(r-1) >= C(r) + p/s(r) for every adjacent pair
  /// with strictly different speeds.
  bool price_property = true;
};

/// Largest power of base not exceeding s (base > 1).
Rat round_to_power(const Rat& s, const Rat& base);

class LlwAllocator final : public OnlineAllocator {
 public:
  LlwAllocator(const std::vector<Rat>& speeds, Rat base);

  const JobRecord& push(const Rat& size) override;
  Row probe(const Rat& size) const override;
  std::unique_ptr<OnlineAllocator> clone() const override;
  const AllocationTrace& trace() const override { return trace_; }
  Rat current_lambda() const override { return Rat(0); }

  const std::vector<LlwDecision>& decisions() const { return decisions_; }
  const std::vector<Rat>& announced() const { return announced_; }
  const std::vector<Rat>& makespans() const { return C_; }

 private:
  LlwDecision decide(const Rat& size) const;

  Rat base_;
  std::vector<Rat> announced_;
  std::vector<Rat> C_;
  AllocationTrace trace_;
  std::vector<LlwDecision> decisions_;
};

struct LlwResult {
  AllocationTrace trace;
  std::vector<int> assign;
  std::vector<Rat> loads;
  std::vector<LlwDecision> decisions;
};

LlwResult run_llw(const Instance& instance, const Rat& base = Rat(2));

// ---------------------------------------------------------------------------
// Water-filling with doubling, simulated by events instead of dx steps.

class WaterfillAllocator final : public OnlineAllocator {
 public:
  explicit WaterfillAllocator(const std::vector<Rat>& speeds);

  const JobRecord& push(const Rat& size) override;
  Row probe(const Rat& size) const override;
  std::unique_ptr<OnlineAllocator> clone() const override;
  const AllocationTrace& trace() const override { return trace_; }
  Rat current_lambda() const override { return lambda_; }

  /// Current water level (completion time) of every machine.
  const std::vector<Rat>& water() const { return water_; }

 private:
  AllocationTrace trace_;
  Rat fastest_;
  Rat lambda_;
  std::vector<Rat> water_;
};

AllocationTrace run_waterfill(const Instance& instance);

// ---------------------------------------------------------------------------
// The two broken doubling orders.

AllocationTrace run_variant_double_before_allocate(const Instance& instance);
AllocationTrace run_variant_double_with_last(const Instance& instance);

// ---------------------------------------------------------------------------
// Hard instances with binary-power parameters so all arithmetic is exact.

struct HardInstance {
  std::string name;
  Instance original;
  Instance deviation;  // same jobs, one agent's report changed
  int agent = 0;       // machine (or job) whose report changes
  std::string parameters;
};

/// Three machines a^(x+1), a^x, 1 with a = 2, x = 2, k = 2^20, eps = 2^-20;
/// machine 2 (0-based) speeds up to a.
HardInstance llw_hard_instance();
/// Speeds 64,32,16,4,2 with eps = 2^-20, delta = 2^-60; machine 4 speeds up to 4.
HardInstance waterfill_hard_instance();
/// Speeds 8,4,2x6; jobs 8,3,3,3 then the probe job of true size 3 (job 4).
/// deviation holds the probe reporting 3 + 2^-20.
HardInstance variant_c_hard_instance();
/// Rounded speeds 16,4,2x16; jobs 16, 8x3, 2x28, 1x49; machine 1 speeds up to 8.
HardInstance variant_d_hard_instance();

}  // namespace slb
