#pragma once

#include <memory>
#include <vector>

#include "selfish_lb/allocation.hpp"

namespace slb {

/// Switches that turn the level-based allocator into the broken doubling
/// variants used as counterexamples, plus one alternative reading of when the
/// per-level accumulators reset.
struct MakespanOptions {
  bool double_before_allocate = false;  // decide doubling from the tentative C, then allocate
  bool double_with_last = false;        // level K may trigger a saturated-level doubling
  bool reset_without_doubling = false;  // reset C after every job with k(j) <= K-1
};

struct LevelChoice {
  int level = 1;
  bool super_large = false;
  friend bool operator==(const LevelChoice&, const LevelChoice&) = default;
};

/// Guessed optimum and per-level processing times. lambda == p1 * 2^lambda_exp.
struct PhaseState {
  Rat p1;
  long lambda_exp = 0;
  Rat lambda;
  // C[k-1][t] is the level-k processing time on the t-th machine of M<=k.
  std::vector<std::vector<Rat>> C;
  int phase_index = 1;
  std::vector<Rat> lambda_history;

  void double_lambda();
  void reset();
};

/// Slowest level k with p <= r_k * lambda; level 1 flagged super-large when
/// no level accepts p.
LevelChoice job_level(const Rat& p, const Rat& lambda, const LevelStructure& levels);

/// s_bar-proportional row over M<=k.
Row proportional_row(int k, const LevelStructure& levels);

/// Allocates a job of size p at level k: returns its row and adds p / S_k to
/// every C[k][i].
Row allocate_job(const Rat& p, int k, const LevelStructure& levels, PhaseState& state);

/// Doubling rule applied after allocation. Returns true if Lambda increased.
bool maybe_double(PhaseState& state, const Rat& p, const LevelChoice& choice,
                  const LevelStructure& levels, const MakespanOptions& opts = {});

class MakespanAllocator final : public OnlineAllocator {
 public:
  explicit MakespanAllocator(const std::vector<Rat>& speeds, MakespanOptions opts = {},
                             std::string name = "makespan");

  const JobRecord& push(const Rat& size) override;
  Row probe(const Rat& size) const override;
  std::unique_ptr<OnlineAllocator> clone() const override;
  const AllocationTrace& trace() const override { return trace_; }
  Rat current_lambda() const override { return state_.lambda; }

  const PhaseState& state() const { return state_; }
  const LevelStructure& levels() const { return trace_.levels; }

 private:
  LevelChoice choose(const Rat& size, Rat* lambda_used, bool* pre_doubled) const;

  MakespanOptions opts_;
  PhaseState state_;
  AllocationTrace trace_;
};

AllocationTrace run_makespan(const Instance& instance, const MakespanOptions& opts = {});

/// Checks the row-stochastic, support and equal-ratio invariants of every row
/// and the Lambda-form invariant. Throws InvariantViolation on failure.
void check_makespan_trace(const AllocationTrace& trace);

}  // namespace slb
