#pragma once

#include <memory>
#include <string>
#include <vector>

#include "selfish_lb/core.hpp"

namespace slb {

/// One job's fractional row: machines with positive fraction, in the order the
/// allocator produced them.
struct Row {
  std::vector<int> machines;
  std::vector<Rat> fractions;

  Rat sum() const;
  Rat at(int machine) const;  // 0 when the machine is not in the support
  /// Sum of x_i / speed_i: the expected unit processing time of the job.
  Rat unit_time(const std::vector<Rat>& speeds) const;

  static Row single(int machine) { return Row{{machine}, {Rat(1)}}; }
  friend bool operator==(const Row&, const Row&) = default;
};

struct JobRecord {
  Rat size;
  Rat lambda_at_arrival;
  int level = 1;
  bool super_large = false;
  Row row;
  bool doubled_after = false;
  Rat lambda_after;

  friend bool operator==(const JobRecord&, const JobRecord&) = default;
};

/// Complete record of one online run. Level-free baselines leave the level
/// fields at their defaults and still record Lambda when they keep one.
struct AllocationTrace {
  std::string mechanism;
  std::string q = "inf";
  bool exact = true;  // every row is exact and sums to exactly 1
  std::vector<Rat> speeds;
  LevelStructure levels;
  std::vector<JobRecord> jobs;
  Rat final_lambda;
  int phases = 1;
  std::vector<Rat> lambda_history;

  std::size_t m() const { return speeds.size(); }
  std::size_t n() const { return jobs.size(); }
  Rat fraction(std::size_t j, int i) const { return jobs.at(j).row.at(i); }
  /// L_i = sum_j x_ij p_j.
  std::vector<Rat> loads() const;
  /// max_i L_i / speed_i with the reported speeds.
  Rat makespan() const;

  friend bool operator==(const AllocationTrace&, const AllocationTrace&) = default;
};

/// An online allocator that receives jobs one at a time. probe() answers
/// "which row would a job of size p get if it arrived now" without changing
/// the state, which is what size-misreport scans need.
class OnlineAllocator {
 public:
  virtual ~OnlineAllocator() = default;
  virtual const JobRecord& push(const Rat& size) = 0;
  virtual Row probe(const Rat& size) const = 0;
  virtual std::unique_ptr<OnlineAllocator> clone() const = 0;
  virtual const AllocationTrace& trace() const = 0;
  /// Lambda a job arriving now would see (meaningless before the first job).
  virtual Rat current_lambda() const = 0;
};

AllocationTrace run_online(OnlineAllocator& alloc, const std::vector<Rat>& jobs);

}  // namespace slb
