#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "selfish_lb/baselines.hpp"
#include "selfish_lb/io.hpp"
#include "selfish_lb/mechanism.hpp"
#include "selfish_lb/oracles.hpp"
#include "selfish_lb/payments.hpp"

namespace slb {

// ---------------------------------------------------------------------------
// Instance generation

struct FuzzConfig {
  std::size_t trials = 100;
  int m_min = 1, m_max = 16;
  int n_min = 1, n_max = 50;
  int size_exp_lo = -8, size_exp_hi = 8;     // sizes are dyadic in [2^lo, 2^hi]
  int speed_exp_lo = -3, speed_exp_hi = 6;
  double boundary_bias = 0.35;  // share of sizes placed on or next to a p1 * 2^z breakpoint
  std::uint64_t seed = 1;
  MechanismSpec mechanism;
  unsigned threads = 0;  // 0: hardware concurrency, capped by SELFISH_LB_THREADS
};

/// Seed of trial t, a splitmix64 step away from the base seed.
std::uint64_t trial_seed(std::uint64_t base, std::size_t trial);

Instance random_instance(std::mt19937_64& gen, const FuzzConfig& config);
/// The instance of trial t; the same (config, t) always yields the same instance.
Instance fuzz_instance(const FuzzConfig& config, std::size_t trial);

// ---------------------------------------------------------------------------
// Violations

enum class Property { MachineMonotone, LambdaStability, JobMonotone, JobIncentive, MachineIncentive,
                      VoluntaryParticipation, Feasibility };

std::string property_name(Property p);
Property parse_property(std::string_view name);

struct ViolationReport {
  Property property = Property::MachineMonotone;
  std::string mechanism;
  Instance instance;
  std::optional<Instance> deviation;  // set when the deviation is not the default doubling
  int agent = -1;                      // machine or job index
  int job = -1;                        // job at which the violation shows, when relevant
  std::uint64_t trial_seed = 0;
  std::vector<std::pair<std::string, std::string>> witness;
  std::optional<Instance> minimized;
  std::string detail;
};

json report_to_json(const ViolationReport& r, const MechanismSpec& spec);

/// Tolerance applied to fraction and utility comparisons of a mechanism:
/// 0 for exact rows, 1e-9 otherwise.
double tolerance_for(const MechanismSpec& spec);

/// Machine i's deviation used by the fuzzers: s_i -> 2 * round_speed(s_i).
Instance double_machine(const Instance& instance, int machine);

// ---------------------------------------------------------------------------
// Single-instance checks. Each returns the violations it found.

/// Per-job fractions and total load of `agent` must not drop from `original`
/// to `deviation` (where the agent reports faster).
std::vector<ViolationReport> check_machine_monotone_pair(const Instance& original, const Instance& deviation,
                                                         int agent, const MechanismSpec& spec);
/// Every machine doubled in turn.
std::vector<ViolationReport> check_machine_monotone(const Instance& instance, const MechanismSpec& spec);

/// Lambda_j >= Lambda'_j >= Lambda_j / 2 at every arrival j >= 2 and at the end.
std::vector<ViolationReport> check_lambda_stability_pair(const Instance& original, const Instance& deviation,
                                                         int agent, const MechanismSpec& spec);
std::vector<ViolationReport> check_lambda_stability(const Instance& instance, const MechanismSpec& spec);

/// Misreport grid of a job arriving with guessed optimum `lambda`: every
/// breakpoint r_k * lambda, its +-delta neighbours and midpoints, the true
/// size and its neighbours, and two super-large sizes. Sorted, positive, unique.
std::vector<Rat> job_report_grid(const LevelStructure& levels, const Rat& lambda, const Rat& truth);

/// Unit processing time must be nonincreasing in the reported size at every
/// arrival, scanned with probe() over job_report_grid.
std::vector<ViolationReport> check_job_monotone(const Instance& instance, const MechanismSpec& spec);

/// Truthful utility maximal over the job and machine misreport grids, plus
/// voluntary participation. Only for level-based mechanisms.
std::vector<ViolationReport> check_incentives(const Instance& instance, const MechanismSpec& spec,
                                              const PaymentOptions& opts = {});

/// X[j][i] > 0 implies p_j <= s_bar_i * Lambda_final and s_bar_i * m >= s_bar_1.
std::vector<std::string> audit_feasibility(const AllocationTrace& trace);

/// Re-runs the property check on the report's instance (and deviation).
bool replay(const ViolationReport& report, const MechanismSpec& spec);

/// Greedy job removal, then machine removal, while `fails` stays true.
Instance shrink(const Instance& instance, const std::function<bool(const Instance&)>& fails);

// ---------------------------------------------------------------------------
// Suites

struct SuiteResult {
  std::string suite;
  std::string mechanism;
  std::size_t trials = 0;
  std::size_t checks = 0;  // instances or traces examined
  std::vector<ViolationReport> violations;
  std::vector<std::string> audit_failures;
  double seconds = 0.0;
};

SuiteResult test_machine_monotone(const FuzzConfig& config);
SuiteResult test_lambda_stability(const FuzzConfig& config);
SuiteResult test_job_monotone(const FuzzConfig& config);
SuiteResult test_incentives(const FuzzConfig& config, const PaymentOptions& opts = {});

/// Worker count: config value or hardware concurrency, capped by the
/// SELFISH_LB_THREADS environment variable.
unsigned worker_count(unsigned requested);
/// Runs body(t) for t in [0, n) over worker threads.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

// ---------------------------------------------------------------------------
// Competitive-ratio experiments

enum class OracleKind { Bruteforce, LowerBound, None };
OracleKind parse_oracle(std::string_view name);
std::string oracle_name(OracleKind k);

struct BenchRow {
  std::size_t trial = 0;
  std::size_t m = 0, n = 0;
  std::string q;
  double obj_fractional = 0.0;
  std::string obj_fractional_exact;  // empty on float paths
  double obj_rounded_mean = 0.0;
  double obj_rounded_max = 0.0;
  std::string oracle;
  double oracle_value = 0.0;
  std::string oracle_exact;
  double ratio = 0.0;          // obj_fractional / oracle
  double ratio_rounded = 0.0;  // obj_rounded_mean / oracle
  double envelope = 0.0;       // 32 * (floor(log2 m) + 3)
  double tight_envelope = 0.0; // 16 * K + 12
  std::size_t feasibility_failures = 0;
};

struct BenchConfig {
  FuzzConfig fuzz;
  OracleKind oracle = OracleKind::LowerBound;
  std::size_t rounding_seeds = 100;
};

/// 32 * (floor(log2 m) + 3).
double competitive_envelope(std::size_t m);
/// 16 * K + 12 with K = floor(log2 m) + 1, re-derived from the phase sums.
double tight_competitive_envelope(std::size_t m);

BenchRow bench_instance(const Instance& instance, const BenchConfig& config, std::size_t trial);
std::vector<BenchRow> bench_ratio(const BenchConfig& config);

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& row);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Counterexamples

struct CounterexampleResult {
  std::string name;
  Property property = Property::MachineMonotone;
  std::vector<std::pair<std::string, std::string>> values;  // before/after quantities
  std::vector<ViolationReport> violations;                  // from the broken mechanism
  bool reproduced = false;   // expected violation found with the expected values
  bool control_ok = false;   // the level-based allocator passes the same check
  std::string control_detail;
};

/// name in {llw, waterfill, variant-c, variant-d}.
CounterexampleResult reproduce_counterexample(std::string_view name);
HardInstance hard_instance(std::string_view name);

}  // namespace slb
