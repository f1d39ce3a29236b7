#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>

#include "selfish_lb/truthlab.hpp"

using namespace slb;

namespace {
std::vector<Rat> rats(std::initializer_list<long> v) { return {v.begin(), v.end()}; }
}  // namespace

TEST_CASE("fuzz instances are reproducible and in range") {
  FuzzConfig cfg;
  cfg.seed = 123;
  std::set<std::size_t> ms;
  for (std::size_t t = 0; t < 200; ++t) {
    const Instance a = fuzz_instance(cfg, t);
    CHECK(a == fuzz_instance(cfg, t));
    CHECK(a.m() >= 1);
    CHECK(a.m() <= 16);
    CHECK(a.n() >= 1);
    CHECK(a.n() <= 50);
    ms.insert(a.m());
    for (const auto& p : a.jobs) {
      CHECK(p >= Rat::pow2(-8));
      CHECK(p <= Rat::pow2(8));
      // dyadic: the denominator is a power of two
      CHECK(Rat(mpq_class(a.jobs.front().raw().get_den())).is_pow2());
    }
  }
  CHECK(ms.size() > 10);
  CHECK(trial_seed(1, 0) != trial_seed(1, 1));
  CHECK(trial_seed(1, 5) == trial_seed(1, 5));
}

TEST_CASE("property names round trip") {
  for (Property p : {Property::MachineMonotone, Property::LambdaStability, Property::JobMonotone,
                     Property::JobIncentive, Property::MachineIncentive, Property::VoluntaryParticipation,
                     Property::Feasibility}) {
    CHECK(parse_property(property_name(p)) == p);
  }
  CHECK_THROWS_AS(parse_property("nope"), InputError);
}

TEST_CASE("double_machine doubles the rounded speed") {
  const Instance inst{rats({17, 3}), rats({1})};
  CHECK(double_machine(inst, 0).speeds[0] == Rat(32));
  CHECK(double_machine(inst, 1).speeds[1] == Rat(4));
  CHECK(double_machine(inst, 1).speeds[0] == Rat(17));
}

TEST_CASE("job report grid covers breakpoints, truth and super-large sizes") {
  const LevelStructure lv = build_levels(rats({17, 7, 2, 1, 1, 1, 1, 1}));
  const auto grid = job_report_grid(lv, Rat(1), Rat(3));
  auto has = [&](const Rat& r) { return std::find(grid.begin(), grid.end(), r) != grid.end(); };
  for (long b : {2, 4, 8, 16}) CHECK(has(Rat(b)));
  CHECK(has(Rat(3)));
  CHECK(has(Rat(4) + Rat(4) * Rat::pow2(-20)));
  CHECK(has(Rat(6)));  // midpoint of 4 and 8
  CHECK(has(Rat(1)));  // half the smallest breakpoint
  CHECK(grid.back() > Rat(16));
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(std::adjacent_find(grid.begin(), grid.end()) == grid.end());
  CHECK(grid.front().sign() > 0);
}

TEST_CASE("level-based mechanisms pass the single-instance checks") {
  const Instance inst{rats({17, 7, 2, 1, 1, 1, 1, 1}), rats({16, 4, 3, 1, 2, 2, 1, 9})};
  for (const MechanismSpec& spec : {MechanismSpec::makespan_default(), MechanismSpec::lq(QParam::parse("2"))}) {
    CHECK(check_machine_monotone(inst, spec).empty());
    CHECK(check_lambda_stability(inst, spec).empty());
    CHECK(check_job_monotone(inst, spec).empty());
    CHECK(check_incentives(inst, spec).empty());
    CHECK(audit_feasibility(run_mechanism(spec, inst)).empty());
  }
}

TEST_CASE("feasibility audit catches a planted violation") {
  AllocationTrace tr = run_mechanism(MechanismSpec::makespan_default(),
                                     Instance{rats({17, 7, 2, 1, 1, 1, 1, 1}), rats({16, 4})});
  tr.jobs[1].row = Row{{0, 7}, {Rat(1, 2), Rat(1, 2)}};  // machine 7 is inactive
  CHECK_FALSE(audit_feasibility(tr).empty());
}

TEST_CASE("replay and shrink on a known counterexample") {
  const CounterexampleResult r = reproduce_counterexample("llw");
  REQUIRE_FALSE(r.violations.empty());
  const MechanismSpec spec = MechanismSpec::of(MechanismKind::Llw);
  CHECK(replay(r.violations.front(), spec));

  // shrink keeps a failing predicate failing and removes what it can
  const Instance big{rats({4, 2, 1, 1}), rats({1, 2, 3, 4, 5, 6})};
  const Instance small = shrink(big, [](const Instance& x) {
    return std::find(x.jobs.begin(), x.jobs.end(), Rat(5)) != x.jobs.end();
  });
  CHECK(small.jobs == rats({5}));
  CHECK(small.m() == 1);
}

TEST_CASE("counterexamples reproduce and controls pass") {
  for (const char* name : {"llw", "waterfill", "variant-c", "variant-d"}) {
    const CounterexampleResult r = reproduce_counterexample(name);
    CHECK_MESSAGE(r.reproduced, name);
    CHECK_MESSAGE(r.control_ok, name);
  }
  CHECK_THROWS_AS(reproduce_counterexample("nope"), InputError);
}

TEST_CASE("small suites stay clean") {
  FuzzConfig cfg;
  cfg.trials = 30;
  cfg.seed = 77;
  for (const MechanismSpec& spec : {MechanismSpec::makespan_default(), MechanismSpec::lq(QParam::parse("3"))}) {
    cfg.mechanism = spec;
    for (const SuiteResult& r : {test_machine_monotone(cfg), test_lambda_stability(cfg), test_job_monotone(cfg)}) {
      CHECK_MESSAGE(r.violations.empty(), r.suite);
      CHECK(r.audit_failures.empty());
      CHECK(r.trials == 30);
    }
  }
}

TEST_CASE("suites flag the broken variants") {
  FuzzConfig cfg;
  cfg.trials = 40;
  cfg.seed = 1;
  cfg.mechanism = MechanismSpec::of(MechanismKind::VariantC);
  CHECK_FALSE(test_job_monotone(cfg).violations.empty());
  cfg.mechanism = MechanismSpec::of(MechanismKind::Llw);
  CHECK_FALSE(test_machine_monotone(cfg).violations.empty());
}

TEST_CASE("envelopes") {
  CHECK(competitive_envelope(1) == 96);
  CHECK(competitive_envelope(4) == 160);
  CHECK(competitive_envelope(8) == 192);
  CHECK(tight_competitive_envelope(8) == 76);
  CHECK(tight_competitive_envelope(1) == 28);
  for (std::size_t m = 1; m <= 128; ++m) CHECK(tight_competitive_envelope(m) <= competitive_envelope(m));
}

TEST_CASE("least squares") {
  const LinearFit f = least_squares({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2));
  CHECK(f.intercept == doctest::Approx(1));
  CHECK(f.r2 == doctest::Approx(1));
  const LinearFit g = least_squares({0, 1, 2}, {1, 0, 1});
  CHECK(g.slope == doctest::Approx(0));
  CHECK(g.r2 == doctest::Approx(0));
}

TEST_CASE("bench rows and csv") {
  BenchConfig cfg;
  cfg.fuzz.trials = 3;
  cfg.fuzz.m_max = 3;
  cfg.fuzz.n_max = 6;
  cfg.oracle = OracleKind::Bruteforce;
  cfg.rounding_seeds = 20;
  const auto rows = bench_ratio(cfg);
  REQUIRE(rows.size() == 3);
  const auto count = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  for (const auto& r : rows) {
    CHECK(r.ratio > 0.0);  // fractional schedules may beat the integral optimum
    CHECK(r.ratio <= r.tight_envelope);
    CHECK(r.obj_rounded_max >= r.obj_rounded_mean);
    CHECK(r.feasibility_failures == 0);
    CHECK(count(bench_csv_row(r)) == count(bench_csv_header()));
  }
}
