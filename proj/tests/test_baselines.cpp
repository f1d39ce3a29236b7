#include "doctest.h"

#include "selfish_lb/baselines.hpp"
#include "selfish_lb/makespan.hpp"
#include "selfish_lb/truthlab.hpp"

using namespace slb;

namespace {
std::vector<Rat> rats(std::initializer_list<long> v) { return {v.begin(), v.end()}; }
}  // namespace

TEST_CASE("round_to_power") {
  CHECK(round_to_power(Rat(17), Rat(2)) == Rat(16));
  CHECK(round_to_power(Rat(10), Rat(3)) == Rat(9));
  CHECK(round_to_power(Rat(1, 2), Rat(3)) == Rat(1, 3));
}

TEST_CASE("posted-price hard instance: load k/2 falls to 1") {
  const HardInstance h = llw_hard_instance();
  CHECK(h.agent == 2);
  const LlwResult before = run_llw(h.original);
  const LlwResult after = run_llw(h.deviation);
  CHECK(before.loads[2] == Rat::pow2(19));
  CHECK(after.loads[2] == Rat(1));
  CHECK(h.deviation.speeds[2] == Rat(2));
  for (const auto& d : before.decisions) CHECK(d.price_property);
  for (const auto& d : after.decisions) CHECK(d.price_property);
  // integral rows
  for (const auto& rec : before.trace.jobs) CHECK(rec.row.machines.size() == 1);
}

TEST_CASE("water-filling hard instance: 8/5 falls to 4/5") {
  const HardInstance h = waterfill_hard_instance();
  CHECK(h.agent == 4);
  const Rat tol = Rat::pow2(-10);
  const Rat before = run_waterfill(h.original).loads()[4];
  const Rat after = run_waterfill(h.deviation).loads()[4];
  CHECK(abs(before - Rat(8, 5)) <= tol);
  CHECK(abs(after - Rat(4, 5)) <= tol);
}

TEST_CASE("water-filling rows are stochastic and probe matches push") {
  FuzzConfig cfg;
  cfg.seed = 8;
  cfg.m_max = 6;
  cfg.n_max = 12;
  for (std::size_t t = 0; t < 15; ++t) {
    const Instance inst = fuzz_instance(cfg, t);
    WaterfillAllocator alloc(inst.speeds);
    for (const auto& p : inst.jobs) {
      const Row predicted = alloc.probe(p);
      const Row got = alloc.push(p).row;
      CHECK(got == predicted);
      CHECK(got.sum() == Rat(1));
    }
  }
}

TEST_CASE("variant C: unit time 1/6 becomes 1/3") {
  const HardInstance h = variant_c_hard_instance();
  const CounterexampleResult r = reproduce_counterexample("variant-c");
  CHECK(r.reproduced);
  CHECK(r.control_ok);
  CHECK(h.deviation.jobs[h.agent] == Rat(3) + Rat::pow2(-20));
}

TEST_CASE("variant D: Lambda 4 against 1") {
  const HardInstance h = variant_d_hard_instance();
  CHECK(run_variant_double_with_last(h.original).final_lambda == Rat(4));
  CHECK(run_variant_double_with_last(h.deviation).final_lambda == Rat(1));
  CHECK(h.deviation.speeds[h.agent] == Rat(8));
  const Rat a = run_makespan(h.original).final_lambda;
  const Rat b = run_makespan(h.deviation).final_lambda;
  CHECK(a >= b);
  CHECK(b * Rat(2) >= a);
}

TEST_CASE("well-behaved baseline keeps faster machines at least as loaded on a simple stream") {
  const LlwResult r = run_llw(Instance{rats({4, 2, 1}), rats({1, 1, 1, 1, 1, 1})});
  CHECK(r.loads[0] >= r.loads[1]);
  CHECK(r.loads[1] >= r.loads[2]);
}
