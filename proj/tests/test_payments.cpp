#include "doctest.h"

#include "selfish_lb/makespan.hpp"
#include "selfish_lb/mechanism.hpp"
#include "selfish_lb/payments.hpp"
#include "selfish_lb/truthlab.hpp"

using namespace slb;

namespace {

std::vector<Rat> rats(std::initializer_list<long> v) { return {v.begin(), v.end()}; }

// Unit processing time of a job reporting p at arrival j, read off the
// allocator itself.
Rat probe_unit_time(const Instance& inst, std::size_t j, const Rat& p) {
  auto alloc = make_allocator(MechanismSpec::makespan_default(), inst.speeds);
  for (std::size_t t = 0; t < j; ++t) alloc->push(inst.jobs[t]);
  return alloc->probe(p).unit_time(inst.speeds);
}

Row probe_row(const Instance& inst, std::size_t j, const Rat& p) {
  auto alloc = make_allocator(MechanismSpec::makespan_default(), inst.speeds);
  for (std::size_t t = 0; t < j; ++t) alloc->push(inst.jobs[t]);
  return alloc->probe(p);
}

}  // namespace

TEST_CASE("zero report is charged nothing") {
  const Instance inst{rats({17, 7, 2, 1, 1, 1, 1, 1}), rats({16, 4})};
  const PaymentLedger led = compute_ledger(inst, MechanismSpec::makespan_default());
  for (std::size_t j = 0; j < inst.n(); ++j) {
    CHECK(job_charge(led.job_curves[j], led.completion_before[j], Rat(0)) == Rat(0));
  }
  CHECK_THROWS_AS(job_charge(led.job_curves[1], led.completion_before[1], Rat(-1)), InputError);
}

TEST_CASE("worked-example job charge from first principles") {
  // Job 2 (p = 4) arrives with Lambda = 1 and machine 1 busy for 16/17.
  const Instance inst{rats({17, 7, 2, 1, 1, 1, 1, 1}), rats({16, 4})};
  const PaymentLedger led = compute_ledger(inst, MechanismSpec::makespan_default());
  const JobCurve& curve = led.job_curves[1];
  CHECK(curve.breakpoints() == std::vector<Rat>{Rat(2), Rat(4), Rat(8), Rat(16)});
  // level-4 row {16, 4, 2}/22 on (0, 2], level-3 row {16, 4}/20 on (2, 4]
  const Rat u4 = Rat(16, 22) / Rat(17) + Rat(4, 22) / Rat(7) + Rat(2, 22) / Rat(2);
  const Rat u3 = Rat(16, 20) / Rat(17) + Rat(4, 20) / Rat(7);
  CHECK(curve.at(Rat(1)).unit_time == u4);
  CHECK(curve.at(Rat(4)).unit_time == u3);
  const Rat c0 = Rat(16, 17);
  // Q(4) = -[C_0 (4/5 - 16/22) + 4 u3 - (2 u4 + 2 u3)]
  const Rat expected = -(c0 * (Rat(4, 5) - Rat(16, 22)) + Rat(4) * u3 - (Rat(2) * u4 + Rat(2) * u3));
  CHECK(led.job_charges[1] == expected);
}

TEST_CASE("charge matches a Riemann-sum oracle over probe()") {
  FuzzConfig cfg;
  cfg.seed = 31;
  cfg.m_max = 6;
  cfg.n_max = 8;
  for (std::size_t t = 0; t < 6; ++t) {
    const Instance inst = fuzz_instance(cfg, t);
    const PaymentLedger led = compute_ledger(inst, MechanismSpec::makespan_default());
    for (std::size_t j = 1; j < inst.n(); ++j) {
      const Rat& p = inst.jobs[j];
      // integral of u over (0, p] with 4096 right-endpoint samples
      const int N = 4096;
      double integral = 0;
      for (int s = 1; s <= N; ++s) {
        integral += probe_unit_time(inst, j, p * Rat(s, N)).to_double() * p.to_double() / N;
      }
      const Row now = probe_row(inst, j, p);
      const Row zero = probe_row(inst, j, p * Rat::pow2(-40));
      double shift = 0;
      for (std::size_t i = 0; i < inst.m(); ++i) {
        const int id = static_cast<int>(i);
        shift += led.completion_before[j][i].to_double() * (now.at(id) - zero.at(id)).to_double();
      }
      const double oracle = -(shift + p.to_double() * now.unit_time(inst.speeds).to_double() - integral);
      // a step function sampled at N points misses at most K jumps of width p/N
      const double slack = 8.0 * p.to_double() / N * probe_unit_time(inst, j, p * Rat::pow2(-40)).to_double();
      CHECK(std::abs(led.job_charges[j].to_double() - oracle) <= slack + 1e-12);
    }
  }
}

TEST_CASE("truthful job report maximizes utility on a dense grid") {
  const Instance inst{rats({9, 5, 3, 2, 1}), rats({4, 1, 7, 2, 2, 30, 1})};
  const PaymentLedger led = compute_ledger(inst, MechanismSpec::makespan_default());
  for (std::size_t j = 0; j < inst.n(); ++j) {
    const Rat& truth = inst.jobs[j];
    const Rat honest = job_utility(led.job_curves[j], led.completion_before[j], inst.speeds, truth, truth);
    for (int s = 1; s <= 400; ++s) {
      const Rat report = truth * Rat(s, 100);
      CHECK(job_utility(led.job_curves[j], led.completion_before[j], inst.speeds, truth, report) <= honest);
    }
  }
}

TEST_CASE("machine payment equals b L(b) plus the integral of L beyond b") {
  const Instance inst{rats({9, 5, 3, 2, 1}), rats({4, 1, 7, 2, 2, 30, 1})};
  const MechanismSpec spec = MechanismSpec::makespan_default();
  for (int i = 0; i < 5; ++i) {
    const MachineLoadCurve curve = machine_load_curve(inst, i, spec);
    // oracle: L(b) from full runs; piecewise constant on (2^-t-1, 2^-t]
    auto load_of_bid = [&](const Rat& b) {
      Instance dev = inst;
      dev.speeds[i] = Rat(1) / b;
      return run_mechanism(spec, dev).loads()[i];
    };
    const Rat b0 = Rat(1) / round_speed(inst.speeds[i]);
    Rat integral = 0;
    // L is 0 once the machine falls below s_bar_1 / m; 2^8 covers it here.
    for (Rat lo = b0; lo < Rat(256); lo *= Rat(2)) integral += load_of_bid(lo * Rat(2)) * lo;
    const Rat oracle = b0 * load_of_bid(b0) + integral;
    CHECK(machine_payment(curve, round_speed(inst.speeds[i])) == oracle);
    CHECK(machine_payment(curve, inst.speeds[i]) == oracle);  // constant within the octave
  }
}

TEST_CASE("machine utility: truth is best and nonnegative") {
  FuzzConfig cfg;
  cfg.seed = 17;
  cfg.m_max = 8;
  cfg.n_max = 15;
  for (std::size_t t = 0; t < 15; ++t) {
    const Instance inst = fuzz_instance(cfg, t);
    const PaymentLedger led = compute_ledger(inst, MechanismSpec::makespan_default());
    const AgentUtilities u = utilities(inst, led);
    for (std::size_t i = 0; i < inst.m(); ++i) {
      CHECK(u.machines[i].sign() >= 0);
      const auto& curve = led.machine_curves[i];
      const std::optional<Rat> cap = led.bid_cap;
      const Rat honest = machine_utility(curve, inst.speeds[i], inst.speeds[i], cap);
      for (long z = -12; z <= 12; ++z) {
        const Rat report = round_speed(inst.speeds[i]) * Rat::pow2(z);
        CHECK(machine_utility(curve, inst.speeds[i], report, cap) <= honest);
      }
    }
  }
}

TEST_CASE("single machine: zero job charges, capped machine payment") {
  const Instance inst{rats({3}), rats({1, 5, 2})};
  const PaymentLedger led = compute_ledger(inst, MechanismSpec::makespan_default());
  for (const auto& c : led.job_charges) CHECK(c == Rat(0));
  REQUIRE(led.bid_cap.has_value());
  CHECK(*led.bid_cap == default_bid_cap(Rat(3), 1));
  CHECK(*led.bid_cap == Rat(2));
  CHECK(led.machine_payments[0] == Rat(16));
  CHECK(utilities(inst, led).machines[0] == Rat(16) - Rat(8, 3));
}

TEST_CASE("load curve plateaus") {
  const Instance inst{rats({8, 4, 2, 1}), rats({3, 1, 1, 2})};
  const MachineLoadCurve c = machine_load_curve(inst, 3, MechanismSpec::makespan_default());
  CHECK(c.load_at_exp(c.lo_exp - 1) == Rat(0));
  CHECK(c.load_at_exp(c.hi_exp + 1) == c.total);
  CHECK(c.total == Rat(7));
  CHECK(machine_payment(c, Rat::pow2(c.lo_exp - 1)) == Rat(0));
}

TEST_CASE("realized mode uses the sampled completions") {
  const Instance inst{rats({9, 5, 3, 2, 1}), rats({4, 1, 7, 2, 2, 30, 1})};
  PaymentOptions opts;
  opts.mode = CostMode::Realized;
  opts.seed = 9;
  const PaymentLedger a = compute_ledger(inst, MechanismSpec::makespan_default(), opts);
  const PaymentLedger b = compute_ledger(inst, MechanismSpec::makespan_default(), opts);
  REQUIRE(a.realized.has_value());
  CHECK(a.job_charges == b.job_charges);
  CHECK(a.realized->assign == b.realized->assign);
  CHECK(a.machine_payments == compute_ledger(inst, MechanismSpec::makespan_default()).machine_payments);
}

TEST_CASE("lq ledger keeps voluntary participation") {
  FuzzConfig cfg;
  cfg.seed = 4;
  cfg.m_max = 6;
  cfg.n_max = 12;
  for (std::size_t t = 0; t < 10; ++t) {
    const Instance inst = fuzz_instance(cfg, t);
    const PaymentLedger led = compute_ledger(inst, MechanismSpec::lq(QParam::parse("2")));
    for (const auto& u : utilities(inst, led).machines) CHECK(u.to_double() >= -1e-9);
  }
}

TEST_CASE("baselines have no ledger") {
  const Instance inst{rats({2, 1}), rats({1})};
  CHECK_THROWS_AS(compute_ledger(inst, MechanismSpec::of(MechanismKind::Llw)), InputError);
}
