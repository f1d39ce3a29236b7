#include "selfish_lb/truthlab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "selfish_lb/baselines.hpp"
#include "selfish_lb/rounding.hpp"

namespace slb {

// ---------------------------------------------------------------------------
// Instance generation

std::uint64_t trial_seed(std::uint64_t base, std::size_t trial) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

int uniform_int(std::mt19937_64& gen, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(gen);
}

bool coin(std::mt19937_64& gen, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(gen) < p; }

// 2^e * (1 + k/8).
Rat dyadic(std::mt19937_64& gen, int e_lo, int e_hi) {
  return Rat::pow2(uniform_int(gen, e_lo, e_hi)) * Rat(8 + uniform_int(gen, 0, 7), 8);
}

Rat random_speed(std::mt19937_64& gen, const FuzzConfig& c) {
  const int kind = uniform_int(gen, 0, 9);
  if (kind < 6) return dyadic(gen, c.speed_exp_lo, c.speed_exp_hi);
  if (kind < 9) return Rat(uniform_int(gen, 1, 20));
  return Rat(uniform_int(gen, 1, 40), uniform_int(gen, 1, 7));
}

}  // namespace

Instance random_instance(std::mt19937_64& gen, const FuzzConfig& c) {
  Instance inst;
  const int m = uniform_int(gen, c.m_min, c.m_max);
  const int n = uniform_int(gen, c.n_min, c.n_max);
  for (int i = 0; i < m; ++i) {
    if (i > 0 && coin(gen, 0.2)) {
      inst.speeds.push_back(inst.speeds[uniform_int(gen, 0, i - 1)]);
    } else {
      inst.speeds.push_back(random_speed(gen, c));
    }
  }
  const Rat lo = Rat::pow2(c.size_exp_lo);
  const Rat hi = Rat::pow2(c.size_exp_hi);
  const int K = level_count(static_cast<std::size_t>(m));
  for (int j = 0; j < n; ++j) {
    Rat p;
    if (j > 0 && coin(gen, c.boundary_bias)) {
      // Every breakpoint r_k * Lambda has the form p1 * 2^z.
      p = inst.jobs[0] * Rat::pow2(uniform_int(gen, -(K + 3), K + 3));
      const int side = uniform_int(gen, 0, 2);
      const Rat nudge = p * Rat::pow2(-uniform_int(gen, 4, 20));
      if (side == 1) p += nudge;
      if (side == 2) p -= nudge;
    } else {
      p = dyadic(gen, c.size_exp_lo, c.size_exp_hi - 1);
    }
    inst.jobs.push_back(min(max(p, lo), hi));
  }
  return inst;
}

Instance fuzz_instance(const FuzzConfig& config, std::size_t trial) {
  std::mt19937_64 gen(trial_seed(config.seed, trial));
  return random_instance(gen, config);
}

// ---------------------------------------------------------------------------
// Violations

std::string property_name(Property p) {
  switch (p) {
    case Property::MachineMonotone: return "machine-monotone";
    case Property::LambdaStability: return "lambda-stability";
    case Property::JobMonotone: return "job-monotone";
    case Property::JobIncentive: return "job-incentive";
    case Property::MachineIncentive: return "machine-incentive";
    case Property::VoluntaryParticipation: return "voluntary-participation";
    case Property::Feasibility: return "speed-size-feasibility";
  }
  return "unknown";
}

Property parse_property(std::string_view name) {
  for (auto p : {Property::MachineMonotone, Property::LambdaStability, Property::JobMonotone,
                 Property::JobIncentive, Property::MachineIncentive, Property::VoluntaryParticipation,
                 Property::Feasibility}) {
    if (property_name(p) == name) return p;
  }
  throw InputError("unknown property '" + std::string(name) + "'");
}

json report_to_json(const ViolationReport& r, const MechanismSpec& spec) {
  json witness = json::object();
  for (const auto& [k, v] : r.witness) witness[k] = v;
  json out = {{"property", property_name(r.property)},
              {"mechanism", spec.name()},
              {"q", spec.q.str()},
              {"agent", r.agent},
              {"job", r.job},
              {"trial_seed", r.trial_seed},
              {"detail", r.detail},
              {"witness", witness},
              {"instance", instance_to_json(r.instance)}};
  out["deviation"] = r.deviation ? instance_to_json(*r.deviation) : json(nullptr);
  out["minimized"] = r.minimized ? instance_to_json(*r.minimized) : json(nullptr);
  return out;
}

double tolerance_for(const MechanismSpec& spec) { return spec.is_exact() ? 0.0 : 1e-9; }

Instance double_machine(const Instance& instance, int machine) {
  Instance out = instance;
  out.speeds.at(machine) = Rat(2) * round_speed(instance.speeds.at(machine));
  return out;
}

namespace {

using Audit = std::vector<std::string>;

// a < b by more than the tolerance (relative for large magnitudes).
bool drops(const Rat& before, const Rat& after, double tol) {
  if (tol == 0.0) return after < before;
  const double b = before.to_double();
  const double a = after.to_double();
  return a < b - tol * std::max(1.0, std::abs(b));
}

void audit_into(const AllocationTrace& trace, Audit* audit) {
  if (!audit) return;
  for (auto& msg : audit_feasibility(trace)) audit->push_back(std::move(msg));
}

ViolationReport make_report(Property p, const MechanismSpec& spec, const Instance& inst, int agent) {
  ViolationReport r;
  r.property = p;
  r.mechanism = spec.name();
  r.instance = inst;
  r.agent = agent;
  return r;
}

std::vector<ViolationReport> machine_pair(const Instance& original, const Instance& deviation, int agent,
                                          const MechanismSpec& spec, Audit* audit) {
  const double tol = tolerance_for(spec);
  const AllocationTrace a = run_mechanism(spec, original);
  const AllocationTrace b = run_mechanism(spec, deviation);
  audit_into(a, audit);
  audit_into(b, audit);
  std::vector<ViolationReport> out;
  const Rat la = a.loads()[agent];
  const Rat lb = b.loads()[agent];
  int first_job = -1;
  for (std::size_t j = 0; j < a.n(); ++j) {
    if (drops(a.fraction(j, agent), b.fraction(j, agent), tol)) {
      first_job = static_cast<int>(j);
      break;
    }
  }
  if (first_job < 0 && !drops(la, lb, tol)) return out;
  ViolationReport r = make_report(Property::MachineMonotone, spec, original, agent);
  r.deviation = deviation;
  r.job = first_job;
  r.witness = {{"speed_before", original.speeds[agent].str()},
               {"speed_after", deviation.speeds[agent].str()},
               {"load_before", la.str()},
               {"load_after", lb.str()}};
  if (first_job >= 0) {
    r.witness.emplace_back("fraction_before", a.fraction(first_job, agent).str());
    r.witness.emplace_back("fraction_after", b.fraction(first_job, agent).str());
  }
  r.detail = "machine " + std::to_string(agent) + " load " + la.str() + " -> " + lb.str() +
             " after reporting a faster speed";
  out.push_back(std::move(r));
  return out;
}

std::vector<ViolationReport> lambda_pair(const Instance& original, const Instance& deviation, int agent,
                                         const MechanismSpec& spec, Audit* audit) {
  const AllocationTrace a = run_mechanism(spec, original);
  const AllocationTrace b = run_mechanism(spec, deviation);
  audit_into(a, audit);
  audit_into(b, audit);
  std::vector<ViolationReport> out;
  auto bad = [](const Rat& lam, const Rat& lam2) { return lam2 > lam || lam2 * Rat(2) < lam; };
  auto report = [&](int job, const Rat& lam, const Rat& lam2) {
    ViolationReport r = make_report(Property::LambdaStability, spec, original, agent);
    r.deviation = deviation;
    r.job = job;
    r.witness = {{"lambda", lam.str()}, {"lambda_deviation", lam2.str()}};
    r.detail = "Lambda " + lam.str() + " vs " + lam2.str() +
               (job >= 0 ? " at arrival of job " + std::to_string(job) : std::string(" at the end"));
    out.push_back(std::move(r));
  };
  for (std::size_t j = 1; j < a.n(); ++j) {
    const Rat& lam = a.jobs[j].lambda_at_arrival;
    const Rat& lam2 = b.jobs[j].lambda_at_arrival;
    if (bad(lam, lam2)) {
      report(static_cast<int>(j), lam, lam2);
      return out;
    }
  }
  if (bad(a.final_lambda, b.final_lambda)) report(-1, a.final_lambda, b.final_lambda);
  return out;
}

std::vector<ViolationReport> job_monotone(const Instance& instance, const MechanismSpec& spec, Audit* audit) {
  instance.validate();
  const double tol = tolerance_for(spec);
  auto alloc = make_allocator(spec, instance.speeds);
  std::function<Row(int)> row_of_level;
  if (spec.is_level_based()) row_of_level = level_row_function(spec, instance.speeds);
  const auto& speeds = instance.speeds;
  std::vector<ViolationReport> out;

  for (std::size_t j = 0; j < instance.n(); ++j) {
    const Rat& truth = instance.jobs[j];
    if (j > 0) {
      const Rat lambda = alloc->current_lambda();
      const LevelStructure& lv = alloc->trace().levels;
      const auto grid = job_report_grid(lv, lambda, truth);
      std::optional<JobCurve> curve;
      if (row_of_level) curve = job_allocation_curve(lv, lambda, speeds, row_of_level);
      Rat prev_p;
      Rat prev_u;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const Row row = alloc->probe(grid[g]);
        const Rat u = row.unit_time(speeds);
        if (curve && curve->at(grid[g]).row != row) {
          ViolationReport r = make_report(Property::JobMonotone, spec, instance, static_cast<int>(j));
          r.job = static_cast<int>(j);
          r.witness = {{"report", grid[g].str()}};
          r.detail = "allocation curve disagrees with the allocator at report " + grid[g].str();
          out.push_back(std::move(r));
          break;
        }
        if (g > 0 && drops(u, prev_u, tol)) {
          ViolationReport r = make_report(Property::JobMonotone, spec, instance, static_cast<int>(j));
          r.job = static_cast<int>(j);
          r.witness = {{"report_low", prev_p.str()},
                       {"unit_time_low", prev_u.str()},
                       {"report_high", grid[g].str()},
                       {"unit_time_high", u.str()}};
          r.detail = "unit processing time rises from " + prev_u.str() + " to " + u.str() + " as the report of job " +
                     std::to_string(j) + " grows from " + prev_p.str() + " to " + grid[g].str();
          out.push_back(std::move(r));
          break;
        }
        prev_p = grid[g];
        prev_u = u;
      }
    }
    alloc->push(truth);
  }
  audit_into(alloc->trace(), audit);
  return out;
}

std::vector<ViolationReport> incentives(const Instance& instance, const MechanismSpec& spec,
                                        const PaymentOptions& opts, Audit* audit) {
  const double tol = tolerance_for(spec);
  const PaymentLedger ledger = compute_ledger(instance, spec, opts);
  if (audit) audit_into(run_mechanism(spec, instance), audit);
  const auto& speeds = instance.speeds;
  std::vector<ViolationReport> out;
  const AllocationTrace trace = run_mechanism(spec, instance);

  for (std::size_t j = 0; j < instance.n(); ++j) {
    const Rat& truth = instance.jobs[j];
    const JobCurve& curve = ledger.job_curves[j];
    const auto& completion = ledger.completion_before[j];
    std::vector<Rat> grid;
    if (j == 0) {
      grid = {truth / Rat(2), truth * Rat(2), truth * Rat(1 << 20, (1 << 20) + 1),
              truth * Rat((1 << 20) + 1, 1 << 20)};
    } else {
      grid = job_report_grid(trace.levels, trace.jobs[j].lambda_at_arrival, truth);
    }
    const Rat honest = job_utility(curve, completion, speeds, truth, truth);
    for (const Rat& rep : grid) {
      const Rat lie = job_utility(curve, completion, speeds, truth, rep);
      if (drops(lie, honest, tol)) {
        ViolationReport r = make_report(Property::JobIncentive, spec, instance, static_cast<int>(j));
        r.job = static_cast<int>(j);
        r.witness = {{"truth", truth.str()}, {"report", rep.str()},
                     {"utility_truth", honest.str()}, {"utility_report", lie.str()}};
        r.detail = "job " + std::to_string(j) + " gains by reporting " + rep.str() + " instead of " + truth.str();
        out.push_back(std::move(r));
        break;
      }
    }
  }

  for (std::size_t i = 0; i < instance.m(); ++i) {
    const MachineLoadCurve& curve = ledger.machine_curves[i];
    const Rat& s = speeds[i];
    const Rat honest = machine_utility(curve, s, s, ledger.bid_cap);
    const int agent = static_cast<int>(i);
    if (drops(Rat(0), honest, tol)) {
      ViolationReport r = make_report(Property::VoluntaryParticipation, spec, instance, agent);
      r.witness = {{"utility_truth", honest.str()}};
      r.detail = "truthful machine " + std::to_string(i) + " has utility " + honest.str();
      out.push_back(std::move(r));
    }
    for (long t = curve.lo_exp - 2; t <= curve.hi_exp + 2; ++t) {
      const Rat rep = Rat::pow2(t);
      const Rat lie = machine_utility(curve, s, rep, ledger.bid_cap);
      if (drops(lie, honest, tol)) {
        ViolationReport r = make_report(Property::MachineIncentive, spec, instance, agent);
        r.witness = {{"truth", s.str()}, {"report", rep.str()},
                     {"utility_truth", honest.str()}, {"utility_report", lie.str()}};
        r.detail = "machine " + std::to_string(i) + " gains by reporting " + rep.str() + " instead of " + s.str();
        out.push_back(std::move(r));
        break;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<ViolationReport> check_machine_monotone_pair(const Instance& original, const Instance& deviation,
                                                         int agent, const MechanismSpec& spec) {
  return machine_pair(original, deviation, agent, spec, nullptr);
}

std::vector<ViolationReport> check_machine_monotone(const Instance& instance, const MechanismSpec& spec) {
  std::vector<ViolationReport> out;
  for (std::size_t i = 0; i < instance.m(); ++i) {
    const int agent = static_cast<int>(i);
    for (auto& r : machine_pair(instance, double_machine(instance, agent), agent, spec, nullptr)) {
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<ViolationReport> check_lambda_stability_pair(const Instance& original, const Instance& deviation,
                                                         int agent, const MechanismSpec& spec) {
  return lambda_pair(original, deviation, agent, spec, nullptr);
}

std::vector<ViolationReport> check_lambda_stability(const Instance& instance, const MechanismSpec& spec) {
  std::vector<ViolationReport> out;
  for (std::size_t i = 0; i < instance.m(); ++i) {
    const int agent = static_cast<int>(i);
    for (auto& r : lambda_pair(instance, double_machine(instance, agent), agent, spec, nullptr)) {
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<Rat> job_report_grid(const LevelStructure& levels, const Rat& lambda, const Rat& truth) {
  std::set<Rat> pts;
  const Rat tiny = Rat::pow2(-20);
  auto add = [&](const Rat& p) {
    if (p.sign() > 0) pts.insert(p);
  };
  add(truth);
  add(truth - truth * tiny);
  add(truth + truth * tiny);
  add(truth - tiny);
  add(truth + tiny);
  if (lambda.sign() > 0) {
    std::vector<Rat> bps;
    for (int k = levels.K; k >= 1; --k) bps.push_back(levels.r(k) * lambda);
    add(bps.front() / Rat(2));
    for (std::size_t t = 0; t < bps.size(); ++t) {
      const Rat& b = bps[t];
      add(b);
      add(b - b * tiny);
      add(b + b * tiny);
      if (t + 1 < bps.size()) add((b + bps[t + 1]) / Rat(2));
    }
    add(bps.back() * Rat(2));
    add(bps.back() * Rat(4) + Rat(1));
  }
  return {pts.begin(), pts.end()};
}

std::vector<ViolationReport> check_job_monotone(const Instance& instance, const MechanismSpec& spec) {
  return job_monotone(instance, spec, nullptr);
}

std::vector<ViolationReport> check_incentives(const Instance& instance, const MechanismSpec& spec,
                                              const PaymentOptions& opts) {
  return incentives(instance, spec, opts, nullptr);
}

std::vector<std::string> audit_feasibility(const AllocationTrace& trace) {
  std::vector<std::string> out;
  const auto& lv = trace.levels;
  if (lv.machines.empty()) return out;
  const Rat top = Rat::pow2(lv.top_exponent);
  const Rat m = Rat(static_cast<long>(trace.m()));
  for (std::size_t j = 0; j < trace.n(); ++j) {
    const auto& rec = trace.jobs[j];
    for (std::size_t t = 0; t < rec.row.machines.size(); ++t) {
      if (rec.row.fractions[t].sign() <= 0) continue;
      const int i = rec.row.machines[t];
      const Rat& sbar = lv.rounded(i);
      if (rec.size > sbar * trace.final_lambda) {
        out.push_back(trace.mechanism + ": job " + std::to_string(j) + " of size " + rec.size.str() +
                      " on machine " + std::to_string(i) + " exceeds s_bar * Lambda_final = " +
                      (sbar * trace.final_lambda).str());
      }
      if (sbar * m < top) {
        out.push_back(trace.mechanism + ": job " + std::to_string(j) + " placed on machine " + std::to_string(i) +
                      " slower than s_bar_1 / m");
      }
    }
  }
  return out;
}

bool replay(const ViolationReport& report, const MechanismSpec& spec) {
  const Instance& inst = report.instance;
  switch (report.property) {
    case Property::MachineMonotone: {
      const Instance dev = report.deviation ? *report.deviation : double_machine(inst, report.agent);
      return !check_machine_monotone_pair(inst, dev, report.agent, spec).empty();
    }
    case Property::LambdaStability: {
      const Instance dev = report.deviation ? *report.deviation : double_machine(inst, report.agent);
      return !check_lambda_stability_pair(inst, dev, report.agent, spec).empty();
    }
    case Property::JobMonotone:
      return !check_job_monotone(inst, spec).empty();
    case Property::JobIncentive:
    case Property::MachineIncentive:
    case Property::VoluntaryParticipation: {
      for (const auto& r : check_incentives(inst, spec)) {
        if (r.property == report.property) return true;
      }
      return false;
    }
    case Property::Feasibility:
      return !audit_feasibility(run_mechanism(spec, inst)).empty();
  }
  return false;
}

Instance shrink(const Instance& instance, const std::function<bool(const Instance&)>& fails) {
  Instance cur = instance;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t j = cur.n(); j-- > 0 && cur.n() > 1;) {
      Instance cand = cur;
      cand.jobs.erase(cand.jobs.begin() + static_cast<long>(j));
      if (fails(cand)) {
        cur = std::move(cand);
        changed = true;
      }
    }
  }
  changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = cur.m(); i-- > 0 && cur.m() > 1;) {
      Instance cand = cur;
      cand.speeds.erase(cand.speeds.begin() + static_cast<long>(i));
      if (fails(cand)) {
        cur = std::move(cand);
        changed = true;
      }
    }
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Suites

unsigned worker_count(unsigned requested) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SELFISH_LB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(threads), std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t t = 0; t < n; ++t) body(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < n; t = next++) {
        try {
          body(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

using Check = std::function<std::vector<ViolationReport>(const Instance&, Audit*)>;

SuiteResult run_suite(const std::string& name, const FuzzConfig& config, const Check& check) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::vector<ViolationReport>> found(config.trials);
  std::vector<Audit> audits(config.trials);
  parallel_for(config.trials, config.threads, [&](std::size_t t) {
    const Instance inst = fuzz_instance(config, t);
    found[t] = check(inst, &audits[t]);
    for (auto& r : found[t]) {
      r.trial_seed = trial_seed(config.seed, t);
      const Property p = r.property;
      r.minimized = shrink(inst, [&](const Instance& cand) {
        for (const auto& again : check(cand, nullptr)) {
          if (again.property == p) return true;
        }
        return false;
      });
    }
  });
  SuiteResult res;
  res.suite = name;
  res.mechanism = config.mechanism.name();
  res.trials = config.trials;
  res.checks = config.trials;
  for (std::size_t t = 0; t < config.trials; ++t) {
    for (auto& r : found[t]) res.violations.push_back(std::move(r));
    for (auto& a : audits[t]) res.audit_failures.push_back(std::move(a));
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace

SuiteResult test_machine_monotone(const FuzzConfig& config) {
  const MechanismSpec spec = config.mechanism;
  return run_suite("test-monotone", config, [spec](const Instance& inst, Audit* audit) {
    std::vector<ViolationReport> out;
    for (std::size_t i = 0; i < inst.m(); ++i) {
      const int agent = static_cast<int>(i);
      for (auto& r : machine_pair(inst, double_machine(inst, agent), agent, spec, audit)) out.push_back(std::move(r));
    }
    return out;
  });
}

SuiteResult test_lambda_stability(const FuzzConfig& config) {
  const MechanismSpec spec = config.mechanism;
  return run_suite("test-lambda", config, [spec](const Instance& inst, Audit* audit) {
    std::vector<ViolationReport> out;
    for (std::size_t i = 0; i < inst.m(); ++i) {
      const int agent = static_cast<int>(i);
      for (auto& r : lambda_pair(inst, double_machine(inst, agent), agent, spec, audit)) out.push_back(std::move(r));
    }
    return out;
  });
}

SuiteResult test_job_monotone(const FuzzConfig& config) {
  const MechanismSpec spec = config.mechanism;
  return run_suite("test-job", config,
                   [spec](const Instance& inst, Audit* audit) { return job_monotone(inst, spec, audit); });
}

SuiteResult test_incentives(const FuzzConfig& config, const PaymentOptions& opts) {
  const MechanismSpec spec = config.mechanism;
  return run_suite("test-incentives", config,
                   [spec, opts](const Instance& inst, Audit* audit) { return incentives(inst, spec, opts, audit); });
}

// ---------------------------------------------------------------------------
// Competitive-ratio experiments

OracleKind parse_oracle(std::string_view name) {
  if (name == "bruteforce") return OracleKind::Bruteforce;
  if (name == "lb") return OracleKind::LowerBound;
  if (name == "none") return OracleKind::None;
  throw InputError("unknown oracle '" + std::string(name) + "' (expected bruteforce, lb or none)");
}

std::string oracle_name(OracleKind k) {
  switch (k) {
    case OracleKind::Bruteforce: return "bruteforce";
    case OracleKind::LowerBound: return "lb";
    case OracleKind::None: return "none";
  }
  return "none";
}

double competitive_envelope(std::size_t m) {
  return 32.0 * static_cast<double>(level_count(m) - 1 + 3);
}

double tight_competitive_envelope(std::size_t m) {
  return 16.0 * static_cast<double>(level_count(m)) + 12.0;
}

BenchRow bench_instance(const Instance& instance, const BenchConfig& config, std::size_t trial) {
  const MechanismSpec& spec = config.fuzz.mechanism;
  const bool lq = spec.kind == MechanismKind::Lq && !spec.q.is_inf();
  const QParam q = spec.kind == MechanismKind::Lq ? spec.q : QParam::inf();
  const AllocationTrace trace = run_mechanism(spec, instance);

  BenchRow row;
  row.trial = trial;
  row.m = instance.m();
  row.n = instance.n();
  row.q = q.str();
  if (lq) {
    row.obj_fractional = lq_objective(trace, q);
  } else {
    const Rat obj = trace.makespan();
    row.obj_fractional = obj.to_double();
    row.obj_fractional_exact = obj.str();
  }

  const std::uint64_t base = trial_seed(config.fuzz.seed ^ 0x5EEDULL, trial);
  double sum = 0.0;
  for (std::size_t r = 0; r < config.rounding_seeds; ++r) {
    const IntegralAssignment a = round_independent(trace, base + r);
    const double v = lq ? lq_of_assignment(instance, a.assign, q) : a.makespan().to_double();
    sum += v;
    row.obj_rounded_max = std::max(row.obj_rounded_max, v);
  }
  row.obj_rounded_mean = config.rounding_seeds ? sum / static_cast<double>(config.rounding_seeds) : 0.0;

  row.oracle = oracle_name(config.oracle);
  if (config.oracle == OracleKind::Bruteforce) {
    const OptResult opt = lq ? opt_lq_bruteforce(instance, q) : opt_makespan_bruteforce(instance);
    row.oracle_value = opt.value;
    if (opt.exact) row.oracle_exact = opt.exact->str();
  } else if (config.oracle == OracleKind::LowerBound) {
    if (lq) {
      row.oracle_value = lb_lq(instance, q);
    } else {
      const Rat lb = lb_makespan(instance);
      row.oracle_value = lb.to_double();
      row.oracle_exact = lb.str();
    }
  }
  if (row.oracle_value > 0.0) {
    row.ratio = row.obj_fractional / row.oracle_value;
    row.ratio_rounded = row.obj_rounded_mean / row.oracle_value;
  }
  row.envelope = competitive_envelope(row.m);
  row.tight_envelope = tight_competitive_envelope(row.m);
  row.feasibility_failures = audit_feasibility(trace).size();
  return row;
}

std::vector<BenchRow> bench_ratio(const BenchConfig& config) {
  std::vector<BenchRow> rows(config.fuzz.trials);
  parallel_for(config.fuzz.trials, config.fuzz.threads,
               [&](std::size_t t) { rows[t] = bench_instance(fuzz_instance(config.fuzz, t), config, t); });
  return rows;
}

std::string bench_csv_header() {
  return "trial,m,n,q,obj_fractional,obj_fractional_exact,obj_rounded_mean,obj_rounded_max,oracle,"
         "oracle_value,oracle_exact,ratio,ratio_rounded,envelope,tight_envelope,feasibility_failures";
}

std::string bench_csv_row(const BenchRow& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << r.trial << ',' << r.m << ',' << r.n << ',' << r.q << ',' << r.obj_fractional << ','
     << r.obj_fractional_exact << ',' << r.obj_rounded_mean << ',' << r.obj_rounded_max << ',' << r.oracle << ','
     << r.oracle_value << ',' << r.oracle_exact << ',' << r.ratio << ',' << r.ratio_rounded << ',' << r.envelope
     << ',' << r.tight_envelope << ',' << r.feasibility_failures;
  return os.str();
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("least squares needs at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    sx += x[t];
    sy += y[t];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    sxx += (x[t] - mx) * (x[t] - mx);
    sxy += (x[t] - mx) * (y[t] - my);
    syy += (y[t] - my) * (y[t] - my);
  }
  if (sxx == 0.0) throw InputError("least squares needs distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

// ---------------------------------------------------------------------------
// Counterexamples

HardInstance hard_instance(std::string_view name) {
  if (name == "llw") return llw_hard_instance();
  if (name == "waterfill") return waterfill_hard_instance();
  if (name == "variant-c") return variant_c_hard_instance();
  if (name == "variant-d") return variant_d_hard_instance();
  throw InputError("unknown counterexample '" + std::string(name) +
                   "' (expected llw, waterfill, variant-c or variant-d)");
}

namespace {

bool within(const Rat& v, const Rat& target, const Rat& slack) { return abs(v - target) <= slack; }

}  // namespace

CounterexampleResult reproduce_counterexample(std::string_view name) {
  const HardInstance h = hard_instance(name);
  const MechanismSpec control = MechanismSpec::makespan_default();
  CounterexampleResult res;
  res.name = h.name;

  if (h.name == "llw" || h.name == "waterfill") {
    const MechanismSpec spec = MechanismSpec::of(h.name == "llw" ? MechanismKind::Llw : MechanismKind::Waterfill);
    res.property = Property::MachineMonotone;
    const Rat before = run_mechanism(spec, h.original).loads()[h.agent];
    const Rat after = run_mechanism(spec, h.deviation).loads()[h.agent];
    res.values = {{"machine", std::to_string(h.agent)},
                  {"speed_before", h.original.speeds[h.agent].str()},
                  {"speed_after", h.deviation.speeds[h.agent].str()},
                  {"load_before", before.str()},
                  {"load_after", after.str()}};
    res.violations = check_machine_monotone_pair(h.original, h.deviation, h.agent, spec);
    bool values_ok = false;
    if (h.name == "llw") {
      values_ok = before == Rat::pow2(19) && after == Rat(1);
      bool prices_ok = true;
      for (const auto* inst : {&h.original, &h.deviation}) {
        for (const auto& d : run_llw(*inst).decisions) prices_ok = prices_ok && d.price_property;
      }
      res.values.emplace_back("price_property", prices_ok ? "holds" : "fails");
      values_ok = values_ok && prices_ok;
    } else {
      const Rat slack = Rat::pow2(-10);
      values_ok = within(before, Rat(8, 5), slack) && within(after, Rat(4, 5), slack);
      res.values.emplace_back("load_before_float", std::to_string(before.to_double()));
      res.values.emplace_back("load_after_float", std::to_string(after.to_double()));
    }
    res.reproduced = values_ok && !res.violations.empty();
    const auto ctl = check_machine_monotone_pair(h.original, h.deviation, h.agent, control);
    res.control_ok = ctl.empty();
    res.control_detail = "makespan load " + run_mechanism(control, h.original).loads()[h.agent].str() + " -> " +
                         run_mechanism(control, h.deviation).loads()[h.agent].str();
    return res;
  }

  if (h.name == "variant-c") {
    res.property = Property::JobMonotone;
    const Rat& truth = h.original.jobs[h.agent];
    const Rat& lie = h.deviation.jobs[h.agent];
    auto unit_times = [&](const MechanismSpec& spec) {
      auto alloc = make_allocator(spec, h.original.speeds);
      for (int j = 0; j < h.agent; ++j) alloc->push(h.original.jobs[j]);
      return std::make_pair(alloc->probe(truth).unit_time(h.original.speeds),
                            alloc->probe(lie).unit_time(h.original.speeds));
    };
    const MechanismSpec spec = MechanismSpec::of(MechanismKind::VariantC);
    const auto [u_truth, u_lie] = unit_times(spec);
    res.values = {{"job", std::to_string(h.agent)},
                  {"report_truth", truth.str()},
                  {"report_deviation", lie.str()},
                  {"unit_time_truth", u_truth.str()},
                  {"unit_time_deviation", u_lie.str()}};
    res.violations = check_job_monotone(h.original, spec);
    res.reproduced = u_truth == Rat(1, 6) && u_lie == Rat(1, 3) && !res.violations.empty();
    const auto [c_truth, c_lie] = unit_times(control);
    res.control_ok = c_lie <= c_truth && check_job_monotone(h.original, control).empty();
    res.control_detail = "makespan unit time " + c_truth.str() + " -> " + c_lie.str();
    return res;
  }

  res.property = Property::LambdaStability;
  const MechanismSpec spec = MechanismSpec::of(MechanismKind::VariantD);
  const Rat lam = run_mechanism(spec, h.original).final_lambda;
  const Rat lam2 = run_mechanism(spec, h.deviation).final_lambda;
  res.values = {{"machine", std::to_string(h.agent)},
                {"speed_before", h.original.speeds[h.agent].str()},
                {"speed_after", h.deviation.speeds[h.agent].str()},
                {"lambda", lam.str()},
                {"lambda_deviation", lam2.str()}};
  res.violations = check_lambda_stability_pair(h.original, h.deviation, h.agent, spec);
  res.reproduced = lam == Rat(4) && lam2 == Rat(1) && !res.violations.empty();
  const Rat c1 = run_mechanism(control, h.original).final_lambda;
  const Rat c2 = run_mechanism(control, h.deviation).final_lambda;
  res.control_ok = check_lambda_stability_pair(h.original, h.deviation, h.agent, control).empty();
  res.control_detail = "makespan Lambda " + c1.str() + " vs " + c2.str();
  return res;
}

}  // namespace slb
