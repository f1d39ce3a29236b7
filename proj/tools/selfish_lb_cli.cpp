#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "selfish_lb/io.hpp"
#include "selfish_lb/oracles.hpp"
#include "selfish_lb/payments.hpp"
#include "selfish_lb/rounding.hpp"
#include "selfish_lb/truthlab.hpp"

using namespace slb;

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

struct Options {
  std::string in;
  std::string out = "-";
  std::string mechanism = "makespan";
  std::string q;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::string oracle;
  std::string emit;
  bool round = false;
  std::string mode = "fractional";
  int m = 0, n = 0, m_max = 16, n_max = 50;
  std::size_t rounding_seeds = 100;
  std::string counterexample;
};

MechanismSpec mechanism_of(const Options& o) {
  MechanismSpec spec = MechanismSpec::of(parse_mechanism(o.mechanism));
  if (spec.kind == MechanismKind::Lq) {
    if (o.q.empty()) throw InputError("--q is required with --mechanism lq");
    spec.q = QParam::parse(o.q);
  } else if (!o.q.empty()) {
    throw InputError("--q only applies to --mechanism lq");
  }
  return spec;
}

void emit_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

std::string emit_or(const Options& o, const std::string& fallback) { return o.emit.empty() ? fallback : o.emit; }

void require_emit(const std::string& emit, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (emit == a) return;
  }
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw InputError("--emit must be one of " + list + ", got '" + emit + "'");
}

int cmd_run(const Options& o) {
  const Instance inst = load_instance(o.in);
  const MechanismSpec spec = mechanism_of(o);
  const std::string emit = emit_or(o, "trace");
  require_emit(emit, {"trace", "summary"});
  const AllocationTrace trace = run_mechanism(spec, inst);
  std::optional<IntegralAssignment> assignment;
  if (o.round) assignment = round_independent(trace, o.seed);

  if (emit == "trace") {
    json doc = trace_to_json(trace);
    if (assignment) doc["assignment"] = assignment_to_json(*assignment);
    write_json(doc, o.out);
    return kOk;
  }
  std::ostringstream os;
  os << "mechanism " << trace.mechanism << " q " << trace.q << '\n';
  os << "machines " << trace.m() << " jobs " << trace.n() << " K " << trace.levels.K << '\n';
  os << "final_lambda " << trace.final_lambda << " phases " << trace.phases << '\n';
  os << "fractional_makespan " << trace.makespan() << " (" << trace.makespan().to_double() << ")\n";
  const auto loads = trace.loads();
  for (std::size_t i = 0; i < loads.size(); ++i) os << "load[" << i << "] " << loads[i] << '\n';
  if (assignment) {
    os << "seed " << assignment->seed << " generator " << assignment->generator << '\n';
    os << "rounded_makespan " << assignment->makespan() << " (" << assignment->makespan().to_double() << ")\n";
    for (std::size_t i = 0; i < assignment->loads.size(); ++i) {
      os << "rounded_load[" << i << "] " << assignment->loads[i] << '\n';
    }
  }
  emit_text(os.str(), o.out);
  return kOk;
}

int cmd_round(const Options& o) {
  const Instance inst = load_instance(o.in);
  const MechanismSpec spec = mechanism_of(o);
  const AllocationTrace trace = run_mechanism(spec, inst);
  const std::size_t count = o.trials == 0 ? 1 : o.trials;
  json list = json::array();
  for (std::size_t t = 0; t < count; ++t) list.push_back(assignment_to_json(round_independent(trace, o.seed + t)));
  json loads = json::array();
  for (const auto& l : expected_loads(trace)) loads.push_back(l.str());
  write_json({{"mechanism", trace.mechanism}, {"q", trace.q}, {"expected_loads", loads}, {"assignments", list}},
             o.out);
  return kOk;
}

int cmd_pay(const Options& o) {
  const Instance inst = load_instance(o.in);
  const MechanismSpec spec = mechanism_of(o);
  PaymentOptions opts;
  if (o.mode == "fractional") {
    opts.mode = CostMode::Fractional;
  } else if (o.mode == "realized") {
    opts.mode = CostMode::Realized;
  } else {
    throw InputError("--mode must be fractional or realized, got '" + o.mode + "'");
  }
  opts.seed = o.seed;
  const PaymentLedger ledger = compute_ledger(inst, spec, opts);
  write_json(ledger_to_json(ledger, utilities(inst, ledger)), o.out);
  return kOk;
}

int cmd_opt(const Options& o) {
  const Instance inst = load_instance(o.in);
  const QParam q = o.q.empty() ? QParam::inf() : QParam::parse(o.q);
  const OracleKind kind = parse_oracle(o.oracle.empty() ? "bruteforce" : o.oracle);
  json doc = {{"q", q.str()}, {"oracle", oracle_name(kind)}};
  if (kind == OracleKind::Bruteforce) {
    const OptResult r = q.is_inf() ? opt_makespan_bruteforce(inst) : opt_lq_bruteforce(inst, q);
    doc["value"] = r.value;
    doc["exact"] = r.exact ? json(r.exact->str()) : json(nullptr);
    doc["witness"] = r.witness ? json(*r.witness) : json(nullptr);
  } else if (kind == OracleKind::LowerBound) {
    if (q.is_inf()) {
      const Rat lb = lb_makespan(inst);
      doc["value"] = lb.to_double();
      doc["exact"] = lb.str();
    } else {
      doc["value"] = lb_lq(inst, q);
      doc["exact"] = nullptr;
    }
  } else {
    throw InputError("opt needs --oracle bruteforce or lb");
  }
  write_json(doc, o.out);
  return kOk;
}

FuzzConfig fuzz_of(const Options& o, std::size_t default_trials) {
  FuzzConfig c;
  c.trials = o.trials == 0 ? default_trials : o.trials;
  c.seed = o.seed;
  c.mechanism = mechanism_of(o);
  if (o.m > 0) {
    c.m_min = c.m_max = o.m;
  } else {
    c.m_max = o.m_max;
  }
  if (o.n > 0) {
    c.n_min = c.n_max = o.n;
  } else {
    c.n_max = o.n_max;
  }
  if (c.m_max < c.m_min || c.n_max < c.n_min) throw InputError("machine and job ranges must be positive");
  return c;
}

int report_suite(const SuiteResult& r, const MechanismSpec& spec, const Options& o) {
  const std::string emit = emit_or(o, "summary");
  require_emit(emit, {"summary", "json"});
  if (emit == "json") {
    json list = json::array();
    for (const auto& v : r.violations) list.push_back(report_to_json(v, spec));
    write_json({{"suite", r.suite},
                {"mechanism", r.mechanism},
                {"trials", r.trials},
                {"violations", list},
                {"feasibility_failures", r.audit_failures},
                {"seconds", r.seconds}},
               o.out);
  } else {
    std::ostringstream os;
    os << r.suite << ' ' << r.mechanism << " trials " << r.trials << " violations " << r.violations.size()
       << " feasibility_failures " << r.audit_failures.size() << " seconds " << std::fixed << std::setprecision(2)
       << r.seconds << '\n';
    for (const auto& v : r.violations) os << "VIOLATION: " << property_name(v.property) << ": " << v.detail << '\n';
    for (const auto& a : r.audit_failures) os << "FEASIBILITY: " << a << '\n';
    emit_text(os.str(), o.out);
  }
  // Broken baselines are expected to violate; only level-based ones count.
  const bool unexpected = spec.is_level_based() && (!r.violations.empty() || !r.audit_failures.empty());
  return unexpected ? kViolation : kOk;
}

int cmd_bench(const Options& o) {
  BenchConfig cfg;
  cfg.fuzz = fuzz_of(o, 50);
  if (o.n == 0 && o.m > 0) cfg.fuzz.n_min = cfg.fuzz.n_max = 20 * o.m;
  cfg.oracle = parse_oracle(o.oracle.empty() ? "lb" : o.oracle);
  cfg.rounding_seeds = o.rounding_seeds;
  const std::string emit = emit_or(o, "csv");
  require_emit(emit, {"csv", "summary"});
  const auto rows = bench_ratio(cfg);
  bool ok = true;
  for (const auto& r : rows) {
    ok = ok && r.feasibility_failures == 0;
    if (cfg.oracle != OracleKind::None) ok = ok && r.ratio <= r.envelope;
  }
  std::ostringstream os;
  if (emit == "csv") {
    os << bench_csv_header() << '\n';
    for (const auto& r : rows) os << bench_csv_row(r) << '\n';
  } else {
    double worst = 0.0, mean = 0.0;
    for (const auto& r : rows) {
      worst = std::max(worst, r.ratio);
      mean += r.ratio_rounded;
    }
    if (!rows.empty()) mean /= static_cast<double>(rows.size());
    os << "bench " << cfg.fuzz.mechanism.name() << " trials " << rows.size() << " oracle " << oracle_name(cfg.oracle)
       << " worst_ratio " << worst << " mean_rounded_ratio " << mean << (ok ? " OK" : " ENVELOPE-EXCEEDED") << '\n';
  }
  emit_text(os.str(), o.out);
  return ok ? kOk : kViolation;
}

int cmd_counterexample(const Options& o) {
  const CounterexampleResult r = reproduce_counterexample(o.counterexample);
  const std::string emit = emit_or(o, "summary");
  require_emit(emit, {"summary", "json"});
  if (emit == "json") {
    json values = json::object();
    for (const auto& [k, v] : r.values) values[k] = v;
    json list = json::array();
    const MechanismSpec spec = MechanismSpec::of(parse_mechanism(r.name));
    for (const auto& v : r.violations) list.push_back(report_to_json(v, spec));
    write_json({{"counterexample", r.name},
                {"property", property_name(r.property)},
                {"values", values},
                {"reproduced", r.reproduced},
                {"control_ok", r.control_ok},
                {"control", r.control_detail},
                {"violations", list}},
               o.out);
  } else {
    std::ostringstream os;
    os << "counterexample " << r.name << '\n';
    for (const auto& [k, v] : r.values) os << "  " << k << " = " << v << '\n';
    for (const auto& v : r.violations) os << "VIOLATION: " << property_name(v.property) << ": " << v.detail << '\n';
    os << "control (makespan): " << r.control_detail << (r.control_ok ? " [no violation]" : " [VIOLATION]") << '\n';
    os << (r.reproduced ? "expected violation reproduced" : "expected violation NOT reproduced") << '\n';
    emit_text(os.str(), o.out);
  }
  return r.reproduced && r.control_ok ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truthful online load balancing: allocators, payments and a truthfulness lab"};
  app.require_subcommand(1);
  Options o;

  auto add_mechanism = [&](CLI::App* c) {
    c->add_option("--mechanism", o.mechanism, "makespan, lq, llw, waterfill, variant-c or variant-d");
    c->add_option("--q", o.q, "norm exponent for lq: rational >= 1 or inf");
  };
  auto add_io = [&](CLI::App* c, bool need_in) {
    auto* in = c->add_option("--in", o.in, "instance JSON file");
    if (need_in) in->required();
    c->add_option("--out", o.out, "output path, '-' for stdout");
  };

  auto* run = app.add_subcommand("run", "run a mechanism on an instance");
  add_io(run, true);
  add_mechanism(run);
  run->add_option("--seed", o.seed, "rounding seed");
  run->add_flag("--round", o.round, "also round the fractional allocation");
  run->add_option("--emit", o.emit, "trace or summary");

  auto* round = app.add_subcommand("round", "independent rounding of a mechanism's allocation");
  add_io(round, true);
  add_mechanism(round);
  round->add_option("--seed", o.seed, "first seed");
  round->add_option("--trials", o.trials, "number of consecutive seeds");

  auto* pay = app.add_subcommand("pay", "job charges and machine payments");
  add_io(pay, true);
  add_mechanism(pay);
  pay->add_option("--mode", o.mode, "fractional or realized completion times for job charges");
  pay->add_option("--seed", o.seed, "rounding seed for --mode realized");

  auto* opt = app.add_subcommand("opt", "offline optimum or lower bound");
  add_io(opt, true);
  opt->add_option("--q", o.q, "norm exponent, default inf");
  opt->add_option("--oracle", o.oracle, "bruteforce (default) or lb");

  std::vector<std::pair<CLI::App*, std::string>> suites;
  const std::pair<const char*, const char*> suite_names[] = {
      {"test-monotone", "fuzz machine-side monotonicity (every machine doubled)"},
      {"test-lambda", "fuzz Lambda-stability under a machine doubling"},
      {"test-job", "fuzz job-side monotonicity over the report grid"},
      {"test-incentives", "fuzz truthful utility, both sides, and voluntary participation"}};
  for (const auto& [name, help] : suite_names) {
    auto* c = app.add_subcommand(name, help);
    add_mechanism(c);
    c->add_option("--out", o.out, "output path, '-' for stdout");
    c->add_option("--trials", o.trials, "random instances");
    c->add_option("--seed", o.seed, "base seed");
    c->add_option("--m-max", o.m_max, "largest machine count");
    c->add_option("--n-max", o.n_max, "largest job count");
    c->add_option("--emit", o.emit, "summary or json");
    suites.emplace_back(c, name);
  }

  auto* bench = app.add_subcommand("bench", "competitive-ratio experiment");
  add_mechanism(bench);
  bench->add_option("--out", o.out, "output path, '-' for stdout");
  bench->add_option("--trials", o.trials, "random instances");
  bench->add_option("--seed", o.seed, "base seed");
  bench->add_option("--m", o.m, "machine count (default: random up to --m-max)");
  bench->add_option("--n", o.n, "job count (default 20m when --m is set)");
  bench->add_option("--m-max", o.m_max, "largest machine count");
  bench->add_option("--n-max", o.n_max, "largest job count");
  bench->add_option("--oracle", o.oracle, "bruteforce, lb (default) or none");
  bench->add_option("--rounding-seeds", o.rounding_seeds, "rounding seeds per instance");
  bench->add_option("--emit", o.emit, "csv or summary");

  auto* cex = app.add_subcommand("counterexample", "reproduce a broken mechanism's violation");
  cex->add_option("name", o.counterexample, "llw, waterfill, variant-c or variant-d")->required();
  cex->add_option("--out", o.out, "output path, '-' for stdout");
  cex->add_option("--emit", o.emit, "summary or json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (run->parsed()) return cmd_run(o);
    if (round->parsed()) return cmd_round(o);
    if (pay->parsed()) return cmd_pay(o);
    if (opt->parsed()) return cmd_opt(o);
    if (bench->parsed()) return cmd_bench(o);
    if (cex->parsed()) return cmd_counterexample(o);
    for (const auto& [c, name] : suites) {
      if (!c->parsed()) continue;
      const FuzzConfig cfg = fuzz_of(o, name == "test-incentives" ? 200 : 1000);
      SuiteResult r;
      if (name == "test-monotone") r = test_machine_monotone(cfg);
      if (name == "test-lambda") r = test_lambda_stability(cfg);
      if (name == "test-job") r = test_job_monotone(cfg);
      if (name == "test-incentives") r = test_incentives(cfg);
      return report_suite(r, cfg.mechanism, o);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kViolation;
  }
  return kUsage;
}
