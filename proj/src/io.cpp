#include "selfish_lb/io.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace slb {

Rat rat_from_json(const json& v, const std::string& field) {
  try {
    if (v.is_string()) return Rat::parse(v.get<std::string>());
    if (v.is_array() && v.size() == 2 && v[0].is_string() && v[1].is_string()) {
      return Rat::from_parts(v[0].get<std::string>(), v[1].get<std::string>());
    }
  } catch (const InputError& e) {
    throw InputError(field + ": " + e.what());
  }
  throw InputError(field + ": expected a decimal string or a [num, den] pair of strings, got " + v.dump());
}

json rat_to_json(const Rat& r) {
  if (r.is_integer()) return r.num_str();
  return json::array({r.num_str(), r.den_str()});
}

namespace {

std::vector<Rat> positive_list(const json& doc, const char* key) {
  if (!doc.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  const json& arr = doc.at(key);
  if (!arr.is_array()) throw InputError(std::string(key) + ": expected an array");
  if (arr.empty()) throw InputError(std::string(key) + ": must not be empty");
  std::vector<Rat> out;
  for (std::size_t t = 0; t < arr.size(); ++t) {
    const std::string field = std::string(key) + "[" + std::to_string(t) + "]";
    Rat r = rat_from_json(arr[t], field);
    if (r.sign() <= 0) throw InputError(field + ": must be positive, got " + r.str());
    out.push_back(std::move(r));
  }
  return out;
}

json str_list(const std::vector<Rat>& v) {
  json out = json::array();
  for (const auto& r : v) out.push_back(r.str());
  return out;
}

json row_json(const Row& row) {
  json out = json::array();
  for (std::size_t t = 0; t < row.machines.size(); ++t) {
    out.push_back({{"machine", row.machines[t]},
                   {"fraction", row.fractions[t].str()},
                   {"fraction_float", row.fractions[t].to_double()}});
  }
  return out;
}

}  // namespace

Instance instance_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("instance: expected a JSON object");
  Instance inst;
  inst.speeds = positive_list(doc, "speeds");
  inst.jobs = positive_list(doc, "jobs");
  return inst;
}

json instance_to_json(const Instance& instance) {
  json speeds = json::array();
  json jobs = json::array();
  for (const auto& s : instance.speeds) speeds.push_back(rat_to_json(s));
  for (const auto& p : instance.jobs) jobs.push_back(rat_to_json(p));
  return {{"speeds", speeds}, {"jobs", jobs}};
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

Instance load_instance(const std::string& path) {
  try {
    return instance_from_json(read_json(path));
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw InputError(path + ": " + msg);
  }
}

void write_json(const json& doc, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

void save_instance(const Instance& instance, const std::string& path) {
  write_json(instance_to_json(instance), path);
}

json trace_to_json(const AllocationTrace& trace) {
  json machines = json::array();
  for (const auto& mp : trace.levels.machines) {
    machines.push_back({{"id", mp.id},
                        {"reported_speed", mp.reported_speed.str()},
                        {"rounded_speed", mp.rounded_speed.str()},
                        {"active", mp.active},
                        {"group", mp.group ? json(*mp.group) : json(nullptr)}});
  }
  json jobs = json::array();
  for (std::size_t j = 0; j < trace.jobs.size(); ++j) {
    const auto& rec = trace.jobs[j];
    jobs.push_back({{"id", j},
                    {"size", rec.size.str()},
                    {"lambda_at_arrival", rec.lambda_at_arrival.str()},
                    {"level", rec.level},
                    {"super_large", rec.super_large},
                    {"row", row_json(rec.row)},
                    {"doubled_after", rec.doubled_after},
                    {"lambda_after", rec.lambda_after.str()}});
  }
  json groups = json::array();
  for (const auto& g : trace.levels.groups) groups.push_back(g);
  const auto loads = trace.loads();
  return {{"schema", kTraceSchema},
          {"mechanism", trace.mechanism},
          {"q", trace.q},
          {"exact", trace.exact},
          {"speeds", str_list(trace.speeds)},
          {"levels", {{"K", trace.levels.K},
                      {"group_speeds", str_list(trace.levels.group_speeds)},
                      {"groups", groups},
                      {"machines", machines}}},
          {"jobs", jobs},
          {"final_lambda", trace.final_lambda.str()},
          {"phases", trace.phases},
          {"lambda_history", str_list(trace.lambda_history)},
          {"loads", str_list(loads)},
          {"makespan", trace.makespan().str()}};
}

void save_trace(const AllocationTrace& trace, const std::string& path) {
  write_json(trace_to_json(trace), path);
}

json assignment_to_json(const IntegralAssignment& a) {
  return {{"schema", kAssignmentSchema},
          {"seed", a.seed},
          {"generator", a.generator},
          {"assign", a.assign},
          {"loads", str_list(a.loads)},
          {"completion", str_list(a.completion)},
          {"makespan", a.makespan().str()}};
}

json ledger_to_json(const PaymentLedger& ledger, const AgentUtilities& utils) {
  json jobs = json::array();
  for (std::size_t j = 0; j < ledger.job_charges.size(); ++j) {
    json pieces = json::array();
    for (const auto& piece : ledger.job_curves[j].pieces) {
      pieces.push_back({{"lo", piece.lo.str()},
                        {"hi", piece.hi ? json(piece.hi->str()) : json(nullptr)},
                        {"level", piece.level},
                        {"super_large", piece.super_large},
                        {"unit_time", piece.unit_time.str()}});
    }
    jobs.push_back({{"id", j},
                    {"charge", ledger.job_charges[j].str()},
                    {"utility", utils.jobs.at(j).str()},
                    {"curve", pieces}});
  }
  json machines = json::array();
  for (std::size_t i = 0; i < ledger.machine_payments.size(); ++i) {
    const auto& c = ledger.machine_curves[i];
    json octaves = json::array();
    for (std::size_t t = 0; t < c.loads.size(); ++t) {
      octaves.push_back({{"exponent", c.lo_exp + static_cast<long>(t)}, {"load", c.loads[t].str()}});
    }
    machines.push_back({{"id", i},
                        {"payment", ledger.machine_payments[i].str()},
                        {"load", ledger.machine_loads[i].str()},
                        {"utility", utils.machines.at(i).str()},
                        {"load_curve", octaves}});
  }
  json out = {{"schema", kLedgerSchema},
              {"mechanism", ledger.mechanism},
              {"cost_mode", ledger.mode == CostMode::Fractional ? "fractional" : "realized"},
              {"bid_cap", ledger.bid_cap ? json(ledger.bid_cap->str()) : json(nullptr)},
              {"jobs", jobs},
              {"machines", machines}};
  if (ledger.realized) out["realized"] = assignment_to_json(*ledger.realized);
  return out;
}

}  // namespace slb
