#pragma once

#include <string>

#include <json.hpp>

#include "selfish_lb/allocation.hpp"
#include "selfish_lb/payments.hpp"
#include "selfish_lb/rounding.hpp"

namespace slb {

using json = nlohmann::ordered_json;

inline constexpr const char* kTraceSchema = "selfish-lb/trace/v1";
inline constexpr const char* kLedgerSchema = "selfish-lb/ledger/v1";
inline constexpr const char* kAssignmentSchema = "selfish-lb/assignment/v1";

/// Accepts a decimal-integer string, an "n/d" string or a [num, den] pair of
/// decimal strings. `field` names the value in error messages.
Rat rat_from_json(const json& v, const std::string& field);
/// Integers as "n", others as ["num", "den"].
json rat_to_json(const Rat& r);

Instance instance_from_json(const json& doc);
json instance_to_json(const Instance& instance);
Instance load_instance(const std::string& path);
void save_instance(const Instance& instance, const std::string& path);

json trace_to_json(const AllocationTrace& trace);
json assignment_to_json(const IntegralAssignment& a);
json ledger_to_json(const PaymentLedger& ledger, const AgentUtilities& utils);

/// Reads a whole JSON document; errors name the path.
json read_json(const std::string& path);
/// Writes `doc` pretty-printed to `path`, or to stdout when path is "-" or empty.
void write_json(const json& doc, const std::string& path);
void save_trace(const AllocationTrace& trace, const std::string& path);

}  // namespace slb
