#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "selfish_lb/allocation.hpp"
#include "selfish_lb/lqnorm.hpp"
#include "selfish_lb/makespan.hpp"

namespace slb {

enum class MechanismKind { Makespan, Lq, Llw, Waterfill, VariantC, VariantD };

struct MechanismSpec {
  MechanismKind kind = MechanismKind::Makespan;
  QParam q = QParam::inf();
  Rat llw_base = 2;
  MakespanOptions makespan;  // extra switches for the makespan kind

  static MechanismSpec makespan_default() { return {}; }
  static MechanismSpec lq(QParam q) { return {MechanismKind::Lq, std::move(q), Rat(2), {}}; }
  static MechanismSpec of(MechanismKind kind) { return {kind, QParam::inf(), Rat(2), {}}; }

  /// True for the level-based allocators whose guarantees are under test.
  bool is_level_based() const { return kind == MechanismKind::Makespan || kind == MechanismKind::Lq; }
  /// True when fractions are exact rationals that compare without tolerance.
  bool is_exact() const { return kind != MechanismKind::Lq || q.is_inf() || q.is_one(); }
  std::string name() const;
};

MechanismKind parse_mechanism(std::string_view name);
std::string mechanism_name(MechanismKind kind);

std::unique_ptr<OnlineAllocator> make_allocator(const MechanismSpec& spec, const std::vector<Rat>& speeds);
AllocationTrace run_mechanism(const MechanismSpec& spec, const Instance& instance);

}  // namespace slb
