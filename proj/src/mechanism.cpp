#include "selfish_lb/mechanism.hpp"

#include "selfish_lb/baselines.hpp"

namespace slb {

std::string mechanism_name(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::Makespan: return "makespan";
    case MechanismKind::Lq: return "lq";
    case MechanismKind::Llw: return "llw";
    case MechanismKind::Waterfill: return "waterfill";
    case MechanismKind::VariantC: return "variant-c";
    case MechanismKind::VariantD: return "variant-d";
  }
  return "unknown";
}

MechanismKind parse_mechanism(std::string_view name) {
  for (auto k : {MechanismKind::Makespan, MechanismKind::Lq, MechanismKind::Llw,
                 MechanismKind::Waterfill, MechanismKind::VariantC, MechanismKind::VariantD}) {
    if (mechanism_name(k) == name) return k;
  }
  throw InputError("unknown mechanism '" + std::string(name) + "'");
}

std::string MechanismSpec::name() const {
  if (kind == MechanismKind::Lq) return "lq(q=" + q.str() + ")";
  return mechanism_name(kind);
}

std::unique_ptr<OnlineAllocator> make_allocator(const MechanismSpec& spec, const std::vector<Rat>& speeds) {
  switch (spec.kind) {
    case MechanismKind::Makespan:
      return std::make_unique<MakespanAllocator>(speeds, spec.makespan);
    case MechanismKind::Lq:
      if (spec.q.is_inf()) return std::make_unique<MakespanAllocator>(speeds);
      return std::make_unique<LqAllocator>(speeds, spec.q);
    case MechanismKind::Llw:
      return std::make_unique<LlwAllocator>(speeds, spec.llw_base);
    case MechanismKind::Waterfill:
      return std::make_unique<WaterfillAllocator>(speeds);
    case MechanismKind::VariantC: {
      MakespanOptions o;
      o.double_before_allocate = true;
      return std::make_unique<MakespanAllocator>(speeds, o, "variant-c");
    }
    case MechanismKind::VariantD: {
      MakespanOptions o;
      o.double_with_last = true;
      return std::make_unique<MakespanAllocator>(speeds, o, "variant-d");
    }
  }
  throw InputError("unknown mechanism");
}

AllocationTrace run_mechanism(const MechanismSpec& spec, const Instance& instance) {
  instance.validate();
  auto alloc = make_allocator(spec, instance.speeds);
  return run_online(*alloc, instance.jobs);
}

}  // namespace slb
