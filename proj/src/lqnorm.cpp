#include "selfish_lb/lqnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slb {

QParam QParam::finite(const Rat& q) {
  if (q < Rat(1)) throw InputError("q must be >= 1, got " + q.str());
  if (q == Rat(1)) return one();
  return QParam(Kind::Finite, q);
}

QParam QParam::parse(std::string_view text) {
  if (text == "inf" || text == "INF" || text == "infinity" || text == "Inf") return inf();
  Rat q;
  try {
    q = Rat::parse(text);
  } catch (const std::exception&) {
    throw InputError("invalid q: '" + std::string(text) + "'");
  }
  return finite(q);
}

double QParam::to_double() const {
  return is_inf() ? std::numeric_limits<double>::infinity() : q_.to_double();
}

std::string QParam::str() const { return is_inf() ? "inf" : q_.str(); }

Gamma gamma_of(const QParam& q) {
  switch (q.kind()) {
    case QParam::Kind::Inf:
      return {false, Rat(1)};
    case QParam::Kind::One:
      return {true, Rat(0)};
    case QParam::Kind::Finite:
      break;
  }
  return {false, q.value() / (q.value() - Rat(1))};
}

double lq_norm(std::span<const double> v, double q) {
  double top = 0.0;
  for (double x : v) {
    if (x < 0.0) throw InputError("lq_norm of a negative entry");
    top = std::max(top, x);
  }
  if (std::isinf(q) || top == 0.0) return top;
  double acc = 0.0;
  for (double x : v) acc += std::pow(x / top, q);
  return top * std::pow(acc, 1.0 / q);
}

double lq_norm(std::span<const double> v, const QParam& q) { return lq_norm(v, q.to_double()); }

LqAllocator::LqAllocator(const std::vector<Rat>& speeds, QParam q)
    : q_(std::move(q)), gamma_(gamma_of(q_)) {
  trace_.mechanism = "lq";
  trace_.q = q_.str();
  trace_.exact = gamma_.infinite;  // q = 1 rows are single machines
  trace_.speeds = speeds;
  trace_.levels = build_levels(speeds);
  const auto& lv = trace_.levels;
  for (int k = 1; k <= lv.K; ++k) {
    C_.emplace_back(lv.prefix(k).size(), 0.0);
    rows_.push_back(lv.prefix(k).empty() ? Row{} : level_row(k));
  }
}

Row LqAllocator::level_row(int k) const {
  const auto& lv = trace_.levels;
  const auto& members = lv.prefix(k);
  if (members.empty()) throw InvariantViolation("empty feasible set at level " + std::to_string(k));
  if (gamma_.infinite) {
    // q = 1: the whole job goes to one machine of M_1, fastest report first.
    int best = lv.group(1).front();
    for (int i : lv.group(1)) {
      if (lv.machines[i].reported_speed > lv.machines[best].reported_speed) best = i;
    }
    return Row::single(best);
  }
  // (s_bar_i / s_bar_1)^gamma = 2^(gamma * (e_i - top)), which never overflows.
  const double g = gamma_.value.to_double();
  std::vector<double> w;
  double total = 0.0;
  for (int i : members) {
    const long e = lv.rounded(i).floor_log2() - lv.top_exponent;
    w.push_back(std::exp2(g * static_cast<double>(e)));
    total += w.back();
  }
  Row row;
  row.machines = members;
  Rat acc = 0;
  for (std::size_t t = 0; t + 1 < members.size(); ++t) {
    row.fractions.push_back(Rat::from_double(w[t] / total));
    acc += row.fractions.back();
  }
  // Last entry closes the row so it sums to exactly 1.
  row.fractions.push_back(Rat(1) - acc);
  if (row.fractions.back().sign() <= 0) throw InvariantViolation("degenerate lq row");
  return row;
}

Row LqAllocator::first_row() const {
  // q = 1 keeps even the first job on a single machine.
  if (gamma_.infinite) return rows_.front();
  const auto& g1 = trace_.levels.group(1);
  Row row;
  const Rat share = Rat(1) / Rat(static_cast<long>(g1.size()));
  for (int i : g1) {
    row.machines.push_back(i);
    row.fractions.push_back(share);
  }
  return row;
}

const JobRecord& LqAllocator::push(const Rat& size) {
  if (size.sign() <= 0) throw InputError("job size must be positive, got " + size.str());
  const auto& lv = trace_.levels;
  JobRecord rec;
  rec.size = size;
  if (trace_.jobs.empty()) {
    rec.row = first_row();
    p1_ = size;
    lambda_ = size / lv.r(1);
    trace_.lambda_history = {lambda_};
    rec.lambda_at_arrival = lambda_;
    rec.lambda_after = lambda_;
  } else {
    rec.lambda_at_arrival = lambda_;
    const LevelChoice choice = job_level(size, lambda_, lv);
    rec.level = choice.level;
    rec.super_large = choice.super_large;
    rec.row = rows_[choice.level - 1];
    auto& ck = C_[choice.level - 1];
    const auto& members = lv.prefix(choice.level);
    for (std::size_t t = 0; t < rec.row.machines.size(); ++t) {
      const int i = rec.row.machines[t];
      const auto pos = std::find(members.begin(), members.end(), i) - members.begin();
      ck[pos] += rec.row.fractions[t].to_double() * (size / lv.rounded(i)).to_double();
    }
    if (choice.level <= lv.K - 1 || choice.super_large) {
      bool increased = false;
      const Rat threshold = size / lv.r(1);
      if (threshold > lambda_) {
        while (lambda_ < threshold) lambda_ *= Rat(2);
        increased = true;
      } else if (lq_norm(ck, q_) > lambda_.to_double() * (1.0 + kNormTieGuard)) {
        lambda_ *= Rat(2);
        increased = true;
      }
      if (increased) {
        for (auto& level : C_) std::fill(level.begin(), level.end(), 0.0);
        trace_.lambda_history.push_back(lambda_);
      }
      rec.doubled_after = increased;
    }
    rec.lambda_after = lambda_;
  }
  trace_.jobs.push_back(std::move(rec));
  trace_.final_lambda = lambda_;
  trace_.phases = static_cast<int>(trace_.lambda_history.size());
  return trace_.jobs.back();
}

Row LqAllocator::probe(const Rat& size) const {
  const auto& lv = trace_.levels;
  if (trace_.jobs.empty()) return first_row();
  return rows_[job_level(size, lambda_, lv).level - 1];
}

std::unique_ptr<OnlineAllocator> LqAllocator::clone() const {
  return std::make_unique<LqAllocator>(*this);
}

AllocationTrace run_lq(const Instance& instance, const QParam& q) {
  instance.validate();
  if (q.is_inf()) return run_makespan(instance);
  LqAllocator alloc(instance.speeds, q);
  return run_online(alloc, instance.jobs);
}

double lq_objective(const AllocationTrace& trace, const QParam& q) {
  const auto loads = trace.loads();
  std::vector<double> times;
  times.reserve(loads.size());
  for (std::size_t i = 0; i < loads.size(); ++i) times.push_back((loads[i] / trace.speeds[i]).to_double());
  return lq_norm(times, q);
}

}  // namespace slb
