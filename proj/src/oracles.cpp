#include "selfish_lb/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace slb {

void check_bruteforce_guard(const Instance& instance) {
  instance.validate();
  const double leaves = std::pow(static_cast<double>(instance.m()), static_cast<double>(instance.n()));
  if (leaves > kBruteforceGuard) {
    throw InputError("bruteforce guard exceeded: m^n = " + std::to_string(instance.m()) + "^" +
                     std::to_string(instance.n()) + " > 1e8");
  }
}

OptResult opt_makespan_bruteforce(const Instance& instance) {
  check_bruteforce_guard(instance);
  const std::size_t m = instance.m();
  const std::size_t n = instance.n();

  // Largest jobs first tightens the bound early; the witness is mapped back.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return instance.jobs[a] > instance.jobs[b]; });

  std::vector<Rat> time(m, Rat(0));
  std::vector<int> current(n, 0);
  std::vector<int> best_assign(n, 0);
  Rat best;
  {
    // Greedy start: minimum resulting completion time.
    std::vector<Rat> t(m, Rat(0));
    for (std::size_t idx : order) {
      std::size_t arg = 0;
      Rat val = t[0] + instance.jobs[idx] / instance.speeds[0];
      for (std::size_t i = 1; i < m; ++i) {
        Rat v = t[i] + instance.jobs[idx] / instance.speeds[i];
        if (v < val) {
          val = v;
          arg = i;
        }
      }
      t[arg] = val;
      best_assign[idx] = static_cast<int>(arg);
    }
    best = *std::max_element(t.begin(), t.end());
  }

  std::function<void(std::size_t, const Rat&)> dfs = [&](std::size_t depth, const Rat& cur_max) {
    if (depth == n) {
      if (cur_max < best) {
        best = cur_max;
        best_assign = current;
      }
      return;
    }
    const std::size_t idx = order[depth];
    for (std::size_t i = 0; i < m; ++i) {
      // Machines with equal speed and equal current time are interchangeable.
      bool duplicate = false;
      for (std::size_t h = 0; h < i && !duplicate; ++h) {
        duplicate = instance.speeds[h] == instance.speeds[i] && time[h] == time[i];
      }
      if (duplicate) continue;
      const Rat next = time[i] + instance.jobs[idx] / instance.speeds[i];
      if (next >= best) continue;
      const Rat saved = time[i];
      time[i] = next;
      current[idx] = static_cast<int>(i);
      dfs(depth + 1, max(cur_max, next));
      time[i] = saved;
    }
  };
  dfs(0, Rat(0));

  OptResult r;
  r.exact = best;
  r.value = best.to_double();
  r.method = OptMethod::Bruteforce;
  r.witness = best_assign;
  return r;
}

Rat lb_makespan(const Instance& instance) {
  instance.validate();
  Rat total = 0, speed_sum = 0, biggest = 0, fastest = 0;
  for (const auto& p : instance.jobs) {
    total += p;
    biggest = max(biggest, p);
  }
  for (const auto& s : instance.speeds) {
    speed_sum += s;
    fastest = max(fastest, s);
  }
  return max(total / speed_sum, biggest / fastest);
}

double lq_of_assignment(const Instance& instance, const std::vector<int>& assign, const QParam& q) {
  std::vector<Rat> loads(instance.m(), Rat(0));
  for (std::size_t j = 0; j < assign.size(); ++j) loads.at(assign[j]) += instance.jobs[j];
  std::vector<double> times;
  for (std::size_t i = 0; i < loads.size(); ++i) times.push_back((loads[i] / instance.speeds[i]).to_double());
  return lq_norm(times, q);
}

namespace {

Rat sum_time(const Instance& instance, const std::vector<int>& assign) {
  Rat s = 0;
  for (std::size_t j = 0; j < assign.size(); ++j) s += instance.jobs[j] / instance.speeds[assign[j]];
  return s;
}

}  // namespace

OptResult opt_lq_bruteforce(const Instance& instance, const QParam& q) {
  if (q.is_inf()) return opt_makespan_bruteforce(instance);
  check_bruteforce_guard(instance);
  const std::size_t m = instance.m();
  const std::size_t n = instance.n();

  if (q.is_one()) {
    // Sum of completion times is linear, so each job independently goes to
    // the machine minimising p / s; the lowest such id is lexicographically
    // smallest. Verified exhaustively below for the value.
    std::vector<int> assign(n, 0);
    std::size_t fastest = 0;
    for (std::size_t i = 1; i < m; ++i) {
      if (instance.speeds[i] > instance.speeds[fastest]) fastest = i;
    }
    std::fill(assign.begin(), assign.end(), static_cast<int>(fastest));
    Rat best = sum_time(instance, assign);
    std::vector<int> cur(n, 0);
    std::function<void(std::size_t, const Rat&)> dfs = [&](std::size_t depth, const Rat& acc) {
      if (acc > best) return;
      if (depth == n) {
        if (acc < best) {
          best = acc;
          assign = cur;
        }
        return;
      }
      for (std::size_t i = 0; i < m; ++i) {
        cur[depth] = static_cast<int>(i);
        dfs(depth + 1, acc + instance.jobs[depth] / instance.speeds[i]);
      }
    };
    dfs(0, Rat(0));
    OptResult r;
    r.exact = best;
    r.value = best.to_double();
    r.witness = assign;
    return r;
  }

  const double qd = q.to_double();
  std::vector<double> p(n), inv_s(m);
  for (std::size_t j = 0; j < n; ++j) p[j] = instance.jobs[j].to_double();
  for (std::size_t i = 0; i < m; ++i) inv_s[i] = 1.0 / instance.speeds[i].to_double();

  std::vector<double> load(m, 0.0);
  std::vector<int> cur(n, 0), best_assign;
  double best_pow = std::numeric_limits<double>::infinity();
  constexpr double tol = 1e-9;

  auto power_sum = [&]() {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += std::pow(load[i] * inv_s[i], qd);
    return acc;
  };
  std::function<void(std::size_t)> dfs = [&](std::size_t depth) {
    const double partial = power_sum();
    if (partial > best_pow * (1.0 + tol)) return;
    if (depth == n) {
      if (best_assign.empty() || partial < best_pow * (1.0 - tol)) {
        best_pow = partial;
        best_assign = cur;
      }
      return;
    }
    for (std::size_t i = 0; i < m; ++i) {
      cur[depth] = static_cast<int>(i);
      load[i] += p[depth];
      dfs(depth + 1);
      load[i] -= p[depth];
    }
  };
  dfs(0);

  OptResult r;
  r.value = lq_of_assignment(instance, best_assign, q);
  r.witness = best_assign;
  return r;
}

double lb_lq(const Instance& instance, const QParam& q) {
  instance.validate();
  if (q.is_inf()) return lb_makespan(instance).to_double();
  Rat total = 0, biggest = 0, fastest = 0;
  for (const auto& pj : instance.jobs) {
    total += pj;
    biggest = max(biggest, pj);
  }
  for (const auto& s : instance.speeds) fastest = max(fastest, s);
  const double single = (biggest / fastest).to_double();
  if (q.is_one()) return std::max((total / fastest).to_double(), single);
  // (sum s^gamma)^(1/gamma) computed relative to s_max.
  const double g = gamma_of(q).value.to_double();
  const double smax = fastest.to_double();
  double acc = 0.0;
  for (const auto& s : instance.speeds) acc += std::pow(s.to_double() / smax, g);
  const double capacity = smax * std::pow(acc, 1.0 / g);
  return std::max(total.to_double() / capacity, single);
}

}  // namespace slb
