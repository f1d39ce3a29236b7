#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "selfish_lb/allocation.hpp"
#include "selfish_lb/makespan.hpp"

namespace slb {

/// The norm exponent q >= 1: a rational, exactly 1, or infinity.
class QParam {
 public:
  enum class Kind { Finite, One, Inf };

  static QParam inf() { return QParam(Kind::Inf, Rat(0)); }
  static QParam one() { return QParam(Kind::One, Rat(1)); }
  /// Throws InputError for q < 1; q == 1 yields one().
  static QParam finite(const Rat& q);
  /// Accepts "inf", "INF", "infinity", an integer or "n/d".
  static QParam parse(std::string_view text);

  Kind kind() const { return kind_; }
  bool is_inf() const { return kind_ == Kind::Inf; }
  bool is_one() const { return kind_ == Kind::One; }
  const Rat& value() const { return q_; }  // meaningful unless is_inf()
  double to_double() const;
  std::string str() const;

  friend bool operator==(const QParam&, const QParam&) = default;

 private:
  QParam(Kind k, Rat q) : kind_(k), q_(std::move(q)) {}
  Kind kind_;
  Rat q_;
};

/// gamma = q / (q - 1); 1 for q = inf; `infinite` for q = 1.
struct Gamma {
  bool infinite = false;
  Rat value;
};
Gamma gamma_of(const QParam& q);

/// (sum v_i^q)^(1/q), max for q = inf. Entries must be nonnegative. Computed
/// after scaling by the largest entry; relative error stays around 1e-15 for
/// vectors of desk-scale length.
double lq_norm(std::span<const double> v, double q);
double lq_norm(std::span<const double> v, const QParam& q);

/// Relative slack under which a float norm is treated as not exceeding Lambda.
inline constexpr double kNormTieGuard = 1e-12;

/// Level-based allocation with s_bar^gamma-proportional rows and the
/// ||C_k||_q > Lambda saturation rule. Lambda stays exact; C is float.
class LqAllocator final : public OnlineAllocator {
 public:
  LqAllocator(const std::vector<Rat>& speeds, QParam q);

  const JobRecord& push(const Rat& size) override;
  Row probe(const Rat& size) const override;
  std::unique_ptr<OnlineAllocator> clone() const override;
  const AllocationTrace& trace() const override { return trace_; }
  Rat current_lambda() const override { return lambda_; }

  const std::vector<std::vector<double>>& level_times() const { return C_; }
  /// Row of a level-k job.
  Row level_row(int k) const;
  /// Row of the first job.
  Row first_row() const;

 private:
  QParam q_;
  Gamma gamma_;
  AllocationTrace trace_;
  Rat p1_;
  Rat lambda_;
  std::vector<std::vector<double>> C_;
  std::vector<Row> rows_;  // cached row per level
};

/// Runs the lq allocator; q = inf delegates to run_makespan and returns its
/// trace unchanged.
AllocationTrace run_lq(const Instance& instance, const QParam& q);

/// Objective ||(L_i / s_i)_i||_q of a trace with the reported speeds.
double lq_objective(const AllocationTrace& trace, const QParam& q);

}  // namespace slb
