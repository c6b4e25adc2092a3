#pragma once

// Reward structures (h, alpha, k, K): a strictly increasing running reward h
// bounded in (alpha*k, alpha*K) and discounted at rate alpha.

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gittins {

/// Plain callable view of a running reward, used by the index engines so
/// tests can substitute probe functions (e.g. h(u) = u) for a full
/// RewardStructure.
using RewardFn = std::function<double(double)>;

struct Logistic {
  double c;
};

/// h(x) = alpha*k + alpha*(K-k) * (1 + tanh(c*x)) / 2
struct TanhShifted {
  double c;
};

struct Knot {
  double x;
  double value;
};

/// Monotone cubic (PCHIP) interpolation through at least four knots. Values
/// outside the knot range hold the boundary value and every evaluation is
/// clamped to [alpha*k, alpha*K].
struct Tabulated {
  std::vector<Knot> knots;
};

/// h(x) = value. Violates strict monotonicity, so it can only be built with
/// an explicit opt-in; it is the exact fixture M(x) = value / alpha.
struct Constant {
  double value;
};

using RewardFamily = std::variant<Logistic, TanhShifted, Tabulated, Constant>;

enum class Degenerate { Reject, Allow };

class RewardStructure {
 public:
  static RewardStructure logistic(double alpha, double k_low, double k_high,
                                  double c);
  static RewardStructure tanh_shifted(double alpha, double k_low,
                                      double k_high, double c);
  static RewardStructure tabulated(double alpha, double k_low, double k_high,
                                   std::vector<Knot> knots);
  /// Requires alpha*k_low <= value <= alpha*k_high.
  static RewardStructure constant(double alpha, double k_low, double k_high,
                                  double value, Degenerate policy);

  double alpha() const { return alpha_; }
  double k_low() const { return k_low_; }
  double k_high() const { return k_high_; }
  const RewardFamily& family() const { return family_; }
  bool is_degenerate() const {
    return std::holds_alternative<Constant>(family_);
  }
  std::string family_name() const;

  /// Largest |h| allowed by the bounds: alpha * max(|k|, |K|).
  double magnitude_bound() const;

  /// Distance beyond which the limits at +-infinity are probed.
  double probe_radius() const;

  double operator()(double x) const;
  double derivative(double x) const;

  RewardFn as_function() const;

 private:
  struct Pchip;

  RewardStructure(double alpha, double k_low, double k_high,
                  RewardFamily family);

  double alpha_;
  double k_low_;
  double k_high_;
  RewardFamily family_;
  std::shared_ptr<const Pchip> pchip_;
};

/// h(x); throws a domain error for non-finite x.
double eval_reward(const RewardStructure& rs, double x);

/// h'(x); throws a domain error for non-finite x.
double eval_reward_derivative(const RewardStructure& rs, double x);

struct AdmissibilityCheck {
  std::string name;
  bool passed;
  double witness;  // offending x when !passed, NaN otherwise
  std::string detail;
};

struct AdmissibilityReport {
  std::vector<AdmissibilityCheck> checks;
  bool all_passed() const;
  const AdmissibilityCheck* find(const std::string& name) const;
};

/// Audit of the admissibility invariants on a sorted, non-empty probe grid.
/// Failures are report entries; only malformed grids throw.
AdmissibilityReport check_admissible(const RewardStructure& rs,
                                     const std::vector<double>& probe_grid);

}  // namespace gittins
