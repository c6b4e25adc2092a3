#pragma once

// Independent Gittins index from its definition: a binomial Markov-chain
// approximation of the arm, the optimal retirement problem
//   V_m(x) = sup_tau E_x[ int_0^tau h(X_s) e^{-alpha s} ds + e^{-alpha tau} m ],
// and bisection on m for the indifference point V_m(x) = m.

#include <cstddef>
#include <vector>

#include "gittins/doob.hpp"
#include "gittins/rewards.hpp"

namespace gittins {

/// Equispaced states x_center + i*dx on [x_center - half_width,
/// x_center + half_width] with reflecting ends. One step lasts
/// dt = dx^2 / sigma^2 and moves one state up or down with probabilities
/// 1/2 +- mu(x) dx / (2 sigma^2).
class LatticeSpec {
 public:
  /// Shrinks dx (by halving) until |mu(x)| dx <= sigma^2 at every state so
  /// that the transition probabilities stay in [0, 1].
  LatticeSpec(const ArmModel& model, double x_center, double half_width,
              double dx);

  double x_center() const { return x_center_; }
  double half_width() const { return half_width_; }
  double dx() const { return dx_; }
  double dt() const { return dt_; }
  std::size_t n_states() const { return states_.size(); }
  const std::vector<double>& states() const { return states_; }
  const std::vector<double>& p_up() const { return p_up_; }
  const std::vector<double>& p_down() const { return p_down_; }

  /// Index of the state nearest x; throws a domain error outside the
  /// lattice.
  std::size_t nearest(double x) const;

 private:
  double x_center_;
  double half_width_;
  double dx_;
  double dt_;
  std::vector<double> states_;
  std::vector<double> p_up_;
  std::vector<double> p_down_;
};

struct RetirementSolution {
  std::vector<double> value;
  std::vector<char> stop;  // 1 where retiring is optimal
  double residual;         // sup-norm Bellman residual of value
  int iterations;
};

/// Policy iteration for the retirement problem. Each policy is evaluated
/// exactly (tridiagonal solve) and improved by one Bellman sweep; the loop
/// ends when the stop set is stable, and the result must satisfy the
/// Bellman equation to 1e-10 in sup norm. `warm` (optional) seeds the stop
/// set.
RetirementSolution solve_retirement(const ArmModel& model,
                                    const RewardStructure& rs,
                                    const LatticeSpec& lattice, double m,
                                    const std::vector<char>* warm = nullptr);

/// V_m over the lattice states.
std::vector<double> retirement_value(const ArmModel& model,
                                     const RewardStructure& rs,
                                     const LatticeSpec& lattice, double m);

/// Smallest m in [k_low, k_high], to within tol, at which retiring at the
/// state nearest x is optimal (V_m(x) <= m).
double lattice_gittins(const ArmModel& model, const RewardStructure& rs,
                       const LatticeSpec& lattice, double x, double tol = 1e-8);

}  // namespace gittins
