#pragma once

// General Gittins index engine for scalar diffusions dX = mu(X) dt + sigma dW.
//
// The decaying solutions phi (at +inf) and eta (at -inf) of the killed
// generator  L_a f = (sigma^2/2) f'' + mu f' - a f  are integrated
// numerically on a uniform grid. They are stored in log form (log f and
// its log-derivative u = f'/f) because over a 60-unit grid they span
// e^{+-B*60}; all index formulas only need ratios of them.
//
// The Wronskian-ratio index is
//   M(x) = W[phi,eta](x) / W[phi,1](x) * int_x^inf 2 h(s) phi(s) / (sigma^2 W[phi,eta](s)) ds
// and its change-of-measure counterpart replaces (phi, eta, 1) by
// (phi_{a+G}, eta_{a+G}, F_G) with F_G = p phi_G + q eta_G.

#include <functional>
#include <string>
#include <vector>

#include "gittins/numerics.hpp"
#include "gittins/rewards.hpp"

namespace gittins {

struct ArmModel {
  std::function<double(double)> drift;
  double sigma;
  std::string label;

  static ArmModel brownian(double sigma);
  static ArmModel drifted(double mu, double sigma);
  /// sigma^2 A tanh(A x) with A = sqrt(2 Gamma)/sigma.
  static ArmModel dmps(double sigma, double gamma);

  void validate() const;
};

struct DoobFactorSpec {
  double p_coef;
  double q_coef;
  double gamma;

  void validate() const;
};

struct BasisOptions {
  double x_min = -30.0;
  double x_max = 30.0;
  std::size_t n_grid = 6001;
};

/// Log-form homogeneous solutions of the killed generator on a uniform grid,
/// normalized to value 1 at the grid point nearest 0.
class OdeBasis {
 public:
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t size() const { return grid_.size(); }
  double step() const { return step_; }
  double alpha_rate() const { return alpha_rate_; }
  double sigma() const { return sigma_; }
  const std::vector<double>& grid() const { return grid_; }

  const std::vector<double>& log_phi() const { return log_phi_; }
  const std::vector<double>& log_eta() const { return log_eta_; }
  /// phi'/phi and eta'/eta at the grid points.
  const std::vector<double>& phi_log_slope() const { return u_phi_; }
  const std::vector<double>& eta_log_slope() const { return u_eta_; }

  std::vector<double> phi_vals() const;
  std::vector<double> eta_vals() const;
  std::vector<double> phi_derivs() const;
  std::vector<double> eta_derivs() const;

  /// Cubic Hermite interpolation of log phi, log eta and their slopes.
  double log_phi_at(double x) const;
  double log_eta_at(double x) const;
  double phi_log_slope_at(double x) const;
  double eta_log_slope_at(double x) const;

  /// log |W[phi, eta]| at x.
  double log_wronskian_at(double x) const;

  /// [x_min + 10% span, x_max - 10% span]: where boundary slopes have no
  /// visible influence.
  double trusted_lo() const { return x_min_ + 0.1 * (x_max_ - x_min_); }
  double trusted_hi() const { return x_max_ - 0.1 * (x_max_ - x_min_); }
  bool trusted(double x) const { return x >= trusted_lo() && x <= trusted_hi(); }

  /// Worst relative ODE residual |L f| / |f| over interior points, with f''
  /// recovered by finite differences of the stored slopes.
  double worst_residual() const { return worst_residual_; }
  double worst_residual_x() const { return worst_residual_x_; }

 private:
  friend OdeBasis solve_basis(const ArmModel&, double, double, double,
                              std::size_t);

  double interp_value(const std::vector<double>& v,
                      const std::vector<double>& dv, double x) const;

  double x_min_ = 0.0;
  double x_max_ = 0.0;
  double step_ = 0.0;
  double alpha_rate_ = 0.0;
  double sigma_ = 0.0;
  std::vector<double> grid_;
  std::vector<double> log_phi_, u_phi_, du_phi_;
  std::vector<double> log_eta_, u_eta_, du_eta_;
  double worst_residual_ = 0.0;
  double worst_residual_x_ = 0.0;
};

/// Integrates phi backward from x_max and eta forward from x_min, starting
/// on the WKB slopes (-mu -+ sqrt(mu^2 + 2 a sigma^2)) / sigma^2, with RK4
/// on the Riccati equation for the log-derivative. Throws a convergence
/// error when the residual, decay or Wronskian invariants fail.
OdeBasis solve_basis(const ArmModel& model, double alpha, double x_min,
                     double x_max, std::size_t n_grid);
OdeBasis solve_basis(const ArmModel& model, double alpha,
                     const BasisOptions& opts = {});

/// Doubles the grid size until the Wronskian index at every probe moves by
/// less than tol between refinements (at most max_doublings times).
OdeBasis solve_basis_refined(const ArmModel& model, double alpha,
                             const RewardFn& h, const std::vector<double>& probes,
                             const BasisOptions& opts = {}, double tol = 1e-6,
                             int max_doublings = 3);

double gittins_wronskian_general(double x, const ArmModel& model, double alpha,
                                 const RewardFn& h, const OdeBasis& basis);
double gittins_wronskian_general(double x, const ArmModel& model,
                                 const RewardStructure& rs,
                                 const OdeBasis& basis);

/// Particular solution of L_a p = h tabulated on the trusted part of the
/// basis grid. Construction checks the finite-difference residual.
class ParticularSolution {
 public:
  ParticularSolution(const ArmModel& model, double alpha, const RewardFn& h,
                     const OdeBasis& basis, double residual_tol);

  double operator()(double x) const;
  double worst_residual() const { return worst_residual_; }
  double worst_residual_x() const { return worst_residual_x_; }

 private:
  const OdeBasis* basis_;
  RewardFn h_;
  double alpha_;
  std::vector<double> below_;  // phi(x) int_{-inf}^x 2 h eta / (sigma^2 W)
  std::vector<double> above_;  // eta(x) int_x^inf 2 h phi / (sigma^2 W)
  double worst_residual_ = 0.0;
  double worst_residual_x_ = 0.0;
};

/// p(x) with L_a p = h. Residual tolerance 1e-4 * alpha * (|k| + |K|).
double particular_solution(const ArmModel& model, double alpha,
                           const RewardStructure& rs, const OdeBasis& basis,
                           double x);

/// F_G, F_G'/F_G and (F_G'/F_G)' at x from a basis solved at rate Gamma.
struct DoobFactor {
  double log_value;
  double log_slope;
  double log_slope_deriv;
};

DoobFactor doob_factor_at(const ArmModel& base, const DoobFactorSpec& spec,
                          const OdeBasis& basis_gamma, double x);

/// m(x) = mu(x) + sigma^2 F_G'(x) / F_G(x).
double doob_drift(const ArmModel& model, const DoobFactorSpec& spec,
                  const OdeBasis& basis_gamma, double x);

/// The drift-modified arm dX = m(X) dt + sigma dW, with m read from
/// basis_gamma (which must outlive the returned model).
ArmModel doob_modified_model(const ArmModel& base, const DoobFactorSpec& spec,
                             const OdeBasis& basis_gamma);

struct ConditionReport {
  double min_value;  // min over the grid of alpha - drift'(x)
  double max_value;
  double argmin;
  bool passed;  // min_value > 0 and max_value finite
};

/// alpha - mu'(x) on n points of [x_min, x_max], mu' by central differences
/// with step 1e-5.
ConditionReport check_karatzas_condition(const ArmModel& model, double alpha,
                                         double x_min, double x_max,
                                         std::size_t n);

/// alpha - m'(x) for the drift-modified model on the trusted basis grid.
ConditionReport check_doob_drift_condition(const ArmModel& base,
                                           const DoobFactorSpec& spec,
                                           double alpha,
                                           const OdeBasis& basis_gamma,
                                           double x_min, double x_max,
                                           std::size_t n);

double gittins_change_of_measure(double x, const ArmModel& base,
                                 const DoobFactorSpec& spec, double alpha,
                                 const RewardFn& h, const OdeBasis& basis_sum,
                                 const OdeBasis& basis_gamma);
double gittins_change_of_measure(double x, const ArmModel& base,
                                 const DoobFactorSpec& spec,
                                 const RewardStructure& rs,
                                 const OdeBasis& basis_sum,
                                 const OdeBasis& basis_gamma);

struct IdentityCheck {
  std::string name;
  double max_rel_deviation;  // from the best-fit scalar
  double best_scalar;
  double tol;
  bool passed;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  bool all_passed() const;
};

/// phi_{a,G} F_G / phi_{a+G} and eta_{a,G} F_G / eta_{a+G} are constant.
IdentityReport verify_basis_transform(const ArmModel& base,
                                      const DoobFactorSpec& spec, double alpha,
                                      const OdeBasis& basis_sum,
                                      const OdeBasis& basis_gamma,
                                      const OdeBasis& modified_basis,
                                      double tol = 1e-4);

/// W[phi_{a,G}, 1] F_G^2 / W[phi_{a+G}, F_G] and
/// W[phi_{a,G}, eta_{a,G}] F_G^2 / W[phi_{a+G}, eta_{a+G}] are constant.
IdentityReport verify_wronskian_ratios(const ArmModel& base,
                                       const DoobFactorSpec& spec, double alpha,
                                       const OdeBasis& basis_sum,
                                       const OdeBasis& basis_gamma,
                                       const OdeBasis& modified_basis,
                                       double tol = 1e-4);

}  // namespace gittins
