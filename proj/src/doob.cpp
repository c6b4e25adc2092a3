#include "gittins/doob.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "gittins/error.hpp"

namespace gittins {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 4-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 4> kGlT = {
    0.5 * (1.0 - 0.861136311594052575), 0.5 * (1.0 - 0.339981043584856265),
    0.5 * (1.0 + 0.339981043584856265), 0.5 * (1.0 + 0.861136311594052575)};
constexpr std::array<double, 4> kGlW = {
    0.5 * 0.347854845137453857, 0.5 * 0.652145154862546143,
    0.5 * 0.652145154862546143, 0.5 * 0.347854845137453857};

double riccati_rhs(double alpha, double sigma2, double mu, double u) {
  return 2.0 * alpha / sigma2 - 2.0 * mu * u / sigma2 - u * u;
}

// log-derivative of the solution that decays toward +inf (sign = -1) or
// toward -inf (sign = +1) when the drift is frozen at mu.
double wkb_slope(double alpha, double sigma2, double mu, double sign) {
  return (-mu + sign * std::sqrt(mu * mu + 2.0 * alpha * sigma2)) / sigma2;
}

double drift_derivative(const ArmModel& m, double x) {
  constexpr double eps = 1e-5;
  return (m.drift(x + eps) - m.drift(x - eps)) / (2.0 * eps);
}

std::size_t nearest_index(const std::vector<double>& grid, double step,
                          double x) {
  const double pos = std::round((x - grid.front()) / step);
  const double clamped =
      std::clamp(pos, 0.0, static_cast<double>(grid.size() - 1));
  return static_cast<std::size_t>(clamped);
}

// Cell k with grid[k] <= x <= grid[k+1].
std::size_t cell_of(const std::vector<double>& grid, double step, double x) {
  const double pos = std::floor((x - grid.front()) / step);
  const double clamped =
      std::clamp(pos, 0.0, static_cast<double>(grid.size() - 2));
  return static_cast<std::size_t>(clamped);
}

// U(x) = int_x^inf g(s) exp(L(x) - L(s)) ds with L increasing, accumulated
// from the top of the grid down to node k_stop. Beyond the grid L is
// continued linearly with slope top_slope and g is frozen.
template <class LogW, class G>
std::vector<double> upward_nodes(const std::vector<double>& grid,
                                 std::size_t k_stop, LogW&& log_w,
                                 double top_slope, G&& g) {
  const std::size_t n = grid.size();
  if (!(top_slope > 0.0)) {
    throw convergence_error(
        "tail integral: weight does not decay beyond the upper grid end");
  }
  std::vector<double> out(n, 0.0);
  out[n - 1] = g(grid[n - 1]) / top_slope;
  double l_next = log_w(grid[n - 1]);
  for (std::size_t k = n - 1; k-- > k_stop;) {
    const double a = grid[k];
    const double b = grid[k + 1];
    const double l_here = log_w(a);
    double piece = 0.0;
    for (std::size_t j = 0; j < kGlT.size(); ++j) {
      const double s = a + kGlT[j] * (b - a);
      piece += kGlW[j] * g(s) * std::exp(l_here - log_w(s));
    }
    out[k] = std::exp(l_here - l_next) * out[k + 1] + (b - a) * piece;
    l_next = l_here;
  }
  return out;
}

template <class LogW, class G>
double upward_at(const std::vector<double>& grid, double step,
                 const std::vector<double>& nodes, double x, LogW&& log_w,
                 G&& g) {
  const std::size_t k = cell_of(grid, step, x);
  const double b = grid[k + 1];
  const double lx = log_w(x);
  double piece = 0.0;
  for (std::size_t j = 0; j < kGlT.size(); ++j) {
    const double s = x + kGlT[j] * (b - x);
    piece += kGlW[j] * g(s) * std::exp(lx - log_w(s));
  }
  return std::exp(lx - log_w(b)) * nodes[k + 1] + (b - x) * piece;
}

// D(x) = int_{-inf}^x g(s) exp(L(x) - L(s)) ds with L decreasing.
template <class LogW, class G>
std::vector<double> downward_nodes(const std::vector<double>& grid,
                                   LogW&& log_w, double bottom_slope, G&& g) {
  const std::size_t n = grid.size();
  if (!(bottom_slope < 0.0)) {
    throw convergence_error(
        "tail integral: weight does not decay beyond the lower grid end");
  }
  std::vector<double> out(n, 0.0);
  out[0] = g(grid[0]) / (-bottom_slope);
  double l_prev = log_w(grid[0]);
  for (std::size_t k = 1; k < n; ++k) {
    const double a = grid[k - 1];
    const double b = grid[k];
    const double l_here = log_w(b);
    double piece = 0.0;
    for (std::size_t j = 0; j < kGlT.size(); ++j) {
      const double s = a + kGlT[j] * (b - a);
      piece += kGlW[j] * g(s) * std::exp(l_here - log_w(s));
    }
    out[k] = std::exp(l_here - l_prev) * out[k - 1] + (b - a) * piece;
    l_prev = l_here;
  }
  return out;
}

template <class LogW, class G>
double downward_at(const std::vector<double>& grid, double step,
                   const std::vector<double>& nodes, double x, LogW&& log_w,
                   G&& g) {
  const std::size_t k = cell_of(grid, step, x);
  const double a = grid[k];
  const double lx = log_w(x);
  double piece = 0.0;
  for (std::size_t j = 0; j < kGlT.size(); ++j) {
    const double s = a + kGlT[j] * (x - a);
    piece += kGlW[j] * g(s) * std::exp(lx - log_w(s));
  }
  return std::exp(lx - log_w(a)) * nodes[k] + (x - a) * piece;
}

void require_rate(const OdeBasis& basis, double rate, const char* what) {
  if (std::abs(basis.alpha_rate() - rate) > 1e-12 * std::max(1.0, rate)) {
    std::ostringstream os;
    os << what << ": basis was solved at rate " << basis.alpha_rate()
       << " but rate " << rate << " is required";
    throw domain_error(os.str());
  }
}

void require_sigma(const OdeBasis& basis, double sigma, const char* what) {
  if (std::abs(basis.sigma() - sigma) > 1e-12 * sigma) {
    std::ostringstream os;
    os << what << ": basis volatility " << basis.sigma()
       << " does not match model volatility " << sigma;
    throw domain_error(os.str());
  }
}

void require_trusted(const OdeBasis& basis, double x, const char* what) {
  if (!std::isfinite(x) || !basis.trusted(x)) {
    std::ostringstream os;
    os << what << ": x = " << x << " lies outside the trusted interior ["
       << basis.trusted_lo() << ", " << basis.trusted_hi()
       << "] of the basis grid (boundary contamination)";
    throw domain_error(os.str());
  }
}

struct MinimaxFit {
  double center;
  double half_range;
};

MinimaxFit minimax(const std::vector<double>& logs) {
  double lo = kInf;
  double hi = -kInf;
  for (double v : logs) {
    if (!std::isfinite(v)) return {0.0, kInf};
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {0.5 * (lo + hi), 0.5 * (hi - lo)};
}

IdentityCheck make_identity(std::string name, const std::vector<double>& logs,
                            double tol) {
  const MinimaxFit fit = minimax(logs);
  const double dev = std::isfinite(fit.half_range) ? std::expm1(fit.half_range) : kInf;
  return {std::move(name), dev, std::exp(fit.center), tol, dev < tol};
}

std::vector<double> trusted_nodes(const OdeBasis& b) {
  std::vector<double> xs;
  for (double x : b.grid()) {
    if (b.trusted(x)) xs.push_back(x);
  }
  return xs;
}

}  // namespace

// ---------------------------------------------------------------- models

ArmModel ArmModel::brownian(double sigma) {
  return {[](double) { return 0.0; }, sigma, "brownian"};
}

ArmModel ArmModel::drifted(double mu, double sigma) {
  return {[mu](double) { return mu; }, sigma, "drifted"};
}

ArmModel ArmModel::dmps(double sigma, double gamma) {
  if (!(gamma >= 0.0)) throw domain_error("dmps: gamma must be non-negative");
  const double a = std::sqrt(2.0 * gamma) / sigma;
  const double scale = sigma * sigma * a;
  return {[a, scale](double x) { return scale * std::tanh(a * x); }, sigma,
          "dmps"};
}

void ArmModel::validate() const {
  if (!drift) throw domain_error("arm model: drift function is missing");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw domain_error("arm model: sigma must be positive");
  }
}

void DoobFactorSpec::validate() const {
  if (!(p_coef >= 0.0) || !(q_coef >= 0.0) || !(p_coef + q_coef > 0.0)) {
    throw domain_error(
        "doob factor: need p >= 0, q >= 0 and p + q > 0 so that F > 0");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw domain_error("doob factor: gamma must be positive");
  }
}

// ----------------------------------------------------------------- basis

std::vector<double> OdeBasis::phi_vals() const {
  std::vector<double> v(log_phi_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(log_phi_[i]);
  return v;
}

std::vector<double> OdeBasis::eta_vals() const {
  std::vector<double> v(log_eta_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(log_eta_[i]);
  return v;
}

std::vector<double> OdeBasis::phi_derivs() const {
  std::vector<double> v = phi_vals();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= u_phi_[i];
  return v;
}

std::vector<double> OdeBasis::eta_derivs() const {
  std::vector<double> v = eta_vals();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= u_eta_[i];
  return v;
}

double OdeBasis::interp_value(const std::vector<double>& v,
                              const std::vector<double>& dv, double x) const {
  const double xc = std::clamp(x, x_min_, x_max_);
  const std::size_t k = cell_of(grid_, step_, xc);
  const double t = (xc - grid_[k]) / step_;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * v[k] + h10 * step_ * dv[k] + h01 * v[k + 1] +
         h11 * step_ * dv[k + 1];
}

double OdeBasis::log_phi_at(double x) const {
  return interp_value(log_phi_, u_phi_, x);
}
double OdeBasis::log_eta_at(double x) const {
  return interp_value(log_eta_, u_eta_, x);
}
double OdeBasis::phi_log_slope_at(double x) const {
  return interp_value(u_phi_, du_phi_, x);
}
double OdeBasis::eta_log_slope_at(double x) const {
  return interp_value(u_eta_, du_eta_, x);
}

double OdeBasis::log_wronskian_at(double x) const {
  return log_phi_at(x) + log_eta_at(x) +
         std::log(eta_log_slope_at(x) - phi_log_slope_at(x));
}

OdeBasis solve_basis(const ArmModel& model, double alpha, double x_min,
                     double x_max, std::size_t n_grid) {
  model.validate();
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw domain_error("solve_basis: rate must be positive");
  }
  if (!(x_min < x_max)) throw domain_error("solve_basis: need x_min < x_max");
  if (n_grid < 100) throw domain_error("solve_basis: need n_grid >= 100");

  OdeBasis b;
  b.x_min_ = x_min;
  b.x_max_ = x_max;
  b.alpha_rate_ = alpha;
  b.sigma_ = model.sigma;
  b.grid_ = linspace(x_min, x_max, n_grid);
  b.step_ = (x_max - x_min) / static_cast<double>(n_grid - 1);
  const double h = b.step_;
  const double s2 = model.sigma * model.sigma;
  const std::size_t n = n_grid;

  std::vector<double> mu(n);
  for (std::size_t i = 0; i < n; ++i) mu[i] = model.drift(b.grid_[i]);

  // Two RK4 substeps per cell cut the slope error sixteenfold.
  auto rk4 = [&](double u, double x0, double dx) {
    const double mu_a = model.drift(x0);
    const double mu_m = model.drift(x0 + 0.5 * dx);
    const double mu_b = model.drift(x0 + dx);
    const double k1 = riccati_rhs(alpha, s2, mu_a, u);
    const double k2 = riccati_rhs(alpha, s2, mu_m, u + 0.5 * dx * k1);
    const double k3 = riccati_rhs(alpha, s2, mu_m, u + 0.5 * dx * k2);
    const double k4 = riccati_rhs(alpha, s2, mu_b, u + dx * k3);
    return u + dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  auto cell_step = [&](double u, double x0, double dx) {
    return rk4(rk4(u, x0, 0.5 * dx), x0 + 0.5 * dx, 0.5 * dx);
  };

  b.u_phi_.assign(n, 0.0);
  b.u_eta_.assign(n, 0.0);
  b.u_phi_[n - 1] = wkb_slope(alpha, s2, mu[n - 1], -1.0);
  for (std::size_t i = n - 1; i > 0; --i) {
    b.u_phi_[i - 1] = cell_step(b.u_phi_[i], b.grid_[i], -h);
  }
  b.u_eta_[0] = wkb_slope(alpha, s2, mu[0], +1.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    b.u_eta_[i + 1] = cell_step(b.u_eta_[i], b.grid_[i], h);
  }

  b.du_phi_.resize(n);
  b.du_eta_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(b.u_phi_[i]) || !std::isfinite(b.u_eta_[i])) {
      std::ostringstream os;
      os << "solve_basis: integration diverged at x = " << b.grid_[i];
      throw convergence_error(os.str());
    }
    b.du_phi_[i] = riccati_rhs(alpha, s2, mu[i], b.u_phi_[i]);
    b.du_eta_[i] = riccati_rhs(alpha, s2, mu[i], b.u_eta_[i]);
  }

  // Log values by the Hermite-corrected trapezoid rule (fourth order).
  auto integrate_log = [&](const std::vector<double>& u,
                           const std::vector<double>& du) {
    std::vector<double> l(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      l[i + 1] = l[i] + 0.5 * h * (u[i] + u[i + 1]) +
                 h * h / 12.0 * (du[i] - du[i + 1]);
    }
    const std::size_t i0 = nearest_index(b.grid_, h, 0.0);
    const double shift = l[i0];
    for (double& v : l) v -= shift;
    return l;
  };
  b.log_phi_ = integrate_log(b.u_phi_, b.du_phi_);
  b.log_eta_ = integrate_log(b.u_eta_, b.du_eta_);

  // Residual |L f| < 1e-6 (1 + |f|), i.e. r < 1e-6 (1 + 1/|f|) with
  // r = |L f| / |f| from a five-point derivative of the stored slopes.
  double worst = 0.0;
  double worst_x = b.grid_[n / 2];
  auto check = [&](const std::vector<double>& u, const std::vector<double>& l,
                   std::size_t i) {
    const double du = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) /
                      (12.0 * h);
    const double r =
        std::abs(0.5 * s2 * (du + u[i] * u[i]) + mu[i] * u[i] - alpha);
    const double eff = r / (1.0 + std::exp(-l[i]));
    if (!(eff <= worst)) {
      worst = std::isnan(eff) ? kInf : eff;
      worst_x = b.grid_[i];
    }
  };
  for (std::size_t i = 2; i + 2 < n; ++i) {
    check(b.u_phi_, b.log_phi_, i);
    check(b.u_eta_, b.log_eta_, i);
  }
  b.worst_residual_ = worst;
  b.worst_residual_x_ = worst_x;
  if (!(worst < 1e-6)) {
    std::ostringstream os;
    os << "solve_basis: ODE residual " << worst << " exceeds 1e-6 at x = "
       << worst_x << "; refine the grid";
    throw convergence_error(os.str());
  }

  const std::size_t center = n / 2;
  const std::size_t edge = std::max<std::size_t>(1, n / 20);
  for (std::size_t i = 0; i < edge; ++i) {
    if (!(b.log_phi_[n - 1 - i] < b.log_phi_[center]) ||
        !(b.log_eta_[i] < b.log_eta_[center])) {
      throw convergence_error(
          "solve_basis: decaying solutions do not decay toward the grid ends");
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double gap = b.u_eta_[i] - b.u_phi_[i];
    const double scale = std::abs(b.u_eta_[i]) + std::abs(b.u_phi_[i]);
    if (!(gap > 1e-12 * scale) || !(gap > 0.0)) {
      std::ostringstream os;
      os << "solve_basis: Wronskian W[phi, eta] degenerates at x = "
         << b.grid_[i];
      throw convergence_error(os.str());
    }
  }
  return b;
}

OdeBasis solve_basis(const ArmModel& model, double alpha,
                     const BasisOptions& opts) {
  return solve_basis(model, alpha, opts.x_min, opts.x_max, opts.n_grid);
}

OdeBasis solve_basis_refined(const ArmModel& model, double alpha,
                             const RewardFn& h, const std::vector<double>& probes,
                             const BasisOptions& opts, double tol,
                             int max_doublings) {
  std::size_t n = opts.n_grid;
  OdeBasis basis = solve_basis(model, alpha, opts.x_min, opts.x_max, n);
  auto values = [&](const OdeBasis& b) {
    std::vector<double> v;
    for (double x : probes) v.push_back(gittins_wronskian_general(x, model, alpha, h, b));
    return v;
  };
  std::vector<double> prev = values(basis);
  for (int d = 0; d < max_doublings; ++d) {
    n = 2 * (n - 1) + 1;
    OdeBasis finer = solve_basis(model, alpha, opts.x_min, opts.x_max, n);
    std::vector<double> cur = values(finer);
    double moved = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      moved = std::max(moved, std::abs(cur[i] - prev[i]));
    }
    basis = std::move(finer);
    if (moved < tol) break;
    prev = std::move(cur);
  }
  return basis;
}

// ------------------------------------------------------- general index

double gittins_wronskian_general(double x, const ArmModel& model, double alpha,
                                 const RewardFn& h, const OdeBasis& basis) {
  model.validate();
  require_rate(basis, alpha, "gittins_wronskian_general");
  require_sigma(basis, model.sigma, "gittins_wronskian_general");
  require_trusted(basis, x, "gittins_wronskian_general");
  const double s2 = model.sigma * model.sigma;
  const auto& grid = basis.grid();

  auto log_w = [&](double s) { return basis.log_eta_at(s); };
  auto g = [&](double s) {
    return 2.0 * h(s) / s2 /
           (basis.eta_log_slope_at(s) - basis.phi_log_slope_at(s));
  };
  const std::size_t k = cell_of(grid, basis.step(), x);
  const std::vector<double> nodes =
      upward_nodes(grid, k + 1, log_w, basis.eta_log_slope().back(), g);
  const double tail = upward_at(grid, basis.step(), nodes, x, log_w, g);
  const double u_phi = basis.phi_log_slope_at(x);
  const double u_eta = basis.eta_log_slope_at(x);
  return (u_eta - u_phi) / (-u_phi) * tail;
}

double gittins_wronskian_general(double x, const ArmModel& model,
                                 const RewardStructure& rs,
                                 const OdeBasis& basis) {
  return gittins_wronskian_general(x, model, rs.alpha(), rs.as_function(),
                                   basis);
}

// ---------------------------------------------------- particular solution

ParticularSolution::ParticularSolution(const ArmModel& model, double alpha,
                                       const RewardFn& h, const OdeBasis& basis,
                                       double residual_tol)
    : basis_(&basis), h_(h), alpha_(alpha) {
  model.validate();
  require_rate(basis, alpha, "particular_solution");
  require_sigma(basis, model.sigma, "particular_solution");
  const double s2 = model.sigma * model.sigma;
  const auto& grid = basis.grid();
  auto g = [&](double s) {
    return 2.0 * h(s) / s2 /
           (basis.eta_log_slope_at(s) - basis.phi_log_slope_at(s));
  };
  below_ = downward_nodes(
      grid, [&](double s) { return basis.log_phi_at(s); },
      basis.phi_log_slope().front(), g);
  above_ = upward_nodes(
      grid, 0, [&](double s) { return basis.log_eta_at(s); },
      basis.eta_log_slope().back(), g);

  const double step = basis.step();
  const std::size_t n = grid.size();
  auto p = [&](std::size_t i) { return -(below_[i] + above_[i]); };
  worst_residual_ = 0.0;
  worst_residual_x_ = grid[n / 2];
  for (std::size_t i = 2; i + 2 < n; ++i) {
    if (!basis.trusted(grid[i])) continue;
    const double d1 = (-p(i + 2) + 8.0 * p(i + 1) - 8.0 * p(i - 1) + p(i - 2)) /
                      (12.0 * step);
    const double d2 = (-p(i + 2) + 16.0 * p(i + 1) - 30.0 * p(i) +
                       16.0 * p(i - 1) - p(i - 2)) /
                      (12.0 * step * step);
    const double r = std::abs(0.5 * s2 * d2 + model.drift(grid[i]) * d1 -
                              alpha * p(i) - h(grid[i]));
    if (!(r <= worst_residual_)) {
      worst_residual_ = std::isnan(r) ? kInf : r;
      worst_residual_x_ = grid[i];
    }
  }
  if (!(worst_residual_ < residual_tol)) {
    std::ostringstream os;
    os << "particular_solution: residual " << worst_residual_ << " exceeds "
       << residual_tol << " at x = " << worst_residual_x_;
    throw convergence_error(os.str());
  }
}

double ParticularSolution::operator()(double x) const {
  const OdeBasis& basis = *basis_;
  require_trusted(basis, x, "particular_solution");
  const double s2 = basis.sigma() * basis.sigma();
  auto g = [&](double s) {
    return 2.0 * h_(s) / s2 /
           (basis.eta_log_slope_at(s) - basis.phi_log_slope_at(s));
  };
  const double lo = downward_at(basis.grid(), basis.step(), below_, x,
                                [&](double s) { return basis.log_phi_at(s); }, g);
  const double hi = upward_at(basis.grid(), basis.step(), above_, x,
                              [&](double s) { return basis.log_eta_at(s); }, g);
  return -(lo + hi);
}

double particular_solution(const ArmModel& model, double alpha,
                           const RewardStructure& rs, const OdeBasis& basis,
                           double x) {
  const double tol =
      1e-4 * alpha * (std::abs(rs.k_low()) + std::abs(rs.k_high()));
  const ParticularSolution p(model, alpha, rs.as_function(), basis, tol);
  return p(x);
}

// --------------------------------------------------------- Doob factor

DoobFactor doob_factor_at(const ArmModel& base, const DoobFactorSpec& spec,
                          const OdeBasis& basis_gamma, double x) {
  const double lp = basis_gamma.log_phi_at(x);
  const double le = basis_gamma.log_eta_at(x);
  const double a = spec.p_coef > 0.0 ? std::log(spec.p_coef) + lp : -kInf;
  const double b = spec.q_coef > 0.0 ? std::log(spec.q_coef) + le : -kInf;
  const double top = std::max(a, b);
  if (!std::isfinite(top)) {
    throw internal_error("doob factor: F_Gamma is not positive");
  }
  const double wa = std::exp(a - top);
  const double wb = std::exp(b - top);
  const double sum = wa + wb;
  const double log_f = top + std::log(sum);
  const double v = (wa * basis_gamma.phi_log_slope_at(x) +
                    wb * basis_gamma.eta_log_slope_at(x)) /
                   sum;
  const double s2 = base.sigma * base.sigma;
  // F'' = (2/sigma^2)(Gamma F - mu F') from L_Gamma F = 0.
  const double dv = 2.0 / s2 * (spec.gamma - base.drift(x) * v) - v * v;
  return {log_f, v, dv};
}

double doob_drift(const ArmModel& model, const DoobFactorSpec& spec,
                  const OdeBasis& basis_gamma, double x) {
  spec.validate();
  require_rate(basis_gamma, spec.gamma, "doob_drift");
  const DoobFactor f = doob_factor_at(model, spec, basis_gamma, x);
  return model.drift(x) + model.sigma * model.sigma * f.log_slope;
}

ArmModel doob_modified_model(const ArmModel& base, const DoobFactorSpec& spec,
                             const OdeBasis& basis_gamma) {
  spec.validate();
  require_rate(basis_gamma, spec.gamma, "doob_modified_model");
  const OdeBasis* bg = &basis_gamma;
  ArmModel out;
  out.sigma = base.sigma;
  out.label = base.label + "+doob";
  out.drift = [base, spec, bg](double x) {
    const DoobFactor f = doob_factor_at(base, spec, *bg, x);
    return base.drift(x) + base.sigma * base.sigma * f.log_slope;
  };
  return out;
}

ConditionReport check_karatzas_condition(const ArmModel& model, double alpha,
                                         double x_min, double x_max,
                                         std::size_t n) {
  model.validate();
  if (n < 2 || !(x_min < x_max)) {
    throw domain_error("check_karatzas_condition: need n >= 2 and x_min < x_max");
  }
  ConditionReport r{kInf, -kInf, x_min, false};
  for (double x : linspace(x_min, x_max, n)) {
    const double v = alpha - drift_derivative(model, x);
    if (v < r.min_value || std::isnan(v)) {
      r.min_value = v;
      r.argmin = x;
    }
    r.max_value = std::max(r.max_value, v);
  }
  r.passed = r.min_value > 0.0 && std::isfinite(r.max_value);
  return r;
}

ConditionReport check_doob_drift_condition(const ArmModel& base,
                                           const DoobFactorSpec& spec,
                                           double alpha,
                                           const OdeBasis& basis_gamma,
                                           double x_min, double x_max,
                                           std::size_t n) {
  spec.validate();
  require_rate(basis_gamma, spec.gamma, "check_doob_drift_condition");
  ConditionReport r{kInf, -kInf, x_min, false};
  const double s2 = base.sigma * base.sigma;
  for (double x : linspace(x_min, x_max, n)) {
    const DoobFactor f = doob_factor_at(base, spec, basis_gamma, x);
    const double v = alpha - (drift_derivative(base, x) + s2 * f.log_slope_deriv);
    if (v < r.min_value || std::isnan(v)) {
      r.min_value = v;
      r.argmin = x;
    }
    r.max_value = std::max(r.max_value, v);
  }
  r.passed = r.min_value > 0.0 && std::isfinite(r.max_value);
  return r;
}

// ------------------------------------------------ change-of-measure index

double gittins_change_of_measure(double x, const ArmModel& base,
                                 const DoobFactorSpec& spec, double alpha,
                                 const RewardFn& h, const OdeBasis& basis_sum,
                                 const OdeBasis& basis_gamma) {
  base.validate();
  spec.validate();
  require_rate(basis_sum, alpha + spec.gamma, "gittins_change_of_measure");
  require_rate(basis_gamma, spec.gamma, "gittins_change_of_measure");
  require_sigma(basis_sum, base.sigma, "gittins_change_of_measure");
  require_sigma(basis_gamma, base.sigma, "gittins_change_of_measure");
  require_trusted(basis_sum, x, "gittins_change_of_measure");

  const ConditionReport cond = check_doob_drift_condition(
      base, spec, alpha, basis_gamma, basis_sum.trusted_lo(),
      basis_sum.trusted_hi(), basis_sum.size());
  if (!cond.passed) {
    std::ostringstream os;
    os << "gittins_change_of_measure: drift condition alpha - m'(x) > 0 fails"
       << " (min " << cond.min_value << " at x = " << cond.argmin << ")";
    throw regime_error(os.str());
  }

  const double s2 = base.sigma * base.sigma;
  const auto& grid = basis_sum.grid();
  auto log_w = [&](double s) {
    return basis_sum.log_eta_at(s) -
           doob_factor_at(base, spec, basis_gamma, s).log_value;
  };
  auto g = [&](double s) {
    return 2.0 * h(s) / s2 /
           (basis_sum.eta_log_slope_at(s) - basis_sum.phi_log_slope_at(s));
  };
  const double top_slope =
      basis_sum.eta_log_slope().back() -
      doob_factor_at(base, spec, basis_gamma, grid.back()).log_slope;
  const std::size_t k = cell_of(grid, basis_sum.step(), x);
  const std::vector<double> nodes = upward_nodes(grid, k + 1, log_w, top_slope, g);
  const double tail = upward_at(grid, basis_sum.step(), nodes, x, log_w, g);

  const double u_phi = basis_sum.phi_log_slope_at(x);
  const double u_eta = basis_sum.eta_log_slope_at(x);
  const double v = doob_factor_at(base, spec, basis_gamma, x).log_slope;
  return (u_eta - u_phi) / (v - u_phi) * tail;
}

double gittins_change_of_measure(double x, const ArmModel& base,
                                 const DoobFactorSpec& spec,
                                 const RewardStructure& rs,
                                 const OdeBasis& basis_sum,
                                 const OdeBasis& basis_gamma) {
  return gittins_change_of_measure(x, base, spec, rs.alpha(), rs.as_function(),
                                   basis_sum, basis_gamma);
}

// ------------------------------------------------------ identity audits

bool IdentityReport::all_passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(),
                     [](const IdentityCheck& c) { return c.passed; });
}

IdentityReport verify_basis_transform(const ArmModel& base,
                                      const DoobFactorSpec& spec, double alpha,
                                      const OdeBasis& basis_sum,
                                      const OdeBasis& basis_gamma,
                                      const OdeBasis& modified_basis,
                                      double tol) {
  spec.validate();
  require_rate(basis_sum, alpha + spec.gamma, "verify_basis_transform");
  require_rate(modified_basis, alpha, "verify_basis_transform");
  std::vector<double> phi_logs;
  std::vector<double> eta_logs;
  for (double x : trusted_nodes(modified_basis)) {
    const double lf = doob_factor_at(base, spec, basis_gamma, x).log_value;
    phi_logs.push_back(modified_basis.log_phi_at(x) + lf -
                       basis_sum.log_phi_at(x));
    eta_logs.push_back(modified_basis.log_eta_at(x) + lf -
                       basis_sum.log_eta_at(x));
  }
  IdentityReport r;
  r.checks.push_back(make_identity("phi_transform", phi_logs, tol));
  r.checks.push_back(make_identity("eta_transform", eta_logs, tol));
  return r;
}

IdentityReport verify_wronskian_ratios(const ArmModel& base,
                                       const DoobFactorSpec& spec, double alpha,
                                       const OdeBasis& basis_sum,
                                       const OdeBasis& basis_gamma,
                                       const OdeBasis& modified_basis,
                                       double tol) {
  spec.validate();
  require_rate(basis_sum, alpha + spec.gamma, "verify_wronskian_ratios");
  require_rate(modified_basis, alpha, "verify_wronskian_ratios");
  std::vector<double> one_logs;
  std::vector<double> pair_logs;
  for (double x : trusted_nodes(modified_basis)) {
    const DoobFactor f = doob_factor_at(base, spec, basis_gamma, x);
    const double l_phi_m = modified_basis.log_phi_at(x);
    const double u_phi_m = modified_basis.phi_log_slope_at(x);
    const double l_phi_s = basis_sum.log_phi_at(x);
    const double u_phi_s = basis_sum.phi_log_slope_at(x);
    // W[phi_m, 1] = -phi_m'   vs   W[phi_s, F] / F^2 = phi_s (v - u_phi_s) / F
    one_logs.push_back(std::log(-u_phi_m) + l_phi_m -
                       (l_phi_s - f.log_value + std::log(f.log_slope - u_phi_s)));
    // W[phi_m, eta_m]   vs   W[phi_s, eta_s] / F^2
    pair_logs.push_back(modified_basis.log_wronskian_at(x) -
                        (basis_sum.log_wronskian_at(x) - 2.0 * f.log_value));
  }
  IdentityReport r;
  r.checks.push_back(make_identity("wronskian_with_one", one_logs, tol));
  r.checks.push_back(make_identity("wronskian_pair", pair_logs, tol));
  return r;
}

}  // namespace gittins
