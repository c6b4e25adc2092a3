#include "gittins/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gittins/error.hpp"
#include "gittins/simd/kernels.hpp"

namespace gittins {
namespace {

// Thomas algorithm; sub[0] and sup[n-1] are ignored. The systems here are
// strictly diagonally dominant, so no pivoting is needed.
void solve_tridiagonal(const std::vector<double>& sub,
                       const std::vector<double>& diag,
                       const std::vector<double>& sup, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n);
  double denom = diag[0];
  c[0] = sup[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - sub[i] * c[i - 1];
    c[i] = sup[i] / denom;
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

}  // namespace

LatticeSpec::LatticeSpec(const ArmModel& model, double x_center,
                         double half_width, double dx)
    : x_center_(x_center), half_width_(half_width), dx_(dx) {
  model.validate();
  if (!std::isfinite(x_center)) throw domain_error("lattice: x_center must be finite");
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw domain_error("lattice: half_width must be positive");
  }
  if (!(dx > 0.0) || !(dx <= half_width / 2.0)) {
    throw domain_error("lattice: need 0 < dx <= half_width / 2");
  }
  const double s2 = model.sigma * model.sigma;
  for (int attempt = 0;; ++attempt) {
    const auto n_half = static_cast<std::size_t>(std::ceil(half_width / dx_ - 1e-9));
    const std::size_t n = 2 * n_half + 1;
    states_.resize(n);
    p_up_.resize(n);
    p_down_.resize(n);
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double x =
          x_center + (static_cast<double>(i) - static_cast<double>(n_half)) * dx_;
      const double mu = model.drift(x);
      if (!std::isfinite(mu)) {
        std::ostringstream os;
        os << "lattice: drift is not finite at x = " << x;
        throw domain_error(os.str());
      }
      if (std::abs(mu) * dx_ > s2) ok = false;
      states_[i] = x;
      p_up_[i] = 0.5 + mu * dx_ / (2.0 * s2);
      p_down_[i] = 1.0 - p_up_[i];
    }
    if (ok) break;
    if (attempt == 30) throw domain_error("lattice: drift too large to bound |mu| dx <= sigma^2");
    dx_ *= 0.5;
  }
  dt_ = dx_ * dx_ / s2;
}

std::size_t LatticeSpec::nearest(double x) const {
  const double pos = std::round((x - states_.front()) / dx_);
  if (!std::isfinite(pos) || pos < 0.0 ||
      pos > static_cast<double>(states_.size() - 1)) {
    std::ostringstream os;
    os << "lattice: x = " << x << " lies outside [" << states_.front() << ", "
       << states_.back() << "]";
    throw domain_error(os.str());
  }
  return static_cast<std::size_t>(pos);
}

RetirementSolution solve_retirement(const ArmModel& model,
                                    const RewardStructure& rs,
                                    const LatticeSpec& lattice, double m,
                                    const std::vector<char>* warm) {
  if (!std::isfinite(m)) throw domain_error("retirement: m must be finite");
  const std::size_t n = lattice.n_states();
  const double alpha = rs.alpha();
  const double disc = std::exp(-alpha * lattice.dt());
  // Exact discounted reward of holding h for one step.
  const double reward_scale = -std::expm1(-alpha * lattice.dt()) / alpha;
  const auto& xs = lattice.states();
  const auto& pu = lattice.p_up();
  const auto& pd = lattice.p_down();
  (void)model;

  std::vector<double> reward(n);
  for (std::size_t i = 0; i < n; ++i) reward[i] = rs(xs[i]) * reward_scale;

  RetirementSolution sol;
  if (warm != nullptr && warm->size() == n) {
    sol.stop = *warm;
  } else {
    sol.stop.resize(n);
    for (std::size_t i = 0; i < n; ++i) sol.stop[i] = rs(xs[i]) / alpha <= m;
  }

  std::vector<double> sub(n), diag(n), sup(n);
  std::vector<double> next(n);
  sol.value.assign(n, m);
  constexpr int kMaxIter = 1000;
  for (sol.iterations = 1; sol.iterations <= kMaxIter; ++sol.iterations) {
    for (std::size_t i = 0; i < n; ++i) {
      diag[i] = 1.0;
      if (sol.stop[i]) {
        sub[i] = sup[i] = 0.0;
        sol.value[i] = m;
      } else if (i == 0) {
        sub[i] = 0.0;
        sup[i] = -disc;
        sol.value[i] = reward[i];
      } else if (i == n - 1) {
        sub[i] = -disc;
        sup[i] = 0.0;
        sol.value[i] = reward[i];
      } else {
        sub[i] = -disc * pd[i];
        sup[i] = -disc * pu[i];
        sol.value[i] = reward[i];
      }
    }
    solve_tridiagonal(sub, diag, sup, sol.value);

    simd::bellman_sweep({sol.value, reward, pu, pd, disc, m, next});
    next[0] = std::max(m, reward[0] + disc * sol.value[1]);
    next[n - 1] = std::max(m, reward[n - 1] + disc * sol.value[n - 2]);

    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const char s = !(next[i] > m);
      changed |= s != sol.stop[i];
      sol.stop[i] = s;
    }
    sol.residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sol.residual = std::max(sol.residual, std::abs(next[i] - sol.value[i]));
    }
    if (!changed) break;
  }
  const double scale = std::max(1.0, std::abs(m));
  if (!(sol.residual <= 1e-10 * scale)) {
    std::ostringstream os;
    os << "retirement: Bellman residual " << sol.residual
       << " above 1e-10 after " << sol.iterations << " policy iterations";
    throw convergence_error(os.str());
  }
  return sol;
}

std::vector<double> retirement_value(const ArmModel& model,
                                     const RewardStructure& rs,
                                     const LatticeSpec& lattice, double m) {
  return solve_retirement(model, rs, lattice, m).value;
}

double lattice_gittins(const ArmModel& model, const RewardStructure& rs,
                       const LatticeSpec& lattice, double x, double tol) {
  if (!(tol > 0.0)) throw domain_error("lattice_gittins: tol must be positive");
  const std::size_t ix = lattice.nearest(x);
  double lo = rs.k_low();
  double hi = rs.k_high();
  std::vector<char> warm;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    RetirementSolution s =
        solve_retirement(model, rs, lattice, mid, warm.empty() ? nullptr : &warm);
    if (s.stop[ix]) {
      hi = mid;
    } else {
      lo = mid;
    }
    warm = std::move(s.stop);
  }
  return 0.5 * (lo + hi);
}

}  // namespace gittins
