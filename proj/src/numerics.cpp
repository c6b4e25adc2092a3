#include "gittins/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>

#include "gittins/error.hpp"
#include "gittins/simd/kernels.hpp"

namespace gittins {
namespace {

struct LaguerreTable {
  std::shared_ptr<const std::vector<double>> nodes;
  std::shared_ptr<const std::vector<double>> weights;
};

// L_n(z) and L_{n-1}(z) by the three-term recurrence, in extended precision.
std::pair<long double, long double> laguerre_pair(std::size_t n, long double z) {
  long double prev = 1.0L;
  long double cur = 1.0L - z;
  if (n == 0) return {1.0L, 0.0L};
  for (std::size_t k = 1; k < n; ++k) {
    const long double kk = static_cast<long double>(k);
    const long double next = ((2.0L * kk + 1.0L - z) * cur - kk * prev) / (kk + 1.0L);
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

// Golub-Welsch for the initial nodes, then Newton polish on L_n and the
// closed-form weights w = z / ((n+1)^2 L_{n+1}(z)^2).
LaguerreTable build_laguerre(std::size_t n) {
  Eigen::VectorXd diag(static_cast<Eigen::Index>(n));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 0 ? n - 1 : 0));
  for (std::size_t i = 0; i < n; ++i) {
    diag[static_cast<Eigen::Index>(i)] = 2.0 * static_cast<double>(i) + 1.0;
    if (i + 1 < n) sub[static_cast<Eigen::Index>(i)] = static_cast<double>(i) + 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw convergence_error("gauss_laguerre: eigenvalue solve failed");
  }
  auto nodes = std::make_shared<std::vector<double>>(n);
  auto weights = std::make_shared<std::vector<double>>(n);
  const long double nn = static_cast<long double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    long double z = solver.eigenvalues()[static_cast<Eigen::Index>(i)];
    for (int it = 0; it < 10; ++it) {
      auto [ln, lnm1] = laguerre_pair(n, z);
      // z L_n'(z) = n (L_n - L_{n-1})
      const long double deriv = nn * (ln - lnm1) / z;
      const long double dz = ln / deriv;
      z -= dz;
      if (std::abs(dz) <= 1e-18L * z) break;
    }
    const long double lnp1 = laguerre_pair(n + 1, z).first;
    (*nodes)[i] = static_cast<double>(z);
    (*weights)[i] = static_cast<double>(z / ((nn + 1.0L) * (nn + 1.0L) * lnp1 * lnp1));
  }
  // The weights integrate 1 exactly; removing the rounding drift of the
  // smallest weights keeps the sum at 1 to machine precision.
  const double total = pairwise_sum(*weights);
  for (double& w : *weights) w /= total;
  return {nodes, weights};
}

const LaguerreTable& laguerre_table(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, LaguerreTable> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_laguerre(n)).first;
  return it->second;
}

[[noreturn]] void throw_non_finite(double z, double v) {
  std::ostringstream os;
  os << "exp_weighted_integral: integrand is non-finite (" << v
     << ") at node z = " << z;
  throw numeric_error(os.str());
}

}  // namespace

QuadratureRule QuadratureRule::gauss_laguerre(std::size_t n) {
  if (n < 1 || n > 512) {
    throw domain_error("gauss_laguerre: node count must be in [1, 512]");
  }
  const LaguerreTable& t = laguerre_table(n);
  QuadratureRule r;
  r.kind_ = Kind::GaussLaguerre;
  r.nodes_ = t.nodes;
  r.weights_ = t.weights;
  return r;
}

QuadratureRule QuadratureRule::adaptive_truncated(double z_max, double tol) {
  if (!(z_max > 0.0) || !(tol > 0.0)) {
    throw domain_error("adaptive_truncated: z_max and tol must be positive");
  }
  QuadratureRule r;
  r.kind_ = Kind::AdaptiveTruncated;
  r.z_max_ = z_max;
  r.tol_ = tol;
  return r;
}

QuadratureRule QuadratureRule::standard() { return gauss_laguerre(64); }

std::span<const double> QuadratureRule::nodes() const {
  if (!nodes_) return {};
  return {nodes_->data(), nodes_->size()};
}

std::span<const double> QuadratureRule::weights() const {
  if (!weights_) return {};
  return {weights_->data(), weights_->size()};
}

double QuadratureRule::tail_bound(double bound) const {
  if (kind_ == Kind::GaussLaguerre) return 0.0;
  return bound * std::exp(-z_max_);
}

double exp_weighted_integral(const QuadratureRule& rule,
                             const std::function<double(double)>& f) {
  if (rule.kind() == QuadratureRule::Kind::GaussLaguerre) {
    const auto z = rule.nodes();
    std::vector<double> values(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      values[i] = f(z[i]);
      if (!std::isfinite(values[i])) throw_non_finite(z[i], values[i]);
    }
    return simd::weighted_sum(rule.weights(), values);
  }
  auto integrand = [&f](double z) {
    const double v = f(z);
    if (!std::isfinite(v)) throw_non_finite(z, v);
    return v * std::exp(-z);
  };
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, rule.z_max(), 30, rule.tol(), &err);
  return value;
}

std::vector<double> find_sign_changes(const std::function<double(double)>& f,
                                      double lo, double hi, std::size_t n_scan,
                                      double tol) {
  if (!(lo < hi)) throw domain_error("find_sign_changes: need lo < hi");
  if (n_scan < 2) throw domain_error("find_sign_changes: need n_scan >= 2");
  if (!(tol > 0.0)) throw domain_error("find_sign_changes: need tol > 0");

  const std::vector<double> xs = linspace(lo, hi, n_scan);
  std::vector<double> fs(n_scan);
  for (std::size_t i = 0; i < n_scan; ++i) fs[i] = f(xs[i]);

  std::vector<double> roots;
  for (std::size_t i = 0; i < n_scan; ++i) {
    if (fs[i] == 0.0) {
      roots.push_back(xs[i]);
      continue;
    }
    if (i + 1 == n_scan) break;
    if (fs[i + 1] == 0.0) continue;
    if ((fs[i] < 0.0) == (fs[i + 1] < 0.0)) continue;
    double a = xs[i];
    double b = xs[i + 1];
    double fa = fs[i];
    while (b - a >= tol) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      const double fm = f(m);
      if (fm == 0.0) {
        a = b = m;
        break;
      }
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> xs(n);
  if (n == 1) {
    xs[0] = lo;
    return xs;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) xs[i] = lo + step * static_cast<double>(i);
  xs[n - 1] = hi;
  return xs;
}

}  // namespace gittins
