#pragma once

// Quadrature against the exponential weight e^{-z} on [0, inf), bracketing
// root search, and small helpers shared by the index engines.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gittins {

class QuadratureRule {
 public:
  enum class Kind { GaussLaguerre, AdaptiveTruncated };

  /// n-point Gauss-Laguerre rule; nodes and weights are computed once and
  /// shared between copies.
  static QuadratureRule gauss_laguerre(std::size_t n);

  /// Adaptive Gauss-Kronrod on [0, z_max] with relative tolerance tol. The
  /// truncated tail of a bounded integrand is at most sup|f| * e^{-z_max}.
  static QuadratureRule adaptive_truncated(double z_max, double tol);

  /// The library default: 64-point Gauss-Laguerre.
  static QuadratureRule standard();

  Kind kind() const { return kind_; }
  std::size_t size() const { return nodes_ ? nodes_->size() : 0; }
  std::span<const double> nodes() const;
  std::span<const double> weights() const;
  double z_max() const { return z_max_; }
  double tol() const { return tol_; }

  /// Upper bound on the discarded tail for |f| <= bound (zero for
  /// Gauss-Laguerre, whose rule covers the whole half line).
  double tail_bound(double bound) const;

 private:
  QuadratureRule() = default;

  Kind kind_ = Kind::GaussLaguerre;
  std::shared_ptr<const std::vector<double>> nodes_;
  std::shared_ptr<const std::vector<double>> weights_;
  double z_max_ = 0.0;
  double tol_ = 0.0;
};

/// integral_0^inf f(z) e^{-z} dz. A non-finite f value at any evaluation
/// point raises a numeric error that names the point.
double exp_weighted_integral(const QuadratureRule& rule,
                             const std::function<double(double)>& f);

/// Scans n_scan equispaced points of [lo, hi], bisects every sign change to
/// a bracket narrower than tol and returns the midpoints, sorted. Exact
/// zeros at scan points are reported as roots.
std::vector<double> find_sign_changes(const std::function<double(double)>& f,
                                      double lo, double hi, std::size_t n_scan,
                                      double tol);

/// Pairwise (tree) summation; deterministic for a given input order.
double pairwise_sum(std::span<const double> values);

/// Decimal text with 17 significant digits (round-trips a double).
std::string format_real(double v);

/// n equispaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace gittins
