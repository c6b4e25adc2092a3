#include "gittins/closed_form.hpp"

#include <cmath>
#include <sstream>

#include "gittins/error.hpp"

namespace gittins {
namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << " must be positive and finite (got " << v << ")";
    throw domain_error(os.str());
  }
}

void require_finite_x(double x) {
  if (!std::isfinite(x)) throw domain_error("index: state x must be finite");
}

// 2 / (2 alpha + c * e^{t}), switching to the rescaled form once e^{t}
// would dominate (or overflow).
double rho_term(double alpha, double log_c, double t) {
  const double expo = log_c + t;
  if (expo > 300.0) {
    const double damp = std::exp(-expo);
    return 2.0 * damp / (1.0 + 2.0 * alpha * damp);
  }
  return 2.0 / (2.0 * alpha + std::exp(expo));
}

}  // namespace

DerivedConstants derived_constants(double sigma1, double sigma2, double gamma,
                                   double alpha) {
  require_positive(sigma1, "sigma1");
  require_positive(sigma2, "sigma2");
  require_positive(alpha, "alpha");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw domain_error("gamma must be non-negative and finite");
  }
  return {std::sqrt(2.0 * gamma) / sigma2,
          std::sqrt(2.0 * (alpha + gamma)) / sigma2,
          std::sqrt(2.0 * alpha) / sigma1};
}

double exp_average(const RewardFn& h, double x, double scale,
                   const QuadratureRule& rule) {
  return exp_weighted_integral(rule, [&](double z) { return h(x + z * scale); });
}

double gittins_bm(double x, double sigma, double alpha, const RewardFn& h,
                  const QuadratureRule& rule) {
  require_finite_x(x);
  require_positive(sigma, "sigma");
  require_positive(alpha, "alpha");
  // Same expression as the DMPS rate B at Gamma = 0, so the reduction is
  // bitwise in the scale factor.
  const double b0 = std::sqrt(2.0 * (alpha + 0.0)) / sigma;
  return exp_average(h, x, 1.0 / b0, rule) / alpha;
}

double gittins_bm(double x, double sigma, const RewardStructure& rs,
                  const QuadratureRule& rule) {
  return gittins_bm(x, sigma, rs.alpha(), rs.as_function(), rule);
}

double drifted_rate(double mu, double sigma, double alpha) {
  require_positive(sigma, "sigma");
  require_positive(alpha, "alpha");
  const double root = std::sqrt(mu * mu + 2.0 * alpha * sigma * sigma);
  if (mu > 0.0) return 2.0 * alpha / (root + mu);
  return (root - mu) / (sigma * sigma);
}

double gittins_drifted_bm(double x, double mu, double sigma, double alpha,
                          const RewardFn& h, const QuadratureRule& rule) {
  require_finite_x(x);
  if (!std::isfinite(mu)) throw domain_error("drift mu must be finite");
  const double beta = drifted_rate(mu, sigma, alpha);
  return exp_average(h, x, 1.0 / beta, rule) / alpha;
}

double gittins_drifted_bm(double x, double mu, double sigma,
                          const RewardStructure& rs, const QuadratureRule& rule) {
  return gittins_drifted_bm(x, mu, sigma, rs.alpha(), rs.as_function(), rule);
}

DmpsWeights dmps_weights(double x, double sigma, double gamma, double alpha) {
  const DerivedConstants k = derived_constants(sigma, sigma, gamma, alpha);
  const double a = k.a_const;
  const double b = k.b_const;
  const double s2 = sigma * sigma;
  return {rho_term(alpha, std::log(s2 * (b - a) * (b - a)), -2.0 * a * x),
          rho_term(alpha, std::log(s2 * (b + a) * (b + a)), 2.0 * a * x)};
}

DmpsTerms dmps_terms(double x, double sigma, double gamma, double alpha,
                     const RewardFn& h, const QuadratureRule& rule,
                     Regime regime) {
  require_finite_x(x);
  const DerivedConstants k = derived_constants(sigma, sigma, gamma, alpha);
  if (regime == Regime::Proven && !(gamma < alpha / 2.0)) {
    std::ostringstream os;
    os << "DMPS index requires Gamma < alpha/2 (got Gamma = " << gamma
       << ", alpha = " << alpha
       << "); the drift condition alpha - m'(x) > 0 fails otherwise. Use "
          "--allow-unproven-regime to evaluate the formula anyway";
    throw regime_error(os.str());
  }
  DmpsTerms t;
  t.rho = dmps_weights(x, sigma, gamma, alpha);
  t.s_minus = exp_average(h, x, 1.0 / (k.b_const - k.a_const), rule);
  t.s_plus = exp_average(h, x, 1.0 / (k.b_const + k.a_const), rule);
  return t;
}

double gittins_dmps(double x, double sigma, double gamma, double alpha,
                    const RewardFn& h, const QuadratureRule& rule,
                    Regime regime) {
  return dmps_terms(x, sigma, gamma, alpha, h, rule, regime).index();
}

double gittins_dmps(double x, double sigma, double gamma,
                    const RewardStructure& rs, const QuadratureRule& rule,
                    Regime regime) {
  return gittins_dmps(x, sigma, gamma, rs.alpha(), rs.as_function(), rule,
                      regime);
}

}  // namespace gittins
