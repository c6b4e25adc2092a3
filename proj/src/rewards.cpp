#include "gittins/rewards.hpp"

// pchip in Boost 1.74 calls isnan unqualified; math.h puts it in scope.
#include <math.h>

#include <algorithm>
#include <boost/math/interpolators/pchip.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "gittins/error.hpp"

namespace gittins {

struct RewardStructure::Pchip {
  boost::math::interpolators::pchip<std::vector<double>> spline;
  double x_first;
  double x_last;
  double y_first;
  double y_last;
};

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    std::ostringstream os;
    os << what << ": non-finite argument " << x;
    throw domain_error(os.str());
  }
}

void validate_common(double alpha, double k_low, double k_high) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw domain_error("reward: alpha must be a positive finite number");
  }
  if (!std::isfinite(k_low) || !std::isfinite(k_high) || !(k_low < k_high)) {
    throw domain_error("reward: bounds must satisfy k_low < k_high");
  }
}

void validate_rate(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw domain_error("reward: steepness c must be positive");
  }
}

// e / (1 + e)^2 with e = exp(-|y|); equals s(1-s) for the logistic s(y).
double logistic_bump(double y) {
  const double e = std::exp(-std::abs(y));
  return e / ((1.0 + e) * (1.0 + e));
}

}  // namespace

RewardStructure::RewardStructure(double alpha, double k_low, double k_high,
                                 RewardFamily family)
    : alpha_(alpha), k_low_(k_low), k_high_(k_high), family_(std::move(family)) {}

RewardStructure RewardStructure::logistic(double alpha, double k_low,
                                          double k_high, double c) {
  validate_common(alpha, k_low, k_high);
  validate_rate(c);
  return {alpha, k_low, k_high, Logistic{c}};
}

RewardStructure RewardStructure::tanh_shifted(double alpha, double k_low,
                                              double k_high, double c) {
  validate_common(alpha, k_low, k_high);
  validate_rate(c);
  return {alpha, k_low, k_high, TanhShifted{c}};
}

RewardStructure RewardStructure::tabulated(double alpha, double k_low,
                                           double k_high,
                                           std::vector<Knot> knots) {
  validate_common(alpha, k_low, k_high);
  if (knots.size() < 4) {
    throw domain_error("reward: tabulated family needs at least 4 knots");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i].x) || !std::isfinite(knots[i].value)) {
      throw domain_error("reward: tabulated knots must be finite");
    }
    if (i > 0 && !(knots[i].x > knots[i - 1].x)) {
      throw domain_error("reward: tabulated knot abscissae must be strictly increasing");
    }
    xs.push_back(knots[i].x);
    ys.push_back(knots[i].value);
  }
  RewardStructure rs{alpha, k_low, k_high, Tabulated{knots}};
  rs.pchip_ = std::make_shared<const Pchip>(
      Pchip{boost::math::interpolators::pchip<std::vector<double>>(
                std::move(xs), std::move(ys), 0.0, 0.0),
            knots.front().x, knots.back().x, knots.front().value,
            knots.back().value});
  return rs;
}

RewardStructure RewardStructure::constant(double alpha, double k_low,
                                          double k_high, double value,
                                          Degenerate policy) {
  validate_common(alpha, k_low, k_high);
  if (policy != Degenerate::Allow) {
    throw domain_error(
        "reward: constant reward is not strictly increasing; pass "
        "--allow-degenerate to use it");
  }
  if (!std::isfinite(value) || value < alpha * k_low || value > alpha * k_high) {
    throw domain_error("reward: constant value must lie in [alpha*k, alpha*K]");
  }
  return {alpha, k_low, k_high, Constant{value}};
}

std::string RewardStructure::family_name() const {
  struct Namer {
    std::string operator()(const Logistic&) const { return "logistic"; }
    std::string operator()(const TanhShifted&) const { return "tanh"; }
    std::string operator()(const Tabulated&) const { return "tabulated"; }
    std::string operator()(const Constant&) const { return "constant"; }
  };
  return std::visit(Namer{}, family_);
}

double RewardStructure::magnitude_bound() const {
  return alpha_ * std::max(std::abs(k_low_), std::abs(k_high_));
}

double RewardStructure::probe_radius() const {
  if (const auto* f = std::get_if<Logistic>(&family_)) return 50.0 / f->c;
  if (const auto* f = std::get_if<TanhShifted>(&family_)) return 25.0 / f->c;
  if (pchip_) {
    return 2.0 * std::max(std::abs(pchip_->x_first), std::abs(pchip_->x_last)) +
           1.0;
  }
  return 50.0;
}

double RewardStructure::operator()(double x) const {
  const double lo = alpha_ * k_low_;
  const double span = alpha_ * (k_high_ - k_low_);
  if (const auto* f = std::get_if<Logistic>(&family_)) {
    return lo + span / (1.0 + std::exp(-f->c * x));
  }
  if (const auto* f = std::get_if<TanhShifted>(&family_)) {
    return lo + span * 0.5 * (1.0 + std::tanh(f->c * x));
  }
  if (const auto* f = std::get_if<Constant>(&family_)) return f->value;
  const Pchip& p = *pchip_;
  double y;
  if (x <= p.x_first) {
    y = p.y_first;
  } else if (x >= p.x_last) {
    y = p.y_last;
  } else {
    y = p.spline(x);
  }
  return std::clamp(y, lo, alpha_ * k_high_);
}

double RewardStructure::derivative(double x) const {
  const double span = alpha_ * (k_high_ - k_low_);
  if (const auto* f = std::get_if<Logistic>(&family_)) {
    return span * f->c * logistic_bump(f->c * x);
  }
  if (const auto* f = std::get_if<TanhShifted>(&family_)) {
    // (c/2) sech^2(c x) == 2c * bump(2 c x)
    return span * 2.0 * f->c * logistic_bump(2.0 * f->c * x);
  }
  if (std::holds_alternative<Constant>(family_)) return 0.0;
  const Pchip& p = *pchip_;
  if (x <= p.x_first || x >= p.x_last) return 0.0;
  return p.spline.prime(x);
}

RewardFn RewardStructure::as_function() const {
  return [rs = *this](double x) { return rs(x); };
}

double eval_reward(const RewardStructure& rs, double x) {
  require_finite(x, "eval_reward");
  return rs(x);
}

double eval_reward_derivative(const RewardStructure& rs, double x) {
  require_finite(x, "eval_reward_derivative");
  return rs.derivative(x);
}

bool AdmissibilityReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const AdmissibilityCheck& c) { return c.passed; });
}

const AdmissibilityCheck* AdmissibilityReport::find(
    const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

AdmissibilityReport check_admissible(const RewardStructure& rs,
                                     const std::vector<double>& probe_grid) {
  if (probe_grid.empty()) {
    throw domain_error("check_admissible: probe grid is empty");
  }
  if (!std::is_sorted(probe_grid.begin(), probe_grid.end())) {
    throw domain_error("check_admissible: probe grid must be sorted");
  }
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  AdmissibilityReport report;
  auto add = [&report](std::string name, bool ok, double witness,
                       std::string detail) {
    report.checks.push_back(
        {std::move(name), ok, ok ? kNaN : witness, std::move(detail)});
  };

  const double lo = rs.alpha() * rs.k_low();
  const double hi = rs.alpha() * rs.k_high();
  const double span = hi - lo;

  if (const auto* tab = std::get_if<Tabulated>(&rs.family())) {
    double witness = kNaN;
    for (std::size_t i = 1; i < tab->knots.size(); ++i) {
      if (!(tab->knots[i].value > tab->knots[i - 1].value)) {
        witness = tab->knots[i - 1].x;
        break;
      }
    }
    add("knots_monotone", std::isnan(witness), witness,
        "tabulated values must increase strictly from knot to knot");
  }

  {
    double witness = kNaN;
    for (std::size_t i = 1; i < probe_grid.size(); ++i) {
      if (probe_grid[i] == probe_grid[i - 1]) continue;
      const double a = rs(probe_grid[i - 1]);
      const double b = rs(probe_grid[i]);
      // Ties are rounding once h has saturated to a bound in double precision.
      const double slack = 4.0 * std::numeric_limits<double>::epsilon() * (hi - lo + std::abs(lo) + std::abs(hi));
      const bool saturated = (b == a) && (b - lo <= slack || hi - b <= slack) && !rs.is_degenerate();
      if (!(b > a) && !saturated) {
        witness = probe_grid[i - 1];
        break;
      }
    }
    add("strictly_increasing", std::isnan(witness), witness,
        "h(x[i+1]) > h(x[i]) on the probe grid");
  }

  {
    double witness = kNaN;
    for (double x : probe_grid) {
      const double v = rs(x);
      if (!(v >= lo && v <= hi)) {
        witness = x;
        break;
      }
    }
    add("bounded", std::isnan(witness), witness,
        "alpha*k <= h(x) <= alpha*K on the probe grid");
  }

  const double r = rs.probe_radius();
  const double limit_tol = 1e-8 * span;
  add("limit_low", std::abs(rs(-r) - lo) <= limit_tol, -r,
      "h(x) -> alpha*k as x -> -infinity");
  add("limit_high", std::abs(rs(r) - hi) <= limit_tol, r,
      "h(x) -> alpha*K as x -> +infinity");
  {
    const bool left = std::abs(rs.derivative(-r)) <= limit_tol;
    const bool right = std::abs(rs.derivative(r)) <= limit_tol;
    add("derivative_decay", left && right, left ? r : -r,
        "|h'(x)| -> 0 as |x| -> infinity");
  }

  if (std::holds_alternative<Tabulated>(rs.family())) {
    // Bounded h'' is only audited here; the index formulas never use it and
    // no tolerance is prescribed, so the check is finiteness.
    constexpr double step = 1e-4;
    double worst = 0.0;
    double where = kNaN;
    for (double x : probe_grid) {
      const double d2 = (rs(x + step) - 2.0 * rs(x) + rs(x - step)) / (step * step);
      if (!std::isfinite(d2)) {
        where = x;
        worst = d2;
        break;
      }
      worst = std::max(worst, std::abs(d2));
    }
    std::ostringstream os;
    os << "max |h''| on grid = " << worst;
    add("bounded_second_derivative", std::isnan(where), where, os.str());
  }
  return report;
}

}  // namespace gittins
