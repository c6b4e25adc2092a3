#include "gittins/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "gittins/error.hpp"

namespace gittins {
namespace {

bool near(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

void TabConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << name << " must be positive and finite (got " << v << ")";
      throw domain_error(os.str());
    }
  };
  positive(sigma1, "sigma1");
  positive(sigma2, "sigma2");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw domain_error("gamma must be non-negative and finite");
  }
  if (regime == Regime::Proven && !(gamma < rs.alpha() / 2.0)) {
    std::ostringstream os;
    os << "two-armed config requires Gamma < alpha/2 (got Gamma = " << gamma
       << ", alpha = " << rs.alpha() << ")";
    throw regime_error(os.str());
  }
}

double index_difference(const TabConfig& cfg, double x) {
  return gittins_dmps(x, cfg.sigma2, cfg.gamma, cfg.rs, cfg.rule, cfg.regime) -
         gittins_bm(x, cfg.sigma1, cfg.rs, cfg.rule);
}

DeltaDecomposition delta_decomposition(const TabConfig& cfg, double x) {
  cfg.validate();
  const double alpha = cfg.alpha();
  const DerivedConstants k =
      derived_constants(cfg.sigma1, cfg.sigma2, cfg.gamma, alpha);
  const double a = k.a_const;
  const double b = k.b_const;
  const double s2 = cfg.sigma2 * cfg.sigma2;
  const RewardFn h = cfg.rs.as_function();

  DeltaDecomposition d{};
  d.rho0 = 1.0 / alpha;
  const double log_y = std::log(s2 * (b - a) * (b - a) / (2.0 * alpha)) - 2.0 * a * x;
  d.y = std::exp(log_y);
  if (log_y > 0.0) {
    const double inv = std::exp(-log_y);
    d.rho_minus = d.rho0 * inv / (1.0 + inv);
    d.rho_plus = d.rho0 / (1.0 + inv);
  } else {
    d.rho_minus = d.rho0 / (1.0 + d.y);
    d.rho_plus = d.y * d.rho_minus;
  }
  d.s0 = exp_average(h, x, 1.0 / k.b0_const, cfg.rule);
  d.s_minus = exp_average(h, x, 1.0 / (b - a), cfg.rule);
  d.s_plus = exp_average(h, x, 1.0 / (b + a), cfg.rule);
  return d;
}

double z_function(const TabConfig& cfg, double x) {
  const DerivedConstants k =
      derived_constants(cfg.sigma1, cfg.sigma2, cfg.gamma, cfg.alpha());
  const double bp = k.b_const + k.a_const;
  return 2.0 * cfg.alpha() / (cfg.sigma2 * cfg.sigma2 * bp * bp) *
         std::exp(2.0 * k.a_const * x);
}

const char* region_name(Region r) {
  switch (r) {
    case Region::A_always_arm1: return "A";
    case Region::B1_mixed_low_sigma2: return "B1";
    case Region::B2_mixed_high_sigma2: return "B2";
    case Region::C_always_arm2: return "C";
  }
  return "?";
}

bool is_mixed(Region r) {
  return r == Region::B1_mixed_low_sigma2 || r == Region::B2_mixed_high_sigma2;
}

PhaseReport classify_phase(const TabConfig& cfg) {
  cfg.validate();
  const double alpha = cfg.alpha();
  PhaseReport r{};
  r.ratio = cfg.sigma2 / cfg.sigma1;
  r.gamma_over_alpha = cfg.gamma / alpha;
  const double sg = std::sqrt(r.gamma_over_alpha);
  const double s1g = std::sqrt(1.0 + r.gamma_over_alpha);
  r.lower_bound = s1g - sg;
  r.upper_bound = s1g + sg;

  if (near(r.ratio, r.lower_bound)) {
    r.region = Region::A_always_arm1;
    r.boundary_degenerate = true;
  } else if (near(r.ratio, r.upper_bound)) {
    r.region = Region::C_always_arm2;
    r.boundary_degenerate = true;
  } else if (r.ratio < r.lower_bound) {
    r.region = Region::A_always_arm1;
  } else if (r.ratio > r.upper_bound) {
    r.region = Region::C_always_arm2;
  } else {
    r.region = r.ratio <= 1.0 ? Region::B1_mixed_low_sigma2
                              : Region::B2_mixed_high_sigma2;
  }

  if (is_mixed(r.region)) {
    const DerivedConstants k =
        derived_constants(cfg.sigma1, cfg.sigma2, cfg.gamma, alpha);
    const double a = k.a_const;
    const double b = k.b_const;
    const double kappa = ((b + a) - k.b0_const) / (k.b0_const - (b - a));
    r.kappa = kappa;
    const double s2 = cfg.sigma2 * cfg.sigma2;
    r.x1_bound = std::log(s2 * (b - a) * (b - a) * kappa / (2.0 * alpha)) / (2.0 * a);
  }
  return r;
}

ThresholdScan find_thresholds(const TabConfig& cfg, double lo, double hi,
                              double tol, std::size_t n_scan) {
  if (!(lo < hi)) throw domain_error("find_thresholds: need lo < hi");
  const PhaseReport phase = classify_phase(cfg);
  ThresholdScan out;
  if (!is_mixed(phase.region)) {
    out.note = std::string("region ") + region_name(phase.region) +
               " is not mixed; no thresholds expected";
    return out;
  }
  auto delta = [&](double x) { return index_difference(cfg, x); };
  double scan_hi = hi;
  out.roots = find_sign_changes(delta, lo, hi, n_scan, tol);
  if (out.roots.empty()) {
    out.widened = true;
    scan_hi = 2.0 * hi;
    out.roots =
        find_sign_changes(delta, 2.0 * lo, 2.0 * hi, 2 * (n_scan - 1) + 1, tol);
    if (out.roots.empty()) {
      std::ostringstream os;
      os << "no sign change of Delta on [" << 2.0 * lo << ", " << 2.0 * hi
         << "] although the parameters are in the mixed region";
      out.note = os.str();
    }
  }
  const double x1 = *phase.x1_bound;
  if (x1 <= scan_hi) {
    out.x1_checked = true;
    out.x1_min_delta = std::numeric_limits<double>::infinity();
    for (double x : linspace(x1, scan_hi, 50)) {
      const double d = delta(x);
      out.x1_min_delta = std::min(out.x1_min_delta, d);
      if (!(d > 0.0)) out.x1_check_passed = false;
    }
  }
  return out;
}

double reward_laplace(const RewardFn& h, double s) {
  if (!(s > 0.0)) throw domain_error("reward_laplace: need s > 0");
  static const QuadratureRule rule = QuadratureRule::adaptive_truncated(60.0, 1e-14);
  return exp_weighted_integral(rule, [&](double z) { return h(z / s); }) / s;
}

OriginDelta delta_at_origin(const TabConfig& cfg) {
  cfg.validate();
  const DerivedConstants k =
      derived_constants(cfg.sigma1, cfg.sigma2, cfg.gamma, cfg.alpha());
  const RewardFn h = cfg.rs.as_function();
  const double a = k.a_const;
  const double b = k.b_const;
  const double s1 = cfg.sigma1 * cfg.sigma1;
  const double s2 = cfg.sigma2 * cfg.sigma2;
  OriginDelta d{};
  d.quadrature = index_difference(cfg, 0.0);
  d.laplace_form = (reward_laplace(h, b + a) + reward_laplace(h, b - a)) / (s2 * b) -
                   2.0 * reward_laplace(h, k.b0_const) / (s1 * k.b0_const);
  return d;
}

std::vector<RasterCell> phase_raster(double sigma1, const RewardStructure& rs,
                                     const std::vector<double>& ratios,
                                     const std::vector<double>& gammas_over_alpha,
                                     bool allow_unproven, double lo, double hi,
                                     double tol, std::size_t n_scan) {
  std::vector<RasterCell> cells;
  cells.reserve(ratios.size() * gammas_over_alpha.size());
  for (double ratio : ratios) {
    for (double g : gammas_over_alpha) {
      const Regime regime = (g >= 0.5 && allow_unproven) ? Regime::AllowUnproven
                                                         : Regime::Proven;
      const TabConfig cfg{sigma1, ratio * sigma1, g * rs.alpha(), rs, regime};
      RasterCell cell;
      cell.report = classify_phase(cfg);
      if (is_mixed(cell.report.region)) {
        const ThresholdScan scan = find_thresholds(cfg, lo, hi, tol, n_scan);
        cell.report.thresholds = scan.roots;
        if (!scan.roots.empty()) cell.x_plus = scan.roots.back();
        if (scan.roots.size() >= 2) cell.x_minus = scan.roots.front();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void write_raster_csv(std::ostream& os, const std::vector<RasterCell>& cells) {
  auto opt = [](const std::optional<double>& v) {
    return v ? format_real(*v) : std::string();
  };
  os << "ratio,gamma_over_alpha,region,x_plus,x_minus,kappa\n";
  for (const RasterCell& c : cells) {
    os << format_real(c.report.ratio) << ',' << format_real(c.report.gamma_over_alpha)
       << ',' << region_name(c.report.region) << ',' << opt(c.x_plus) << ','
       << opt(c.x_minus) << ',' << opt(c.report.kappa) << '\n';
  }
}

}  // namespace gittins
