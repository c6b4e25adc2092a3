#pragma once

// Two-armed problem: arm 1 is Brownian with volatility sigma1, arm 2 is a
// DMPS with volatility sigma2 and spread Gamma, both paid by the same reward.
// The sign of Delta(x) = M2(x) - M1(x) decides which arm the index policy
// engages when both sit at x.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gittins/closed_form.hpp"
#include "gittins/rewards.hpp"

namespace gittins {

struct TabConfig {
  double sigma1;
  double sigma2;
  double gamma;
  RewardStructure rs;
  Regime regime = Regime::Proven;
  QuadratureRule rule = QuadratureRule::standard();

  void validate() const;
  double alpha() const { return rs.alpha(); }
};

double index_difference(const TabConfig& cfg, double x);

/// Delta = rho_- S_- + rho_+ S_+ - rho_0 S_0 written through
/// y(x) = sigma2^2 (B-A)^2 e^{-2Ax} / (2 alpha):
/// rho_0 = 1/alpha, rho_- = rho_0 / (1 + y), rho_+ = y rho_-.
struct DeltaDecomposition {
  double y;
  double rho0;
  double rho_minus;
  double rho_plus;
  double s0;
  double s_minus;
  double s_plus;
  double delta() const {
    return rho_minus * s_minus + rho_plus * s_plus - rho0 * s0;
  }
};

DeltaDecomposition delta_decomposition(const TabConfig& cfg, double x);

/// z(x) = 2 alpha e^{2Ax} / (sigma2^2 (B+A)^2) = 1 / y(x).
double z_function(const TabConfig& cfg, double x);

enum class Region {
  A_always_arm1,
  B1_mixed_low_sigma2,
  B2_mixed_high_sigma2,
  C_always_arm2,
};

const char* region_name(Region r);
bool is_mixed(Region r);

struct PhaseReport {
  Region region;
  double ratio;            // sigma2 / sigma1
  double gamma_over_alpha;
  double lower_bound;      // sqrt(1 + G/alpha) - sqrt(G/alpha)
  double upper_bound;      // sqrt(1 + G/alpha) + sqrt(G/alpha)
  bool boundary_degenerate = false;  // ratio on a boundary curve
  std::optional<double> kappa;       // ((B+A) - B0) / (B0 - (B-A))
  std::optional<double> x1_bound;    // Delta > 0 for every x >= x1
  std::vector<double> thresholds;
};

/// Region from the ratio bands. A ratio equal to a boundary (to 1e-12
/// relative) is placed in the adjacent always-region with
/// boundary_degenerate set. kappa and x1 are filled only when mixed.
PhaseReport classify_phase(const TabConfig& cfg);

struct ThresholdScan {
  std::vector<double> roots;
  bool widened = false;             // the [2 lo, 2 hi] retry ran
  bool x1_checked = false;          // x1 <= hi, so the sample check ran
  bool x1_check_passed = true;
  double x1_min_delta = 0.0;        // smallest Delta over the samples
  std::string note;
};

/// Sign changes of Delta on [lo, hi] (n_scan points, bisection to tol).
/// Outside the mixed region the scan is skipped with a note. In the mixed
/// region an empty scan is retried once on [2 lo, 2 hi], and Delta > 0 is
/// checked at 50 samples of [x1, hi].
ThresholdScan find_thresholds(const TabConfig& cfg, double lo = -20.0,
                              double hi = 20.0, double tol = 1e-8,
                              std::size_t n_scan = 801);

/// Delta(0) by the index quadrature and by the Laplace form
/// (h~(B+A) + h~(B-A)) / (sigma2^2 B) - 2 h~(B0) / (sigma1^2 B0), with
/// h~(s) = int_0^inf h(u) e^{-su} du by adaptive Gauss-Kronrod.
struct OriginDelta {
  double quadrature;
  double laplace_form;
};

OriginDelta delta_at_origin(const TabConfig& cfg);

/// h~(s) for s > 0.
double reward_laplace(const RewardFn& h, double s);

struct RasterCell {
  PhaseReport report;
  std::optional<double> x_plus;   // largest threshold
  std::optional<double> x_minus;  // smallest threshold, when there are two or more
};

/// Sweeps sigma2 = ratio * sigma1 and Gamma = g * alpha over the given
/// axes. Cells with g >= 1/2 are evaluated with Regime::AllowUnproven when
/// allow_unproven is set and rejected otherwise.
std::vector<RasterCell> phase_raster(double sigma1, const RewardStructure& rs,
                                     const std::vector<double>& ratios,
                                     const std::vector<double>& gammas_over_alpha,
                                     bool allow_unproven, double lo = -20.0,
                                     double hi = 20.0, double tol = 1e-8,
                                     std::size_t n_scan = 801);

/// Header ratio,gamma_over_alpha,region,x_plus,x_minus,kappa; undefined
/// fields are empty.
void write_raster_csv(std::ostream& os, const std::vector<RasterCell>& cells);

}  // namespace gittins
