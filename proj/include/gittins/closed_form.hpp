#pragma once

// Explicit Gittins indices for Brownian motion, Brownian motion with
// constant drift, and the dynamic mean-preserving spread (DMPS) arm
//   dX = sigma^2 A tanh(A X) dt + sigma dW,   A = sqrt(2 Gamma) / sigma.
//
// Every index is an exponential-weight average of the reward,
//   M(x) = (1/alpha) * integral_0^inf h(x + z * scale) e^{-z} dz,
// or (DMPS) a state-dependent mixture of two such averages.

#include "gittins/numerics.hpp"
#include "gittins/rewards.hpp"

namespace gittins {

/// A = sqrt(2 Gamma)/sigma2, B = sqrt(2 (alpha + Gamma))/sigma2,
/// B0 = sqrt(2 alpha)/sigma1.
struct DerivedConstants {
  double a_const;
  double b_const;
  double b0_const;
};

DerivedConstants derived_constants(double sigma1, double sigma2, double gamma,
                                   double alpha);

/// Allows Gamma >= alpha/2 in the DMPS index, outside the regime where the
/// drift condition alpha - m'(x) > 0 holds for every x.
enum class Regime { Proven, AllowUnproven };

/// (1/alpha) * sum_i w_i h(x + z_i * scale): the shared building block.
double exp_average(const RewardFn& h, double x, double scale,
                   const QuadratureRule& rule);

double gittins_bm(double x, double sigma, double alpha, const RewardFn& h,
                  const QuadratureRule& rule);
double gittins_bm(double x, double sigma, const RewardStructure& rs,
                  const QuadratureRule& rule);

/// beta = (sqrt(mu^2 + 2 alpha sigma^2) - mu) / sigma^2, evaluated without
/// cancellation for large positive mu.
double drifted_rate(double mu, double sigma, double alpha);

double gittins_drifted_bm(double x, double mu, double sigma, double alpha,
                          const RewardFn& h, const QuadratureRule& rule);
double gittins_drifted_bm(double x, double mu, double sigma,
                          const RewardStructure& rs, const QuadratureRule& rule);

/// rho_-(x), rho_+(x) of the DMPS index; rho_- + rho_+ = 1/alpha.
struct DmpsWeights {
  double minus;
  double plus;
};

DmpsWeights dmps_weights(double x, double sigma, double gamma, double alpha);

/// Parts of the DMPS index: M = rho_- S_- + rho_+ S_+.
struct DmpsTerms {
  DmpsWeights rho;
  double s_minus;  // integral h(x + s/(B-A)) e^{-s} ds
  double s_plus;   // integral h(x + s/(B+A)) e^{-s} ds
  double index() const { return rho.minus * s_minus + rho.plus * s_plus; }
};

DmpsTerms dmps_terms(double x, double sigma, double gamma, double alpha,
                     const RewardFn& h, const QuadratureRule& rule,
                     Regime regime = Regime::Proven);

double gittins_dmps(double x, double sigma, double gamma, double alpha,
                    const RewardFn& h, const QuadratureRule& rule,
                    Regime regime = Regime::Proven);
double gittins_dmps(double x, double sigma, double gamma,
                    const RewardStructure& rs, const QuadratureRule& rule,
                    Regime regime = Regime::Proven);

}  // namespace gittins
