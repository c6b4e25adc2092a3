#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "gittins/closed_form.hpp"
#include "gittins/doob.hpp"
#include "gittins/error.hpp"

using namespace gittins;

namespace {

const QuadratureRule& rule() {
  static const QuadratureRule r = QuadratureRule::standard();
  return r;
}

RewardStructure std_logistic() { return RewardStructure::logistic(1.0, 0.0, 1.0, 1.0); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Largest relative deviation of f(x)/g(x) from its value at x = 0.
template <class F, class G>
double ratio_spread(const std::vector<double>& xs, F f, G g) {
  const double c = f(0.0) / g(0.0);
  double worst = 0.0;
  for (double x : xs) worst = std::max(worst, std::abs(f(x) / g(x) / c - 1.0));
  return worst;
}

struct DoobSetup {
  ArmModel base;
  DoobFactorSpec spec;
  double alpha;
  OdeBasis basis_sum;
  OdeBasis basis_gamma;
  ArmModel modified;
  OdeBasis modified_basis;

  DoobSetup(double sigma, double p, double q, double gamma, double a)
      : base(ArmModel::brownian(sigma)),
        spec{p, q, gamma},
        alpha(a),
        basis_sum(solve_basis(base, a + gamma)),
        basis_gamma(solve_basis(base, gamma)),
        modified(doob_modified_model(base, spec, basis_gamma)),
        modified_basis(solve_basis(modified, a)) {}
};

}  // namespace

TEST_CASE("Brownian basis is exponential") {
  const OdeBasis b = solve_basis(ArmModel::brownian(1.0), 0.5);
  CHECK(b.worst_residual() < 1e-6);
  for (double x : linspace(-20.0, 20.0, 81)) {
    CHECK(std::abs(std::exp(b.log_phi_at(x) + x) / std::exp(b.log_phi_at(0.0)) - 1.0) < 1e-6);
    CHECK(std::abs(std::exp(b.log_eta_at(x) - x) / std::exp(b.log_eta_at(0.0)) - 1.0) < 1e-6);
  }
}

TEST_CASE("Brownian Wronskian is constant") {
  const OdeBasis b = solve_basis(ArmModel::brownian(1.0), 0.5);
  const double w0 = b.log_wronskian_at(0.0) - b.log_phi_at(0.0) - b.log_eta_at(0.0);
  for (double x : linspace(-20.0, 20.0, 81)) {
    CHECK(std::abs(std::expm1(b.log_wronskian_at(x) - w0)) < 1e-8);
  }
  // 2 sqrt(2 alpha) / sigma with phi(0) = eta(0) = 1.
  CHECK(std::exp(w0) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("basis decays toward the opposite ends") {
  const OdeBasis b = solve_basis(ArmModel::dmps(1.0, 0.4), 1.0);
  const std::vector<double> phi = b.phi_vals();
  const std::vector<double> eta = b.eta_vals();
  const std::size_t mid = b.size() / 2;
  const std::size_t edge = b.size() / 20;
  CHECK(phi[b.size() - 1 - edge] < phi[mid]);
  CHECK(eta[edge] < eta[mid]);
  CHECK(b.grid().front() == -30.0);
  CHECK(b.grid().back() == 30.0);
}

TEST_CASE("DMPS basis matches the transformed exponential") {
  const double sigma = 1.0, gamma = 0.4, alpha = 1.0;
  const DerivedConstants c = derived_constants(sigma, sigma, gamma, alpha);
  const OdeBasis b = solve_basis(ArmModel::dmps(sigma, gamma), alpha);
  const std::vector<double> xs = linspace(-20.0, 20.0, 161);
  CHECK(ratio_spread(
            xs, [&](double x) { return std::exp(b.log_phi_at(x)); },
            [&](double x) { return std::exp(-c.b_const * x) / std::cosh(c.a_const * x); }) <
        1e-5);
  CHECK(ratio_spread(
            xs, [&](double x) { return std::exp(b.log_eta_at(x)); },
            [&](double x) { return std::exp(c.b_const * x) / std::cosh(c.a_const * x); }) <
        1e-5);
}

TEST_CASE("Wronskian engine agrees with closed forms") {
  const RewardStructure rs = std_logistic();
  const ArmModel bm = ArmModel::brownian(1.0);
  const ArmModel dr = ArmModel::drifted(1.0, 1.0);
  const ArmModel dm = ArmModel::dmps(1.0, 0.4);
  const OdeBasis bbm = solve_basis(bm, 1.0);
  const OdeBasis bdr = solve_basis(dr, 1.0);
  const OdeBasis bdm = solve_basis(dm, 1.0);
  CHECK(rel(gittins_wronskian_general(0.0, bm, rs, bbm), gittins_bm(0.0, 1.0, rs, rule())) <
        1e-5);
  for (double x : linspace(-3.0, 3.0, 25)) {
    CHECK(rel(gittins_wronskian_general(x, bm, rs, bbm), gittins_bm(x, 1.0, rs, rule())) < 1e-5);
    CHECK(rel(gittins_wronskian_general(x, dr, rs, bdr),
              gittins_drifted_bm(x, 1.0, 1.0, rs, rule())) < 1e-5);
    CHECK(rel(gittins_wronskian_general(x, dm, rs, bdm),
              gittins_dmps(x, 1.0, 0.4, rs, rule())) < 1e-4);
  }
}

TEST_CASE("constant reward through the general engines") {
  const RewardStructure rs = RewardStructure::constant(1.0, 0.0, 1.0, 0.7, Degenerate::Allow);
  for (const ArmModel& m : {ArmModel::brownian(1.0), ArmModel::drifted(-0.5, 0.8),
                            ArmModel::dmps(1.0, 0.3)}) {
    const OdeBasis b = solve_basis(m, 1.0);
    for (double x : {-4.0, 0.0, 4.0}) {
      CHECK(std::abs(gittins_wronskian_general(x, m, rs, b) - 0.7) < 1e-5);
    }
  }
  const DoobSetup d(1.0, 0.5, 0.5, 0.4, 1.0);
  for (double x : {-4.0, 0.0, 4.0}) {
    CHECK(std::abs(gittins_change_of_measure(x, d.base, d.spec, rs, d.basis_sum,
                                             d.basis_gamma) -
                   0.7) < 1e-5);
  }
}

TEST_CASE("queries outside the trusted interior are domain errors") {
  const ArmModel bm = ArmModel::brownian(1.0);
  const OdeBasis b = solve_basis(bm, 1.0);
  CHECK(b.trusted_lo() == doctest::Approx(-24.0));
  CHECK(b.trusted_hi() == doctest::Approx(24.0));
  try {
    gittins_wronskian_general(25.0, bm, std_logistic(), b);
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
  }
}

TEST_CASE("particular solution") {
  const ArmModel bm = ArmModel::brownian(1.0);
  const OdeBasis b = solve_basis(bm, 1.0);
  const RewardStructure c = RewardStructure::constant(1.0, 0.0, 1.0, 0.6, Degenerate::Allow);
  for (double x : {-3.0, 0.0, 2.0}) CHECK(particular_solution(bm, 1.0, c, b, x) == doctest::Approx(-0.6).epsilon(1e-6));
  const ParticularSolution lin(bm, 1.0, [](double u) { return u; }, b, 1e-4);
  for (double x : {-5.0, -1.5, 0.0, 1.5, 5.0}) CHECK(lin(x) == doctest::Approx(-x).epsilon(1e-6));
  const RewardStructure rs = std_logistic();
  const ParticularSolution p(bm, 1.0, rs.as_function(), b, 1e-4 * (0.0 + 1.0));
  CHECK(p.worst_residual() < 1e-4);
  for (double x : linspace(-5.0, 5.0, 21)) CHECK(std::isfinite(p(x)));
}

TEST_CASE("Doob drift for the canonical factors") {
  const double sigma = 1.3, gamma = 0.4;
  const ArmModel base = ArmModel::brownian(sigma);
  const OdeBasis bg = solve_basis(base, gamma);
  const double a = std::sqrt(2.0 * gamma) / sigma;
  for (double x : linspace(-10.0, 10.0, 41)) {
    CHECK(doob_drift(base, {0.0, 1.0, gamma}, bg, x) ==
          doctest::Approx(sigma * std::sqrt(2.0 * gamma)).epsilon(1e-8));
    CHECK(doob_drift(base, {1.0, 0.0, gamma}, bg, x) ==
          doctest::Approx(-sigma * std::sqrt(2.0 * gamma)).epsilon(1e-8));
    CHECK(std::abs(doob_drift(base, {0.5, 0.5, gamma}, bg, x) -
                   sigma * sigma * a * std::tanh(a * x)) < 1e-8);
  }
}

TEST_CASE("Doob factor spec validation") {
  CHECK_THROWS_AS((DoobFactorSpec{0.0, 0.0, 0.4}.validate()), Error);
  CHECK_THROWS_AS((DoobFactorSpec{-1.0, 1.0, 0.4}.validate()), Error);
  CHECK_THROWS_AS((DoobFactorSpec{0.5, 0.5, 0.0}.validate()), Error);
  CHECK_NOTHROW((DoobFactorSpec{0.5, 0.5, 0.4}.validate()));
}

TEST_CASE("change of measure reproduces the drifted and DMPS closed forms") {
  const RewardStructure rs = std_logistic();
  const DoobSetup drifted(1.0, 0.0, 1.0, 0.5, 1.0);
  const DoobSetup dmps(1.0, 0.5, 0.5, 0.4, 1.0);
  for (double x : linspace(-3.0, 3.0, 13)) {
    CHECK(rel(gittins_change_of_measure(x, drifted.base, drifted.spec, rs, drifted.basis_sum,
                                        drifted.basis_gamma),
              gittins_drifted_bm(x, 1.0, 1.0, rs, rule())) < 1e-4);
    CHECK(rel(gittins_change_of_measure(x, dmps.base, dmps.spec, rs, dmps.basis_sum,
                                        dmps.basis_gamma),
              gittins_dmps(x, 1.0, 0.4, rs, rule())) < 1e-4);
  }
}

TEST_CASE("change of measure equals the direct engine on the modified model") {
  const RewardStructure rs = std_logistic();
  for (double gamma : {0.1, 0.4}) {
    for (auto [p, q] : {std::pair{0.0, 1.0}, std::pair{0.5, 0.5}}) {
      const DoobSetup d(1.0, p, q, gamma, 1.0);
      for (double x : linspace(-3.0, 3.0, 13)) {
        CHECK(rel(gittins_change_of_measure(x, d.base, d.spec, rs, d.basis_sum, d.basis_gamma),
                  gittins_wronskian_general(x, d.modified, rs, d.modified_basis)) < 1e-4);
      }
    }
  }
}

TEST_CASE("transform identities pass for the canonical factors") {
  for (double gamma : {0.1, 0.4}) {
    for (auto [p, q] : {std::pair{0.0, 1.0}, std::pair{0.5, 0.5}}) {
      const DoobSetup d(1.0, p, q, gamma, 1.0);
      const IdentityReport t = verify_basis_transform(d.base, d.spec, d.alpha, d.basis_sum,
                                                      d.basis_gamma, d.modified_basis);
      const IdentityReport w = verify_wronskian_ratios(d.base, d.spec, d.alpha, d.basis_sum,
                                                       d.basis_gamma, d.modified_basis);
      CHECK(t.all_passed());
      CHECK(w.all_passed());
      CHECK(t.checks.size() == 2);
      CHECK(w.checks.size() == 2);
    }
  }
}

TEST_CASE("mismatched Gamma breaks the transform identity") {
  const DoobSetup d(1.0, 0.5, 0.5, 0.4, 1.0);
  const OdeBasis wrong_gamma = solve_basis(d.base, 0.2);
  const IdentityReport t = verify_basis_transform(d.base, d.spec, d.alpha, d.basis_sum,
                                                  wrong_gamma, d.modified_basis);
  CHECK_FALSE(t.all_passed());
}

TEST_CASE("small Gamma collapses the identities") {
  const DoobSetup d(1.0, 0.5, 0.5, 1e-8, 1.0);
  CHECK(verify_basis_transform(d.base, d.spec, d.alpha, d.basis_sum, d.basis_gamma,
                               d.modified_basis)
            .all_passed());
  CHECK(verify_wronskian_ratios(d.base, d.spec, d.alpha, d.basis_sum, d.basis_gamma,
                                d.modified_basis)
            .all_passed());
}

TEST_CASE("Karatzas condition audit") {
  const ConditionReport flat = check_karatzas_condition(ArmModel::brownian(1.0), 1.0, -20, 20, 401);
  CHECK(flat.passed);
  CHECK(flat.min_value == doctest::Approx(1.0));
  const ConditionReport dmps = check_karatzas_condition(ArmModel::dmps(1.0, 0.4), 1.0, -20, 20, 4001);
  CHECK(dmps.passed);
  CHECK(dmps.min_value >= 0.2 - 1e-8);
  const ConditionReport bad = check_karatzas_condition(ArmModel::dmps(1.0, 1.0), 1.0, -20, 20, 4001);
  CHECK_FALSE(bad.passed);
  CHECK(bad.min_value <= 1.0 - 2.0 * 1.0 + 1e-6);
}

TEST_CASE("DMPS condition chain holds pointwise") {
  const double gamma = 0.4, alpha = 1.0;
  const ArmModel base = ArmModel::brownian(1.0);
  const OdeBasis bg = solve_basis(base, gamma);
  const DoobFactorSpec spec{0.5, 0.5, gamma};
  const ConditionReport r = check_doob_drift_condition(base, spec, alpha, bg, -20, 20, 801);
  CHECK(r.passed);
  CHECK(r.min_value >= alpha - 2.0 * gamma - 1e-6);
}

TEST_CASE("refined basis stops once probes settle") {
  const RewardStructure rs = std_logistic();
  const ArmModel m = ArmModel::dmps(1.0, 0.4);
  const OdeBasis b = solve_basis_refined(m, 1.0, rs.as_function(), {-2.0, 0.0, 2.0});
  CHECK(b.size() >= 6001);
  CHECK(rel(gittins_wronskian_general(0.5, m, rs, b), gittins_dmps(0.5, 1.0, 0.4, rs, rule())) <
        1e-5);
}
