// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gittins/allocation.hpp"
#include "gittins/closed_form.hpp"
#include "gittins/doob.hpp"
#include "gittins/error.hpp"
#include "gittins/oracle.hpp"
#include "gittins/sde.hpp"

using namespace gittins;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

RewardStructure std_logistic() { return RewardStructure::logistic(1.0, 0.0, 1.0, 1.0); }

const QuadratureRule& rule() {
  static const QuadratureRule r = QuadratureRule::standard();
  return r;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::vector<double> squares(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * v[i];
  return out;
}

Outcome constant_reward() {
  const double c = 0.7, alpha = 1.0, target = c / alpha;
  const RewardStructure rs = RewardStructure::constant(alpha, 0.0, 1.0, c, Degenerate::Allow);
  double quad_err = 0.0;
  for (double x : {-3.0, 0.0, 3.0}) {
    quad_err = std::max(quad_err, std::abs(gittins_bm(x, 1.0, rs, rule()) - target));
    quad_err = std::max(quad_err, std::abs(gittins_drifted_bm(x, 0.5, 1.0, rs, rule()) - target));
    quad_err = std::max(quad_err, std::abs(gittins_dmps(x, 1.0, 0.4, rs, rule()) - target));
  }
  for (const ArmModel& m : {ArmModel::brownian(1.0), ArmModel::dmps(1.0, 0.4)}) {
    const OdeBasis b = solve_basis(m, alpha);
    for (double x : {-3.0, 0.0, 3.0}) {
      quad_err = std::max(quad_err, std::abs(gittins_wronskian_general(x, m, rs, b) - target));
    }
  }
  const ArmModel base = ArmModel::brownian(1.0);
  const DoobFactorSpec spec{0.5, 0.5, 0.4};
  const OdeBasis bs = solve_basis(base, alpha + spec.gamma);
  const OdeBasis bg = solve_basis(base, spec.gamma);
  for (double x : {-3.0, 0.0, 3.0}) {
    quad_err = std::max(quad_err,
                        std::abs(gittins_change_of_measure(x, base, spec, rs, bs, bg) - target));
  }
  double lattice_err = 0.0;
  const LatticeSpec l(base, 0.0, 15.0, 0.01);
  for (double x : {-3.0, 0.0, 3.0}) {
    lattice_err = std::max(lattice_err, std::abs(lattice_gittins(base, rs, l, x) - target));
  }
  return {quad_err < 1e-10 && lattice_err < 1e-5,
          fmt("max error: quadrature engines %.2e, lattice %.2e", quad_err, lattice_err)};
}

Outcome zero_spread_reduction() {
  const RewardStructure rs = std_logistic();
  double worst = 0.0;
  for (double x : linspace(-10.0, 10.0, 201)) {
    worst = std::max(worst, std::abs(gittins_dmps(x, 1.0, 0.0, rs, rule()) -
                                     gittins_bm(x, 1.0, rs, rule())));
  }
  return {worst <= 1e-12, fmt("max |dmps - bm| = %.2e on 201 points", worst)};
}

Outcome closed_form_vs_oracle() {
  const RewardStructure rs = std_logistic();
  const ArmModel bm = ArmModel::brownian(1.0);
  const ArmModel dm = ArmModel::dmps(1.0, 0.4);
  const LatticeSpec bm_fine(bm, 0.0, 15.0, 0.01), bm_coarse(bm, 0.0, 15.0, 0.02);
  const LatticeSpec dm_fine(dm, 0.0, 15.0, 0.01), dm_coarse(dm, 0.0, 15.0, 0.02);
  double worst = 0.0;
  bool shrinks = true;
  for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    const double e_bm = gittins_bm(x, 1.0, rs, rule());
    const double e_dm = gittins_dmps(x, 1.0, 0.4, rs, rule());
    const double g_bm = std::abs(lattice_gittins(bm, rs, bm_fine, x) - e_bm) / e_bm;
    const double g_dm = std::abs(lattice_gittins(dm, rs, dm_fine, x) - e_dm) / e_dm;
    const double c_bm = std::abs(lattice_gittins(bm, rs, bm_coarse, x) - e_bm) / e_bm;
    const double c_dm = std::abs(lattice_gittins(dm, rs, dm_coarse, x) - e_dm) / e_dm;
    worst = std::max({worst, g_bm, g_dm});
    shrinks = shrinks && g_bm < c_bm && g_dm < c_dm;
  }
  return {worst < 0.01 && shrinks,
          fmt("max relative gap %.3e at dx=0.01", worst) +
              "; gap shrinks from dx=0.02: " + (shrinks ? "yes" : "no")};
}

Outcome change_of_measure_consistency() {
  const RewardStructure rs = std_logistic();
  const double alpha = 1.0;
  double worst = 0.0;
  for (double gamma : {0.1, 0.4}) {
    for (auto [p, q] : {std::pair{0.0, 1.0}, std::pair{0.5, 0.5}}) {
      const ArmModel base = ArmModel::brownian(1.0);
      const DoobFactorSpec spec{p, q, gamma};
      const OdeBasis bs = solve_basis(base, alpha + gamma);
      const OdeBasis bg = solve_basis(base, gamma);
      const ArmModel modified = doob_modified_model(base, spec, bg);
      const OdeBasis bm = solve_basis(modified, alpha);
      for (double x : linspace(-3.0, 3.0, 25)) {
        const double a = gittins_change_of_measure(x, base, spec, rs, bs, bg);
        const double b = gittins_wronskian_general(x, modified, rs, bm);
        worst = std::max(worst, std::abs(a - b) / std::abs(b));
      }
    }
  }
  return {worst < 1e-4, fmt("max relative difference %.2e over 2 specs x 2 Gammas", worst)};
}

Outcome identity_suites() {
  const double alpha = 1.0;
  double worst = 0.0;
  bool all = true;
  for (double gamma : {0.1, 0.4}) {
    for (auto [p, q] : {std::pair{0.0, 1.0}, std::pair{0.5, 0.5}}) {
      const ArmModel base = ArmModel::brownian(1.0);
      const DoobFactorSpec spec{p, q, gamma};
      const OdeBasis bs = solve_basis(base, alpha + gamma);
      const OdeBasis bg = solve_basis(base, gamma);
      const OdeBasis bm = solve_basis(doob_modified_model(base, spec, bg), alpha);
      for (const IdentityReport& r : {verify_basis_transform(base, spec, alpha, bs, bg, bm, 1e-4),
                                      verify_wronskian_ratios(base, spec, alpha, bs, bg, bm, 1e-4)}) {
        all = all && r.all_passed();
        for (const IdentityCheck& c : r.checks) worst = std::max(worst, c.max_rel_deviation);
      }
    }
  }
  return {all, fmt("max deviation from best-fit scalar %.2e (tolerance %.0e)", worst, 1e-4)};
}

Outcome phase_diagram() {
  const RewardStructure rs = std_logistic();
  const std::vector<double> ratios = linspace(0.2, 3.0, 21);
  const std::vector<double> gs = linspace(0.0, 2.0, 21);
  const std::vector<RasterCell> cells = phase_raster(1.0, rs, ratios, gs, true);
  const std::vector<double> scan = linspace(-20.0, 20.0, 801);
  int failures = 0, n_a = 0, n_c = 0, n_mixed = 0;
  for (const RasterCell& cell : cells) {
    const PhaseReport& r = cell.report;
    TabConfig cfg{1.0, r.ratio, r.gamma_over_alpha * rs.alpha(), rs};
    cfg.regime = r.gamma_over_alpha < 0.5 ? Regime::Proven : Regime::AllowUnproven;
    bool ok = true;
    if (r.region == Region::A_always_arm1) {
      ++n_a;
      for (double x : scan) ok = ok && index_difference(cfg, x) < 0.0;
    } else if (r.region == Region::C_always_arm2) {
      ++n_c;
      for (double x : scan) ok = ok && index_difference(cfg, x) > 0.0;
    } else {
      ++n_mixed;
      ok = cell.x_plus.has_value() && r.x1_bound.has_value();
      if (ok && *r.x1_bound <= 20.0) {
        for (double x : linspace(*r.x1_bound, 20.0, 50)) ok = ok && index_difference(cfg, x) > 0.0;
      }
    }
    if (!ok) ++failures;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu cells (A %d, mixed %d, C %d), %d failing", cells.size(),
                n_a, n_mixed, n_c, failures);
  return {failures == 0, buf};
}

Outcome laplace_identity() {
  const RewardStructure rs = std_logistic();
  const std::vector<TabConfig> cfgs = {{1.0, 1.0, 0.4, rs}, {1.0, 0.6, 0.1, rs},
                                       {1.5, 1.0, 0.3, rs}, {1.0, 2.0, 0.45, rs},
                                       {0.7, 0.9, 0.0, rs}};
  double worst = 0.0;
  for (const TabConfig& cfg : cfgs) {
    const OriginDelta o = delta_at_origin(cfg);
    worst = std::max(worst, std::abs(o.quadrature - o.laplace_form));
  }
  return {worst < 1e-8, fmt("max |quadrature - Laplace form| = %.2e over 5 sets", worst)};
}

Outcome sde_moments() {
  const double sigma = 1.0, gamma = 0.2;
  const ArmModel arm2 = ArmModel::dmps(sigma, gamma);
  const PathEnsemble e =
      euler_maruyama(arm2, 0.0, 2.0, 1e-3, 100000, 20240601, {0.5, 1.0, 2.0});
  bool ok = e.flagged_paths == 0;
  double worst_z2 = 0.0, worst_z1 = 0.0;
  for (std::size_t j = 1; j < e.times.size(); ++j) {
    const std::vector<double> col = e.column(j);
    const SampleStats m2 = sample_stats(squares(col));
    const SampleStats m1 = sample_stats(col);
    const double z2 = std::abs(m2.mean - dmps_second_moment(sigma, gamma, e.times[j])) / m2.std_error;
    const double z1 = std::abs(m1.mean) / m1.std_error;
    worst_z2 = std::max(worst_z2, z2);
    worst_z1 = std::max(worst_z1, z1);
  }
  ok = ok && worst_z2 <= 3.0 && worst_z1 <= 3.0;
  const PathEnsemble k = euler_maruyama(arm2, 0.0, 1.0, 1e-3, 10000, 101);
  const double ks = ks_distance(k.column(k.times.size() - 1),
                                exact_transition_sample_dmps(0.0, sigma, gamma, 1.0, 10000, 201));
  ok = ok && ks < 0.02;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "max |E[X^2] z| = %.2f, max |mean z| = %.2f (limit 3); KS = %.4f (limit 0.02)",
                worst_z2, worst_z1, ks);
  return {ok, buf};
}

Outcome tournament() {
  const TabConfig cfg{1.0, 1.0, 0.4, std_logistic()};
  const IndexCurves curves = build_index_curves(cfg);
  const double horizon = default_horizon(cfg.alpha());
  const std::size_t n = 10000;
  const std::uint64_t seed = 1;
  const RewardEstimate g =
      simulate_tab(cfg, PolicySpec::gittins(), horizon, 0.01, n, seed, &curves);
  bool ok = true;
  std::string detail = fmt("gittins %.4f +- %.4f", g.mean, g.std_error);
  for (const PolicySpec& p : {PolicySpec::always_arm1(), PolicySpec::always_arm2(),
                              PolicySpec::fixed_threshold(0.0)}) {
    const RewardEstimate r = simulate_tab(cfg, p, horizon, 0.01, n, seed);
    ok = ok && g.mean >= r.mean - 2.0 * g.std_error;
    detail += "; " + r.policy + fmt(" %.4f", r.mean);
  }
  return {ok, detail};
}

Outcome karatzas() {
  const ConditionReport r = check_karatzas_condition(ArmModel::dmps(1.0, 0.4), 1.0, -20.0, 20.0, 4001);
  const ConditionReport neg = check_karatzas_condition(ArmModel::dmps(1.0, 1.0), 1.0, -20.0, 20.0, 4001);
  const bool ok = r.passed && r.min_value >= 0.2 - 1e-8 && !neg.passed;
  return {ok, fmt("min(alpha - m') = %.10f at Gamma=0.4; negative control min = %.4f", r.min_value,
                  neg.min_value) +
                  (neg.passed ? " (did not fail)" : " (fails as expected)")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "constant-reward exactness", 10.0, constant_reward},
      {2, "zero-spread reduction", 1.0, zero_spread_reduction},
      {3, "closed form vs lattice oracle", 300.0, closed_form_vs_oracle},
      {4, "change-of-measure consistency", 120.0, change_of_measure_consistency},
      {5, "transform identity suites", 120.0, identity_suites},
      {6, "phase-diagram correctness", 600.0, phase_diagram},
      {7, "Laplace origin identity", 10.0, laplace_identity},
      {8, "SDE moment laws", 300.0, sde_moments},
      {9, "policy tournament", 600.0, tournament},
      {10, "Karatzas-condition audit", 5.0, karatzas},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs < c.budget_s;
    const bool pass = o.passed && in_budget;
    if (!pass) ++failed;
    std::printf("%s [%d] %s: %s (%.2f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id,
                c.name, o.detail.c_str(), secs, c.budget_s, in_budget ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
