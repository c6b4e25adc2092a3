#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "gittins/error.hpp"
#include "gittins/sde.hpp"
#include "json.hpp"

using namespace gittins;

namespace {

RewardStructure std_logistic() { return RewardStructure::logistic(1.0, 0.0, 1.0, 1.0); }

std::vector<double> squares(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * v[i];
  return out;
}

double simpson(const std::vector<double>& f, double dx) {
  double sum = f.front() + f.back();
  for (std::size_t i = 1; i + 1 < f.size(); ++i) sum += (i % 2 ? 4.0 : 2.0) * f[i];
  return sum * dx / 3.0;
}

}  // namespace

TEST_CASE("counter-based normals are deterministic and standard") {
  CHECK(counter_normal(7, 1, 3, 5) == counter_normal(7, 1, 3, 5));
  CHECK(counter_normal(7, 1, 3, 5) != counter_normal(7, 1, 3, 6));
  CHECK(counter_normal(7, 1, 3, 5) != counter_normal(8, 1, 3, 5));
  std::vector<double> xs;
  for (std::uint64_t i = 0; i < 200000; ++i) xs.push_back(counter_normal(1, 9, i, 0));
  const SampleStats m = sample_stats(xs);
  const SampleStats v = sample_stats(squares(xs));
  CHECK(std::abs(m.mean) < 4.0 * m.std_error);
  CHECK(std::abs(v.mean - 1.0) < 4.0 * v.std_error);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = counter_uniform(3, 2, i, 1);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("vanishing noise keeps paths at x0") {
  const PathEnsemble e = euler_maruyama(ArmModel::brownian(1e-15), 0.3, 1.0, 0.01, 50, 1);
  CHECK(e.times.front() == 0.0);
  CHECK(e.times.back() == doctest::Approx(1.0));
  for (double v : e.states) CHECK(std::abs(v - 0.3) < 1e-10);
}

TEST_CASE("ensembles start at x0 and are reproducible") {
  const ArmModel m = ArmModel::dmps(1.0, 0.2);
  const PathEnsemble a = euler_maruyama(m, -0.5, 2.0, 0.01, 100, 42);
  const PathEnsemble b = euler_maruyama(m, -0.5, 2.0, 0.01, 100, 42);
  CHECK(a.states == b.states);
  CHECK(a.times == b.times);
  for (std::size_t p = 0; p < a.n_paths; ++p) CHECK(a.at(p, 0) == -0.5);
  CHECK(a.flagged_paths == 0);
  const PathEnsemble c = euler_maruyama(m, -0.5, 2.0, 0.01, 100, 43);
  CHECK(a.states != c.states);
}

TEST_CASE("path count does not change individual paths") {
  const ArmModel m = ArmModel::dmps(1.0, 0.2);
  const PathEnsemble a = euler_maruyama(m, 0.0, 1.0, 0.01, 10, 5);
  const PathEnsemble b = euler_maruyama(m, 0.0, 1.0, 0.01, 30, 5);
  for (std::size_t p = 0; p < 10; ++p) {
    for (std::size_t j = 0; j < a.times.size(); ++j) CHECK(a.at(p, j) == b.at(p, j));
  }
}

TEST_CASE("invalid ensemble requests") {
  CHECK_THROWS_AS(euler_maruyama(ArmModel::brownian(1.0), 0.0, 1.0, 2.0, 10, 1), Error);
  CHECK_THROWS_AS(euler_maruyama(ArmModel::brownian(1.0), 0.0, 1.0, 0.1, 0, 1), Error);
  CHECK_THROWS_AS(transition_density(2, 0.0, 0.0, 0.0, 1.0, 0.2), Error);
}

TEST_CASE("DMPS with zero spread is a martingale") {
  const PathEnsemble e = euler_maruyama(ArmModel::dmps(1.0, 0.0), 0.0, 1.0, 0.01, 10000, 3);
  const SampleStats s = sample_stats(e.column(e.times.size() - 1));
  CHECK(std::abs(s.mean) < 3.0 * s.std_error);
}

TEST_CASE("second moment laws") {
  const std::vector<double> ts = {0.5, 1.0, 2.0};
  const PathEnsemble d = euler_maruyama(ArmModel::dmps(1.0, 0.2), 0.0, 2.0, 1e-3, 20000, 11, ts);
  const PathEnsemble b = euler_maruyama(ArmModel::brownian(1.0), 0.0, 2.0, 1e-2, 20000, 12, ts);
  REQUIRE(d.times.size() == 4);
  for (std::size_t j = 1; j < 4; ++j) {
    const double t = d.times[j];
    const SampleStats m2 = sample_stats(squares(d.column(j)));
    CHECK(std::abs(m2.mean - dmps_second_moment(1.0, 0.2, t)) < 3.0 * m2.std_error);
    const SampleStats m1 = sample_stats(d.column(j));
    CHECK(std::abs(m1.mean) < 3.0 * m1.std_error);
    const SampleStats b2 = sample_stats(squares(b.column(j)));
    CHECK(std::abs(b2.mean - t) < 3.0 * b2.std_error);
  }
  CHECK(dmps_second_moment(1.0, 0.2, 2.0) == doctest::Approx(3.6));
}

TEST_CASE("exact sampler branches") {
  const std::vector<double> s = exact_transition_sample_dmps(0.0, 1.0, 0.2, 1.0, 10000, 5);
  const SampleStats m = sample_stats(s);
  CHECK(std::abs(m.mean) < 3.0 * m.std_error);

  const double a = std::sqrt(2.0 * 0.2);
  const std::vector<double> far = exact_transition_sample_dmps(10.0 / a, 1.0, 0.2, 1.0, 10000, 6);
  std::size_t plus = 0;
  for (double x : far) plus += x > 10.0 / a ? 1 : 0;
  // The + branch shifts the mean by sqrt(2 Gamma) t; the - branch by the same amount down.
  const SampleStats fm = sample_stats(far);
  CHECK(fm.mean - 10.0 / a == doctest::Approx(std::sqrt(2.0 * 0.2)).epsilon(0.05));
  CHECK(plus > 0);

  const std::vector<double> g0 = exact_transition_sample_dmps(1.5, 2.0, 1e-14, 0.5, 20000, 7);
  const SampleStats g = sample_stats(g0);
  const SampleStats g2 = sample_stats(squares(g0));
  CHECK(std::abs(g.mean - 1.5) < 3.0 * g.std_error);
  CHECK(std::abs(g2.mean - (1.5 * 1.5 + 4.0 * 0.5)) < 3.0 * g2.std_error);
}

TEST_CASE("exact sampler agrees with Euler in distribution") {
  const PathEnsemble e = euler_maruyama(ArmModel::dmps(1.0, 0.2), 0.0, 1.0, 1e-3, 10000, 101);
  const std::vector<double> x = exact_transition_sample_dmps(0.0, 1.0, 0.2, 1.0, 10000, 201);
  CHECK(ks_distance(e.column(e.times.size() - 1), x) < 0.02);
}

TEST_CASE("KS distance basics") {
  CHECK(ks_distance({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
  CHECK(ks_distance({0.0, 0.1}, {5.0, 6.0}) == 1.0);
}

TEST_CASE("transition densities") {
  const double sigma = 1.0, gamma = 0.3;
  const double a = std::sqrt(2.0 * gamma) / sigma;
  for (double x : {0.2, 1.0, 3.5}) {
    CHECK(transition_density(2, x, 1.3, 0.0, sigma, gamma) ==
          doctest::Approx(transition_density(2, -x, 1.3, 0.0, sigma, gamma)).epsilon(1e-14));
    const double ratio =
        transition_density(2, x, 1.3, 0.0, sigma, gamma) / transition_density(1, x, 1.3, 0.0, sigma, gamma);
    CHECK(std::abs(ratio / (std::exp(-gamma * 1.3) * std::cosh(a * x)) - 1.0) < 1e-10);
  }
  for (int arm : {1, 2}) {
    for (double t : {0.5, 1.0, 2.0}) {
      for (double x0 : {-1.0, 0.0, 1.5}) {
        const double half = 12.0 * sigma * std::sqrt(t) + 2.0 * sigma * std::sqrt(2.0 * gamma) * t;
        const std::vector<double> xs = linspace(x0 - half, x0 + half, 20001);
        std::vector<double> f;
        for (double x : xs) f.push_back(transition_density(arm, x, t, x0, sigma, gamma));
        CHECK(std::abs(simpson(f, xs[1] - xs[0]) - 1.0) < 1e-6);
      }
    }
  }
}

TEST_CASE("zero reward gives zero estimate") {
  const TabConfig cfg{1.0, 1.0, 0.2, RewardStructure::constant(1.0, 0.0, 1.0, 0.0, Degenerate::Allow)};
  const RewardEstimate r = simulate_tab(cfg, PolicySpec::always_arm2(), 14.0, 0.05, 200, 1);
  CHECK(r.mean == 0.0);
  CHECK(r.std_error == 0.0);
}

TEST_CASE("identical arms give matching static policies") {
  const TabConfig cfg{1.0, 1.0, 0.0, std_logistic()};
  const RewardEstimate a = simulate_tab(cfg, PolicySpec::always_arm1(), 14.0, 0.02, 4000, 9);
  const RewardEstimate b = simulate_tab(cfg, PolicySpec::always_arm2(), 14.0, 0.02, 4000, 10);
  CHECK(std::abs(a.mean - b.mean) < 3.0 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("simulation preconditions") {
  const TabConfig cfg{1.0, 1.0, 0.4, std_logistic()};
  try {
    simulate_tab(cfg, PolicySpec::gittins(), 14.0, 0.05, 10, 1);
    FAIL("expected a configuration error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
  CHECK_THROWS_AS(simulate_tab(cfg, PolicySpec::always_arm1(), 5.0, 0.05, 10, 1), Error);
  CHECK(default_horizon(2.0) == doctest::Approx(7.0));
  CHECK(PolicySpec::fixed_threshold(0.0).name() == "threshold(0)");
}

TEST_CASE("Gittins policy wins the mixed-region tournament") {
  const TabConfig cfg{1.0, 1.0, 0.4, std_logistic()};
  const IndexCurves curves = build_index_curves(cfg);
  CHECK(curves.grid.size() == 2001);
  const double h = default_horizon(1.0);
  const RewardEstimate g = simulate_tab(cfg, PolicySpec::gittins(), h, 0.02, 4000, 17, &curves);
  for (const PolicySpec& p : {PolicySpec::always_arm1(), PolicySpec::always_arm2(),
                              PolicySpec::fixed_threshold(0.0)}) {
    const RewardEstimate r = simulate_tab(cfg, p, h, 0.02, 4000, 17);
    CHECK(g.mean >= r.mean - 2.0 * g.std_error);
  }
}

TEST_CASE("tournament JSON and ensemble CSV") {
  const RewardEstimate r{"always1", 0.5, 0.01, 100, 14.0, 0.01, 3};
  const auto j = nlohmann::json::parse(tournament_json({r}));
  REQUIRE(j.is_array());
  CHECK(j[0]["policy"] == "always1");
  CHECK(j[0]["n_paths"] == 100);
  CHECK(j[0]["seed"] == 3);
  const PathEnsemble e = euler_maruyama(ArmModel::brownian(1.0), 0.0, 0.1, 0.05, 2, 1);
  std::ostringstream os;
  write_ensemble_csv(os, e);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "time,path_id,state");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == static_cast<int>(e.times.size() * 2));
}
