#pragma once

// Monte Carlo for the two arms
//   arm 1: dX = sigma1 dW
//   arm 2: dX = sigma2^2 A tanh(A X) dt + sigma2 dW,  A = sqrt(2 Gamma)/sigma2
// and for the two-armed bandit under several engagement policies.
//
// Random numbers are counter based: every normal draw is a pure function of
// (seed, stream, path, step), so results do not depend on evaluation order.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gittins/allocation.hpp"
#include "gittins/doob.hpp"

namespace gittins {

/// Uniform on (0, 1) keyed by (seed, stream, path, counter).
double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t path, std::uint64_t counter);

/// Standard normal keyed by (seed, stream, path, step). Consecutive even/odd
/// steps share one Box-Muller pair.
double counter_normal(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t path, std::uint64_t step);

struct PathEnsemble {
  std::vector<double> times;   // recorded times, first 0, last horizon
  std::vector<double> states;  // n_paths x times.size(), row major
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::string arm_label;
  std::size_t flagged_paths = 0;  // paths that left the finite range

  double at(std::size_t path, std::size_t time_index) const {
    return states[path * times.size() + time_index];
  }
  /// States of every path at one recorded time.
  std::vector<double> column(std::size_t time_index) const;
};

/// x <- x + mu(x) dt + sigma sqrt(dt) xi over round(horizon/dt) equal steps
/// (the step is adjusted to land on the horizon). States are recorded at
/// the steps nearest snapshot_times; with no snapshots given, at most 1001
/// equispaced records including 0 and the horizon.
PathEnsemble euler_maruyama(const ArmModel& model, double x0, double horizon,
                            double dt, std::size_t n_paths, std::uint64_t seed,
                            const std::vector<double>& snapshot_times = {});

/// Exact draws from the arm-2 transition law at time t: branch +-1 with
/// probability e^{+-A x0} / (2 cosh(A x0)), then a normal with mean
/// x0 +- sigma^2 A t and variance sigma^2 t.
std::vector<double> exact_transition_sample_dmps(double x0, double sigma,
                                                 double gamma, double t,
                                                 std::size_t n,
                                                 std::uint64_t seed);

/// Transition density of arm 1 (Gaussian) or arm 2 (two-Gaussian mixture,
/// equal to the Gaussian density times e^{-Gamma t} cosh(Ax)/cosh(Ax0)).
double transition_density(int arm_id, double x, double t, double x0,
                          double sigma, double gamma);

/// E[X_t^2] of arm 2 started at 0: sigma^2 t + 2 sigma^2 Gamma t^2.
double dmps_second_moment(double sigma, double gamma, double t);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::vector<double> a, std::vector<double> b);

struct SampleStats {
  double mean;
  double std_error;
  std::size_t n;
};

/// Mean and standard error with pairwise summation.
SampleStats sample_stats(const std::vector<double>& values);

struct PolicySpec {
  enum class Kind { GittinsIndex, AlwaysArm1, AlwaysArm2, FixedThreshold };
  Kind kind;
  double threshold = 0.0;  // FixedThreshold: engage arm 2 iff X2 >= threshold

  static PolicySpec gittins() { return {Kind::GittinsIndex}; }
  static PolicySpec always_arm1() { return {Kind::AlwaysArm1}; }
  static PolicySpec always_arm2() { return {Kind::AlwaysArm2}; }
  static PolicySpec fixed_threshold(double x) { return {Kind::FixedThreshold, x}; }

  std::string name() const;
};

/// Index curves of both arms on an equispaced grid, read by linear
/// interpolation with clamping at the ends.
struct IndexCurves {
  std::vector<double> grid;
  std::vector<double> arm1;
  std::vector<double> arm2;

  double interp(const std::vector<double>& curve, double x) const;
};

/// 2001 points on [-20, 20] by default.
IndexCurves build_index_curves(const TabConfig& cfg, double lo = -20.0,
                               double hi = 20.0, std::size_t n = 2001);

struct RewardEstimate {
  std::string policy;
  double mean;
  double std_error;
  std::size_t n_paths;
  double horizon;
  double dt;
  std::uint64_t seed;
};

/// Per-step review: the engaged arm pays h(X) e^{-alpha t} dt and moves one
/// Euler step on its own clock; the other arm is frozen. The k-th move of an
/// arm on a path always uses the same normal draw, so policies are compared
/// on common random numbers. Requires e^{-alpha horizon} < 1e-6.
RewardEstimate simulate_tab(const TabConfig& cfg, const PolicySpec& policy,
                            double horizon, double dt, std::size_t n_paths,
                            std::uint64_t seed,
                            const IndexCurves* curves = nullptr, double x0 = 0.0);

/// horizon = 14 / alpha.
double default_horizon(double alpha);

/// time,path_id,state rows.
void write_ensemble_csv(std::ostream& os, const PathEnsemble& ens);

/// JSON array of {policy, mean, std_error, n_paths, horizon, dt, seed}.
std::string tournament_json(const std::vector<RewardEstimate>& results);

}  // namespace gittins
