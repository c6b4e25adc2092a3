#include "gittins/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "gittins/error.hpp"
#include "gittins/simd/kernels.hpp"
#include "json.hpp"

namespace gittins {
namespace {

constexpr std::uint64_t kEulerStream = 1;
constexpr std::uint64_t kExactStream = 2;
constexpr std::uint64_t kTieStream = 3;
constexpr std::uint64_t kArmStreamBase = 10;

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t counter_key(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t path, std::uint64_t counter) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ stream);
  h = mix64(h ^ path);
  return mix64(h ^ counter);
}

struct NormalPair {
  double first;
  double second;
};

NormalPair normal_pair(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t path, std::uint64_t pair) {
  const double u1 = counter_uniform(seed, stream, path, 2 * pair);
  const double u2 = counter_uniform(seed, stream, path, 2 * pair + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

// log(1 + e^z) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * d * d / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << " must be positive and finite (got " << v << ")";
    throw domain_error(os.str());
  }
}

std::size_t step_count(double horizon, double dt) {
  require_positive(horizon, "horizon");
  require_positive(dt, "dt");
  if (dt > horizon) throw domain_error("dt must not exceed the horizon");
  return static_cast<std::size_t>(std::max(1.0, std::round(horizon / dt)));
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t path, std::uint64_t counter) {
  const std::uint64_t bits = counter_key(seed, stream, path, counter) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double counter_normal(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t path, std::uint64_t step) {
  const NormalPair p = normal_pair(seed, stream, path, step >> 1);
  return (step & 1) ? p.second : p.first;
}

std::vector<double> PathEnsemble::column(std::size_t time_index) const {
  std::vector<double> out(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) out[p] = at(p, time_index);
  return out;
}

PathEnsemble euler_maruyama(const ArmModel& model, double x0, double horizon,
                            double dt, std::size_t n_paths, std::uint64_t seed,
                            const std::vector<double>& snapshot_times) {
  model.validate();
  if (!std::isfinite(x0)) throw domain_error("euler_maruyama: x0 must be finite");
  if (n_paths < 1) throw domain_error("euler_maruyama: need n_paths >= 1");
  const std::size_t n_steps = step_count(horizon, dt);
  const double h = horizon / static_cast<double>(n_steps);

  std::vector<std::size_t> record{0};
  if (snapshot_times.empty()) {
    const std::size_t stride = (n_steps + 999) / 1000;
    for (std::size_t s = stride; s < n_steps; s += stride) record.push_back(s);
    record.push_back(n_steps);
  } else {
    for (double t : snapshot_times) {
      if (!(t >= 0.0) || !(t <= horizon * (1.0 + 1e-12))) {
        std::ostringstream os;
        os << "euler_maruyama: snapshot time " << t << " outside [0, " << horizon << "]";
        throw domain_error(os.str());
      }
      record.push_back(std::min<std::size_t>(
          n_steps, static_cast<std::size_t>(std::round(t / h))));
    }
    std::sort(record.begin(), record.end());
    record.erase(std::unique(record.begin(), record.end()), record.end());
  }

  PathEnsemble ens;
  ens.n_paths = n_paths;
  ens.seed = seed;
  ens.arm_label = model.label;
  for (std::size_t s : record) {
    ens.times.push_back(s == n_steps ? horizon : static_cast<double>(s) * h);
  }
  const std::size_t n_rec = record.size();
  ens.states.assign(n_paths * n_rec, x0);

  std::vector<double> x(n_paths, x0);
  std::vector<double> drift(n_paths);
  std::vector<double> noise(n_paths);
  std::vector<double> noise_odd(n_paths);
  std::vector<char> flagged(n_paths, 0);
  const double scale = model.sigma * std::sqrt(h);
  std::size_t next_rec = 1;
  for (std::size_t s = 0; s < n_steps; ++s) {
    if ((s & 1) == 0) {
      for (std::size_t p = 0; p < n_paths; ++p) {
        const NormalPair np = normal_pair(seed, kEulerStream, p, s >> 1);
        noise[p] = np.first;
        noise_odd[p] = np.second;
      }
    } else {
      noise.swap(noise_odd);
    }
    for (std::size_t p = 0; p < n_paths; ++p) drift[p] = model.drift(x[p]);
    simd::euler_update(x, drift, noise, h, scale);
    for (std::size_t p = 0; p < n_paths; ++p) {
      if (!flagged[p] && !std::isfinite(x[p])) flagged[p] = 1;
    }
    if (next_rec < n_rec && record[next_rec] == s + 1) {
      for (std::size_t p = 0; p < n_paths; ++p) {
        ens.states[p * n_rec + next_rec] =
            flagged[p] ? std::numeric_limits<double>::quiet_NaN() : x[p];
      }
      ++next_rec;
    }
  }
  ens.flagged_paths =
      static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), 1));
  return ens;
}

std::vector<double> exact_transition_sample_dmps(double x0, double sigma,
                                                 double gamma, double t,
                                                 std::size_t n,
                                                 std::uint64_t seed) {
  require_positive(sigma, "sigma");
  require_positive(t, "t");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw domain_error("gamma must be non-negative and finite");
  }
  const double a = std::sqrt(2.0 * gamma) / sigma;
  const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * a * x0));
  const double shift = sigma * sigma * a * t;
  const double sd = sigma * std::sqrt(t);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = counter_uniform(seed, kExactStream, i, 0);
    const double xi = normal_pair(seed, kExactStream, i, 1).first;
    out[i] = x0 + (u < p_plus ? shift : -shift) + sd * xi;
  }
  return out;
}

double transition_density(int arm_id, double x, double t, double x0,
                          double sigma, double gamma) {
  require_positive(t, "t");
  require_positive(sigma, "sigma");
  const double var = sigma * sigma * t;
  if (arm_id == 1) return std::exp(log_normal_pdf(x, x0, var));
  if (arm_id != 2) throw domain_error("transition_density: arm_id must be 1 or 2");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw domain_error("gamma must be non-negative and finite");
  }
  const double a = std::sqrt(2.0 * gamma) / sigma;
  const double shift = sigma * sigma * a * t;
  const double lp = -softplus(-2.0 * a * x0) + log_normal_pdf(x, x0 + shift, var);
  const double lm = -softplus(2.0 * a * x0) + log_normal_pdf(x, x0 - shift, var);
  const double top = std::max(lp, lm);
  return std::exp(top) * (std::exp(lp - top) + std::exp(lm - top));
}

double dmps_second_moment(double sigma, double gamma, double t) {
  return sigma * sigma * t + 2.0 * sigma * sigma * gamma * t * t;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw domain_error("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

SampleStats sample_stats(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) throw domain_error("sample_stats: empty sample");
  const double mean = pairwise_sum(values) / static_cast<double>(n);
  if (n == 1) return {mean, 0.0, 1};
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
  const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

std::string PolicySpec::name() const {
  switch (kind) {
    case Kind::GittinsIndex: return "gittins";
    case Kind::AlwaysArm1: return "always1";
    case Kind::AlwaysArm2: return "always2";
    case Kind::FixedThreshold: return "threshold(" + format_real(threshold) + ")";
  }
  return "?";
}

double IndexCurves::interp(const std::vector<double>& curve, double x) const {
  const double lo = grid.front();
  const double hi = grid.back();
  if (!(x > lo)) return curve.front();
  if (!(x < hi)) return curve.back();
  const double step = (hi - lo) / static_cast<double>(grid.size() - 1);
  const double pos = (x - lo) / step;
  const auto k = std::min(static_cast<std::size_t>(pos), grid.size() - 2);
  const double w = pos - static_cast<double>(k);
  return curve[k] + w * (curve[k + 1] - curve[k]);
}

IndexCurves build_index_curves(const TabConfig& cfg, double lo, double hi,
                               std::size_t n) {
  cfg.validate();
  if (!(lo < hi) || n < 2) throw domain_error("index curves: need lo < hi and n >= 2");
  IndexCurves c;
  c.grid = linspace(lo, hi, n);
  c.arm1.resize(n);
  c.arm2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.arm1[i] = gittins_bm(c.grid[i], cfg.sigma1, cfg.rs, cfg.rule);
    c.arm2[i] = gittins_dmps(c.grid[i], cfg.sigma2, cfg.gamma, cfg.rs, cfg.rule,
                             cfg.regime);
  }
  return c;
}

double default_horizon(double alpha) {
  require_positive(alpha, "alpha");
  return 14.0 / alpha;
}

RewardEstimate simulate_tab(const TabConfig& cfg, const PolicySpec& policy,
                            double horizon, double dt, std::size_t n_paths,
                            std::uint64_t seed, const IndexCurves* curves,
                            double x0) {
  cfg.validate();
  if (n_paths < 1) throw domain_error("simulate_tab: need n_paths >= 1");
  if (!std::isfinite(x0)) throw domain_error("simulate_tab: x0 must be finite");
  const std::size_t n_steps = step_count(horizon, dt);
  const double alpha = cfg.alpha();
  if (!(std::exp(-alpha * horizon) < 1e-6)) {
    std::ostringstream os;
    os << "simulate_tab: horizon " << horizon
       << " too short; need exp(-alpha * horizon) < 1e-6 (default 14/alpha)";
    throw domain_error(os.str());
  }
  if (policy.kind == PolicySpec::Kind::GittinsIndex && curves == nullptr) {
    throw config_error("simulate_tab: the gittins policy needs index curves");
  }
  const double h = horizon / static_cast<double>(n_steps);
  std::vector<double> weight(n_steps);
  for (std::size_t n = 0; n < n_steps; ++n) {
    weight[n] = std::exp(-alpha * static_cast<double>(n) * h) * h;
  }
  const double a2 = std::sqrt(2.0 * cfg.gamma) / cfg.sigma2;
  const double drift2 = cfg.sigma2 * cfg.sigma2 * a2;
  const double scale[2] = {cfg.sigma1 * std::sqrt(h), cfg.sigma2 * std::sqrt(h)};

  std::vector<double> totals(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    double x[2] = {x0, x0};
    std::uint64_t clock[2] = {0, 0};
    double index[2] = {0.0, 0.0};
    if (curves != nullptr) {
      index[0] = curves->interp(curves->arm1, x0);
      index[1] = curves->interp(curves->arm2, x0);
    }
    double total = 0.0;
    for (std::size_t n = 0; n < n_steps; ++n) {
      int arm = 0;
      switch (policy.kind) {
        case PolicySpec::Kind::AlwaysArm1: arm = 0; break;
        case PolicySpec::Kind::AlwaysArm2: arm = 1; break;
        case PolicySpec::Kind::FixedThreshold:
          arm = x[1] >= policy.threshold ? 1 : 0;
          break;
        case PolicySpec::Kind::GittinsIndex:
          if (index[0] == index[1]) {
            arm = counter_uniform(seed, kTieStream, p, n) < 0.5 ? 0 : 1;
          } else {
            arm = index[1] > index[0] ? 1 : 0;
          }
          break;
      }
      total += cfg.rs(x[arm]) * weight[n];
      const double xi = counter_normal(seed, kArmStreamBase + arm, p, clock[arm]);
      const double mu = arm == 0 ? 0.0 : drift2 * std::tanh(a2 * x[arm]);
      x[arm] = x[arm] + (mu * h + scale[arm] * xi);
      ++clock[arm];
      if (curves != nullptr) {
        index[arm] = curves->interp(arm == 0 ? curves->arm1 : curves->arm2, x[arm]);
      }
    }
    totals[p] = total;
  }
  const SampleStats st = sample_stats(totals);
  return {policy.name(), st.mean, st.std_error, n_paths, horizon, dt, seed};
}

void write_ensemble_csv(std::ostream& os, const PathEnsemble& ens) {
  os << "time,path_id,state\n";
  for (std::size_t p = 0; p < ens.n_paths; ++p) {
    for (std::size_t j = 0; j < ens.times.size(); ++j) {
      os << format_real(ens.times[j]) << ',' << p << ',' << format_real(ens.at(p, j))
         << '\n';
    }
  }
}

std::string tournament_json(const std::vector<RewardEstimate>& results) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const RewardEstimate& r : results) {
    arr.push_back({{"policy", r.policy},
                   {"mean", r.mean},
                   {"std_error", r.std_error},
                   {"n_paths", r.n_paths},
                   {"horizon", r.horizon},
                   {"dt", r.dt},
                   {"seed", r.seed}});
  }
  return arr.dump(2);
}

}  // namespace gittins
