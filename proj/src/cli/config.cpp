#include "gittins/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gittins/error.hpp"

namespace gittins::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value,
                      const std::string& why) {
  throw config_error("config: " + key + " = '" + value + "': " + why);
}

double parse_real(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  double v = 0.0;
  const auto r = std::from_chars(b, e, v);
  if (s.empty() || r.ec != std::errc() || r.ptr != e) bad(key, raw, "not a number");
  if (!std::isfinite(v)) bad(key, raw, "must be finite");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    bad(key, raw, "not a non-negative integer");
  }
  return v;
}

struct Check {
  const RunConfig& cfg;

  std::string shown(const std::string& key) const { return cfg.text(key, ""); }

  double positive(const std::string& key, double fallback) const {
    const double v = cfg.real(key, fallback);
    if (!(v > 0.0)) bad(key, shown(key), "must be positive");
    return v;
  }
  double nonneg(const std::string& key, double fallback) const {
    const double v = cfg.real(key, fallback);
    if (!(v >= 0.0)) bad(key, shown(key), "must be non-negative");
    return v;
  }
  std::size_t at_least(const std::string& key, std::size_t fallback,
                       std::size_t min) const {
    const std::size_t v = cfg.count(key, fallback);
    if (v < min) bad(key, shown(key), "must be at least " + std::to_string(min));
    return v;
  }
  std::string choice(const std::string& key, const std::string& fallback,
                     const std::vector<std::string>& allowed) const {
    const std::string v = cfg.text(key, fallback);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
      bad(key, v, "must be one of " + list);
    }
    return v;
  }
  void ordered(const std::string& lo_key, double lo, double hi) const {
    if (!(lo < hi)) bad(lo_key, shown(lo_key), "lower end must be below the upper end");
  }
};

RewardStructure resolve_reward(const RunConfig& cfg, const Check& c) {
  const std::string family =
      c.choice("reward.family", "logistic", {"logistic", "tanh", "tabulated", "constant"});
  const double alpha = c.positive("reward.alpha", 1.0);
  const double k = cfg.real("reward.k", 0.0);
  const double kk = cfg.real("reward.K", 1.0);
  if (!(k < kk)) bad("reward.k", c.shown("reward.k"), "must be below reward.K");
  try {
    if (family == "logistic") {
      return RewardStructure::logistic(alpha, k, kk, c.positive("reward.c", 1.0));
    }
    if (family == "tanh") {
      return RewardStructure::tanh_shifted(alpha, k, kk, c.positive("reward.c", 1.0));
    }
    if (family == "constant") {
      if (!cfg.flag("reward.allow_degenerate", false)) {
        bad("reward.family", family,
            "constant rewards are degenerate; set reward.allow_degenerate = true "
            "(--allow-degenerate)");
      }
      if (!cfg.has("reward.value")) bad("reward.value", "", "required for the constant family");
      return RewardStructure::constant(alpha, k, kk, cfg.real("reward.value", 0.0),
                                       Degenerate::Allow);
    }
    if (!cfg.has("reward.knots")) bad("reward.knots", "", "required for the tabulated family");
    std::vector<Knot> knots;
    for (const std::string& pair : cfg.words("reward.knots", {})) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos) bad("reward.knots", pair, "expected x:value pairs");
      knots.push_back({parse_real("reward.knots", pair.substr(0, colon)),
                       parse_real("reward.knots", pair.substr(colon + 1))});
    }
    return RewardStructure::tabulated(alpha, k, kk, std::move(knots));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw config_error(std::string("config: reward: ") + e.what());
  }
}

PolicySpec parse_policy(const std::string& word) {
  if (word == "gittins") return PolicySpec::gittins();
  if (word == "always1") return PolicySpec::always_arm1();
  if (word == "always2") return PolicySpec::always_arm2();
  if (word.rfind("threshold:", 0) == 0) {
    return PolicySpec::fixed_threshold(parse_real("mc.policies", word.substr(10)));
  }
  bad("mc.policies", word, "expected gittins, always1, always2 or threshold:<x>");
}

}  // namespace

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "reward.family", "reward.alpha", "reward.k", "reward.K", "reward.c",
      "reward.value", "reward.knots", "reward.allow_degenerate",
      "arm1.sigma", "arm1.mu", "arm2.sigma", "arm2.gamma", "regime.allow_unproven",
      "index.engine", "index.model", "doob.p", "doob.q",
      "grid.x_min", "grid.x_max", "grid.n",
      "quad.kind", "quad.nodes", "quad.z_max", "quad.tol",
      "basis.x_min", "basis.x_max", "basis.n",
      "scan.lo", "scan.hi", "scan.n", "scan.tol",
      "phase.raster", "phase.ratio_min", "phase.ratio_max", "phase.ratio_n",
      "phase.g_min", "phase.g_max", "phase.g_n",
      "mc.horizon", "mc.dt", "mc.n_paths", "mc.seed", "mc.x0", "mc.policies",
      "mc.ensemble_path", "mc.ensemble_arm",
      "lattice.dx", "lattice.half_width", "lattice.tol", "lattice.x", "lattice.model",
      "output.path", "output.format"};
  return keys;
}

RunConfig RunConfig::parse(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) {
      throw config_error(where + ": expected key = value, got '" + t + "'");
    }
    const std::string key = trim(t.substr(0, eq));
    if (cfg.has(key)) throw config_error(where + ": duplicate key '" + key + "'");
    try {
      cfg.set(key, trim(t.substr(eq + 1)));
    } catch (const Error& e) {
      throw config_error(where + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void RunConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw config_error("config: --set expects key=value, got '" + assignment + "'");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    throw config_error("config: unknown key '" + key + "'");
  }
  values_[key] = value;
}

double RunConfig::real(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_real(key, it->second);
}

std::size_t RunConfig::count(const std::string& key, std::size_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback
                             : static_cast<std::size_t>(parse_u64(key, it->second));
}

std::uint64_t RunConfig::u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_u64(key, it->second);
}

bool RunConfig::flag(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad(key, v, "expected true or false");
}

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::vector<double> RunConfig::reals(const std::string& key,
                                     const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const std::string& w : split(it->second, ',')) out.push_back(parse_real(key, w));
  if (out.empty()) bad(key, it->second, "expected a comma-separated list");
  return out;
}

std::vector<std::string> RunConfig::words(const std::string& key,
                                          const std::vector<std::string>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> out = split(it->second, ',');
  if (out.empty() || std::any_of(out.begin(), out.end(),
                                 [](const std::string& w) { return w.empty(); })) {
    bad(key, it->second, "expected a comma-separated list");
  }
  return out;
}

TabConfig Settings::tab() const { return {sigma1, sigma2, gamma, rs, regime, rule}; }

Settings resolve(const RunConfig& cfg) {
  const Check c{cfg};

  RewardStructure rs = resolve_reward(cfg, c);
  const double alpha = rs.alpha();

  const std::string quad_kind = c.choice("quad.kind", "laguerre", {"laguerre", "adaptive"});
  const std::size_t nodes = c.at_least("quad.nodes", 64, 1);
  if (nodes > 512) bad("quad.nodes", c.shown("quad.nodes"), "must be at most 512");
  const double z_max = c.positive("quad.z_max", 60.0);
  const double qtol = c.positive("quad.tol", 1e-10);
  const QuadratureRule rule = quad_kind == "laguerre"
                                  ? QuadratureRule::gauss_laguerre(nodes)
                                  : QuadratureRule::adaptive_truncated(z_max, qtol);

  Settings s{std::move(rs), 0.0, 0.0, 0.0, 0.0, Regime::Proven, rule};
  s.sigma1 = c.positive("arm1.sigma", 1.0);
  s.mu1 = cfg.real("arm1.mu", 0.0);
  s.sigma2 = c.positive("arm2.sigma", 1.0);
  s.gamma = c.nonneg("arm2.gamma", 0.4);
  const bool allow_unproven = cfg.flag("regime.allow_unproven", false);
  s.regime = allow_unproven ? Regime::AllowUnproven : Regime::Proven;

  s.engine = c.choice("index.engine", "dmps", {"bm", "drifted", "dmps", "ode-general", "doob"});
  s.model = c.choice("index.model", "dmps", {"brownian", "drifted", "dmps"});
  s.doob = {c.nonneg("doob.p", 0.5), c.nonneg("doob.q", 0.5), s.gamma};
  if (s.engine == "doob" && !(s.gamma > 0.0)) {
    bad("arm2.gamma", c.shown("arm2.gamma"), "the doob engine needs Gamma > 0");
  }
  if (!(s.doob.p_coef + s.doob.q_coef > 0.0)) {
    bad("doob.p", c.shown("doob.p"), "doob.p + doob.q must be positive");
  }

  s.grid = {cfg.real("grid.x_min", -5.0), cfg.real("grid.x_max", 5.0),
            c.at_least("grid.n", 101, 2)};
  c.ordered("grid.x_min", s.grid.x_min, s.grid.x_max);

  s.basis.x_min = cfg.real("basis.x_min", -30.0);
  s.basis.x_max = cfg.real("basis.x_max", 30.0);
  s.basis.n_grid = c.at_least("basis.n", 6001, 100);
  c.ordered("basis.x_min", s.basis.x_min, s.basis.x_max);

  s.scan = {cfg.real("scan.lo", -20.0), cfg.real("scan.hi", 20.0),
            c.at_least("scan.n", 801, 2), c.positive("scan.tol", 1e-8)};
  c.ordered("scan.lo", s.scan.lo, s.scan.hi);

  s.raster = {cfg.flag("phase.raster", false),
              c.positive("phase.ratio_min", 0.2), c.positive("phase.ratio_max", 3.0),
              c.at_least("phase.ratio_n", 21, 1),
              c.nonneg("phase.g_min", 0.0), c.nonneg("phase.g_max", 2.0),
              c.at_least("phase.g_n", 21, 1)};
  if (s.raster.ratio_max < s.raster.ratio_min) {
    bad("phase.ratio_max", c.shown("phase.ratio_max"), "must not be below phase.ratio_min");
  }
  if (s.raster.g_max < s.raster.g_min) {
    bad("phase.g_max", c.shown("phase.g_max"), "must not be below phase.g_min");
  }

  s.mc.horizon = c.positive("mc.horizon", 14.0 / alpha);
  s.mc.dt = c.positive("mc.dt", 0.01);
  s.mc.n_paths = c.at_least("mc.n_paths", 10000, 1);
  s.mc.seed = cfg.u64("mc.seed", 1);
  s.mc.x0 = cfg.real("mc.x0", 0.0);
  if (s.mc.dt > s.mc.horizon) bad("mc.dt", c.shown("mc.dt"), "must not exceed mc.horizon");
  if (!(std::exp(-alpha * s.mc.horizon) < 1e-6)) {
    bad("mc.horizon", c.shown("mc.horizon"),
        "too short: need exp(-alpha * horizon) < 1e-6 (default 14/alpha)");
  }
  for (const std::string& w :
       cfg.words("mc.policies", {"gittins", "always1", "always2", "threshold:0"})) {
    s.mc.policies.push_back(parse_policy(w));
  }
  s.mc.ensemble_path = cfg.text("mc.ensemble_path", "");
  s.mc.ensemble_arm = static_cast<int>(cfg.count("mc.ensemble_arm", 2));
  if (s.mc.ensemble_arm != 1 && s.mc.ensemble_arm != 2) {
    bad("mc.ensemble_arm", c.shown("mc.ensemble_arm"), "must be 1 or 2");
  }

  s.lattice.dx = c.positive("lattice.dx", 0.01);
  s.lattice.half_width = c.positive("lattice.half_width", 15.0);
  if (s.lattice.dx > s.lattice.half_width / 2.0) {
    bad("lattice.dx", c.shown("lattice.dx"), "must be at most lattice.half_width / 2");
  }
  s.lattice.tol = c.positive("lattice.tol", 1e-8);
  s.lattice.xs = cfg.reals("lattice.x", {-2.0, -1.0, 0.0, 1.0, 2.0});
  for (double x : s.lattice.xs) {
    if (!(std::abs(x) <= s.lattice.half_width)) {
      bad("lattice.x", c.shown("lattice.x"), "points must lie inside the lattice");
    }
  }
  s.lattice.model = c.choice("lattice.model", "brownian", {"brownian", "drifted", "dmps"});

  s.output_path = cfg.text("output.path", "-");
  s.format = c.choice("output.format", "csv", {"csv", "json"});

  if (s.engine == "ode-general" || s.engine == "doob") {
    const double span = s.basis.x_max - s.basis.x_min;
    if (s.grid.x_min < s.basis.x_min + 0.1 * span ||
        s.grid.x_max > s.basis.x_max - 0.1 * span) {
      bad("grid.x_min", c.shown("grid.x_min"),
          "grid must lie inside the trusted interior of the basis "
          "(basis range minus 10% at each end)");
    }
  }

  if (!allow_unproven) {
    if (!(s.gamma < alpha / 2.0)) {
      throw regime_error("config: arm2.gamma = " + format_real(s.gamma) +
                         " needs Gamma < alpha/2 = " + format_real(alpha / 2.0) +
                         "; pass --allow-unproven-regime to evaluate anyway");
    }
    if (s.raster.enabled && !(s.raster.g_max < 0.5)) {
      throw regime_error(
          "config: phase.g_max >= 1/2 leaves the proven regime Gamma < alpha/2; "
          "pass --allow-unproven-regime to sweep it");
    }
  }
  return s;
}

}  // namespace gittins::cli
