#include "gittins/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gittins/closed_form.hpp"
#include "gittins/error.hpp"
#include "gittins/oracle.hpp"
#include "json.hpp"

namespace gittins::cli {
namespace {

using Json = nlohmann::ordered_json;

Json optional_json(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string csv_rows(const std::string& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  os << header << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << format_real(row[i]);
    }
    os << '\n';
  }
  return os.str();
}

std::string json_rows(const std::vector<std::string>& names,
                      const std::vector<std::vector<double>>& rows) {
  Json arr = Json::array();
  for (const auto& row : rows) {
    Json obj = Json::object();
    for (std::size_t i = 0; i < names.size(); ++i) obj[names[i]] = row[i];
    arr.push_back(obj);
  }
  return arr.dump(2) + "\n";
}

std::string table(const Settings& s, const std::vector<std::string>& names,
                  const std::vector<std::vector<double>>& rows) {
  if (s.format == "json") return json_rows(names, rows);
  std::string header;
  for (const auto& n : names) header += (header.empty() ? "" : ",") + n;
  return csv_rows(header, rows);
}

ArmModel arm_model(const Settings& s, const std::string& name) {
  if (name == "brownian") return ArmModel::brownian(s.sigma1);
  if (name == "drifted") return ArmModel::drifted(s.mu1, s.sigma1);
  return ArmModel::dmps(s.sigma2, s.gamma);
}

double closed_form_for(const Settings& s, const std::string& name, double x) {
  if (name == "brownian") return gittins_bm(x, s.sigma1, s.rs, s.rule);
  if (name == "drifted") return gittins_drifted_bm(x, s.mu1, s.sigma1, s.rs, s.rule);
  return gittins_dmps(x, s.sigma2, s.gamma, s.rs, s.rule, s.regime);
}

Json phase_json(const PhaseReport& r) {
  Json j = Json::object();
  j["region"] = region_name(r.region);
  j["ratio"] = r.ratio;
  j["gamma_over_alpha"] = r.gamma_over_alpha;
  j["lower_bound"] = r.lower_bound;
  j["upper_bound"] = r.upper_bound;
  j["boundary_degenerate"] = r.boundary_degenerate;
  j["kappa"] = optional_json(r.kappa);
  j["x1_bound"] = optional_json(r.x1_bound);
  j["thresholds"] = r.thresholds;
  return j;
}

void add(AuditReport& r, std::string name, double value, double tol, bool passed) {
  r.checks.push_back({std::move(name), value, tol, passed});
}

void verify_identities(const Settings& s, AuditReport& r) {
  if (!(s.gamma > 0.0)) {
    throw config_error("config: arm2.gamma must be positive for the identities suite");
  }
  const double alpha = s.rs.alpha();
  const ArmModel base = ArmModel::brownian(s.sigma2);
  const OdeBasis basis_sum = solve_basis(base, alpha + s.gamma, s.basis);
  const OdeBasis basis_gamma = solve_basis(base, s.gamma, s.basis);
  const RewardFn h = s.rs.as_function();
  for (const auto& [p, q, tag] : {std::tuple{0.0, 1.0, "p0_q1"}, std::tuple{0.5, 0.5, "p_q_half"}}) {
    const DoobFactorSpec spec{p, q, s.gamma};
    const ArmModel modified = doob_modified_model(base, spec, basis_gamma);
    const OdeBasis modified_basis = solve_basis(modified, alpha, s.basis);
    for (const IdentityReport& rep :
         {verify_basis_transform(base, spec, alpha, basis_sum, basis_gamma, modified_basis),
          verify_wronskian_ratios(base, spec, alpha, basis_sum, basis_gamma, modified_basis)}) {
      for (const IdentityCheck& c : rep.checks) {
        add(r, std::string(tag) + "." + c.name, c.max_rel_deviation, c.tol, c.passed);
      }
    }
    double worst = 0.0;
    for (double x : {-2.0, 0.0, 2.0}) {
      const double a = gittins_change_of_measure(x, base, spec, alpha, h, basis_sum, basis_gamma);
      const double b = gittins_wronskian_general(x, modified, alpha, h, modified_basis);
      worst = std::max(worst, std::abs(a - b) / std::abs(b));
    }
    add(r, std::string(tag) + ".change_of_measure_vs_direct", worst, 1e-4, worst < 1e-4);
  }
  double worst_rho = 0.0;
  for (double x : linspace(-10.0, 10.0, 201)) {
    const DmpsWeights w = dmps_weights(x, s.sigma2, s.gamma, alpha);
    worst_rho = std::max(worst_rho, std::abs((w.minus + w.plus) * alpha - 1.0));
  }
  add(r, "rho_normalization", worst_rho, 1e-10, worst_rho < 1e-10);
  const ConditionReport k = check_karatzas_condition(ArmModel::dmps(s.sigma2, s.gamma),
                                                     alpha, -20.0, 20.0, 4001);
  const double floor = alpha - 2.0 * s.gamma - 1e-8;
  add(r, "dmps_karatzas_min", k.min_value, floor, k.min_value >= floor);
}

void verify_oracle(const Settings& s, AuditReport& r) {
  for (const std::string name : {"brownian", "dmps"}) {
    const ArmModel model = arm_model(s, name);
    const LatticeSpec lattice(model, 0.0, s.lattice.half_width, s.lattice.dx);
    for (double x : s.lattice.xs) {
      const double l = lattice_gittins(model, s.rs, lattice, x, s.lattice.tol);
      const double c = closed_form_for(s, name, x);
      const double gap = std::abs(l - c) / std::abs(c);
      add(r, name + ".x=" + format_real(x), gap, 0.01, gap < 0.01);
    }
  }
}

void verify_sde(const Settings& s, AuditReport& r) {
  const ArmModel arm2 = ArmModel::dmps(s.sigma2, s.gamma);
  const std::vector<double> ts = {0.5, 1.0, 2.0};
  const PathEnsemble ens =
      euler_maruyama(arm2, 0.0, 2.0, std::min(s.mc.dt, 1e-3), s.mc.n_paths, s.mc.seed, ts);
  for (std::size_t j = 1; j < ens.times.size(); ++j) {
    const std::vector<double> col = ens.column(j);
    std::vector<double> sq(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) sq[i] = col[i] * col[i];
    const SampleStats m2 = sample_stats(sq);
    const double target = dmps_second_moment(s.sigma2, s.gamma, ens.times[j]);
    const double z2 = std::abs(m2.mean - target) / m2.std_error;
    add(r, "second_moment.t=" + format_real(ens.times[j]), z2, 3.0, z2 <= 3.0);
    const SampleStats m1 = sample_stats(col);
    const double z1 = std::abs(m1.mean) / m1.std_error;
    add(r, "mean.t=" + format_real(ens.times[j]), z1, 3.0, z1 <= 3.0);
  }
  const PathEnsemble e1 =
      euler_maruyama(arm2, 0.0, 1.0, 1e-3, s.mc.n_paths, s.mc.seed + 1, {1.0});
  const double ks = ks_distance(
      e1.column(1), exact_transition_sample_dmps(0.0, s.sigma2, s.gamma, 1.0,
                                                 s.mc.n_paths, s.mc.seed + 2));
  add(r, "ks_exact_vs_euler", ks, 0.02, ks < 0.02);
  for (int arm : {1, 2}) {
    double worst = 0.0;
    for (double t : {0.5, 1.0, 2.0}) {
      for (double x0 : {-1.0, 0.0, 1.0}) {
        const double half = 12.0 * s.sigma2 * std::sqrt(t) +
                            2.0 * s.sigma2 * std::sqrt(2.0 * s.gamma) * t;
        const std::size_t n = 20001;
        const std::vector<double> xs = linspace(x0 - half, x0 + half, n);
        std::vector<double> f(n);
        for (std::size_t i = 0; i < n; ++i) {
          f[i] = transition_density(arm, xs[i], t, x0, arm == 1 ? s.sigma1 : s.sigma2,
                                    s.gamma);
        }
        const double dx = xs[1] - xs[0];
        // Simpson's rule on an even number of intervals.
        double sum = f.front() + f.back();
        for (std::size_t i = 1; i + 1 < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f[i];
        worst = std::max(worst, std::abs(sum * dx / 3.0 - 1.0));
      }
    }
    add(r, "density_normalization.arm" + std::to_string(arm), worst, 1e-6, worst < 1e-6);
  }
}

void write_output(const Settings& s, const std::string& text, std::ostream& out) {
  if (s.output_path.empty() || s.output_path == "-") {
    out << text;
    return;
  }
  std::ofstream f(s.output_path, std::ios::binary);
  if (!f) throw config_error("config: output.path = '" + s.output_path + "': cannot open");
  f << text;
}

}  // namespace

std::string cmd_index(const Settings& s) {
  const std::vector<double> xs = linspace(s.grid.x_min, s.grid.x_max, s.grid.n);
  std::vector<std::vector<double>> rows;
  const double alpha = s.rs.alpha();
  if (s.engine == "ode-general") {
    const ArmModel model = arm_model(s, s.model);
    const OdeBasis basis = solve_basis(model, alpha, s.basis);
    for (double x : xs) rows.push_back({x, gittins_wronskian_general(x, model, s.rs, basis)});
  } else if (s.engine == "doob") {
    const ArmModel base = ArmModel::brownian(s.sigma2);
    const OdeBasis basis_sum = solve_basis(base, alpha + s.gamma, s.basis);
    const OdeBasis basis_gamma = solve_basis(base, s.gamma, s.basis);
    for (double x : xs) {
      rows.push_back({x, gittins_change_of_measure(x, base, s.doob, s.rs, basis_sum,
                                                   basis_gamma)});
    }
  } else {
    const std::string name = s.engine == "bm"        ? "brownian"
                             : s.engine == "drifted" ? "drifted"
                                                     : "dmps";
    for (double x : xs) rows.push_back({x, closed_form_for(s, name, x)});
  }
  return table(s, {"x", "index"}, rows);
}

std::string cmd_delta(const Settings& s) {
  const TabConfig cfg = s.tab();
  cfg.validate();
  std::vector<std::vector<double>> rows;
  for (double x : linspace(s.grid.x_min, s.grid.x_max, s.grid.n)) {
    const double m1 = gittins_bm(x, s.sigma1, s.rs, s.rule);
    const double m2 = gittins_dmps(x, s.sigma2, s.gamma, s.rs, s.rule, s.regime);
    rows.push_back({x, m2 - m1, m1, m2});
  }
  if (s.format == "json") {
    const OriginDelta o = delta_at_origin(cfg);
    Json j = Json::object();
    j["origin"] = {{"quadrature", o.quadrature}, {"laplace_form", o.laplace_form}};
    j["rows"] = Json::parse(json_rows({"x", "delta", "index_arm1", "index_arm2"}, rows));
    return j.dump(2) + "\n";
  }
  return csv_rows("x,delta,index_arm1,index_arm2", rows);
}

std::string cmd_phase(const Settings& s) {
  if (s.raster.enabled) {
    const std::vector<RasterCell> cells = phase_raster(
        s.sigma1, s.rs, linspace(s.raster.ratio_min, s.raster.ratio_max, s.raster.ratio_n),
        linspace(s.raster.g_min, s.raster.g_max, s.raster.g_n),
        s.regime == Regime::AllowUnproven, s.scan.lo, s.scan.hi, s.scan.tol, s.scan.n);
    if (s.format == "json") {
      Json arr = Json::array();
      for (const RasterCell& c : cells) {
        Json j = phase_json(c.report);
        j["x_plus"] = optional_json(c.x_plus);
        j["x_minus"] = optional_json(c.x_minus);
        arr.push_back(j);
      }
      return arr.dump(2) + "\n";
    }
    std::ostringstream os;
    write_raster_csv(os, cells);
    return os.str();
  }
  const TabConfig cfg = s.tab();
  PhaseReport r = classify_phase(cfg);
  if (is_mixed(r.region)) {
    r.thresholds = find_thresholds(cfg, s.scan.lo, s.scan.hi, s.scan.tol, s.scan.n).roots;
  }
  if (s.format == "json") return phase_json(r).dump(2) + "\n";
  std::ostringstream os;
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  os << "ratio,gamma_over_alpha,region,lower_bound,upper_bound,boundary_degenerate,kappa,"
        "x1_bound,n_thresholds\n"
     << format_real(r.ratio) << ',' << format_real(r.gamma_over_alpha) << ','
     << region_name(r.region) << ',' << format_real(r.lower_bound) << ','
     << format_real(r.upper_bound) << ',' << (r.boundary_degenerate ? 1 : 0) << ','
     << opt(r.kappa) << ',' << opt(r.x1_bound) << ',' << r.thresholds.size() << '\n';
  return os.str();
}

std::string cmd_thresholds(const Settings& s) {
  const TabConfig cfg = s.tab();
  const PhaseReport r = classify_phase(cfg);
  const ThresholdScan scan = find_thresholds(cfg, s.scan.lo, s.scan.hi, s.scan.tol, s.scan.n);
  if (s.format == "csv") {
    std::vector<std::vector<double>> rows;
    for (double x : scan.roots) rows.push_back({x, index_difference(cfg, x)});
    return csv_rows("root,delta", rows);
  }
  Json j = Json::object();
  j["region"] = region_name(r.region);
  j["roots"] = scan.roots;
  j["widened"] = scan.widened;
  j["x1_bound"] = optional_json(r.x1_bound);
  j["x1_checked"] = scan.x1_checked;
  j["x1_check_passed"] = scan.x1_check_passed;
  j["x1_min_delta"] = scan.x1_checked ? Json(scan.x1_min_delta) : Json(nullptr);
  j["note"] = scan.note;
  return j.dump(2) + "\n";
}

std::string cmd_simulate(const Settings& s) {
  const TabConfig cfg = s.tab();
  cfg.validate();
  const bool need_curves =
      std::any_of(s.mc.policies.begin(), s.mc.policies.end(), [](const PolicySpec& p) {
        return p.kind == PolicySpec::Kind::GittinsIndex;
      });
  std::optional<IndexCurves> curves;
  if (need_curves) curves = build_index_curves(cfg);
  std::vector<RewardEstimate> results;
  for (const PolicySpec& p : s.mc.policies) {
    results.push_back(simulate_tab(cfg, p, s.mc.horizon, s.mc.dt, s.mc.n_paths, s.mc.seed,
                                   curves ? &*curves : nullptr, s.mc.x0));
  }
  if (!s.mc.ensemble_path.empty()) {
    const ArmModel arm = s.mc.ensemble_arm == 1 ? ArmModel::brownian(s.sigma1)
                                                : ArmModel::dmps(s.sigma2, s.gamma);
    const PathEnsemble ens =
        euler_maruyama(arm, s.mc.x0, s.mc.horizon, s.mc.dt, s.mc.n_paths, s.mc.seed);
    std::ofstream f(s.mc.ensemble_path, std::ios::binary);
    if (!f) {
      throw config_error("config: mc.ensemble_path = '" + s.mc.ensemble_path +
                         "': cannot open");
    }
    write_ensemble_csv(f, ens);
  }
  return tournament_json(results) + "\n";
}

std::string cmd_oracle(const Settings& s) {
  const ArmModel model = arm_model(s, s.lattice.model);
  const LatticeSpec lattice(model, 0.0, s.lattice.half_width, s.lattice.dx);
  std::vector<std::vector<double>> rows;
  for (double x : s.lattice.xs) {
    const double l = lattice_gittins(model, s.rs, lattice, x, s.lattice.tol);
    const double c = closed_form_for(s, s.lattice.model, x);
    rows.push_back({x, l, c, (l - c) / c});
  }
  return table(s, {"x", "lattice", "closed_form", "rel_gap"}, rows);
}

bool AuditReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.passed; });
}

std::string AuditReport::to_json() const {
  Json j = Json::object();
  j["suite"] = suite;
  j["passed"] = passed();
  Json arr = Json::array();
  for (const AuditCheck& c : checks) {
    arr.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance},
                   {"passed", c.passed}});
  }
  j["checks"] = arr;
  return j.dump(2) + "\n";
}

AuditReport cmd_verify(const Settings& s, const std::string& suite) {
  if (suite != "identities" && suite != "oracle" && suite != "sde" && suite != "all") {
    throw config_error("verify: --suite must be identities, oracle, sde or all (got '" +
                       suite + "')");
  }
  AuditReport r;
  r.suite = suite;
  if (suite == "identities" || suite == "all") verify_identities(s, r);
  if (suite == "oracle" || suite == "all") verify_oracle(s, r);
  if (suite == "sde" || suite == "all") verify_sde(s, r);
  return r;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "index", "delta", "phase", "thresholds", "simulate", "oracle", "verify"};
  return names;
}

int run_command(const std::string& command, const RunConfig& cfg,
                const std::string& suite, std::ostream& out, std::ostream& err) {
  try {
    const Settings s = resolve(cfg);
    if (command == "verify") {
      const AuditReport r = cmd_verify(s, suite);
      write_output(s, r.to_json(), out);
      if (!r.passed()) {
        err << "verify: one or more checks failed\n";
        return 2;
      }
      return 0;
    }
    std::string text;
    if (command == "index") text = cmd_index(s);
    else if (command == "delta") text = cmd_delta(s);
    else if (command == "phase") text = cmd_phase(s);
    else if (command == "thresholds") text = cmd_thresholds(s);
    else if (command == "simulate") text = cmd_simulate(s);
    else if (command == "oracle") text = cmd_oracle(s);
    else throw config_error("unknown command '" + command + "'");
    write_output(s, text, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_validation() ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace gittins::cli
