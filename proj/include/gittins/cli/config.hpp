#pragma once

// Flat key=value run configuration for the gittins tool.
//
//   # comment
//   reward.family = logistic
//   arm2.gamma    = 0.4
//
// Keys are namespaced; unknown keys, duplicates and malformed lines are
// configuration errors. Values given with --set override the file.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gittins/allocation.hpp"
#include "gittins/doob.hpp"
#include "gittins/sde.hpp"

namespace gittins::cli {

class RunConfig {
 public:
  static RunConfig parse(const std::string& text, const std::string& source = "config");
  static RunConfig from_file(const std::string& path);

  /// "key=value"; replaces any existing value.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  double real(const std::string& key, double fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<double> reals(const std::string& key,
                            const std::vector<double>& fallback) const;
  std::vector<std::string> words(const std::string& key,
                                 const std::vector<std::string>& fallback) const;

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
};

struct GridSettings {
  double x_min;
  double x_max;
  std::size_t n;
};

struct ScanSettings {
  double lo;
  double hi;
  std::size_t n;
  double tol;
};

struct RasterSettings {
  bool enabled;
  double ratio_min, ratio_max;
  std::size_t ratio_n;
  double g_min, g_max;
  std::size_t g_n;
};

struct McSettings {
  double horizon;
  double dt;
  std::size_t n_paths;
  std::uint64_t seed;
  double x0;
  std::vector<PolicySpec> policies;
  std::string ensemble_path;
  int ensemble_arm;
};

struct LatticeSettings {
  double dx;
  double half_width;
  double tol;
  std::vector<double> xs;
  std::string model;  // brownian | drifted | dmps
};

/// Every field of a RunConfig parsed and checked against the preconditions
/// of the module that consumes it.
struct Settings {
  RewardStructure rs;
  double sigma1;
  double mu1;
  double sigma2;
  double gamma;
  Regime regime;
  QuadratureRule rule;
  std::string engine;  // bm | drifted | dmps | ode-general | doob
  std::string model;   // brownian | drifted | dmps (ode-general engine)
  DoobFactorSpec doob;
  GridSettings grid;
  BasisOptions basis;
  ScanSettings scan;
  RasterSettings raster;
  McSettings mc;
  LatticeSettings lattice;
  std::string output_path;
  std::string format;  // csv | json

  TabConfig tab() const;
};

/// Throws config errors naming the key and the violated constraint, or a
/// regime error for Gamma >= alpha/2 without the override.
Settings resolve(const RunConfig& cfg);

}  // namespace gittins::cli
