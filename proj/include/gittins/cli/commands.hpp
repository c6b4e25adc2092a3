#pragma once

// Subcommands of the gittins tool. Each returns the text of its primary
// output; run_command routes it to output.path (or stdout) and maps
// failures to exit codes: 0 success, 1 validation, 2 numerical failure.

#include <iosfwd>
#include <string>
#include <vector>

#include "gittins/cli/config.hpp"

namespace gittins::cli {

std::string cmd_index(const Settings& s);
std::string cmd_delta(const Settings& s);
std::string cmd_phase(const Settings& s);
std::string cmd_thresholds(const Settings& s);
std::string cmd_simulate(const Settings& s);
std::string cmd_oracle(const Settings& s);

struct AuditCheck {
  std::string name;
  double value;
  double tolerance;
  bool passed;
};

struct AuditReport {
  std::string suite;
  std::vector<AuditCheck> checks;
  bool passed() const;
  std::string to_json() const;
};

/// suite is identities, oracle, sde or all.
AuditReport cmd_verify(const Settings& s, const std::string& suite);

const std::vector<std::string>& command_names();

/// Resolves the config, runs the command and writes its output. Error
/// messages go to err.
int run_command(const std::string& command, const RunConfig& cfg,
                const std::string& suite, std::ostream& out, std::ostream& err);

}  // namespace gittins::cli
