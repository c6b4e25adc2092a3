#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gittins/cli/commands.hpp"
#include "gittins/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gittins indices for diffusion bandit arms"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool allow_unproven = false;
  bool allow_degenerate = false;
  std::string output;
  std::string format;
  std::string suite = "all";

  const std::map<std::string, std::string> help = {
      {"index", "index values on a grid of states"},
      {"delta", "index difference between the two arms"},
      {"phase", "phase region of one configuration or a raster"},
      {"thresholds", "sign changes of the index difference"},
      {"simulate", "Monte Carlo policy tournament"},
      {"oracle", "lattice retirement oracle against the closed forms"},
      {"verify", "self-check suites (identities, oracle, sde, all)"}};
  for (const std::string& name : gittins::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("-c,--config", config_path, "key=value config file");
    sub->add_option("-s,--set", overrides, "override a config key (key=value)");
    sub->add_flag("--allow-unproven-regime", allow_unproven,
                  "evaluate DMPS indices with Gamma >= alpha/2");
    sub->add_flag("--allow-degenerate", allow_degenerate, "admit constant rewards");
    sub->add_option("-o,--output", output, "output file (default stdout)");
    sub->add_option("-f,--format", format, "csv or json");
    if (name == "verify") {
      sub->add_option("--suite", suite, "identities, oracle, sde or all");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  gittins::cli::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = gittins::cli::RunConfig::from_file(config_path);
    for (const std::string& kv : overrides) cfg.set(kv);
    if (allow_unproven) cfg.set("regime.allow_unproven", "true");
    if (allow_degenerate) cfg.set("reward.allow_degenerate", "true");
    if (!output.empty()) cfg.set("output.path", output);
    if (!format.empty()) cfg.set("output.format", format);
  } catch (const gittins::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return gittins::cli::run_command(command, cfg, suite, std::cout, std::cerr);
}
