// cls-solver: command-line front end.
//
//   cls-solver solve [--config FILE] [--scheme fdm|cl|cls] [--compare none|fdm|cl|cls] ...
//   cls-solver sweep --param K|dx|dp --values v1,v2,... [--config FILE] ...
//   cls-solver check [--config FILE] ...
//
// Every config key has a matching flag (underscores become dashes, e.g. --t-end),
// applied after the config file. --replay MANIFEST reruns the config recorded in a
// previous manifest.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "cls/driver.hpp"

namespace {

std::string flag_name(std::string_view key) {
  std::string out(key);
  for (char& c : out)
    if (c == '_') c = '-';
  return "--" + out;
}

struct VerbOptions {
  std::string config_path;
  std::string replay_path;
  std::vector<std::string> settings;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
};

void add_key_options(CLI::App& app, VerbOptions& opts) {
  app.add_option("--config,-c", opts.config_path, "Config file (key = value lines)");
  app.add_option("--replay", opts.replay_path, "Rerun the config recorded in a manifest.json");
  app.add_option("--set", opts.settings, "Override as key=value (repeatable)");
  for (std::string_view key : cls::config_keys()) {
    const std::string k(key);
    if (cls::is_boolean_key(key)) {
      app.add_flag(flag_name(key), opts.flags[k], "Set " + k + " = true");
    } else {
      std::string names = flag_name(key);
      if (key == "sweep_param") names += ",--param";
      if (key == "sweep_values") names += ",--values";
      app.add_option(names, opts.values[k], "Override " + k)->default_str("");
    }
  }
}

cls::RunConfig resolve(const VerbOptions& opts, const CLI::App& app) {
  cls::RunConfig config;
  if (!opts.replay_path.empty() && !opts.config_path.empty())
    throw cls::ConfigError("--config and --replay are mutually exclusive");
  if (!opts.replay_path.empty()) config = cls::config_from_manifest(opts.replay_path);
  if (!opts.config_path.empty()) config = cls::load_config(opts.config_path);
  for (std::string_view key : cls::config_keys()) {
    const std::string k(key);
    if (app.count(flag_name(key)) == 0) continue;
    if (cls::is_boolean_key(key))
      cls::apply_setting(config, key, opts.flags.at(k) ? "true" : "false");
    else
      cls::apply_setting(config, key, opts.values.at(k));
  }
  for (const std::string& s : opts.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw cls::ConfigError("--set expects key=value, got '" + s + "'");
    cls::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Carleman linearization + Schroedingerization solver for 1-D reaction-diffusion"};
  app.require_subcommand(1);
  VerbOptions solve_opts, sweep_opts, check_opts;
  CLI::App* solve = app.add_subcommand("solve", "Run one solver and write its trajectory");
  CLI::App* sweep = app.add_subcommand("sweep", "Run a convergence sweep over K, dx or dp");
  CLI::App* check = app.add_subcommand("check", "Skew-Hermitian and stability checks only");
  add_key_options(*solve, solve_opts);
  add_key_options(*sweep, sweep_opts);
  add_key_options(*check, check_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cls::kExitConfig;
  }

  try {
    if (solve->parsed()) return cls::run_solve(resolve(solve_opts, *solve), std::cout);
    if (sweep->parsed()) return cls::run_sweep(resolve(sweep_opts, *sweep), std::cout);
    return cls::run_check(resolve(check_opts, *check), std::cout);
  } catch (const cls::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cls::kExitConfig;
  } catch (const cls::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return cls::kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return cls::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
