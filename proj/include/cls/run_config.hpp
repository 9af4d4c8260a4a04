#pragma once

// Flat `key = value` run configuration. Every key can also be overridden from the
// command line; serialize() emits all keys in a fixed order and parses back exactly.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cls/analysis.hpp"
#include "cls/problem.hpp"

namespace cls {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ProblemConfig problem;
  Scheme scheme = Scheme::cls;
  std::optional<Scheme> compare;
  std::filesystem::path output_dir = "out";
  Norm norm = Norm::l2;
  double error_time = 0.4;
  double rel_floor = kDefaultRelativeFloor;
  Index reference_n_x = 0;
  SweepParam sweep_param = SweepParam::K;
  std::vector<double> sweep_values;
  /// NaN selects default_slope_band(sweep_param).
  double slope_min = std::numeric_limits<double>::quiet_NaN();
  double slope_max = std::numeric_limits<double>::quiet_NaN();
  int jobs = 1;
  bool write_wpt = false;
  /// solve also writes carleman.mtx, plus h1.mtx, h2.mtx and grad_p.mtx for cls.
  bool dump_operators = false;

  void validate() const;
  std::pair<double, double> slope_band() const;
  SweepSpec sweep_spec() const;
};

/// Every recognised key, in serialization order.
const std::vector<std::string_view>& config_keys();

bool is_boolean_key(std::string_view key);

/// Sets one key from its text form; throws ConfigError naming the key.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Parses config text. Errors carry the 1-based line number.
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::filesystem::path& path);

std::string serialize_config(const RunConfig& config);

/// Value of one key in serialized form.
std::string config_value(const RunConfig& config, std::string_view key);

/// SHA-256 of serialize_config(config).
std::string config_hash(const RunConfig& config);

}  // namespace cls
