#include "cls/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>

#include "cls/io.hpp"

namespace cls {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError(std::string(key) + ": invalid value '" + std::string(value) + "' (expected " +
                    std::string(expected) + ")");
}

double to_double(std::string_view key, std::string_view text) {
  const std::string_view v = trim(text);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, text, "a number");
  return out;
}

Index to_index(std::string_view key, std::string_view text) {
  const double v = to_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) bad_value(key, text, "an integer");
  return static_cast<Index>(v);
}

bool to_bool(std::string_view key, std::string_view text) {
  const std::string_view v = trim(text);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, text, "true or false");
}

std::vector<double> to_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  std::string_view rest = trim(text);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    out.push_back(to_double(key, trim(rest.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    rest = trim(rest.substr(comma + 1));
    if (rest.empty()) bad_value(key, text, "a comma-separated list of numbers");
  }
  return out;
}

std::string from_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_shortest(values[i]);
  }
  return out;
}

template <typename Parse>
auto wrap(std::string_view key, std::string_view text, Parse parse) {
  try {
    return parse(std::string(trim(text)));
  } catch (const std::invalid_argument&) {
    throw ConfigError(std::string(key) + ": invalid value '" + std::string(trim(text)) + "'");
  }
}

struct Field {
  std::string_view key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
  bool boolean = false;
};

Field number(std::string_view key, double ProblemConfig::*member) {
  return {key, [=](const RunConfig& c) { return format_shortest(c.problem.*member); },
          [=](RunConfig& c, std::string_view v) { c.problem.*member = to_double(key, v); }};
}

Field count(std::string_view key, Index ProblemConfig::*member) {
  return {key, [=](const RunConfig& c) { return std::to_string(c.problem.*member); },
          [=](RunConfig& c, std::string_view v) { c.problem.*member = to_index(key, v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"D", [](const RunConfig& c) { return format_shortest(c.problem.params.diffusion); },
                 [](RunConfig& c, std::string_view v) { c.problem.params.diffusion = to_double("D", v); }});
    f.push_back({"Q", [](const RunConfig& c) { return format_shortest(c.problem.params.linear_rate); },
                 [](RunConfig& c, std::string_view v) { c.problem.params.linear_rate = to_double("Q", v); }});
    f.push_back({"R", [](const RunConfig& c) { return format_shortest(c.problem.params.quadratic_rate); },
                 [](RunConfig& c, std::string_view v) { c.problem.params.quadratic_rate = to_double("R", v); }});
    f.push_back(number("x_length", &ProblemConfig::x_length));
    f.push_back(count("n_x", &ProblemConfig::n_x));
    f.push_back({"node_layout", [](const RunConfig& c) { return std::string(to_string(c.problem.node_layout)); },
                 [](RunConfig& c, std::string_view v) {
                   c.problem.node_layout = wrap("node_layout", v, [](const std::string& s) { return parse_node_layout(s); });
                 }});
    f.push_back(number("p_left", &ProblemConfig::p_left));
    f.push_back(number("p_right", &ProblemConfig::p_right));
    f.push_back(count("n_p", &ProblemConfig::n_p));
    f.push_back(number("t_end", &ProblemConfig::t_end));
    f.push_back(count("n_t", &ProblemConfig::n_t));
    f.push_back({"K", [](const RunConfig& c) { return std::to_string(c.problem.order); },
                 [](RunConfig& c, std::string_view v) {
                   const Index k = to_index("K", v);
                   if (k < 1 || k > 64) bad_value("K", v, "an integer in [1, 64]");
                   c.problem.order = static_cast<int>(k);
                 }});
    f.push_back({"initial", [](const RunConfig& c) { return std::string(to_string(c.problem.initial)); },
                 [](RunConfig& c, std::string_view v) {
                   c.problem.initial = wrap("initial", v, [](const std::string& s) { return parse_initial_condition(s); });
                 }});
    f.push_back(number("initial_value", &ProblemConfig::initial_value));
    f.push_back({"recovery",
                 [](const RunConfig& c) {
                   return std::string(c.problem.recovery.mode == RecoverySpec::Mode::point ? "point" : "window");
                 },
                 [](RunConfig& c, std::string_view v) {
                   const std::string_view t = trim(v);
                   if (t == "point") c.problem.recovery.mode = RecoverySpec::Mode::point;
                   else if (t == "window") c.problem.recovery.mode = RecoverySpec::Mode::window;
                   else bad_value("recovery", v, "point or window");
                 }});
    f.push_back({"recovery_index",
                 [](const RunConfig& c) {
                   return c.problem.recovery.index ? std::to_string(*c.problem.recovery.index) : std::string("auto");
                 },
                 [](RunConfig& c, std::string_view v) {
                   if (trim(v) == "auto") c.problem.recovery.index.reset();
                   else c.problem.recovery.index = to_index("recovery_index", v);
                 }});
    f.push_back({"recovery_p_min", [](const RunConfig& c) { return format_shortest(c.problem.recovery.p_min); },
                 [](RunConfig& c, std::string_view v) { c.problem.recovery.p_min = to_double("recovery_p_min", v); }});
    f.push_back({"recovery_p_max", [](const RunConfig& c) { return format_shortest(c.problem.recovery.p_max); },
                 [](RunConfig& c, std::string_view v) { c.problem.recovery.p_max = to_double("recovery_p_max", v); }});
    f.push_back({"sample_times", [](const RunConfig& c) { return from_list(c.problem.sample_times); },
                 [](RunConfig& c, std::string_view v) { c.problem.sample_times = to_list("sample_times", v); }});
    f.push_back({"allow_unstable", [](const RunConfig& c) { return std::string(c.problem.allow_unstable ? "true" : "false"); },
                 [](RunConfig& c, std::string_view v) { c.problem.allow_unstable = to_bool("allow_unstable", v); }, true});
    f.push_back(count("check_every", &ProblemConfig::check_every));
    f.push_back(count("symmetric_reduction_above", &ProblemConfig::symmetric_reduction_above));
    f.push_back({"scheme", [](const RunConfig& c) { return std::string(to_string(c.scheme)); },
                 [](RunConfig& c, std::string_view v) {
                   c.scheme = wrap("scheme", v, [](const std::string& s) { return parse_scheme(s); });
                 }});
    f.push_back({"compare",
                 [](const RunConfig& c) { return c.compare ? std::string(to_string(*c.compare)) : std::string("none"); },
                 [](RunConfig& c, std::string_view v) {
                   if (trim(v) == "none") c.compare.reset();
                   else c.compare = wrap("compare", v, [](const std::string& s) { return parse_scheme(s); });
                 }});
    f.push_back({"output_dir", [](const RunConfig& c) { return c.output_dir.string(); },
                 [](RunConfig& c, std::string_view v) {
                   if (trim(v).empty()) bad_value("output_dir", v, "a directory path");
                   c.output_dir = std::string(trim(v));
                 }});
    f.push_back({"norm", [](const RunConfig& c) { return std::string(to_string(c.norm)); },
                 [](RunConfig& c, std::string_view v) {
                   c.norm = wrap("norm", v, [](const std::string& s) { return parse_norm(s); });
                 }});
    f.push_back({"error_time", [](const RunConfig& c) { return format_shortest(c.error_time); },
                 [](RunConfig& c, std::string_view v) { c.error_time = to_double("error_time", v); }});
    f.push_back({"rel_floor", [](const RunConfig& c) { return format_shortest(c.rel_floor); },
                 [](RunConfig& c, std::string_view v) { c.rel_floor = to_double("rel_floor", v); }});
    f.push_back({"reference_n_x", [](const RunConfig& c) { return std::to_string(c.reference_n_x); },
                 [](RunConfig& c, std::string_view v) { c.reference_n_x = to_index("reference_n_x", v); }});
    f.push_back({"sweep_param", [](const RunConfig& c) { return std::string(to_string(c.sweep_param)); },
                 [](RunConfig& c, std::string_view v) {
                   c.sweep_param = wrap("sweep_param", v, [](const std::string& s) { return parse_sweep_param(s); });
                 }});
    f.push_back({"sweep_values", [](const RunConfig& c) { return from_list(c.sweep_values); },
                 [](RunConfig& c, std::string_view v) { c.sweep_values = to_list("sweep_values", v); }});
    f.push_back({"slope_min", [](const RunConfig& c) { return std::isnan(c.slope_min) ? std::string("auto") : format_shortest(c.slope_min); },
                 [](RunConfig& c, std::string_view v) {
                   c.slope_min = trim(v) == "auto" ? std::numeric_limits<double>::quiet_NaN() : to_double("slope_min", v);
                 }});
    f.push_back({"slope_max", [](const RunConfig& c) { return std::isnan(c.slope_max) ? std::string("auto") : format_shortest(c.slope_max); },
                 [](RunConfig& c, std::string_view v) {
                   c.slope_max = trim(v) == "auto" ? std::numeric_limits<double>::quiet_NaN() : to_double("slope_max", v);
                 }});
    f.push_back({"jobs", [](const RunConfig& c) { return std::to_string(c.jobs); },
                 [](RunConfig& c, std::string_view v) {
                   const Index j = to_index("jobs", v);
                   if (j < 1 || j > 1024) bad_value("jobs", v, "an integer in [1, 1024]");
                   c.jobs = static_cast<int>(j);
                 }});
    f.push_back({"write_wpt", [](const RunConfig& c) { return std::string(c.write_wpt ? "true" : "false"); },
                 [](RunConfig& c, std::string_view v) { c.write_wpt = to_bool("write_wpt", v); }, true});
    f.push_back({"dump_operators",
                 [](const RunConfig& c) { return std::string(c.dump_operators ? "true" : "false"); },
                 [](RunConfig& c, std::string_view v) { c.dump_operators = to_bool("dump_operators", v); }, true});
    return f;
  }();
  return table;
}

const Field& field(std::string_view key) {
  for (const Field& f : fields())
    if (f.key == key) return f;
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

}  // namespace

void RunConfig::validate() const {
  try {
    problem.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(rel_floor > 0.0) || !std::isfinite(rel_floor)) throw ConfigError("rel_floor: must be positive");
  if (!std::isfinite(error_time) || error_time < 0.0) throw ConfigError("error_time: must be finite and >= 0");
  if (reference_n_x < 0) throw ConfigError("reference_n_x: must be >= 0");
  if (!std::isnan(slope_min) && !std::isnan(slope_max) && slope_min > slope_max)
    throw ConfigError("slope_min: must not exceed slope_max");
}

std::pair<double, double> RunConfig::slope_band() const {
  const auto [lo, hi] = default_slope_band(sweep_param);
  return {std::isnan(slope_min) ? lo : slope_min, std::isnan(slope_max) ? hi : slope_max};
}

SweepSpec RunConfig::sweep_spec() const {
  SweepSpec spec;
  spec.param = sweep_param;
  spec.values = sweep_values;
  spec.norm = norm;
  spec.error_time = error_time;
  spec.rel_floor = rel_floor;
  spec.reference_n_x = reference_n_x;
  spec.jobs = jobs;
  return spec;
}

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> out;
    for (const Field& f : fields()) out.push_back(f.key);
    return out;
  }();
  return keys;
}

bool is_boolean_key(std::string_view key) { return field(key).boolean; }

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  field(key).set(config, value);
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::set<std::string, std::less<>> seen;
  std::size_t line_number = 0;
  while (!text.empty()) {
    ++line_number;
    const auto newline = text.find('\n');
    std::string_view line = text.substr(0, newline);
    text = newline == std::string_view::npos ? std::string_view{} : text.substr(newline + 1);
    if (line_number == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const std::string prefix = "line " + std::to_string(line_number) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(prefix + "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(prefix + "missing key");
    if (!seen.insert(std::string(key)).second)
      throw ConfigError(prefix + "duplicate key '" + std::string(key) + "'");
    try {
      apply_setting(config, key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(prefix + e.what());
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse_config(read_text_file(path));
}

std::string config_value(const RunConfig& config, std::string_view key) { return field(key).get(config); }

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const Field& f : fields()) out += std::string(f.key) + " = " + f.get(config) + '\n';
  return out;
}

std::string config_hash(const RunConfig& config) { return sha256_hex(serialize_config(config)); }

}  // namespace cls
