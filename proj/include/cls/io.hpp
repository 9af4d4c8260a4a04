#pragma once

// Text artifacts: CSV tables (comma, '.', LF, header row), Matrix Market dumps,
// SHA-256 digests and write-then-rename file output.

#include <filesystem>
#include <string>
#include <string_view>

#include "cls/analysis.hpp"
#include "cls/evolve.hpp"

namespace cls {

/// Shortest round-trip-safe form: 17 significant digits.
std::string format_number(double value);

/// Shortest text that parses back to the same double.
std::string format_shortest(double value);

/// `t,x,value`, one row per sample time per node.
std::string trajectory_csv(const Trajectory& trajectory);

/// `t,x,abs,rel`.
std::string error_field_csv(const ErrorField& field);

/// `param,error,slope_fitted` at the study's error time, preceded by `# config_hash=<hash>`.
/// `param` is K, dx or dp.
std::string study_csv(const ConvergenceStudy& study, std::string_view config_hash);

/// `param,t,error,slope_fitted`, every sample time.
std::string study_times_csv(const ConvergenceStudy& study, std::string_view config_hash);

/// `t,x,p,value`: first-order block of the warped state at each snapshot.
std::string wpt_field_csv(const Trajectory& trajectory);

/// Coordinate-format Matrix Market text (1-based indices).
std::string matrix_market(const RealSparse& matrix);
std::string matrix_market(const ComplexSparse& matrix);

std::string sha256_hex(std::string_view data);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace cls
