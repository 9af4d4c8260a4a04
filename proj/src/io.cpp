#include "cls/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cls {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buffer{};
  const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value,
                                    std::chars_format::general, 17);
  return std::string(buffer.data(), result.ptr);
}

std::string format_shortest(double value) {
  if (!std::isfinite(value)) return format_number(value);
  std::array<char, 64> buffer{};
  const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), result.ptr);
}

std::string trajectory_csv(const Trajectory& trajectory) {
  std::string out = "t,x,value\n";
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    const std::string t = format_number(trajectory.times[i]);
    const Eigen::VectorXd& state = trajectory.states[i];
    for (Index j = 0; j < state.size(); ++j)
      out += t + ',' + format_number(trajectory.nodes(j)) + ',' + format_number(state(j)) + '\n';
  }
  return out;
}

std::string error_field_csv(const ErrorField& field) {
  std::string out = "t,x,abs,rel\n";
  for (std::size_t i = 0; i < field.times.size(); ++i) {
    const std::string t = format_number(field.times[i]);
    const Index row = static_cast<Index>(i);
    for (Index j = 0; j < field.nodes.size(); ++j)
      out += t + ',' + format_number(field.nodes(j)) + ',' + format_number(field.abs_error(row, j)) +
             ',' + format_number(field.rel_error(row, j)) + '\n';
  }
  return out;
}

namespace {

double physical_param(const ConvergenceStudy& study, std::size_t i) {
  return study.param == SweepParam::K ? study.values[i] : study.abscissa[i];
}

}  // namespace

std::string study_csv(const ConvergenceStudy& study, std::string_view config_hash) {
  std::string out = "# config_hash=" + std::string(config_hash) + '\n';
  out += "param,error,slope_fitted\n";
  const Eigen::VectorXd errors = study.errors_at(study.error_time);
  for (std::size_t i = 0; i < study.values.size(); ++i)
    out += format_number(physical_param(study, i)) + ',' +
           format_number(errors(static_cast<Index>(i))) + ',' + format_number(study.fitted_slope) +
           '\n';
  return out;
}

std::string study_times_csv(const ConvergenceStudy& study, std::string_view config_hash) {
  std::string out = "# config_hash=" + std::string(config_hash) + '\n';
  out += "param,t,error,slope_fitted\n";
  for (std::size_t f = 0; f < study.fit_times.size(); ++f) {
    const double t = study.fit_times[f];
    const Eigen::VectorXd errors = study.errors_at(t);
    for (std::size_t i = 0; i < study.values.size(); ++i)
      out += format_number(physical_param(study, i)) + ',' + format_number(t) + ',' +
             format_number(errors(static_cast<Index>(i))) + ',' + format_number(study.fits[f].slope) +
             '\n';
  }
  return out;
}

std::string wpt_field_csv(const Trajectory& trajectory) {
  if (trajectory.wpt_snapshots.size() != trajectory.times.size())
    throw std::invalid_argument("trajectory carries no warped-state snapshots");
  std::string out = "t,x,p,value\n";
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    const std::string t = format_number(trajectory.times[i]);
    const Eigen::MatrixXd& snap = trajectory.wpt_snapshots[i];
    for (Index j = 0; j < snap.cols(); ++j) {
      const std::string x = format_number(trajectory.nodes(j));
      for (Index k = 0; k < snap.rows(); ++k)
        out += t + ',' + x + ',' + format_number(trajectory.p_nodes(k)) + ',' +
               format_number(snap(k, j)) + '\n';
    }
  }
  return out;
}

std::string matrix_market(const RealSparse& matrix) {
  std::string out = "%%MatrixMarket matrix coordinate real general\n";
  out += std::to_string(matrix.rows()) + ' ' + std::to_string(matrix.cols()) + ' ' +
         std::to_string(matrix.nonZeros()) + '\n';
  for (Index r = 0; r < matrix.outerSize(); ++r)
    for (RealSparse::InnerIterator it(matrix, r); it; ++it)
      out += std::to_string(it.row() + 1) + ' ' + std::to_string(it.col() + 1) + ' ' +
             format_number(it.value()) + '\n';
  return out;
}

std::string matrix_market(const ComplexSparse& matrix) {
  std::string out = "%%MatrixMarket matrix coordinate complex general\n";
  out += std::to_string(matrix.rows()) + ' ' + std::to_string(matrix.cols()) + ' ' +
         std::to_string(matrix.nonZeros()) + '\n';
  for (Index r = 0; r < matrix.outerSize(); ++r)
    for (ComplexSparse::InnerIterator it(matrix, r); it; ++it)
      out += std::to_string(it.row() + 1) + ' ' + std::to_string(it.col() + 1) + ' ' +
             format_number(it.value().real()) + ' ' + format_number(it.value().imag()) + '\n';
  return out;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + temp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("failed writing " + temp.string());
  }
  std::filesystem::rename(temp, path);
}

}  // namespace cls
