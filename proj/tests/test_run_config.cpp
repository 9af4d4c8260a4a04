#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "cls/io.hpp"
#include "cls/run_config.hpp"

using namespace cls;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("an empty config carries the reference defaults") {
  const RunConfig c = parse_config("");
  CHECK(c.problem.params.diffusion == 1.0);
  CHECK(c.problem.params.linear_rate == 1.0);
  CHECK(c.problem.params.quadratic_rate == -1.0);
  CHECK(c.problem.x_length == 1.0);
  CHECK(c.problem.n_x == 36);
  CHECK(c.problem.p_left == -20.0);
  CHECK(c.problem.p_right == 20.0);
  CHECK(c.problem.n_p == 256);
  CHECK(c.problem.t_end == 0.4);
  CHECK(c.problem.n_t == 400000);
  CHECK(c.problem.order == 3);
  CHECK(c.problem.time().dt() == doctest::Approx(1e-6).epsilon(1e-15));
  CHECK(c.problem.aux().dp() == 0.15625);
  CHECK(c.scheme == Scheme::cls);
  CHECK_FALSE(c.compare.has_value());
  CHECK(c.slope_band() == std::pair{0.7, 1.3});
}

TEST_CASE("parse_config examples") {
  const RunConfig c = parse_config(
      "\xEF\xBB\xBF# desk run\n"
      "n_x = 12\r\n"
      "K=3   # truncation\n"
      "\n"
      "p_left = -10\n"
      "p_right = 10\n"
      "n_p = 128\n"
      "scheme = cl\n"
      "compare = fdm\n"
      "sample_times = 0.1, 0.4\n"
      "allow_unstable = yes\n"
      "recovery = window\n"
      "recovery_p_min = 0.5\n"
      "recovery_p_max = 2\n"
      "sweep_param = dx\n");
  CHECK(c.problem.n_x == 12);
  CHECK(c.problem.order == 3);
  CHECK(c.problem.n_p == 128);
  CHECK(c.scheme == Scheme::cl);
  CHECK(c.compare == Scheme::fdm);
  CHECK(c.problem.sample_times == std::vector<double>{0.1, 0.4});
  CHECK(c.problem.allow_unstable);
  CHECK(c.problem.recovery.mode == RecoverySpec::Mode::window);
  CHECK(c.problem.recovery.p_max == 2.0);
  CHECK(c.slope_band() == std::pair{1.7, 2.3});
}

TEST_CASE("parse_config rejects bad input with a location") {
  CHECK(error_of("n_x = 0").find("n_x") != std::string::npos);
  CHECK(error_of("p_left = 1").find("p_left") != std::string::npos);
  CHECK(error_of("n_t = 10\nbogus = 3\n") == "line 2: unknown key 'bogus'");
  CHECK(error_of("\n\nn_x 12").starts_with("line 3: "));
  CHECK(error_of("n_x = 12\nn_x = 13").find("duplicate") != std::string::npos);
  CHECK(error_of("n_x = 12.5").find("integer") != std::string::npos);
  CHECK(error_of("D = fast").find("D: invalid value") != std::string::npos);
  CHECK(error_of("D = -1").find("D") != std::string::npos);
  CHECK(error_of("scheme = rk4").find("scheme") != std::string::npos);
  CHECK(error_of("allow_unstable = maybe").find("true or false") != std::string::npos);
  CHECK(error_of("sample_times = 0.1,").find("sample_times") != std::string::npos);
  CHECK(error_of("recovery = window\nrecovery_p_min = 0").find("recovery_p_min") != std::string::npos);
  CHECK(error_of("slope_min = 2\nslope_max = 1").find("slope_min") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("serialize_config round-trips every key") {
  RunConfig c;
  c.problem.params.diffusion = 0.1;
  c.problem.params.quadratic_rate = -0.3;
  c.problem.n_x = 12;
  c.problem.p_left = -10.0;
  c.problem.p_right = 10.0;
  c.problem.t_end = 0.4;
  c.problem.n_t = 12345;
  c.problem.recovery.index = 70;
  c.problem.sample_times = {0.1, 0.2, 0.30000000000000004};
  c.compare = Scheme::fdm;
  c.sweep_param = SweepParam::dp;
  c.sweep_values = {32, 64, 128};
  c.slope_min = 0.5;
  c.write_wpt = true;
  const std::string text = serialize_config(c);
  const RunConfig back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(back.problem.sample_times[2] == 0.30000000000000004);
  CHECK(back.problem.recovery.index == 70);
  CHECK(std::isnan(back.slope_max));
  for (std::string_view key : config_keys()) CHECK(text.find(std::string(key) + " = ") != std::string::npos);
  CHECK(config_value(c, "t_end") == "0.4");
  CHECK(config_value(c, "compare") == "fdm");

  RunConfig other = c;
  apply_setting(other, "n_x", "13");
  CHECK(config_hash(other) != config_hash(c));
  CHECK(is_boolean_key("allow_unstable"));
  CHECK_FALSE(is_boolean_key("n_x"));
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(format_shortest(0.1) == "0.1");
  CHECK(format_shortest(1e-6) == "1e-06");
  std::mt19937_64 rng(89);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = dist(rng) * std::pow(10.0, (i % 40) - 20);
    CHECK(std::stod(format_number(v)) == v);
    CHECK(std::stod(format_shortest(v)) == v);
  }
}

TEST_CASE("CSV writers") {
  Trajectory t;
  t.nodes = Eigen::Vector2d(0.25, 0.5);
  t.times = {0.0, 0.5};
  t.states = {Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(3.0, 4.0)};
  CHECK(trajectory_csv(t) == "t,x,value\n0,0.25,1\n0,0.5,2\n0.5,0.25,3\n0.5,0.5,4\n");
  CHECK_THROWS_AS(wpt_field_csv(t), std::invalid_argument);
  t.p_nodes = Eigen::Vector2d(-1.0, 0.0);
  Eigen::MatrixXd snap(2, 2);
  snap << 1, 2, 3, 4;
  t.wpt_snapshots = {snap, snap};
  CHECK(wpt_field_csv(t).starts_with("t,x,p,value\n0,0.25,-1,1\n0,0.25,0,3\n0,0.5,-1,2\n"));

  ErrorField f;
  f.times = {0.4};
  f.nodes = Eigen::VectorXd::Constant(1, 0.5);
  f.abs_error = Eigen::MatrixXd::Constant(1, 1, 0.25);
  f.rel_error = Eigen::MatrixXd::Constant(1, 1, 0.5);
  CHECK(error_field_csv(f) == "t,x,abs,rel\n0.40000000000000002,0.5,0.25,0.5\n");

  Eigen::MatrixXd errors(3, 2);
  errors << 0, 0.5, 0, 0.25, 0, 0.125;
  const ConvergenceStudy study = make_study(SweepParam::dp, {32, 64, 128}, {1.0, 0.5, 0.25}, {0.0, 0.5},
                                            errors, {}, 0.5);
  CHECK(study_csv(study, "abc") == "# config_hash=abc\nparam,error,slope_fitted\n1,0.5,1\n0.5,0.25,1\n0.25,0.125,1\n");
  CHECK(study_times_csv(study, "abc") ==
        "# config_hash=abc\nparam,t,error,slope_fitted\n1,0.5,0.5,1\n0.5,0.5,0.25,1\n0.25,0.5,0.125,1\n");
}

TEST_CASE("matrix market, digests and atomic writes") {
  RealSparse m(2, 3);
  m.insert(0, 2) = 1.5;
  m.insert(1, 0) = -2.0;
  m.makeCompressed();
  CHECK(matrix_market(m) == "%%MatrixMarket matrix coordinate real general\n2 3 2\n1 3 1.5\n2 1 -2\n");
  ComplexSparse z(2, 2);
  z.insert(1, 1) = Complex(0.5, -1.0);
  z.makeCompressed();
  CHECK(matrix_market(z) == "%%MatrixMarket matrix coordinate complex general\n2 2 1\n2 2 0.5 -1\n");

  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "cls_io_test";
  std::filesystem::remove_all(dir);
  write_file_atomic(dir / "nested" / "a.txt", "hello\n");
  CHECK(read_text_file(dir / "nested" / "a.txt") == "hello\n");
  write_file_atomic(dir / "nested" / "a.txt", "bye\n");
  CHECK(read_text_file(dir / "nested" / "a.txt") == "bye\n");
  CHECK_FALSE(std::filesystem::exists(dir / "nested" / "a.txt.tmp"));
  CHECK_THROWS(read_text_file(dir / "missing.txt"));
  std::filesystem::remove_all(dir);
}
