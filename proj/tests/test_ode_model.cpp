#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "cls/carleman.hpp"
#include "cls/ode_model.hpp"

using namespace cls;

namespace {

Eigen::MatrixXd dense(const RealSparse& m) { return Eigen::MatrixXd(m); }

// Interior layout with dx = 1 needs x_length = n_x + 1.
SpatialGrid1D unit_spacing(Index n) { return SpatialGrid1D(static_cast<double>(n + 1), n); }

}  // namespace

TEST_CASE("grid layouts place nodes and ghosts") {
  const SpatialGrid1D interior(1.0, 3);
  CHECK(interior.dx() == doctest::Approx(0.25));
  CHECK(interior.nodes()(0) == doctest::Approx(0.25));
  CHECK(interior.left_ghost() == doctest::Approx(0.0));
  CHECK(interior.right_ghost() == doctest::Approx(1.0));

  const SpatialGrid1D centered(1.0, 4, NodeLayout::cell_centered);
  CHECK(centered.dx() == doctest::Approx(0.25));
  CHECK(centered.nodes()(0) == doctest::Approx(0.125));
  CHECK(centered.left_ghost() == doctest::Approx(-0.125));

  const SpatialGrid1D offset(1.0, 4, NodeLayout::left_offset);
  CHECK(offset.nodes()(3) == doctest::Approx(1.0));
  CHECK(offset.right_ghost() == doctest::Approx(1.25));

  for (const SpatialGrid1D& g : {interior, centered, offset}) {
    for (Index j = 1; j < g.size(); ++j)
      CHECK(g.nodes()(j) - g.nodes()(j - 1) == doctest::Approx(g.dx()).epsilon(1e-12));
  }
  CHECK(parse_node_layout("cell_centered") == NodeLayout::cell_centered);
  CHECK_THROWS_AS(parse_node_layout("staggered"), std::invalid_argument);
  CHECK_THROWS_AS(SpatialGrid1D(1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(SpatialGrid1D(-1.0, 3), std::invalid_argument);
}

TEST_CASE("build_laplacian examples") {
  Eigen::MatrixXd expected(3, 3);
  expected << -2, 1, 0, 1, -2, 1, 0, 1, -2;
  CHECK(dense(build_laplacian(unit_spacing(3))).isApprox(expected, 0.0));
  CHECK(dense(build_laplacian(unit_spacing(1)))(0, 0) == -2.0);
  // n_x = 3 with dx = 0.5
  CHECK(dense(build_laplacian(SpatialGrid1D(2.0, 3))).isApprox(4.0 * expected, 1e-15));
}

TEST_CASE("laplacian is symmetric negative definite") {
  for (Index n : {1, 2, 5, 17}) {
    const Eigen::MatrixXd lap = dense(build_laplacian(SpatialGrid1D(1.0, n)));
    CHECK((lap - lap.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(lap).eigenvalues();
    CHECK(eig.maxCoeff() < 0.0);
  }
}

TEST_CASE("build_polynomial_system examples") {
  SUBCASE("F2 selects diagonal Kronecker columns") {
    const PolynomialSystem s = build_polynomial_system({0.0, 0.0, -1.0}, unit_spacing(2));
    Eigen::MatrixXd f2(2, 4);
    f2 << -1, 0, 0, 0, 0, 0, 0, -1;
    CHECK(dense(s.f2()).isApprox(f2, 0.0));
  }
  SUBCASE("scalar system") {
    const PolynomialSystem s = build_polynomial_system({1.0, 1.0, -1.0}, unit_spacing(1));
    CHECK(dense(s.f1())(0, 0) == -1.0);
    CHECK(dense(s.f2())(0, 0) == -1.0);
  }
  SUBCASE("R = 0 gives an empty F2") {
    const PolynomialSystem s = build_polynomial_system({1.0, 2.0, 0.0}, SpatialGrid1D(1.0, 4));
    CHECK(s.f2().nonZeros() == 0);
    CHECK(s.f2().cols() == 16);
  }
  SUBCASE("F1 = D Laplacian + Q I entrywise") {
    const SpatialGrid1D g(1.0, 6);
    const PolynomialSystem s = build_polynomial_system({0.7, 1.3, -0.4}, g);
    const Eigen::MatrixXd expected =
        0.7 * dense(build_laplacian(g)) + 1.3 * Eigen::MatrixXd::Identity(6, 6);
    CHECK((dense(s.f1()) - expected).cwiseAbs().maxCoeff() == 0.0);
    for (Index j = 0; j < 6; ++j) {
      CHECK(s.f2().row(j).nonZeros() == 1);
      CHECK(s.f2().coeff(j, j * 6 + j) == -0.4);
    }
  }
  CHECK_THROWS_AS(build_polynomial_system({-1.0, 1.0, 1.0}, unit_spacing(2)), std::invalid_argument);
  CHECK_NOTHROW(build_polynomial_system({0.0, 1.0, 1.0}, unit_spacing(2)));
}

TEST_CASE("sample_initial values") {
  // Interior nodes of x_length = 1, n_x = 3 sit at 0.25, 0.5, 0.75.
  const FieldState s = sample_initial(SpatialGrid1D(1.0, 3));
  CHECK(s.time == 0.0);
  CHECK(s.values(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.values(1) == doctest::Approx(1.0).epsilon(1e-15));
  // x = 1.0 is the last node of the left-offset layout.
  const FieldState edge = sample_initial(SpatialGrid1D(1.0, 4, NodeLayout::left_offset));
  CHECK(std::abs(edge.values(3)) < 1e-15);
}

TEST_CASE("eval_nonlinear_rhs examples") {
  const ReactionDiffusionParams logistic{0.0, 1.0, -1.0};
  const SpatialGrid1D one = unit_spacing(1);
  CHECK(eval_nonlinear_rhs({0.0, Eigen::VectorXd::Constant(1, 0.5)}, logistic, one)(0) == 0.25);

  const SpatialGrid1D three = unit_spacing(3);
  CHECK(eval_nonlinear_rhs({0.0, Eigen::VectorXd::Zero(3)}, {1.0, 1.0, -1.0}, three).isZero(0.0));
  const Eigen::VectorXd ones =
      eval_nonlinear_rhs({0.0, Eigen::VectorXd::Ones(3)}, {1.0, 0.0, 0.0}, three);
  CHECK(ones(0) == -1.0);
  CHECK(ones(1) == 0.0);
  CHECK(ones(2) == -1.0);
  CHECK_THROWS_AS(eval_nonlinear_rhs({0.0, Eigen::VectorXd::Ones(2)}, logistic, three),
                  std::invalid_argument);
}

TEST_CASE("direct and Kronecker right-hand sides agree") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 1 + trial % 9;
    const SpatialGrid1D g(1.0, n);
    const ReactionDiffusionParams p{0.5 + 0.5 * (dist(rng) + 1.0), dist(rng), dist(rng)};
    Eigen::VectorXd phi(n);
    for (Index j = 0; j < n; ++j) phi(j) = dist(rng);
    const PolynomialSystem s = build_polynomial_system(p, g);
    const Eigen::VectorXd direct = eval_nonlinear_rhs({0.0, phi}, p, g);
    const Eigen::VectorXd kron_form = s.f1() * phi + s.f2() * kron<double>(phi, phi);
    CHECK((direct - kron_form).norm() <= 1e-13 * std::max(1.0, kron_form.norm()));

    const ReactionDiffusionParams linear{p.diffusion, p.linear_rate, 0.0};
    const Eigen::VectorXd f1_phi = build_polynomial_system(linear, g).f1() * phi;
    CHECK((eval_nonlinear_rhs({0.0, phi}, linear, g) - f1_phi).cwiseAbs().maxCoeff() == 0.0);
  }
}
