#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "ultrafun/dirichlet.hpp"

using namespace ultrafun;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Green function of -u'' on [0,1] with a unit point source at y.
double green_1d(double x, double y) { return (x <= y) ? x * (1.0 - y) : y * (1.0 - x); }

ScalarField sin_pi() {
  return [](std::span<const double> x) { return std::sin(kPi * x[0]); };
}

}  // namespace

TEST_CASE("stiffness of the 1-d sine basis is diagonal (j pi)^2") {
  const BasisSpec spec = BasisSpec::sine_box1(3);
  const QuadratureRule quad = make_quadrature(spec, 2.0);
  const Eigen::MatrixXd a = stiffness(spec, quad);
  for (int j = 1; j <= 3; ++j) {
    CHECK(a(j - 1, j - 1) == doctest::Approx(j * j * kPi * kPi).epsilon(1e-10));
    for (int k = 1; k <= 3; ++k) {
      if (k != j) CHECK(std::abs(a(j - 1, k - 1)) < 1e-10);
    }
  }
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

  // Poincare bound: the smallest Rayleigh quotient stays above pi^2.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  CHECK(es.eigenvalues()[0] >= kPi * kPi - 1e-6);

  CHECK_THROWS_AS(stiffness(BasisSpec::hermite_line(4),
                            make_quadrature(BasisSpec::hermite_line(4), 2.0)),
                  Error);
}

TEST_CASE("smooth classical solution is recovered to rounding") {
  const BasisSpec spec = BasisSpec::sine_box1(32);
  const QuadratureRule quad = make_quadrature(spec, 2.0);
  const Ultrafunction u = solve_level(SourceSpec::smooth(sin_pi()), spec, quad);
  CHECK(std::abs(u.coeffs[0] - 1.0 / (std::sqrt(2.0) * kPi * kPi)) <= 1e-8);
  for (int j = 2; j <= 32; ++j) CHECK(std::abs(u.coeffs[j - 1]) <= 1e-9);

  // Boundary values are classical zeros.
  const double left[1] = {0.0};
  const double right[1] = {1.0};
  CHECK(std::abs(eval(u, left)) < 1e-12);
  CHECK(std::abs(eval(u, right)) < 1e-12);
}

TEST_CASE("zero source returns the zero solution") {
  const BasisSpec spec = BasisSpec::sine_box1(8);
  const QuadratureRule quad = make_quadrature(spec, 2.0);
  const Ultrafunction u =
      solve_level(SourceSpec::smooth([](std::span<const double>) { return 0.0; }), spec, quad);
  CHECK(norm(u) < 1e-14);
}

TEST_CASE("point source converges to the closed-form Green function") {
  const double y[1] = {0.5};
  double previous = std::numeric_limits<double>::infinity();
  double final_error = 0.0;
  for (int theta : {16, 32, 64}) {
    const BasisSpec spec = BasisSpec::sine_box1(theta);
    const QuadratureRule quad = make_quadrature(spec, 2.0);
    const Ultrafunction u = solve_level(SourceSpec::dirac(y), spec, quad);
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double x = i / 200.0;
      if (std::abs(x - 0.5) <= 0.1) continue;
      const double p[1] = {x};
      worst = std::max(worst, std::abs(eval(u, p) - green_1d(x, 0.5)));
    }
    CHECK(worst < previous);
    previous = worst;
    final_error = worst;
  }
  CHECK(final_error <= 1e-2);
}

TEST_CASE("galerkin solutions minimize the energy in every basis direction") {
  const BasisSpec spec = BasisSpec::sine_box1(8);
  const QuadratureRule quad = make_quadrature(spec, 2.0);
  const SourceSpec f = SourceSpec::smooth(sin_pi());
  const Ultrafunction u = solve_level(f, spec, quad);
  const double ju = energy(u, f, quad);
  for (int k = 1; k <= 8; ++k) {
    for (double t : {1e-3, -1e-3, 1e-2, -1e-2}) {
      Eigen::VectorXd perturbed = u.coeffs;
      perturbed[k - 1] += t;
      CHECK(ju <= energy(Ultrafunction(spec, perturbed), f, quad) + 1e-14);
    }
  }

  // J(0) = 0 for any source that pairs to zero with the zero function.
  CHECK(energy(Ultrafunction::zero(spec), f, quad) == 0.0);

  // At the solution, J = -1/2 b^T A^{-1} b.
  const Eigen::MatrixXd a = stiffness(spec, quad);
  const Eigen::VectorXd b = load_vector(f, spec, quad);
  const double algebraic = -0.5 * b.dot(a.llt().solve(b));
  CHECK(ju == doctest::Approx(algebraic).epsilon(1e-10));
}

TEST_CASE("permuted assembly changes nothing observable") {
  const BasisSpec spec = BasisSpec::sine_box1(12);
  const QuadratureRule quad = make_quadrature(spec, 2.0);
  const Eigen::MatrixXd a = stiffness(spec, quad);

  // Brute-force assembly in reversed node order.
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(12, 12);
  for (int j = 1; j <= 12; ++j) {
    for (int k = 1; k <= 12; ++k) {
      double s = 0.0;
      for (std::size_t q = quad.size(); q-- > 0;) {
        const double x[1] = {quad.nodes[q]};
        s += quad.weights[q] * basis_grad_real(spec, j, x)[0] * basis_grad_real(spec, k, x)[0];
      }
      b(j - 1, k - 1) = s;
    }
  }
  const SourceSpec f = SourceSpec::smooth(sin_pi());
  const Eigen::VectorXd rhs = load_vector(f, spec, quad);
  const Eigen::VectorXd u1 = a.llt().solve(rhs);
  const Eigen::VectorXd u2 = b.llt().solve(rhs);
  CHECK((u1 - u2).norm() <= 1e-12);
}

TEST_CASE("classical consistency: grid error decreases monotonically") {
  // -u'' = x(1-x) has the closed form u = (x - 2x^3 + x^4)/12.
  const SourceSpec f =
      SourceSpec::smooth([](std::span<const double> x) { return x[0] * (1.0 - x[0]); });
  double previous = std::numeric_limits<double>::infinity();
  for (int theta : {8, 16, 32}) {
    const BasisSpec spec = BasisSpec::sine_box1(theta);
    const Ultrafunction u = solve_level(f, spec, make_quadrature(spec, 2.0));
    double worst = 0.0;
    for (int i = 1; i < 100; ++i) {
      const double x = i / 100.0;
      const double p[1] = {x};
      const double exact = (x - 2.0 * x * x * x + x * x * x * x) / 12.0;
      worst = std::max(worst, std::abs(eval(u, p) - exact));
    }
    CHECK(worst < previous);
    previous = worst;
  }
  CHECK(previous <= 1e-6);
}

TEST_CASE("energies are nested across levels for a smooth source") {
  const SourceSpec f = SourceSpec::smooth(sin_pi());
  double previous = std::numeric_limits<double>::infinity();
  for (int theta : {8, 16, 32}) {
    const BasisSpec spec = BasisSpec::sine_box1(theta);
    const QuadratureRule quad = make_quadrature(spec, 2.0);
    const double j = energy(solve_level(f, spec, quad), f, quad);
    CHECK(j <= previous + 1e-12);
    previous = j;
  }
}

TEST_CASE("net solves carry per-level diagnostics") {
  const std::vector<int> levels{16, 32, 64};

  const DirichletResult smooth = solve_net(SourceSpec::smooth(sin_pi()), levels, 1, 2.0, 2);
  CHECK(smooth.rows.size() == 3);
  CHECK_FALSE(smooth.rows[0].prefix_tag.has_value());
  CHECK(*smooth.rows[2].prefix_tag == DiagnosticTag::standard_like);
  for (const auto& row : smooth.rows) CHECK(row.residual <= 1e-10);

  const double y[1] = {0.5};
  const DirichletResult green = solve_net(SourceSpec::dirac(y), levels, 1, 2.0, 2);
  CHECK(*green.rows[2].prefix_tag == DiagnosticTag::distributional_like);

  const DirichletResult proper = solve_net(SourceSpec::dirac_squared(y), levels, 1, 3.0, 2);
  CHECK(*proper.rows[2].prefix_tag == DiagnosticTag::proper_like);
}

TEST_CASE("dirac_squared demands an adequate quadrature") {
  const BasisSpec spec = BasisSpec::sine_box1(8);
  const QuadratureRule coarse = make_quadrature(spec, 2.0);
  const double y[1] = {0.5};
  CHECK_THROWS_AS(solve_level(SourceSpec::dirac_squared(y), spec, coarse), Error);
}

TEST_CASE("source validation names the failure") {
  const BasisSpec spec = BasisSpec::sine_box1(8);
  const QuadratureRule quad = make_quadrature(spec, 2.0);
  const double outside[1] = {1.5};
  CHECK_THROWS_AS(solve_level(SourceSpec::dirac(outside), spec, quad), Error);
  const double dir[1] = {2.0};
  CHECK_THROWS_AS(solve_level(SourceSpec::oscillatory(4.0, dir), spec, quad), Error);
}

TEST_CASE("two-dimensional smoke: separable source, negative energy") {
  const std::vector<int> levels{4, 8};
  const SourceSpec f = SourceSpec::smooth([](std::span<const double> x) {
    return std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
  });
  const DirichletResult result = solve_net(f, levels, 2, 2.0, 2);
  CHECK(result.rows[1].residual <= 1e-10);
  CHECK(result.rows[1].energy < 0.0);
  // Exact solution sin(pi x) sin(pi y) / (2 pi^2): check the leading coefficient.
  const Ultrafunction& u = result.net.levels[1];
  CHECK(u.coeffs[0] == doctest::Approx(0.5 / (2.0 * kPi * kPi)).epsilon(1e-8));
}

TEST_CASE("oscillatory sources lose weak mass faster than sup magnitude") {
  // Asymmetric about 1/2 so that even modes carry weight too.
  const ScalarField v = [](std::span<const double> x) {
    const double t = x[0];
    return t * t * (1.0 - t) * (1.0 - t) * std::exp(t);
  };
  const std::vector<OscillatoryRow> rows =
      oscillatory_report({4.0, 8.0, 16.0, 32.0}, v, {16, 32, 64}, 2.0);

  // Unresolved wavenumbers are omitted: theta=16 keeps k in {4, 8}.
  int theta16 = 0;
  for (const auto& row : rows) {
    if (row.theta == 16) ++theta16;
  }
  CHECK(theta16 == 2);

  // On the finest level: doubling k shrinks the weak action by >= 3 and the
  // sup proxy by about 4 (the 1/k^2 law), and u = sin(k pi x)/(k pi)^2.
  std::vector<OscillatoryRow> fine;
  for (const auto& row : rows) {
    if (row.theta == 64) fine.push_back(row);
  }
  REQUIRE(fine.size() == 4);
  for (std::size_t i = 0; i + 1 < fine.size(); ++i) {
    CHECK(fine[i + 1].weak_action <= fine[i].weak_action / 3.0);
    const double ratio = fine[i + 1].sup_node / fine[i].sup_node;
    CHECK(ratio <= 0.5);
    CHECK(ratio >= 0.125);
  }
  for (const auto& row : fine) {
    CHECK(row.sup_node ==
          doctest::Approx(1.0 / (row.wavenumber * kPi * row.wavenumber * kPi)).epsilon(1e-3));
  }
}

TEST_CASE("a test function orthogonal to the source mode reports no action") {
  const BasisSpec spec = BasisSpec::sine_box1(16);
  const std::vector<OscillatoryRow> rows = oscillatory_report(
      {4.0},
      [](std::span<const double> x) { return std::sqrt(2.0) * std::sin(5.0 * kPi * x[0]); },
      {16}, 2.0);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].weak_action <= 1e-10);
}
