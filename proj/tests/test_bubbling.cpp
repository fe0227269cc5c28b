#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "ultrafun/bubbling.hpp"
#include "ultrafun/dirichlet.hpp"

using namespace ultrafun;

TEST_CASE("option validation") {
  MinimizeOptions opts;
  opts.p = 2.0;
  CHECK_THROWS_AS(opts.validate(), Error);
  opts.p = 4.0;
  opts.restarts = 0;
  CHECK_THROWS_AS(opts.validate(), Error);
  opts.restarts = 1;
  opts.tol_grad = 0.0;
  CHECK_THROWS_AS(opts.validate(), Error);
}

TEST_CASE("the constraint demands an adequate quadrature") {
  const BasisSpec spec = BasisSpec::sine_box1(8);
  const QuadratureRule coarse = make_quadrature(spec, 2.0);
  MinimizeOptions opts;
  opts.p = 4.0;
  CHECK_THROWS_AS(minimize_on_Mp(spec, coarse, opts), Error);
}

TEST_CASE("one-dimensional ground state: restart agreement and feasibility") {
  const BasisSpec spec = BasisSpec::sine_box1(16);
  const QuadratureRule quad = make_quadrature(spec, 5.0);
  MinimizeOptions opts;
  opts.p = 4.0;
  opts.restarts = 3;
  opts.max_iters = 2000;
  opts.seed = 42;

  std::vector<MinimizeResult> runs;
  const MinimizeResult best = minimize_best(spec, quad, opts, 2, std::nullopt, &runs);
  REQUIRE(runs.size() == 3);
  CHECK(best.converged);
  CHECK(best.m_value > 0.0);
  for (const MinimizeResult& run : runs) {
    CHECK(std::abs(run.constraint - 1.0) <= 1e-8);
    if (run.converged) {
      CHECK(std::abs(run.m_value - best.m_value) <= 1e-4 * best.m_value);
    }
  }
}

TEST_CASE("homogeneity: scaling onto constraint value c rescales the energy by c^(2/p)") {
  const BasisSpec spec = BasisSpec::sine_box1(16);
  const QuadratureRule quad = make_quadrature(spec, 5.0);
  MinimizeOptions opts;
  opts.p = 4.0;
  opts.max_iters = 1500;
  const MinimizeResult result = minimize_on_Mp(spec, quad, opts);
  const Eigen::MatrixXd a = stiffness(spec, quad);

  const double c = 2.0;
  const Eigen::VectorXd scaled = std::pow(c, 1.0 / opts.p) * result.u.coeffs;
  const double j_scaled = scaled.dot(a * scaled);
  CHECK(j_scaled == doctest::Approx(std::pow(c, 2.0 / opts.p) * result.m_value).epsilon(1e-12));

  // Sign flips change neither the constraint nor the energy.
  const Eigen::VectorXd flipped = -result.u.coeffs;
  CHECK(flipped.dot(a * flipped) == doctest::Approx(result.m_value).epsilon(1e-14));
}

TEST_CASE("barycenter and concentration bookkeeping") {
  const BasisSpec spec = BasisSpec::sine_box1(16);
  const QuadratureRule quad = make_quadrature(spec, 5.0);
  MinimizeOptions opts;
  opts.p = 4.0;
  opts.max_iters = 1500;
  const MinimizeResult result = minimize_on_Mp(spec, quad, opts);

  // The positive ground-state profile is symmetric about 1/2.
  const std::array<double, 3> bary = barycenter(result.u, opts.p, quad);
  CHECK(bary[0] == doctest::Approx(0.5).epsilon(1e-6));

  const double center[1] = {bary[0]};
  CHECK(concentration_ratio(result.u, center, 2.0, opts.p, quad) ==
        doctest::Approx(1.0).epsilon(1e-8));
  CHECK(concentration_ratio(result.u, center, 0.0, opts.p, quad) >= 0.0);
  CHECK(concentration_ratio(result.u, center, 0.25, opts.p, quad) <= 1.0 + 1e-12);

  // A narrow off-center bump keeps its barycenter near the bump.
  MinimizeOptions bump = opts;
  bump.max_iters = 1;  // a single step keeps the initial profile
  bump.bump_center = {0.3, 0.5, 0.5};
  bump.bump_width = 0.05;
  const MinimizeResult start = minimize_on_Mp(spec, quad, bump);
  const std::array<double, 3> b2 = barycenter(start.u, bump.p, quad);
  CHECK(std::abs(b2[0] - 0.3) <= 0.05);
}

TEST_CASE("barycenters stay put across the finest levels near the critical exponent") {
  MinimizeOptions opts;
  opts.restarts = 2;
  opts.max_iters = 1200;
  opts.seed = 31;
  for (double p : {5.5, 6.0}) {
    const std::vector<BubbleRow> rows = m_table({p}, {4, 6, 8}, 3, opts, 2);
    const BubbleRow* fine = nullptr;
    const BubbleRow* finer = nullptr;
    for (const auto& row : rows) {
      if (!row.best) continue;
      if (row.theta == 216) fine = &row;
      if (row.theta == 512) finer = &row;
    }
    REQUIRE(fine != nullptr);
    REQUIRE(finer != nullptr);
    if (fine->converged && finer->converged) {
      double dist2 = 0.0;
      for (int a = 0; a < 3; ++a) {
        const double d = fine->bary[static_cast<std::size_t>(a)] -
                         finer->bary[static_cast<std::size_t>(a)];
        dist2 += d * d;
      }
      CHECK(std::sqrt(dist2) <= 0.1);
    }
  }
}

TEST_CASE("m_table rows, warm starts and monotone levels in one dimension") {
  MinimizeOptions opts;
  opts.restarts = 2;
  opts.max_iters = 1500;
  opts.seed = 5;
  const std::vector<BubbleRow> rows = m_table({4.0}, {8, 16}, 1, opts, 2);
  REQUIRE(rows.size() == 4);  // 2 levels x 2 restarts

  double best_coarse = std::numeric_limits<double>::infinity();
  double best_fine = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    CHECK(row.m_value > 0.0);
    CHECK(row.space_dim == 1);
    if (row.theta == 8 && row.best) best_coarse = row.m_value;
    if (row.theta == 16 && row.best) best_fine = row.m_value;
  }
  CHECK(best_fine <= best_coarse * (1.0 + 1e-3));
}
