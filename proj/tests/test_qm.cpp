#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "ultrafun/qm.hpp"

using namespace ultrafun;

namespace {

constexpr double kPi = 3.14159265358979323846;
const std::complex<double> kI(0.0, 1.0);

struct BoxSetup {
  BasisSpec spec;
  QuadratureRule quad;
  explicit BoxSetup(int theta)
      : spec(BasisSpec::sine_box1(theta)), quad(make_quadrature(spec, 2.0)) {}
};

}  // namespace

TEST_CASE("position matrix on the box") {
  const BoxSetup box(2);
  const ObservableMatrix q = position_matrix(box.spec, box.quad);
  // Q_11 = int x 2 sin^2(pi x) dx = 1/2.
  CHECK(q.entries(0, 0).real() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(hermiticity_defect(q.entries) <= 1e-12);
}

TEST_CASE("position matrix on the hermite line is the ladder tridiagonal") {
  const BasisSpec spec = BasisSpec::hermite_line(8);
  const QuadratureRule quad = make_quadrature(spec, 2.0);
  const ObservableMatrix q = position_matrix(spec, quad);
  for (int j = 1; j < 8; ++j) {
    CHECK(q.entries(j - 1, j).real() == doctest::Approx(std::sqrt(j / 2.0)).epsilon(1e-10));
  }
  for (int j = 0; j < 8; ++j) {
    for (int k = 0; k < 8; ++k) {
      if (std::abs(j - k) > 1) CHECK(std::abs(q.entries(j, k)) < 1e-10);
    }
  }
}

TEST_CASE("momentum matrices") {
  const BasisSpec ring = BasisSpec::fourier_ring(5);
  const ObservableMatrix p_ring = momentum_matrix(ring, make_quadrature(ring, 2.0));
  for (int j = 1; j <= 5; ++j) {
    CHECK(p_ring.entries(j - 1, j - 1).real() ==
          doctest::Approx(2.0 * kPi * BasisSpec::ring_mode(j)).epsilon(1e-10));
    for (int k = 1; k <= 5; ++k) {
      if (k != j) CHECK(std::abs(p_ring.entries(j - 1, k - 1)) < 1e-10);
    }
  }

  const BoxSetup box(8);
  const ObservableMatrix p_box = momentum_matrix(box.spec, box.quad);
  for (int j = 0; j < 8; ++j) CHECK(std::abs(p_box.entries(j, j)) < 1e-12);
  CHECK(hermiticity_defect(p_box.entries) <= 1e-10);
}

TEST_CASE("free hamiltonians") {
  const BoxSetup box(3);
  const ObservableMatrix h = hamiltonian(box.spec, box.quad, 1.0);
  CHECK(h.entries(0, 0).real() == doctest::Approx(kPi * kPi / 2.0).epsilon(1e-10));
  CHECK(h.entries(1, 1).real() == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-10));
  CHECK(h.entries(2, 2).real() == doctest::Approx(4.5 * kPi * kPi).epsilon(1e-10));

  const BasisSpec ring = BasisSpec::fourier_ring(5);
  const SpectralDecomposition ring_h = eigh(hamiltonian(ring, make_quadrature(ring, 2.0), 1.0));
  CHECK(std::abs(ring_h.eigenvalues[0]) <= 1e-12);  // constant mode
  for (Eigen::Index j = 0; j < ring_h.eigenvalues.size(); ++j) {
    CHECK(ring_h.eigenvalues[j] >= -1e-12);
  }

  // Same formula, different space: the box has no zero mode.
  const SpectralDecomposition box_h = eigh(hamiltonian(box.spec, box.quad, 1.0));
  CHECK(box_h.eigenvalues[0] >= kPi * kPi / 2.0 - 1e-8);

  CHECK_THROWS_AS(hamiltonian(box.spec, box.quad, 0.0), Error);
}

TEST_CASE("spectral decompositions satisfy their contracts") {
  const BoxSetup box(16);
  const ObservableMatrix q = position_matrix(box.spec, box.quad);
  const SpectralDecomposition decomp = eigh(q);

  for (Eigen::Index a = 0; a < decomp.eigenvalues.size(); ++a) {
    CHECK(decomp.eigenvalues[a] > 0.0);
    CHECK(decomp.eigenvalues[a] < 1.0);
    const Eigen::VectorXcd residual =
        q.entries * decomp.eigenvectors.col(a) - decomp.eigenvalues[a] * decomp.eigenvectors.col(a);
    CHECK(residual.norm() <= 1e-8);
    if (a > 0) CHECK(decomp.eigenvalues[a] >= decomp.eigenvalues[a - 1]);
  }
  const Eigen::MatrixXcd gram = decomp.eigenvectors.adjoint() * decomp.eigenvectors;
  CHECK((gram - Eigen::MatrixXcd::Identity(16, 16)).cwiseAbs().maxCoeff() <= 1e-8);
  const Eigen::MatrixXcd rebuilt = decomp.eigenvectors *
                                   decomp.eigenvalues.cast<Cplx>().asDiagonal() *
                                   decomp.eigenvectors.adjoint();
  CHECK((rebuilt - q.entries).cwiseAbs().maxCoeff() <= 1e-8);

  // Deterministic output, including the phase convention.
  const SpectralDecomposition again = eigh(q);
  CHECK((again.eigenvectors - decomp.eigenvectors).cwiseAbs().maxCoeff() == 0.0);

  // Diagonal input: sorted diagonal, coordinate eigenvectors.
  Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(3, 3);
  diag(0, 0) = 3.0;
  diag(1, 1) = 1.0;
  diag(2, 2) = 2.0;
  const SpectralDecomposition d = eigh(ObservableMatrix(BasisSpec::sine_box1(3), diag, "diag"));
  CHECK(d.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(d.eigenvalues[2] == doctest::Approx(3.0));
  CHECK(std::abs(d.eigenvectors(1, 0) - Cplx(1.0, 0.0)) < 1e-12);
}

TEST_CASE("delta-type position eigenvectors") {
  const BoxSetup box(64);
  const ObservableMatrix q = position_matrix(box.spec, box.quad);
  const SpectralDecomposition decomp = eigh(q);
  const int middle = 32;

  // mu_a equals the quadratic form exactly.
  const Eigen::VectorXcd psi = decomp.eigenvectors.col(middle);
  const double quad_form = psi.dot(q.entries * psi).real();
  CHECK(quad_form == doctest::Approx(decomp.eigenvalues[middle]).epsilon(1e-10));

  const auto wide_bump = [](double x) {
    const double t = (x - 0.5) / 0.48;
    return std::abs(t) < 1.0 ? std::exp(-t * t) : 0.0;
  };
  const DeltaTypeReport report = delta_type_check(q, decomp, middle, wide_bump, box.quad);
  CHECK(report.variance > 0.0);

  // Localization: the position variance shrinks as theta grows.
  const BoxSetup fine(128);
  const ObservableMatrix qf = position_matrix(fine.spec, fine.quad);
  const SpectralDecomposition df = eigh(qf);
  const DeltaTypeReport fine_report = delta_type_check(qf, df, 64, wide_bump, fine.quad);
  CHECK(fine_report.variance < report.variance);
  CHECK(fine_report.defect <= 0.05);
}

TEST_CASE("commutator identities") {
  for (int theta : {16, 64}) {
    const BoxSetup box(theta);
    const ObservableMatrix q = position_matrix(box.spec, box.quad);
    const ObservableMatrix p = momentum_matrix(box.spec, box.quad);
    const SpectralDecomposition decomp = eigh(q);
    for (Eigen::Index a = 0; a < decomp.eigenvalues.size(); ++a) {
      CHECK(std::abs(commutator_defect(p, q, decomp.eigenvectors.col(a))) <= 1e-10);
    }
    const Eigen::MatrixXcd c = p.entries * q.entries - q.entries * p.entries;
    CHECK(std::abs(c.trace()) <= 1e-8);
  }

  // Away from the truncation edge the Hermite ladder sees the ideal value -i
  // (for the -i d/dx momentum convention).
  const BasisSpec hermite = BasisSpec::hermite_line(32);
  const QuadratureRule quad = make_quadrature(hermite, 2.0);
  const ObservableMatrix q = position_matrix(hermite, quad);
  const ObservableMatrix p = momentum_matrix(hermite, quad);
  Eigen::VectorXcd ground = Eigen::VectorXcd::Zero(32);
  ground[0] = 1.0;
  CHECK(std::abs(commutator_defect(p, q, ground) - (-kI)) <= 1e-6);
}

TEST_CASE("schroedinger evolution") {
  const BoxSetup box(8);
  const ObservableMatrix h = hamiltonian(box.spec, box.quad, 1.0);
  const SpectralDecomposition decomp = eigh(h);

  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(8);
  psi0[0] = 1.0 / std::sqrt(2.0);
  psi0[1] = 1.0 / std::sqrt(2.0);

  for (double t : {0.1, 1.0, 10.0}) {
    const Eigen::VectorXcd psi_t = evolve(decomp, psi0, t);
    CHECK(std::abs(psi_t.norm() - 1.0) <= 1e-10);
    const double e0 = psi0.dot(h.entries * psi0).real();
    const double et = psi_t.dot(h.entries * psi_t).real();
    CHECK(std::abs(et - e0) <= 1e-9);
  }

  // Stationary states only pick up a phase.
  const Eigen::VectorXcd ground = decomp.eigenvectors.col(0);
  const Eigen::VectorXcd evolved = evolve(decomp, ground, 3.7);
  CHECK(std::abs(std::abs(ground.dot(evolved)) - 1.0) <= 1e-10);

  // Two-mode revival at T = 2 pi / (E_2 - E_1).
  const double period = 2.0 * kPi / (decomp.eigenvalues[1] - decomp.eigenvalues[0]);
  const Eigen::VectorXcd psi_T = evolve(decomp, psi0, period);
  CHECK(std::abs(psi0.dot(psi_T)) >= 1.0 - 1e-8);
}

TEST_CASE("transition probabilities are a distribution over outcomes") {
  const BoxSetup box(8);
  const SpectralDecomposition decomp = eigh(hamiltonian(box.spec, box.quad, 1.0));

  const std::vector<double> certain =
      transition_probability(decomp.eigenvectors.col(3), decomp);
  CHECK(certain[3] == doctest::Approx(1.0).epsilon(1e-12));
  for (int j = 0; j < 8; ++j) {
    if (j != 3) CHECK(certain[static_cast<std::size_t>(j)] <= 1e-12);
  }

  Eigen::VectorXcd uniform = Eigen::VectorXcd::Zero(8);
  for (int j = 0; j < 4; ++j) uniform += decomp.eigenvectors.col(j);
  uniform /= 2.0;
  const std::vector<double> quarter = transition_probability(uniform, decomp);
  for (int j = 0; j < 4; ++j) CHECK(quarter[static_cast<std::size_t>(j)] == doctest::Approx(0.25));

  std::mt19937 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXcd psi(8);
    for (int j = 0; j < 8; ++j) psi[j] = Cplx(gauss(rng), gauss(rng));
    psi.normalize();
    const std::vector<double> probs = transition_probability(psi, decomp);
    double total = 0.0;
    for (double p : probs) total += p;
    CHECK(std::abs(total - 1.0) <= 1e-8);
  }
}

TEST_CASE("eigenvalue nets recover observable outcomes as shadows") {
  const LevelSchedule schedule({8, 16, 32}, "qm levels");
  const LambdaNet lowest = eigenvalue_net(
      schedule,
      [](int theta) {
        const BasisSpec spec = BasisSpec::sine_box1(theta);
        return hamiltonian(spec, make_quadrature(spec, 2.0), 1.0);
      },
      0);
  const NumClass cls = classify(lowest, 1e-6);
  CHECK(cls.tag == NumTag::finite);
  CHECK(*cls.shadow == doctest::Approx(kPi * kPi / 2.0).epsilon(1e-9));
}

TEST_CASE("states of unbounded energy reveal themselves across levels") {
  const LevelSchedule schedule({16, 32, 64}, "ideal state");
  const LambdaNet energies = ideal_state_energy_net(schedule, 0.25, 2.0);
  CHECK(energies.at(1) > energies.at(0));
  CHECK(energies.at(2) > energies.at(1));
  CHECK(classify(energies, 1e-3).tag == NumTag::infinite);
}
