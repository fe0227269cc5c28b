#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ultrafun/quadrature.hpp"

namespace ultrafun {

/// Hermitian matrix of an observable on the first theta basis elements.
/// Entries follow the operator convention M_jk = (A e_k, e_j) with the
/// scalar product conjugating its second slot.
struct ObservableMatrix {
  BasisSpec spec;
  Eigen::MatrixXcd entries;
  std::string label;

  ObservableMatrix(BasisSpec spec_, Eigen::MatrixXcd entries_, std::string label_);
  int theta() const noexcept { return static_cast<int>(entries.rows()); }
};

/// max |M - M^dagger| entry; every observable is checked against 1e-10
/// before spectral use.
double hermiticity_defect(const Eigen::MatrixXcd& m);

/// Position observable: multiplication by the coordinate (one-dimensional
/// families). Tridiagonal sqrt(j/2) couplings in the Hermite family.
ObservableMatrix position_matrix(const BasisSpec& spec, const QuadratureRule& quad);

/// Momentum -i d/dx in the antisymmetrized weak form
/// P_jk = (-i/2) sum_q w_q (e_k' conj(e_j) - e_k conj(e_j')), which is
/// Hermitian under quadrature by construction. Diagonal 2 pi m on the ring.
ObservableMatrix momentum_matrix(const BasisSpec& spec, const QuadratureRule& quad);

/// Free Hamiltonian -(1/2 mass) Laplacian in weak form; diagonal
/// (j pi)^2 / (2 mass) on the box and (2 pi m)^2 / (2 mass) on the ring.
ObservableMatrix hamiltonian(const BasisSpec& spec, const QuadratureRule& quad, double mass);

/// Full spectral decomposition with ascending eigenvalues and the sign
/// convention that each eigenvector's first nonnegligible coefficient is
/// positive real.
struct SpectralDecomposition {
  BasisSpec spec;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;  // columns
};

SpectralDecomposition eigh(const ObservableMatrix& m);

struct DeltaTypeReport {
  double defect = 0.0;    // |<psi_a, Phi phi> / integral(psi_a) - phi(mu_a)|
  double variance = 0.0;  // int (x - mu_a)^2 |psi_a(x)|^2, the localization width
};

/// Delta-type test of a position eigenvector: its normalized action on a
/// smooth test function should reproduce point evaluation at the eigenvalue.
DeltaTypeReport delta_type_check(const ObservableMatrix& q, const SpectralDecomposition& decomp,
                                 int index, const std::function<double(double)>& phi,
                                 const QuadratureRule& quad);

/// <(PQ - QP) psi, psi> by exact matrix arithmetic.
std::complex<double> commutator_defect(const ObservableMatrix& p, const ObservableMatrix& q,
                                       const Eigen::VectorXcd& psi);

/// Unitary evolution psi_t = V exp(-i Lambda t) V^dagger psi_0 solving
/// i d psi / dt = H psi.
Eigen::VectorXcd evolve(const SpectralDecomposition& h, const Eigen::VectorXcd& psi0, double t);
Eigen::VectorXcd evolve(const ObservableMatrix& h, const Eigen::VectorXcd& psi0, double t);

/// Born probabilities |<psi, psi_j>|^2; they sum to one over the complete
/// eigenbasis.
std::vector<double> transition_probability(const Eigen::VectorXcd& psi,
                                           const SpectralDecomposition& decomp);

/// Net of one eigenvalue tracked across levels by value proximity (ties
/// break toward the lower index); the classify operation then extracts its
/// observable outcome.
LambdaNet eigenvalue_net(const LevelSchedule& theta_schedule,
                         const std::function<ObservableMatrix(int)>& build_matrix,
                         int track_index);

/// Energy <psi, H psi> of the normalized projection of phi(x)/|x-c|^gamma
/// across levels; grows without bound, the finite-level face of a state that
/// no laboratory preparation reaches.
LambdaNet ideal_state_energy_net(const LevelSchedule& theta_schedule, double gamma,
                                 double oversample);

}  // namespace ultrafun
