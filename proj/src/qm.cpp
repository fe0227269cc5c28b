#include "ultrafun/qm.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "ultrafun/ultrafunction.hpp"

namespace ultrafun {

namespace {

constexpr double kPi = 3.14159265358979323846;
const std::complex<double> kI(0.0, 1.0);

void check_one_dimensional(const BasisSpec& spec, const char* who) {
  if (spec.space_dim != 1) {
    throw Error(Error::invalid_argument, std::string(who) + ": one-dimensional bases only");
  }
}

void check_quad(const BasisSpec& spec, const QuadratureRule& quad, const char* who) {
  if (quad.kind != spec.kind || quad.space_dim != spec.space_dim) {
    throw Error(Error::invalid_argument, std::string(who) + ": quadrature does not match basis");
  }
}

// Node tables of basis values and derivatives, complex for the ring family.
void node_tables(const BasisSpec& spec, const QuadratureRule& quad, Eigen::MatrixXcd& value,
                 Eigen::MatrixXcd& deriv) {
  const int n = static_cast<int>(quad.size());
  const int theta = spec.theta();
  value.resize(n, theta);
  deriv.resize(n, theta);
  if (spec.kind == BasisKind::fourier_ring) {
    for (int q = 0; q < n; ++q) {
      const double x = quad.nodes[static_cast<std::size_t>(q)];
      for (int j = 0; j < theta; ++j) {
        const int m = BasisSpec::ring_mode(j + 1);
        const double phase = 2.0 * kPi * m * x;
        const Cplx v(std::cos(phase), std::sin(phase));
        value(q, j) = v;
        deriv(q, j) = Cplx(0.0, 2.0 * kPi * m) * v;
      }
    }
    return;
  }
  const detail::AxisTables tables = detail::axis_tables(spec, quad);
  value = tables.value[0].cast<Cplx>();
  deriv = tables.deriv[0].cast<Cplx>();
}

Eigen::VectorXd weight_vector(const QuadratureRule& quad) {
  return Eigen::Map<const Eigen::VectorXd>(quad.weights.data(),
                                           static_cast<Eigen::Index>(quad.weights.size()));
}

void check_hermitian(const Eigen::MatrixXcd& m, const char* who) {
  if (hermiticity_defect(m) > 1e-10) {
    throw Error(Error::numeric, std::string(who) + ": matrix fails the Hermiticity bound");
  }
}

}  // namespace

ObservableMatrix::ObservableMatrix(BasisSpec spec_, Eigen::MatrixXcd entries_, std::string label_)
    : spec(spec_), entries(std::move(entries_)), label(std::move(label_)) {
  if (entries.rows() != entries.cols() || entries.rows() != spec.theta()) {
    throw Error(Error::invalid_argument, "ObservableMatrix: square theta x theta matrix required");
  }
  check_hermitian(entries, "ObservableMatrix");
}

double hermiticity_defect(const Eigen::MatrixXcd& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

ObservableMatrix position_matrix(const BasisSpec& spec, const QuadratureRule& quad) {
  check_one_dimensional(spec, "position_matrix");
  check_quad(spec, quad, "position_matrix");
  Eigen::MatrixXcd value, deriv;
  node_tables(spec, quad, value, deriv);
  const Eigen::VectorXd w = weight_vector(quad);
  Eigen::VectorXd wx(w.size());
  for (Eigen::Index q = 0; q < w.size(); ++q) {
    wx[q] = w[q] * quad.nodes[static_cast<std::size_t>(q)];
  }
  Eigen::MatrixXcd m = value.adjoint() * wx.asDiagonal() * value;
  return ObservableMatrix(spec, std::move(m), "position");
}

ObservableMatrix momentum_matrix(const BasisSpec& spec, const QuadratureRule& quad) {
  check_one_dimensional(spec, "momentum_matrix");
  check_quad(spec, quad, "momentum_matrix");
  Eigen::MatrixXcd value, deriv;
  node_tables(spec, quad, value, deriv);
  const Eigen::VectorXd w = weight_vector(quad);
  const Eigen::MatrixXcd a = value.adjoint() * w.asDiagonal() * deriv;
  Eigen::MatrixXcd m = (-kI / 2.0) * (a - a.adjoint());
  return ObservableMatrix(spec, std::move(m), "momentum");
}

ObservableMatrix hamiltonian(const BasisSpec& spec, const QuadratureRule& quad, double mass) {
  check_one_dimensional(spec, "hamiltonian");
  check_quad(spec, quad, "hamiltonian");
  if (!(mass > 0.0)) throw Error(Error::config, "hamiltonian: mass must be positive");
  Eigen::MatrixXcd value, deriv;
  node_tables(spec, quad, value, deriv);
  const Eigen::VectorXd w = weight_vector(quad);
  Eigen::MatrixXcd m = (deriv.adjoint() * w.asDiagonal() * deriv) / (2.0 * mass);
  return ObservableMatrix(spec, std::move(m), "hamiltonian");
}

SpectralDecomposition eigh(const ObservableMatrix& m) {
  check_hermitian(m.entries, "eigh");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m.entries);
  if (solver.info() != Eigen::Success) {
    throw Error(Error::numeric, "eigh: eigen iteration failed to converge");
  }
  SpectralDecomposition decomp{m.spec, solver.eigenvalues(), solver.eigenvectors()};
  // Deterministic phase: rotate each column so its first nonnegligible
  // coefficient is positive real.
  for (Eigen::Index k = 0; k < decomp.eigenvectors.cols(); ++k) {
    auto col = decomp.eigenvectors.col(k);
    const double top = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col[i]) > 1e-8 * top) {
        col *= std::conj(col[i]) / std::abs(col[i]);
        break;
      }
    }
  }
  return decomp;
}

DeltaTypeReport delta_type_check(const ObservableMatrix& q, const SpectralDecomposition& decomp,
                                 int index, const std::function<double(double)>& phi,
                                 const QuadratureRule& quad) {
  if (index < 0 || index >= decomp.eigenvalues.size()) {
    throw Error(Error::invalid_argument, "delta_type_check: eigenvector index out of range");
  }
  if (!phi) throw Error(Error::invalid_argument, "delta_type_check: missing test function");
  check_quad(decomp.spec, quad, "delta_type_check");

  const Eigen::VectorXcd psi = decomp.eigenvectors.col(index);
  const double mu = decomp.eigenvalues[index];
  if ((q.entries * psi - mu * psi).norm() > 1e-8) {
    throw Error(Error::invalid_argument,
                "delta_type_check: decomposition does not belong to this matrix");
  }

  Eigen::MatrixXcd value, deriv;
  node_tables(decomp.spec, quad, value, deriv);
  const Eigen::VectorXcd psi_nodes = value * psi;
  const Eigen::VectorXd w = weight_vector(quad);

  Cplx action(0.0, 0.0);
  Cplx mass(0.0, 0.0);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double x = quad.nodes[static_cast<std::size_t>(i)];
    action += w[i] * psi_nodes[i] * phi(x);
    mass += w[i] * psi_nodes[i];
  }
  DeltaTypeReport report;
  report.defect = std::abs(action / mass - phi(mu));
  // Localization is measured against the true multiplication operator; the
  // truncated matrix annihilates its own eigenvectors.
  double variance = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double dx = quad.nodes[static_cast<std::size_t>(i)] - mu;
    variance += w[i] * dx * dx * std::norm(psi_nodes[i]);
  }
  report.variance = variance;
  return report;
}

std::complex<double> commutator_defect(const ObservableMatrix& p, const ObservableMatrix& q,
                                       const Eigen::VectorXcd& psi) {
  if (p.entries.rows() != q.entries.rows() || psi.size() != p.entries.rows()) {
    throw Error(Error::invalid_argument, "commutator_defect: dimension mismatch");
  }
  const Eigen::MatrixXcd commutator = p.entries * q.entries - q.entries * p.entries;
  // ((PQ - QP) psi, psi) with the second slot conjugated.
  return psi.dot(commutator * psi);
}

Eigen::VectorXcd evolve(const SpectralDecomposition& h, const Eigen::VectorXcd& psi0, double t) {
  if (psi0.size() != h.eigenvalues.size()) {
    throw Error(Error::invalid_argument, "evolve: state dimension mismatch");
  }
  const Eigen::VectorXcd amplitudes = h.eigenvectors.adjoint() * psi0;
  Eigen::VectorXcd phased(amplitudes.size());
  for (Eigen::Index j = 0; j < amplitudes.size(); ++j) {
    phased[j] = std::exp(-kI * h.eigenvalues[j] * t) * amplitudes[j];
  }
  return h.eigenvectors * phased;
}

Eigen::VectorXcd evolve(const ObservableMatrix& h, const Eigen::VectorXcd& psi0, double t) {
  return evolve(eigh(h), psi0, t);
}

std::vector<double> transition_probability(const Eigen::VectorXcd& psi,
                                           const SpectralDecomposition& decomp) {
  if (psi.size() != decomp.eigenvalues.size()) {
    throw Error(Error::invalid_argument, "transition_probability: state dimension mismatch");
  }
  const Eigen::VectorXcd amplitudes = decomp.eigenvectors.adjoint() * psi;
  std::vector<double> probs(static_cast<std::size_t>(amplitudes.size()));
  for (Eigen::Index j = 0; j < amplitudes.size(); ++j) {
    probs[static_cast<std::size_t>(j)] = std::norm(amplitudes[j]);
  }
  return probs;
}

LambdaNet eigenvalue_net(const LevelSchedule& theta_schedule,
                         const std::function<ObservableMatrix(int)>& build_matrix,
                         int track_index) {
  if (!build_matrix) throw Error(Error::invalid_argument, "eigenvalue_net: missing builder");
  // Track eagerly so the net's values do not depend on evaluation order.
  std::vector<double> tracked(static_cast<std::size_t>(theta_schedule.levels()));
  double previous = 0.0;
  for (int k = 0; k < theta_schedule.levels(); ++k) {
    const SpectralDecomposition decomp = eigh(build_matrix(theta_schedule.dim(k)));
    if (k == 0) {
      if (track_index < 0 || track_index >= decomp.eigenvalues.size()) {
        throw Error(Error::invalid_argument, "eigenvalue_net: track index out of range");
      }
      previous = decomp.eigenvalues[track_index];
    } else {
      // Nearest eigenvalue to the previous level's; ties keep the lower index.
      double best = decomp.eigenvalues[0];
      double best_dist = std::abs(best - previous);
      for (Eigen::Index j = 1; j < decomp.eigenvalues.size(); ++j) {
        const double dist = std::abs(decomp.eigenvalues[j] - previous);
        if (dist < best_dist) {
          best = decomp.eigenvalues[j];
          best_dist = dist;
        }
      }
      previous = best;
    }
    tracked[static_cast<std::size_t>(k)] = previous;
  }
  return LambdaNet(theta_schedule,
                   [tracked](Level l) { return tracked[static_cast<std::size_t>(l.index)]; });
}

LambdaNet ideal_state_energy_net(const LevelSchedule& theta_schedule, double gamma,
                                 double oversample) {
  if (!(gamma > 0.0 && gamma < 0.5)) {
    throw Error(Error::invalid_argument, "ideal_state_energy_net: gamma must lie in (0, 1/2)");
  }
  std::vector<double> energies(static_cast<std::size_t>(theta_schedule.levels()));
  for (int k = 0; k < theta_schedule.levels(); ++k) {
    const int theta = theta_schedule.dim(k);
    const BasisSpec spec = BasisSpec::sine_box1(theta);
    const QuadratureRule quad = make_quadrature(spec, oversample);
    const Ultrafunction psi = project(
        [gamma](std::span<const double> x) {
          const double s = x[0] * (1.0 - x[0]);
          return s / std::pow(std::abs(x[0] - 0.5), gamma);
        },
        spec, quad);
    const double n2 = psi.coeffs.squaredNorm();
    const ObservableMatrix h = hamiltonian(spec, quad, 1.0);
    const Eigen::VectorXcd c = psi.coeffs.cast<Cplx>() / std::sqrt(n2);
    energies[static_cast<std::size_t>(k)] = (c.adjoint() * (h.entries * c)).real()(0, 0);
  }
  return LambdaNet(theta_schedule,
                   [energies](Level l) { return energies[static_cast<std::size_t>(l.index)]; });
}

}  // namespace ultrafun
