#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "ultrafun/basis.hpp"

namespace ultrafun {

/// Quadrature rule realizing the starred integral of the basis domain.
///
/// Nodes are stored flattened, space_dim coordinates per node, with the
/// tensor structure kept alongside for the box family (first axis fastest,
/// matching the basis ordering).
struct QuadratureRule {
  BasisKind kind = BasisKind::sine_box;
  int space_dim = 1;
  double oversample = 1.0;
  int exactness_degree = 0;

  std::vector<double> nodes;    // node i, axis a at nodes[i*space_dim + a]
  std::vector<double> weights;  // all positive

  std::array<std::vector<double>, 3> axis_nodes;
  std::array<std::vector<double>, 3> axis_weights;

  std::size_t size() const noexcept { return weights.size(); }
  double weight_sum() const;
  std::span<const double> node(std::size_t i) const {
    return std::span<const double>(nodes.data() + i * static_cast<std::size_t>(space_dim),
                                   static_cast<std::size_t>(space_dim));
  }
};

/// Rule matched to a basis family:
///   sine_box      tensor Gauss-Legendre, ceil(oversample*theta_axis)+10
///                 nodes per axis on [0,1];
///   fourier_ring  uniform rule with 2*ceil(oversample*theta)+1 nodes;
///   hermite_line  Gauss-Hermite with ceil(oversample*theta) nodes, weights
///                 folded so plain weighted sums integrate products of
///                 Hermite functions.
QuadratureRule make_quadrature(const BasisSpec& spec, double oversample);

/// G_jk = sum_q w_q e_j(x_q) conj(e_k(x_q)); identity up to quadrature error
/// for every supported family at oversample >= 2.
Eigen::MatrixXcd gram_matrix(const BasisSpec& spec, const QuadratureRule& quad);

namespace detail {

/// Gauss-Legendre nodes and weights on [0,1] (Newton iteration on P_n).
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Gauss-Hermite nodes (Golub-Welsch) with folded weights 1/sum_j psi_j(x)^2.
void gauss_hermite_folded(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Per-axis tables of basis values and derivatives at the axis nodes, for
/// tensorized assembly: value[a](q, j) = phi_j(x_q) along axis a.
struct AxisTables {
  std::array<Eigen::MatrixXd, 3> value;
  std::array<Eigen::MatrixXd, 3> deriv;
};
AxisTables axis_tables(const BasisSpec& spec, const QuadratureRule& quad);

}  // namespace detail

}  // namespace ultrafun
