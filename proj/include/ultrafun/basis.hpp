#pragma once

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ultrafun/levels.hpp"

namespace ultrafun {

using Cplx = std::complex<double>;

enum class BasisKind { sine_box, fourier_ring, hermite_line };

const char* to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& name);

/// Orthonormal spectral family over a fixed domain.
///
///   sine_box     sqrt(2)^N * prod_a sin(j_a pi x_a) on [0,1]^N, N in {1,2,3};
///                vanishes on the boundary.
///   fourier_ring exp(2 pi i m x) on the circle of length 1; modes are
///                enumerated 0, +1, -1, +2, -2, ...
///   hermite_line orthonormal Hermite functions on the real line.
///
/// Basis elements are addressed by a 1-based linear index j; for tensor
/// bases the first axis runs fastest.
struct BasisSpec {
  BasisKind kind = BasisKind::sine_box;
  int space_dim = 1;
  std::array<int, 3> theta_axis{1, 1, 1};

  static BasisSpec sine_box(std::span<const int> axis_modes);
  static BasisSpec sine_box1(int theta);
  static BasisSpec fourier_ring(int theta);
  static BasisSpec hermite_line(int theta);

  int theta() const noexcept {
    int t = 1;
    for (int a = 0; a < space_dim; ++a) t *= theta_axis[static_cast<std::size_t>(a)];
    return t;
  }

  /// 1-based linear index -> per-axis 1-based indices (unused axes are 1).
  std::array<int, 3> multi_index(int j) const;
  /// Inverse of multi_index.
  int linear_index(const std::array<int, 3>& idx) const;

  /// Fourier mode for a 1-based ring index: 1 -> 0, 2 -> +1, 3 -> -1, ...
  static int ring_mode(int j);

  bool same_family(const BasisSpec& other) const noexcept {
    return kind == other.kind && space_dim == other.space_dim;
  }
  bool operator==(const BasisSpec& other) const noexcept {
    return kind == other.kind && space_dim == other.space_dim && theta_axis == other.theta_axis;
  }

  /// Throws Error::domain when x is outside the domain (box coordinates must
  /// lie in [0,1]; ring and line accept any finite coordinate).
  void check_point(std::span<const double> x) const;
  void check_index(int j) const;
};

/// e_j(x) for the real families (sine_box, hermite_line).
double basis_eval_real(const BasisSpec& spec, int j, std::span<const double> x);

/// e_j(x) for any family; real families return a real-valued complex number.
Cplx basis_eval(const BasisSpec& spec, int j, std::span<const double> x);

/// Analytic gradient of e_j at x, one component per axis.
Eigen::VectorXd basis_grad_real(const BasisSpec& spec, int j, std::span<const double> x);
Eigen::VectorXcd basis_grad(const BasisSpec& spec, int j, std::span<const double> x);

namespace detail {

/// Orthonormal Hermite function values psi_0..psi_{count-1} at x, by the
/// stable three-term recurrence.
std::vector<double> hermite_values(int count, double x);

/// One-dimensional sine element sqrt(2) sin(j pi x) and its derivative.
double sine_value(int j, double x);
double sine_deriv(int j, double x);

}  // namespace detail

}  // namespace ultrafun
