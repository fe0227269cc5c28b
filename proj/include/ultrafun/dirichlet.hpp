#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ultrafun/ultrafunction.hpp"

namespace ultrafun {

/// Right-hand side of the generalized Dirichlet problem -Delta u = f on the
/// unit box with vanishing boundary values.
struct SourceSpec {
  enum class Kind { smooth, dirac, dirac_squared, oscillatory, coeff };

  Kind kind = Kind::smooth;
  ScalarField f;                    // smooth
  std::array<double, 3> y{};        // dirac / dirac_squared concentration point
  double alpha = 0.0;               // oscillatory wavenumber, source sin(alpha pi n.x)
  std::array<double, 3> direction{1.0, 0.0, 0.0};
  std::optional<Ultrafunction> coefficients;

  static SourceSpec smooth(ScalarField f);
  static SourceSpec dirac(std::span<const double> y);
  static SourceSpec dirac_squared(std::span<const double> y);
  static SourceSpec oscillatory(double alpha, std::span<const double> direction);
  static SourceSpec coeff(Ultrafunction u);

  void validate(const BasisSpec& spec, const QuadratureRule& quad) const;
};

const char* to_string(SourceSpec::Kind kind);

/// Weak Laplacian A_jk = sum_q w_q grad e_j(x_q) . grad e_k(x_q), assembled
/// axis by axis for the box family. Symmetric positive definite; diagonal
/// (j pi)^2 for the 1-d sine basis up to quadrature error.
Eigen::MatrixXd stiffness(const BasisSpec& spec, const QuadratureRule& quad);

/// Load vector b_j = <f, e_j> for any source kind.
Eigen::VectorXd load_vector(const SourceSpec& f, const BasisSpec& spec,
                            const QuadratureRule& quad);

/// Galerkin solve of A u = b at one level. The residual is driven below
/// 1e-10 * |b| with one step of iterative refinement.
Ultrafunction solve_level(const SourceSpec& f, const BasisSpec& spec,
                          const QuadratureRule& quad);

/// J(u) = 1/2 u^T A u - <f, u>; the load pairs as eval(u, y) for dirac
/// sources.
double energy(const Ultrafunction& u, const SourceSpec& f, const QuadratureRule& quad);

struct DirichletLevelRow {
  int level = 0;
  int theta = 0;
  double residual = 0.0;
  double energy = 0.0;
  /// Diagnostic of the net truncated at this level (needs two levels; the
  /// first row reports proper_like-free placeholder "n/a" upstream).
  std::optional<DiagnosticTag> prefix_tag;
};

struct DirichletResult {
  UltrafunNet net;
  std::vector<DirichletLevelRow> rows;
};

/// Solve per level along a per-axis schedule and attach diagnostics.
DirichletResult solve_net(const SourceSpec& f, const std::vector<int>& axis_dims, int space_dim,
                          double oversample, int threads = 1, double diag_tol = 1e-6);

/// Default smooth test functions used by the net diagnostics.
std::vector<ScalarField> default_test_functions(int space_dim);

struct OscillatoryRow {
  int level = 0;
  int theta = 0;
  double wavenumber = 0.0;
  double weak_action = 0.0;   // |<u_k, Phi v>|
  double sup_node = 0.0;      // max |u_k| over quadrature nodes
};

/// Sweep of resolvable oscillatory sources sin(k pi x) on [0,1]: weak action
/// against a fixed smooth v collapses with k while the sup-norm proxy decays
/// only like 1/k^2. Rows with k > theta/2 are omitted.
std::vector<OscillatoryRow> oscillatory_report(const std::vector<double>& wavenumbers,
                                               const ScalarField& v,
                                               const std::vector<int>& axis_dims,
                                               double oversample);

}  // namespace ultrafun
