#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ultrafun/levels.hpp"
#include "ultrafun/quadrature.hpp"

namespace ultrafun {

/// Coefficient vector over the first theta elements of a real basis family,
/// representing u(x) = sum_j u_j e_j(x).
///
/// The complex fourier_ring family is handled by the qm module's matrix and
/// state types; ultrafunctions here stay real.
struct Ultrafunction {
  BasisSpec spec;
  Eigen::VectorXd coeffs;

  Ultrafunction(BasisSpec spec_, Eigen::VectorXd coeffs_);

  int theta() const noexcept { return static_cast<int>(coeffs.size()); }
  static Ultrafunction zero(const BasisSpec& spec);
};

/// Values of all theta basis elements at one point.
Eigen::VectorXd basis_values_at_point(const BasisSpec& spec, std::span<const double> x);

/// Pointwise evaluation sum_j u_j e_j(x).
double eval(const Ultrafunction& u, std::span<const double> x);

/// Scalar product via coefficients (the basis is orthonormal).
double inner(const Ultrafunction& u, const Ultrafunction& v);

/// Cross-check path: sum_q w_q u(x_q) v(x_q).
double inner_quadrature(const Ultrafunction& u, const Ultrafunction& v,
                        const QuadratureRule& quad);

/// L2 coefficient norm.
double norm(const Ultrafunction& u);

/// u evaluated at every quadrature node (tensorized for the box family).
Eigen::VectorXd eval_at_nodes(const Ultrafunction& u, const QuadratureRule& quad);

/// Adjoint of eval_at_nodes: coefficients sum_q w_q v_q e_j(x_q) of the
/// function with the given node values.
Eigen::VectorXd project_from_nodes(const Eigen::VectorXd& node_values, const BasisSpec& spec,
                                   const QuadratureRule& quad);

using ScalarField = std::function<double(std::span<const double>)>;

namespace detail {

/// Reusable coefficient <-> node-value transforms for one (spec, quad) pair;
/// caches the per-axis tables so optimizer loops do not rebuild them.
class NodeEvaluator {
 public:
  NodeEvaluator(const BasisSpec& spec, const QuadratureRule& quad);

  /// Node values of sum_j c_j e_j.
  Eigen::VectorXd to_nodes(const Eigen::VectorXd& coeffs) const;

  /// Coefficients sum_q w_q v_q e_j(x_q) of given node values.
  Eigen::VectorXd from_nodes(const Eigen::VectorXd& node_values) const;

  const Eigen::VectorXd& weights() const noexcept { return weights_; }

 private:
  int naxes_;
  std::array<Eigen::MatrixXd, 3> value_;
  std::array<Eigen::MatrixXd, 3> value_t_;
  Eigen::VectorXd weights_;
};

}  // namespace detail

/// Orthogonal projection of a pointwise-evaluable function onto the span:
/// u_j = sum_q w_q f(x_q) e_j(x_q). Idempotent on functions in the span.
Ultrafunction project(const ScalarField& f, const BasisSpec& spec, const QuadratureRule& quad);

/// Dirac ultrafunction concentrated at q: coefficients e_j(q). Reproduces
/// point evaluation against everything in the span.
Ultrafunction delta(const BasisSpec& spec, std::span<const double> q);

/// Ultrafunction of a linear functional given by its action on the basis
/// elements (1-based index).
Ultrafunction dual_project(const std::function<double(int)>& action, const BasisSpec& spec);

struct ExtendResult {
  Ultrafunction fun;
  /// Relative coefficient difference against a once-finer quadrature; a
  /// large value flags aliasing of the nonlinear image.
  double aliasing_rel = 0.0;
};

/// Canonical extension of a pointwise operator: evaluate g on the node values
/// of u, project back into the span.
ExtendResult extend_op(const std::function<double(double)>& g, const Ultrafunction& u,
                       const QuadratureRule& quad);

/// JSON record {basis_kind, space_dim, theta, theta_axis, coeffs}; numbers
/// carry 17 significant digits.
std::string to_json(const Ultrafunction& u);
Ultrafunction ultrafunction_from_json(const std::string& text);

/// Zero-padding embedding between nested spans of the same family.
Eigen::VectorXd pad_coeffs(const Ultrafunction& from, const BasisSpec& to);

/// Per-level ultrafunctions along a schedule of total dimensions.
struct UltrafunNet {
  LevelSchedule schedule;
  std::vector<Ultrafunction> levels;

  UltrafunNet(LevelSchedule schedule_, std::vector<Ultrafunction> levels_);
};

/// Build a net level by level; levels may be computed in worker threads, the
/// result is identical for any thread count.
UltrafunNet make_ultrafun_net(const LevelSchedule& schedule,
                              const std::function<Ultrafunction(Level)>& build, int threads = 1);

enum class DiagnosticTag { standard_like, distributional_like, proper_like };

const char* to_string(DiagnosticTag tag);

/// Classify a net of ultrafunctions:
///   standard-like       coefficients stabilize in l2 across the last levels;
///   distributional-like actions against every test function converge;
///   proper-like         otherwise.
DiagnosticTag classify_diagnostic(const UltrafunNet& net, const std::vector<ScalarField>& tests,
                                  double tol, double oversample = 2.0);

}  // namespace ultrafun
