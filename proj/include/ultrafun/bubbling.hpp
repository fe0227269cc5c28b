#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ultrafun/ultrafunction.hpp"

namespace ultrafun {

/// Options for minimizing J(u) = u^T A u over the discrete constraint set
/// { sum_q w_q |u(x_q)|^p = 1 }.
struct MinimizeOptions {
  double p = 4.0;
  int max_iters = 800;
  double step0 = 0.5;
  double tol_grad = 1e-5;  // stationarity: |grad J - mu grad c| <= tol_grad * (1 + |grad J|)
  int restarts = 1;
  std::uint64_t seed = 1234;

  enum class Init { bump, random };
  Init init = Init::bump;
  std::array<double, 3> bump_center{0.5, 0.5, 0.5};
  double bump_width = 0.22;

  void validate() const;
};

struct MinimizeResult {
  Ultrafunction u;
  double m_value = 0.0;
  int iterations = 0;
  bool converged = false;
  double constraint = 0.0;  // value of sum w |u|^p at return
  double grad_norm = 0.0;
  std::uint64_t seed = 0;
};

/// One projected-gradient run: descent step, rescale onto the constraint,
/// Armijo backtracking on J. Returns the final iterate even when stationarity
/// was not reached (converged = false, never silent).
MinimizeResult minimize_on_Mp(const BasisSpec& spec, const QuadratureRule& quad,
                              const MinimizeOptions& opts,
                              const std::optional<Ultrafunction>& warm_start = std::nullopt);

/// Best of opts.restarts independent runs (restart index perturbs the seed
/// and the initial profile); ties between equal minima break by seed.
/// all_runs, when given, receives every restart in seed order.
MinimizeResult minimize_best(const BasisSpec& spec, const QuadratureRule& quad,
                             const MinimizeOptions& opts, int threads = 1,
                             const std::optional<Ultrafunction>& warm_start = std::nullopt,
                             std::vector<MinimizeResult>* all_runs = nullptr);

/// Mass centroid sum_q w_q x_q |u(x_q)|^p, one component per axis.
std::array<double, 3> barycenter(const Ultrafunction& u, double p, const QuadratureRule& quad);

/// Fraction of the constraint mass inside the ball |x - center| <= radius.
double concentration_ratio(const Ultrafunction& u, std::span<const double> center, double radius,
                           double p, const QuadratureRule& quad);

struct BubbleRow {
  int space_dim = 0;
  double p = 0.0;
  int theta = 0;
  double m_value = 0.0;
  std::array<double, 3> bary{};
  double conc_r02 = 0.0;  // concentration ratio at radius 0.2 around the barycenter
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  bool best = false;       // best restart of its (p, level) group
  double constraint = 0.0; // value of sum w |u|^p at return (feasibility check)
};

/// Minimize per (p, level) with warm starts carried across levels by
/// zero-padding; one row per restart, in (p, level, restart) order.
std::vector<BubbleRow> m_table(const std::vector<double>& p_list,
                               const std::vector<int>& axis_dims, int space_dim,
                               const MinimizeOptions& base_opts, int threads = 1,
                               double oversample_override = 0.0);

}  // namespace ultrafun
