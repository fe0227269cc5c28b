#include "ultrafun/bubbling.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

#include <Eigen/Dense>

#include "ultrafun/dirichlet.hpp"

namespace ultrafun {

namespace {

// |v|^p and |v|^(p-1) sgn(v) with a multiply-only fast path for integer p.
struct PowerP {
  double p;
  bool integral;
  int ip;

  explicit PowerP(double p_) : p(p_), integral(std::floor(p_) == p_ && p_ <= 64.0),
                               ip(static_cast<int>(p_)) {}

  double abs_pow(double v) const {
    const double a = std::abs(v);
    if (!integral) return std::pow(a, p);
    double r = 1.0, base = a;
    int e = ip;
    while (e > 0) {
      if (e & 1) r *= base;
      base *= base;
      e >>= 1;
    }
    return r;
  }

  double grad_term(double v) const {
    // |v|^(p-1) sgn(v)
    const double a = std::abs(v);
    const double m = integral ? abs_pow(v) / (a > 0.0 ? a : 1.0) : std::pow(a, p - 1.0);
    return v >= 0.0 ? m : -m;
  }
};

struct MpProblem {
  const BasisSpec& spec;
  const QuadratureRule& quad;
  detail::NodeEvaluator eval;
  Eigen::MatrixXd stiff;
  PowerP pw;

  MpProblem(const BasisSpec& spec_, const QuadratureRule& quad_, double p)
      : spec(spec_), quad(quad_), eval(spec_, quad_), stiff(stiffness(spec_, quad_)), pw(p) {}

  double constraint(const Eigen::VectorXd& coeffs, Eigen::VectorXd* nodes_out = nullptr) const {
    Eigen::VectorXd nodes = eval.to_nodes(coeffs);
    double c = 0.0;
    for (Eigen::Index q = 0; q < nodes.size(); ++q) {
      c += eval.weights()[q] * pw.abs_pow(nodes[q]);
    }
    if (nodes_out) *nodes_out = std::move(nodes);
    return c;
  }

  Eigen::VectorXd constraint_grad(const Eigen::VectorXd& nodes) const {
    Eigen::VectorXd g(nodes.size());
    for (Eigen::Index q = 0; q < nodes.size(); ++q) g[q] = pw.grad_term(nodes[q]);
    return pw.p * eval.from_nodes(g);
  }

  double objective(const Eigen::VectorXd& coeffs) const { return coeffs.dot(stiff * coeffs); }
};

Eigen::VectorXd bump_coefficients(const BasisSpec& spec, const QuadratureRule& quad,
                                  const std::array<double, 3>& center, double width) {
  // The bump is separable, so its projection factorizes per axis.
  const detail::AxisTables tables = detail::axis_tables(spec, quad);
  std::array<Eigen::VectorXd, 3> axis_coeffs;
  for (int a = 0; a < spec.space_dim; ++a) {
    const auto& xs = quad.axis_nodes[static_cast<std::size_t>(a)];
    const auto& ws = quad.axis_weights[static_cast<std::size_t>(a)];
    Eigen::VectorXd g(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t q = 0; q < xs.size(); ++q) {
      const double t = (xs[q] - center[static_cast<std::size_t>(a)]) / width;
      g[static_cast<Eigen::Index>(q)] = ws[q] * std::exp(-t * t);
    }
    axis_coeffs[static_cast<std::size_t>(a)] =
        tables.value[static_cast<std::size_t>(a)].transpose() * g;
  }
  const int theta = spec.theta();
  Eigen::VectorXd coeffs(theta);
  for (int j = 0; j < theta; ++j) {
    const auto idx = spec.multi_index(j + 1);
    double v = 1.0;
    for (int a = 0; a < spec.space_dim; ++a) {
      v *= axis_coeffs[static_cast<std::size_t>(a)][idx[static_cast<std::size_t>(a)] - 1];
    }
    coeffs[j] = v;
  }
  return coeffs;
}

Eigen::VectorXd random_coefficients(const BasisSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int theta = spec.theta();
  Eigen::VectorXd coeffs(theta);
  for (int j = 0; j < theta; ++j) {
    const auto idx = spec.multi_index(j + 1);
    double j2 = 0.0;
    for (int a = 0; a < spec.space_dim; ++a) {
      j2 += static_cast<double>(idx[static_cast<std::size_t>(a)]) *
            idx[static_cast<std::size_t>(a)];
    }
    coeffs[j] = gauss(rng) / (1.0 + j2);
  }
  return coeffs;
}

}  // namespace

void MinimizeOptions::validate() const {
  if (!(p > 2.0)) throw Error(Error::config, "p must be > 2");
  if (!(tol_grad > 0.0)) throw Error(Error::config, "tol_grad must be positive");
  if (restarts < 1) throw Error(Error::config, "restarts must be >= 1");
  if (max_iters < 1) throw Error(Error::config, "max_iters must be >= 1");
  if (!(step0 > 0.0)) throw Error(Error::config, "step0 must be positive");
  if (!(bump_width > 0.0)) throw Error(Error::config, "bump width must be positive");
}

MinimizeResult minimize_on_Mp(const BasisSpec& spec, const QuadratureRule& quad,
                              const MinimizeOptions& opts,
                              const std::optional<Ultrafunction>& warm_start) {
  opts.validate();
  if (spec.kind != BasisKind::sine_box) {
    throw Error(Error::invalid_argument, "minimize_on_Mp: sine_box basis required");
  }
  if (quad.oversample + 1e-12 < opts.p + 1.0) {
    throw Error(Error::config, "oversample must be >= p + 1 for the |u|^p constraint");
  }

  MpProblem prob(spec, quad, opts.p);

  Eigen::VectorXd u;
  if (warm_start) {
    u = pad_coeffs(*warm_start, spec);
  } else if (opts.init == MinimizeOptions::Init::bump) {
    u = bump_coefficients(spec, quad, opts.bump_center, opts.bump_width);
  } else {
    u = random_coefficients(spec, opts.seed);
  }

  auto renormalize = [&](Eigen::VectorXd& v) -> bool {
    const double c = prob.constraint(v);
    if (!(c > 1e-300) || !std::isfinite(c)) return false;
    v *= std::pow(c, -1.0 / opts.p);
    return true;
  };
  if (!renormalize(u)) {
    // Degenerate start (e.g. bump projected to nothing); fall back to noise.
    u = random_coefficients(spec, opts.seed + 7777);
    if (!renormalize(u)) {
      throw Error(Error::numeric, "minimize_on_Mp: cannot place the start on the constraint");
    }
  }

  MinimizeResult result{Ultrafunction::zero(spec)};
  result.seed = opts.seed;

  double step = opts.step0;
  double objective = prob.objective(u);
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    Eigen::VectorXd nodes;
    prob.constraint(u, &nodes);
    const Eigen::VectorXd grad_j = 2.0 * (prob.stiff * u);
    const Eigen::VectorXd grad_c = prob.constraint_grad(nodes);
    const double gc2 = grad_c.squaredNorm();
    if (!(gc2 > 0.0)) break;
    const double mu = grad_j.dot(grad_c) / gc2;
    const Eigen::VectorXd direction = -(grad_j - mu * grad_c);
    const double gnorm = direction.norm();
    result.grad_norm = gnorm;
    if (gnorm <= opts.tol_grad * (1.0 + grad_j.norm())) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    double eta = step;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd trial = u + eta * direction;
      if (renormalize(trial)) {
        const double trial_objective = prob.objective(trial);
        if (trial_objective <= objective - 1e-4 * eta * gnorm * gnorm) {
          u = std::move(trial);
          objective = trial_objective;
          accepted = true;
          break;
        }
      }
      eta *= 0.5;
    }
    if (!accepted) break;  // stalled at numerical stationarity
    step = std::min(eta * 4.0, 1e4 * opts.step0);
  }

  result.iterations = iter;
  result.constraint = prob.constraint(u);
  result.m_value = objective;
  result.u = Ultrafunction(spec, std::move(u));
  return result;
}

MinimizeResult minimize_best(const BasisSpec& spec, const QuadratureRule& quad,
                             const MinimizeOptions& opts, int threads,
                             const std::optional<Ultrafunction>& warm_start,
                             std::vector<MinimizeResult>* all_runs) {
  opts.validate();
  std::vector<std::optional<MinimizeResult>> slots(static_cast<std::size_t>(opts.restarts));

  auto run_one = [&](int r) {
    MinimizeOptions run_opts = opts;
    run_opts.seed = opts.seed + static_cast<std::uint64_t>(r);
    run_opts.restarts = 1;
    // Restart 0 keeps the requested start (or warm start); later restarts
    // cycle through narrower and off-center bumps, then noise. Off-center
    // starts matter: a bump at the domain center projects onto odd modes
    // only and misses the deeper concentrated branches.
    std::optional<Ultrafunction> warm = (r == 0) ? warm_start : std::nullopt;
    if (r > 0 && run_opts.init == MinimizeOptions::Init::bump) {
      static constexpr std::array<std::array<double, 3>, 3> kOffsets{
          {{0.0, 0.0, 0.0}, {-0.05, 0.05, -0.03}, {0.0625, 0.0625, 0.0625}}};
      if (r % 3 == 0) {
        run_opts.init = MinimizeOptions::Init::random;
      } else {
        const auto& shift = kOffsets[static_cast<std::size_t>(r % 3)];
        for (int a = 0; a < 3; ++a) {
          run_opts.bump_center[static_cast<std::size_t>(a)] =
              opts.bump_center[static_cast<std::size_t>(a)] + shift[static_cast<std::size_t>(a)];
        }
        run_opts.bump_width = opts.bump_width / (1.0 + r);
      }
    }
    slots[static_cast<std::size_t>(r)] = minimize_on_Mp(spec, quad, run_opts, warm);
  };

  const int workers = std::max(1, std::min(threads, opts.restarts));
  if (workers == 1) {
    for (int r = 0; r < opts.restarts; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex err_mutex;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int r = next.fetch_add(1);
          if (r >= opts.restarts || failed.load()) return;
          try {
            run_one(r);
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!failed.exchange(true)) first_error = e.what();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) throw Error(Error::numeric, "minimize_best: " + first_error);
  }

  int best = 0;
  for (int r = 1; r < opts.restarts; ++r) {
    const auto& cand = *slots[static_cast<std::size_t>(r)];
    const auto& cur = *slots[static_cast<std::size_t>(best)];
    if (cand.m_value < cur.m_value || (cand.m_value == cur.m_value && cand.seed < cur.seed)) {
      best = r;
    }
  }
  if (all_runs) {
    all_runs->clear();
    for (auto& s : slots) all_runs->push_back(*s);
  }
  return *slots[static_cast<std::size_t>(best)];
}

std::array<double, 3> barycenter(const Ultrafunction& u, double p, const QuadratureRule& quad) {
  const PowerP pw(p);
  const Eigen::VectorXd nodes = eval_at_nodes(u, quad);
  std::array<double, 3> bary{0.0, 0.0, 0.0};
  for (std::size_t q = 0; q < quad.size(); ++q) {
    const double mass = quad.weights[q] * pw.abs_pow(nodes[static_cast<Eigen::Index>(q)]);
    const auto x = quad.node(q);
    for (int a = 0; a < quad.space_dim; ++a) bary[static_cast<std::size_t>(a)] += mass * x[static_cast<std::size_t>(a)];
  }
  return bary;
}

double concentration_ratio(const Ultrafunction& u, std::span<const double> center, double radius,
                           double p, const QuadratureRule& quad) {
  if (static_cast<int>(center.size()) < quad.space_dim) {
    throw Error(Error::invalid_argument, "concentration_ratio: center dimension mismatch");
  }
  if (radius < 0.0) throw Error(Error::invalid_argument, "concentration_ratio: radius must be >= 0");
  const PowerP pw(p);
  const Eigen::VectorXd nodes = eval_at_nodes(u, quad);
  double inside = 0.0;
  for (std::size_t q = 0; q < quad.size(); ++q) {
    const auto x = quad.node(q);
    double d2 = 0.0;
    for (int a = 0; a < quad.space_dim; ++a) {
      const double d = x[static_cast<std::size_t>(a)] - center[static_cast<std::size_t>(a)];
      d2 += d * d;
    }
    if (d2 <= radius * radius) {
      inside += quad.weights[q] * pw.abs_pow(nodes[static_cast<Eigen::Index>(q)]);
    }
  }
  return inside;
}

std::vector<BubbleRow> m_table(const std::vector<double>& p_list,
                               const std::vector<int>& axis_dims, int space_dim,
                               const MinimizeOptions& base_opts, int threads,
                               double oversample_override) {
  if (space_dim < 1 || space_dim > 3) throw Error(Error::config, "dim must be 1, 2 or 3");
  if (p_list.empty()) throw Error(Error::config, "p list must not be empty");
  if (axis_dims.empty()) throw Error(Error::config, "levels must not be empty");

  std::vector<BubbleRow> rows;
  for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
    const double p = p_list[pi];
    const double oversample =
        (oversample_override > 0.0) ? oversample_override : p + 1.0;
    std::optional<Ultrafunction> warm;
    for (std::size_t li = 0; li < axis_dims.size(); ++li) {
      std::vector<int> axes(static_cast<std::size_t>(space_dim), axis_dims[li]);
      const BasisSpec spec = BasisSpec::sine_box(axes);
      const QuadratureRule quad = make_quadrature(spec, oversample);

      MinimizeOptions opts = base_opts;
      opts.p = p;
      opts.seed = base_opts.seed + 1000 * static_cast<std::uint64_t>(pi) +
                  100 * static_cast<std::uint64_t>(li);
      std::vector<MinimizeResult> runs;
      const MinimizeResult best = minimize_best(spec, quad, opts, threads, warm, &runs);

      for (const MinimizeResult& run : runs) {
        BubbleRow row;
        row.space_dim = space_dim;
        row.p = p;
        row.theta = spec.theta();
        row.m_value = run.m_value;
        row.bary = barycenter(run.u, p, quad);
        row.conc_r02 = concentration_ratio(
            run.u, std::span<const double>(row.bary.data(), static_cast<std::size_t>(space_dim)),
            0.2, p, quad);
        row.iterations = run.iterations;
        row.converged = run.converged;
        row.seed = run.seed;
        row.best = (run.seed == best.seed);
        row.constraint = run.constraint;
        rows.push_back(row);
      }
      warm = best.u;
    }
  }
  return rows;
}

}  // namespace ultrafun
