#include "ultrafun/dirichlet.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace ultrafun {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_sine_box(const BasisSpec& spec, const char* who) {
  if (spec.kind != BasisKind::sine_box) {
    throw Error(Error::invalid_argument,
                std::string(who) + ": only the sine_box family carries the homogeneous boundary");
  }
}

bool interior_point(std::span<const double> y, int dim) {
  for (int a = 0; a < dim; ++a) {
    const double c = y[static_cast<std::size_t>(a)];
    if (!(c > 0.0 && c < 1.0)) return false;
  }
  return true;
}

}  // namespace

const char* to_string(SourceSpec::Kind kind) {
  switch (kind) {
    case SourceSpec::Kind::smooth: return "smooth";
    case SourceSpec::Kind::dirac: return "dirac";
    case SourceSpec::Kind::dirac_squared: return "dirac_squared";
    case SourceSpec::Kind::oscillatory: return "oscillatory";
    case SourceSpec::Kind::coeff: return "coeff";
  }
  return "smooth";
}

SourceSpec SourceSpec::smooth(ScalarField f) {
  SourceSpec s;
  s.kind = Kind::smooth;
  s.f = std::move(f);
  return s;
}

SourceSpec SourceSpec::dirac(std::span<const double> y) {
  SourceSpec s;
  s.kind = Kind::dirac;
  for (std::size_t a = 0; a < y.size() && a < 3; ++a) s.y[a] = y[a];
  return s;
}

SourceSpec SourceSpec::dirac_squared(std::span<const double> y) {
  SourceSpec s = dirac(y);
  s.kind = Kind::dirac_squared;
  return s;
}

SourceSpec SourceSpec::oscillatory(double alpha, std::span<const double> direction) {
  SourceSpec s;
  s.kind = Kind::oscillatory;
  s.alpha = alpha;
  for (std::size_t a = 0; a < direction.size() && a < 3; ++a) s.direction[a] = direction[a];
  return s;
}

SourceSpec SourceSpec::coeff(Ultrafunction u) {
  SourceSpec s;
  s.kind = Kind::coeff;
  s.coefficients = std::move(u);
  return s;
}

void SourceSpec::validate(const BasisSpec& spec, const QuadratureRule& quad) const {
  switch (kind) {
    case Kind::smooth:
      if (!f) throw Error(Error::config, "source: smooth kind needs a function");
      return;
    case Kind::dirac:
    case Kind::dirac_squared:
      if (!interior_point(std::span<const double>(y.data(), static_cast<std::size_t>(spec.space_dim)),
                          spec.space_dim)) {
        throw Error(Error::config, "source: y must be interior to the domain");
      }
      if (kind == Kind::dirac_squared && quad.oversample < 3.0) {
        throw Error(Error::config, "source: dirac_squared requires oversample >= 3");
      }
      return;
    case Kind::oscillatory: {
      if (!(alpha >= 1.0)) throw Error(Error::config, "source: alpha must be >= 1");
      double n2 = 0.0;
      for (int a = 0; a < spec.space_dim; ++a) {
        n2 += direction[static_cast<std::size_t>(a)] * direction[static_cast<std::size_t>(a)];
      }
      if (std::abs(n2 - 1.0) > 1e-12) {
        throw Error(Error::config, "source: direction n must be a unit vector");
      }
      return;
    }
    case Kind::coeff:
      if (!coefficients || !(coefficients->spec == spec)) {
        throw Error(Error::config, "source: coeff kind needs an ultrafunction on the same basis");
      }
      return;
  }
}

Eigen::MatrixXd stiffness(const BasisSpec& spec, const QuadratureRule& quad) {
  check_sine_box(spec, "stiffness");
  if (quad.kind != spec.kind || quad.space_dim != spec.space_dim) {
    throw Error(Error::invalid_argument, "stiffness: quadrature does not match basis");
  }
  const detail::AxisTables tables = detail::axis_tables(spec, quad);
  const int naxes = spec.space_dim;

  std::array<Eigen::MatrixXd, 3> mass, stiff;
  for (int a = 0; a < naxes; ++a) {
    const Eigen::Map<const Eigen::VectorXd> w(
        quad.axis_weights[static_cast<std::size_t>(a)].data(),
        static_cast<Eigen::Index>(quad.axis_weights[static_cast<std::size_t>(a)].size()));
    const auto& b = tables.value[static_cast<std::size_t>(a)];
    const auto& d = tables.deriv[static_cast<std::size_t>(a)];
    mass[static_cast<std::size_t>(a)] = b.transpose() * w.asDiagonal() * b;
    stiff[static_cast<std::size_t>(a)] = d.transpose() * w.asDiagonal() * d;
  }

  const int theta = spec.theta();
  Eigen::MatrixXd a_mat(theta, theta);
  for (int j = 0; j < theta; ++j) {
    const auto ij = spec.multi_index(j + 1);
    for (int k = 0; k < theta; ++k) {
      const auto ik = spec.multi_index(k + 1);
      double sum = 0.0;
      for (int axis = 0; axis < naxes; ++axis) {
        double term = 1.0;
        for (int b = 0; b < naxes; ++b) {
          const auto& factor = (b == axis) ? stiff[static_cast<std::size_t>(b)]
                                           : mass[static_cast<std::size_t>(b)];
          term *= factor(ij[static_cast<std::size_t>(b)] - 1, ik[static_cast<std::size_t>(b)] - 1);
        }
        sum += term;
      }
      a_mat(j, k) = sum;
    }
  }
  return a_mat;
}

Eigen::VectorXd load_vector(const SourceSpec& f, const BasisSpec& spec,
                            const QuadratureRule& quad) {
  f.validate(spec, quad);
  switch (f.kind) {
    case SourceSpec::Kind::smooth:
      return project(f.f, spec, quad).coeffs;
    case SourceSpec::Kind::dirac:
      return basis_values_at_point(
          spec, std::span<const double>(f.y.data(), static_cast<std::size_t>(spec.space_dim)));
    case SourceSpec::Kind::dirac_squared: {
      const Ultrafunction d = delta(
          spec, std::span<const double>(f.y.data(), static_cast<std::size_t>(spec.space_dim)));
      const Eigen::VectorXd values = eval_at_nodes(d, quad);
      return project_from_nodes(values.cwiseProduct(values), spec, quad);
    }
    case SourceSpec::Kind::oscillatory: {
      const double alpha = f.alpha;
      const auto n = f.direction;
      const int dim = spec.space_dim;
      return project(
                 [alpha, n, dim](std::span<const double> x) {
                   double t = 0.0;
                   for (int a = 0; a < dim; ++a) t += n[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
                   return std::sin(alpha * kPi * t);
                 },
                 spec, quad)
          .coeffs;
    }
    case SourceSpec::Kind::coeff:
      return f.coefficients->coeffs;
  }
  throw Error(Error::invalid_argument, "load_vector: unknown source kind");
}

Ultrafunction solve_level(const SourceSpec& f, const BasisSpec& spec,
                          const QuadratureRule& quad) {
  check_sine_box(spec, "solve_level");
  const Eigen::MatrixXd a_mat = stiffness(spec, quad);
  const Eigen::VectorXd b = load_vector(f, spec, quad);

  Eigen::LLT<Eigen::MatrixXd> llt(a_mat);
  if (llt.info() != Eigen::Success) {
    throw Error(Error::numeric, "solve_level: stiffness factorization failed (singular system)");
  }
  Eigen::VectorXd u = llt.solve(b);
  u += llt.solve(b - a_mat * u);  // one refinement step pins the residual down

  const double residual = (a_mat * u - b).norm();
  const double scale = std::max(b.norm(), 1e-300);
  if (residual > 1e-10 * scale) {
    throw Error(Error::numeric, "solve_level: residual exceeds 1e-10 * |b|");
  }
  return Ultrafunction(spec, std::move(u));
}

double energy(const Ultrafunction& u, const SourceSpec& f, const QuadratureRule& quad) {
  const Eigen::MatrixXd a_mat = stiffness(u.spec, quad);
  const double quadratic = 0.5 * u.coeffs.dot(a_mat * u.coeffs);

  double load = 0.0;
  switch (f.kind) {
    case SourceSpec::Kind::dirac:
      load = eval(u, std::span<const double>(f.y.data(), static_cast<std::size_t>(u.spec.space_dim)));
      break;
    default:
      load = load_vector(f, u.spec, quad).dot(u.coeffs);
      break;
  }
  return quadratic - load;
}

std::vector<ScalarField> default_test_functions(int space_dim) {
  auto bump1 = [](double x, double c, double w) {
    const double t = (x - c) / w;
    if (std::abs(t) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - t * t));
  };
  std::vector<ScalarField> tests;
  const std::array<std::array<double, 2>, 3> params{{{0.45, 0.35}, {0.62, 0.27}, {0.3, 0.22}}};
  for (const auto& p : params) {
    const double c = p[0], w = p[1];
    tests.push_back([bump1, c, w, space_dim](std::span<const double> x) {
      double v = 1.0;
      for (int a = 0; a < space_dim; ++a) v *= bump1(x[static_cast<std::size_t>(a)], c, w);
      return v;
    });
  }
  return tests;
}

DirichletResult solve_net(const SourceSpec& f, const std::vector<int>& axis_dims, int space_dim,
                          double oversample, int threads, double diag_tol) {
  if (space_dim < 1 || space_dim > 3) {
    throw Error(Error::config, "solve_net: space_dim must be 1, 2 or 3");
  }
  std::vector<int> totals;
  totals.reserve(axis_dims.size());
  for (int m : axis_dims) {
    int t = 1;
    for (int a = 0; a < space_dim; ++a) t *= m;
    totals.push_back(t);
  }
  LevelSchedule schedule(totals, "dirichlet levels");

  UltrafunNet net = make_ultrafun_net(
      schedule,
      [&](Level l) {
        std::vector<int> axes(static_cast<std::size_t>(space_dim),
                              axis_dims[static_cast<std::size_t>(l.index)]);
        const BasisSpec spec = BasisSpec::sine_box(axes);
        const QuadratureRule quad = make_quadrature(spec, oversample);
        return solve_level(f, spec, quad);
      },
      threads);

  DirichletResult result{std::move(net), {}};
  const std::vector<ScalarField> tests = default_test_functions(space_dim);
  for (int k = 0; k < schedule.levels(); ++k) {
    const Ultrafunction& u = result.net.levels[static_cast<std::size_t>(k)];
    const QuadratureRule quad = make_quadrature(u.spec, oversample);
    const Eigen::MatrixXd a_mat = stiffness(u.spec, quad);
    const Eigen::VectorXd b = load_vector(f, u.spec, quad);
    DirichletLevelRow row;
    row.level = k;
    row.theta = u.theta();
    row.residual = (a_mat * u.coeffs - b).norm();
    row.energy = 0.5 * u.coeffs.dot(a_mat * u.coeffs) -
                 ((f.kind == SourceSpec::Kind::dirac)
                      ? eval(u, std::span<const double>(f.y.data(),
                                                        static_cast<std::size_t>(space_dim)))
                      : b.dot(u.coeffs));
    if (k >= 1) {
      std::vector<int> prefix(totals.begin(), totals.begin() + k + 1);
      std::vector<Ultrafunction> prefix_levels(result.net.levels.begin(),
                                               result.net.levels.begin() + k + 1);
      UltrafunNet prefix_net(LevelSchedule(prefix, "prefix"), std::move(prefix_levels));
      row.prefix_tag = classify_diagnostic(prefix_net, tests, diag_tol, oversample);
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::vector<OscillatoryRow> oscillatory_report(const std::vector<double>& wavenumbers,
                                               const ScalarField& v,
                                               const std::vector<int>& axis_dims,
                                               double oversample) {
  std::vector<OscillatoryRow> rows;
  const double dir[1] = {1.0};
  for (std::size_t k = 0; k < axis_dims.size(); ++k) {
    const int theta = axis_dims[k];
    const BasisSpec spec = BasisSpec::sine_box1(theta);
    const QuadratureRule quad = make_quadrature(spec, oversample);
    const Ultrafunction test_fn = project(v, spec, quad);
    for (double wavenumber : wavenumbers) {
      if (wavenumber > theta / 2.0) continue;  // unresolved at this level
      const SourceSpec src = SourceSpec::oscillatory(wavenumber, dir);
      const Ultrafunction u = solve_level(src, spec, quad);
      OscillatoryRow row;
      row.level = static_cast<int>(k);
      row.theta = theta;
      row.wavenumber = wavenumber;
      row.weak_action = std::abs(inner(u, test_fn));
      row.sup_node = eval_at_nodes(u, quad).cwiseAbs().maxCoeff();
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace ultrafun
