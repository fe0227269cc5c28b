#include "ultrafun/quadrature.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace ultrafun {

namespace {

constexpr double kPi = 3.14159265358979323846;

int node_count(double oversample, int theta) {
  return static_cast<int>(std::ceil(oversample * theta));
}

}  // namespace

namespace detail {

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, then Newton on P_n over [-1,1].
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    {
      // One clean evaluation of P'_n at the converged node for the weight.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1,1] -> [0,1]; flip so nodes come out ascending.
    nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (x + 1.0);
    weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
  }
}

void gauss_hermite_folded(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  // Golub-Welsch on the Jacobi matrix of the (physicists') Hermite family.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(k / 2.0);
    jacobi(k - 1, k) = b;
    jacobi(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success) {
    throw Error(Error::numeric, "gauss_hermite: eigen decomposition failed");
  }
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const double x = es.eigenvalues()[i];
    nodes[static_cast<std::size_t>(i)] = x;
    // Christoffel form of the folded weight: 1 / sum_j psi_j(x)^2 stays in
    // range even where exp(x^2) would overflow.
    const std::vector<double> psi = hermite_values(n, x);
    double s = 0.0;
    for (double p : psi) s += p * p;
    weights[static_cast<std::size_t>(i)] = 1.0 / s;
  }
}

AxisTables axis_tables(const BasisSpec& spec, const QuadratureRule& quad) {
  AxisTables tables;
  const int naxes = (spec.kind == BasisKind::sine_box) ? spec.space_dim : 1;
  for (int a = 0; a < naxes; ++a) {
    const auto& xs = quad.axis_nodes[static_cast<std::size_t>(a)];
    const int n = static_cast<int>(xs.size());
    const int t = spec.theta_axis[static_cast<std::size_t>(a)];
    Eigen::MatrixXd val(n, t), der(n, t);
    for (int q = 0; q < n; ++q) {
      const double x = xs[static_cast<std::size_t>(q)];
      if (spec.kind == BasisKind::hermite_line) {
        const std::vector<double> psi = hermite_values(t + 1, x);
        for (int j = 0; j < t; ++j) {
          val(q, j) = psi[static_cast<std::size_t>(j)];
          double d = -std::sqrt((j + 1) / 2.0) * psi[static_cast<std::size_t>(j + 1)];
          if (j >= 1) d += std::sqrt(j / 2.0) * psi[static_cast<std::size_t>(j - 1)];
          der(q, j) = d;
        }
      } else {
        for (int j = 0; j < t; ++j) {
          val(q, j) = sine_value(j + 1, x);
          der(q, j) = sine_deriv(j + 1, x);
        }
      }
    }
    tables.value[static_cast<std::size_t>(a)] = std::move(val);
    tables.deriv[static_cast<std::size_t>(a)] = std::move(der);
  }
  return tables;
}

}  // namespace detail

double QuadratureRule::weight_sum() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

QuadratureRule make_quadrature(const BasisSpec& spec, double oversample) {
  if (!(oversample >= 1.0)) {
    throw Error(Error::invalid_argument, "make_quadrature: oversample must be >= 1");
  }
  QuadratureRule rule;
  rule.kind = spec.kind;
  rule.space_dim = spec.space_dim;
  rule.oversample = oversample;

  switch (spec.kind) {
    case BasisKind::sine_box: {
      int degree = 0;
      std::size_t total = 1;
      for (int a = 0; a < spec.space_dim; ++a) {
        // The +10 margin keeps the worst mode product (trig frequency
        // 2 theta pi) integrated to ~1e-12 even at small theta, where the
        // superexponential Gauss decay has not kicked in yet.
        const int n = node_count(oversample, spec.theta_axis[static_cast<std::size_t>(a)]) + 10;
        detail::gauss_legendre_01(n, rule.axis_nodes[static_cast<std::size_t>(a)],
                                  rule.axis_weights[static_cast<std::size_t>(a)]);
        degree = (a == 0) ? 2 * n - 1 : std::min(degree, 2 * n - 1);
        total *= static_cast<std::size_t>(n);
      }
      rule.exactness_degree = degree;
      rule.nodes.resize(total * static_cast<std::size_t>(spec.space_dim));
      rule.weights.resize(total);
      // Flatten the tensor grid, first axis fastest.
      for (std::size_t i = 0; i < total; ++i) {
        std::size_t rest = i;
        double w = 1.0;
        for (int a = 0; a < spec.space_dim; ++a) {
          const auto& xs = rule.axis_nodes[static_cast<std::size_t>(a)];
          const auto& ws = rule.axis_weights[static_cast<std::size_t>(a)];
          const std::size_t qa = rest % xs.size();
          rest /= xs.size();
          rule.nodes[i * static_cast<std::size_t>(spec.space_dim) + static_cast<std::size_t>(a)] =
              xs[qa];
          w *= ws[qa];
        }
        rule.weights[i] = w;
      }
      return rule;
    }
    case BasisKind::fourier_ring: {
      const int n = 2 * node_count(oversample, spec.theta()) + 1;
      rule.exactness_degree = n - 1;  // trig degree
      rule.axis_nodes[0].resize(static_cast<std::size_t>(n));
      rule.axis_weights[0].assign(static_cast<std::size_t>(n), 1.0 / n);
      for (int i = 0; i < n; ++i) {
        rule.axis_nodes[0][static_cast<std::size_t>(i)] = static_cast<double>(i) / n;
      }
      rule.nodes = rule.axis_nodes[0];
      rule.weights = rule.axis_weights[0];
      return rule;
    }
    case BasisKind::hermite_line: {
      const int n = node_count(oversample, spec.theta());
      detail::gauss_hermite_folded(n, rule.axis_nodes[0], rule.axis_weights[0]);
      rule.exactness_degree = 2 * n - 1;
      rule.nodes = rule.axis_nodes[0];
      rule.weights = rule.axis_weights[0];
      return rule;
    }
  }
  throw Error(Error::invalid_argument, "make_quadrature: unsupported basis kind");
}

Eigen::MatrixXcd gram_matrix(const BasisSpec& spec, const QuadratureRule& quad) {
  if (quad.kind != spec.kind || quad.space_dim != spec.space_dim) {
    throw Error(Error::invalid_argument, "gram_matrix: quadrature does not match basis");
  }
  const int theta = spec.theta();

  if (spec.kind == BasisKind::fourier_ring) {
    const int n = static_cast<int>(quad.size());
    Eigen::MatrixXcd b(n, theta);
    for (int q = 0; q < n; ++q) {
      const double x = quad.nodes[static_cast<std::size_t>(q)];
      for (int j = 0; j < theta; ++j) {
        const double phase = 2.0 * kPi * BasisSpec::ring_mode(j + 1) * x;
        b(q, j) = Cplx(std::cos(phase), std::sin(phase));
      }
    }
    const Eigen::VectorXd w =
        Eigen::Map<const Eigen::VectorXd>(quad.weights.data(), static_cast<Eigen::Index>(n));
    return b.adjoint() * w.asDiagonal() * b;
  }

  const detail::AxisTables tables = detail::axis_tables(spec, quad);
  const int naxes = (spec.kind == BasisKind::sine_box) ? spec.space_dim : 1;

  std::array<Eigen::MatrixXd, 3> axis_gram;
  for (int a = 0; a < naxes; ++a) {
    const auto& b = tables.value[static_cast<std::size_t>(a)];
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(
        quad.axis_weights[static_cast<std::size_t>(a)].data(),
        static_cast<Eigen::Index>(quad.axis_weights[static_cast<std::size_t>(a)].size()));
    axis_gram[static_cast<std::size_t>(a)] = b.transpose() * w.asDiagonal() * b;
  }

  Eigen::MatrixXcd gram(theta, theta);
  for (int j = 0; j < theta; ++j) {
    const auto ij = spec.multi_index(j + 1);
    for (int k = 0; k < theta; ++k) {
      const auto ik = spec.multi_index(k + 1);
      double v = 1.0;
      for (int a = 0; a < naxes; ++a) {
        v *= axis_gram[static_cast<std::size_t>(a)](ij[static_cast<std::size_t>(a)] - 1,
                                                    ik[static_cast<std::size_t>(a)] - 1);
      }
      gram(j, k) = v;
    }
  }
  return gram;
}

}  // namespace ultrafun
