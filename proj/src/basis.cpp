#include "ultrafun/basis.hpp"

#include <cmath>

namespace ultrafun {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require(bool ok, Error::Code code, const char* msg) {
  if (!ok) throw Error(code, msg);
}

}  // namespace

const char* to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::sine_box: return "sine_box";
    case BasisKind::fourier_ring: return "fourier_ring";
    case BasisKind::hermite_line: return "hermite_line";
  }
  return "sine_box";
}

BasisKind basis_kind_from_string(const std::string& name) {
  if (name == "sine_box") return BasisKind::sine_box;
  if (name == "fourier_ring") return BasisKind::fourier_ring;
  if (name == "hermite_line") return BasisKind::hermite_line;
  throw Error(Error::config, "unknown basis kind: " + name);
}

BasisSpec BasisSpec::sine_box(std::span<const int> axis_modes) {
  require(!axis_modes.empty() && axis_modes.size() <= 3, Error::invalid_argument,
          "sine_box: need 1..3 axes");
  BasisSpec spec;
  spec.kind = BasisKind::sine_box;
  spec.space_dim = static_cast<int>(axis_modes.size());
  for (std::size_t a = 0; a < axis_modes.size(); ++a) {
    require(axis_modes[a] >= 1, Error::invalid_argument, "sine_box: axis modes must be >= 1");
    spec.theta_axis[a] = axis_modes[a];
  }
  return spec;
}

BasisSpec BasisSpec::sine_box1(int theta) {
  const int axes[1] = {theta};
  return sine_box(axes);
}

BasisSpec BasisSpec::fourier_ring(int theta) {
  require(theta >= 1, Error::invalid_argument, "fourier_ring: theta must be >= 1");
  BasisSpec spec;
  spec.kind = BasisKind::fourier_ring;
  spec.space_dim = 1;
  spec.theta_axis = {theta, 1, 1};
  return spec;
}

BasisSpec BasisSpec::hermite_line(int theta) {
  require(theta >= 1, Error::invalid_argument, "hermite_line: theta must be >= 1");
  BasisSpec spec;
  spec.kind = BasisKind::hermite_line;
  spec.space_dim = 1;
  spec.theta_axis = {theta, 1, 1};
  return spec;
}

std::array<int, 3> BasisSpec::multi_index(int j) const {
  check_index(j);
  std::array<int, 3> idx{1, 1, 1};
  int rest = j - 1;
  for (int a = 0; a < space_dim; ++a) {
    const int t = theta_axis[static_cast<std::size_t>(a)];
    idx[static_cast<std::size_t>(a)] = rest % t + 1;
    rest /= t;
  }
  return idx;
}

int BasisSpec::linear_index(const std::array<int, 3>& idx) const {
  int j = 0;
  for (int a = space_dim - 1; a >= 0; --a) {
    const int t = theta_axis[static_cast<std::size_t>(a)];
    const int ja = idx[static_cast<std::size_t>(a)];
    require(ja >= 1 && ja <= t, Error::invalid_argument, "linear_index: axis index out of range");
    j = j * t + (ja - 1);
  }
  return j + 1;
}

int BasisSpec::ring_mode(int j) {
  // 1 -> 0, 2 -> +1, 3 -> -1, 4 -> +2, 5 -> -2, ...
  const int half = j / 2;
  return (j % 2 == 0) ? half : -half;
}

void BasisSpec::check_point(std::span<const double> x) const {
  require(static_cast<int>(x.size()) == space_dim, Error::invalid_argument,
          "point dimension does not match basis");
  for (double c : x) {
    require(std::isfinite(c), Error::domain, "point coordinate is not finite");
    if (kind == BasisKind::sine_box) {
      require(c >= 0.0 && c <= 1.0, Error::domain, "point outside the unit box");
    }
  }
}

void BasisSpec::check_index(int j) const {
  require(j >= 1 && j <= theta(), Error::invalid_argument, "basis index out of range");
}

namespace detail {

double sine_value(int j, double x) { return std::sqrt(2.0) * std::sin(j * kPi * x); }

double sine_deriv(int j, double x) { return std::sqrt(2.0) * j * kPi * std::cos(j * kPi * x); }

std::vector<double> hermite_values(int count, double x) {
  std::vector<double> psi(static_cast<std::size_t>(count));
  if (count <= 0) return psi;
  const double psi0 = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  psi[0] = psi0;
  if (count == 1) return psi;
  psi[1] = std::sqrt(2.0) * x * psi0;
  for (int n = 1; n + 1 < count; ++n) {
    psi[static_cast<std::size_t>(n + 1)] =
        x * std::sqrt(2.0 / (n + 1)) * psi[static_cast<std::size_t>(n)] -
        std::sqrt(static_cast<double>(n) / (n + 1)) * psi[static_cast<std::size_t>(n - 1)];
  }
  return psi;
}

// psi_n'(x) = sqrt(n/2) psi_{n-1} - sqrt((n+1)/2) psi_{n+1}
double hermite_deriv(int n, double x) {
  const std::vector<double> psi = hermite_values(n + 2, x);
  double d = -std::sqrt((n + 1) / 2.0) * psi[static_cast<std::size_t>(n + 1)];
  if (n >= 1) d += std::sqrt(n / 2.0) * psi[static_cast<std::size_t>(n - 1)];
  return d;
}

}  // namespace detail

double basis_eval_real(const BasisSpec& spec, int j, std::span<const double> x) {
  spec.check_index(j);
  spec.check_point(x);
  switch (spec.kind) {
    case BasisKind::sine_box: {
      const auto idx = spec.multi_index(j);
      double v = 1.0;
      for (int a = 0; a < spec.space_dim; ++a) {
        v *= detail::sine_value(idx[static_cast<std::size_t>(a)], x[static_cast<std::size_t>(a)]);
      }
      return v;
    }
    case BasisKind::hermite_line:
      return detail::hermite_values(j, x[0])[static_cast<std::size_t>(j - 1)];
    case BasisKind::fourier_ring:
      throw Error(Error::invalid_argument,
                  "fourier_ring elements are complex; use basis_eval");
  }
  return 0.0;
}

Cplx basis_eval(const BasisSpec& spec, int j, std::span<const double> x) {
  if (spec.kind == BasisKind::fourier_ring) {
    spec.check_index(j);
    spec.check_point(x);
    const int m = BasisSpec::ring_mode(j);
    const double phase = 2.0 * kPi * m * x[0];
    return Cplx(std::cos(phase), std::sin(phase));
  }
  return Cplx(basis_eval_real(spec, j, x), 0.0);
}

Eigen::VectorXd basis_grad_real(const BasisSpec& spec, int j, std::span<const double> x) {
  spec.check_index(j);
  spec.check_point(x);
  Eigen::VectorXd g(spec.space_dim);
  switch (spec.kind) {
    case BasisKind::sine_box: {
      const auto idx = spec.multi_index(j);
      for (int a = 0; a < spec.space_dim; ++a) {
        double v = 1.0;
        for (int b = 0; b < spec.space_dim; ++b) {
          const int jb = idx[static_cast<std::size_t>(b)];
          const double xb = x[static_cast<std::size_t>(b)];
          v *= (a == b) ? detail::sine_deriv(jb, xb) : detail::sine_value(jb, xb);
        }
        g[a] = v;
      }
      return g;
    }
    case BasisKind::hermite_line:
      g[0] = detail::hermite_deriv(j - 1, x[0]);
      return g;
    case BasisKind::fourier_ring:
      throw Error(Error::invalid_argument,
                  "fourier_ring gradients are complex; use basis_grad");
  }
  return g;
}

Eigen::VectorXcd basis_grad(const BasisSpec& spec, int j, std::span<const double> x) {
  if (spec.kind == BasisKind::fourier_ring) {
    const Cplx v = basis_eval(spec, j, x);
    const int m = BasisSpec::ring_mode(j);
    Eigen::VectorXcd g(1);
    g[0] = Cplx(0.0, 2.0 * kPi * m) * v;
    return g;
  }
  return basis_grad_real(spec, j, x).cast<Cplx>();
}

}  // namespace ultrafun
