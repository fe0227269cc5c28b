#include "ultrafun.h"

#include <cstring>
#include <string>

#include "ultrafun/bubbling.hpp"
#include "ultrafun/dirichlet.hpp"
#include "ultrafun/experiments.hpp"
#include "ultrafun/qm.hpp"

namespace {

thread_local std::string g_last_error;

uf_status status_from(const ultrafun::Error& e) {
  switch (e.code()) {
    case ultrafun::Error::invalid_argument: return UF_ERR_INVALID_ARG;
    case ultrafun::Error::config: return UF_ERR_CONFIG;
    case ultrafun::Error::domain: return UF_ERR_DOMAIN;
    case ultrafun::Error::numeric: return UF_ERR_NUMERIC;
    case ultrafun::Error::nonconverged: return UF_ERR_NONCONVERGED;
    case ultrafun::Error::io: return UF_ERR_IO;
  }
  return UF_ERR_INTERNAL;
}

template <typename Fn>
uf_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ultrafun::Error& e) {
    g_last_error = e.what();
    return status_from(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return UF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return UF_ERR_INTERNAL;
  }
}

uf_status require_arg(bool ok, const char* msg) {
  if (ok) return UF_OK;
  g_last_error = msg;
  return UF_ERR_INVALID_ARG;
}

}  // namespace

struct uf_schedule {
  ultrafun::LevelSchedule value;
};

struct uf_net {
  ultrafun::LambdaNet value;
};

struct uf_basis {
  ultrafun::BasisSpec value;
};

struct uf_quadrature {
  ultrafun::QuadratureRule value;
};

struct uf_fun {
  ultrafun::Ultrafunction value;
};

extern "C" {

const char* uf_version(void) { return ultrafun::artifact_version(); }

const char* uf_last_error(void) { return g_last_error.c_str(); }

uf_status uf_schedule_geometric(int base, double growth, int levels, uf_schedule** out) {
  if (uf_status s = require_arg(out != nullptr, "uf_schedule_geometric: out is NULL")) return s;
  return guarded([&] {
    *out = new uf_schedule{ultrafun::make_schedule(base, growth, levels)};
    return UF_OK;
  });
}

uf_status uf_schedule_from_dims(const int* dims, int count, uf_schedule** out) {
  if (uf_status s = require_arg(out && dims && count > 0, "uf_schedule_from_dims: bad arguments"))
    return s;
  return guarded([&] {
    std::vector<int> v(dims, dims + count);
    *out = new uf_schedule{ultrafun::LevelSchedule(std::move(v))};
    return UF_OK;
  });
}

int uf_schedule_levels(const uf_schedule* schedule) {
  return schedule ? schedule->value.levels() : 0;
}

int uf_schedule_dim(const uf_schedule* schedule, int level) {
  if (!schedule || level < 0 || level >= schedule->value.levels()) return 0;
  return schedule->value.dims[static_cast<std::size_t>(level)];
}

void uf_schedule_free(uf_schedule* schedule) { delete schedule; }

uf_status uf_net_create(const uf_schedule* schedule, uf_net_eval_fn eval, void* user,
                        uf_net** out) {
  if (uf_status s = require_arg(schedule && eval && out, "uf_net_create: bad arguments")) return s;
  return guarded([&] {
    *out = new uf_net{ultrafun::LambdaNet(
        schedule->value, [eval, user](ultrafun::Level l) { return eval(l.index, l.dim, user); })};
    return UF_OK;
  });
}

uf_status uf_net_constant(const uf_schedule* schedule, double value, uf_net** out) {
  if (uf_status s = require_arg(schedule && out, "uf_net_constant: bad arguments")) return s;
  return guarded([&] {
    *out = new uf_net{ultrafun::net_const(value, schedule->value)};
    return UF_OK;
  });
}

uf_status uf_net_add(const uf_net* a, const uf_net* b, uf_net** out) {
  if (uf_status s = require_arg(a && b && out, "uf_net_add: bad arguments")) return s;
  return guarded([&] {
    *out = new uf_net{ultrafun::net_add(a->value, b->value)};
    return UF_OK;
  });
}

uf_status uf_net_mul(const uf_net* a, const uf_net* b, uf_net** out) {
  if (uf_status s = require_arg(a && b && out, "uf_net_mul: bad arguments")) return s;
  return guarded([&] {
    *out = new uf_net{ultrafun::net_mul(a->value, b->value)};
    return UF_OK;
  });
}

uf_status uf_net_value(const uf_net* net, int level, double* out) {
  if (uf_status s = require_arg(net && out, "uf_net_value: bad arguments")) return s;
  return guarded([&] {
    *out = net->value.at(level);
    return UF_OK;
  });
}

void uf_net_free(uf_net* net) { delete net; }

uf_status uf_net_classify(const uf_net* net, double tol, uf_num_class* out) {
  if (uf_status s = require_arg(net && out, "uf_net_classify: bad arguments")) return s;
  return guarded([&] {
    const ultrafun::NumClass cls = ultrafun::classify(net->value, tol);
    out->tag = static_cast<int>(cls.tag);
    out->has_shadow = cls.shadow.has_value() ? 1 : 0;
    out->shadow = cls.shadow.value_or(0.0);
    return UF_OK;
  });
}

uf_status uf_net_infinitely_close(const uf_net* a, const uf_net* b, double tol, int* out) {
  if (uf_status s = require_arg(a && b && out, "uf_net_infinitely_close: bad arguments")) return s;
  return guarded([&] {
    *out = ultrafun::infinitely_close(a->value, b->value, tol) ? 1 : 0;
    return UF_OK;
  });
}

uf_status uf_basis_create(const char* kind, int space_dim, const int* theta_axis,
                          uf_basis** out) {
  if (uf_status s = require_arg(kind && theta_axis && out, "uf_basis_create: bad arguments"))
    return s;
  return guarded([&] {
    const ultrafun::BasisKind k = ultrafun::basis_kind_from_string(kind);
    ultrafun::BasisSpec spec;
    if (k == ultrafun::BasisKind::sine_box) {
      spec = ultrafun::BasisSpec::sine_box(
          std::span<const int>(theta_axis, static_cast<std::size_t>(space_dim)));
    } else if (k == ultrafun::BasisKind::fourier_ring) {
      if (space_dim != 1) throw ultrafun::Error(ultrafun::Error::invalid_argument,
                                                "fourier_ring is one-dimensional");
      spec = ultrafun::BasisSpec::fourier_ring(theta_axis[0]);
    } else {
      if (space_dim != 1) throw ultrafun::Error(ultrafun::Error::invalid_argument,
                                                "hermite_line is one-dimensional");
      spec = ultrafun::BasisSpec::hermite_line(theta_axis[0]);
    }
    *out = new uf_basis{spec};
    return UF_OK;
  });
}

int uf_basis_theta(const uf_basis* basis) { return basis ? basis->value.theta() : 0; }

uf_status uf_basis_eval(const uf_basis* basis, int j, const double* x, double* re, double* im) {
  if (uf_status s = require_arg(basis && x, "uf_basis_eval: bad arguments")) return s;
  return guarded([&] {
    const auto v = ultrafun::basis_eval(
        basis->value, j,
        std::span<const double>(x, static_cast<std::size_t>(basis->value.space_dim)));
    if (re) *re = v.real();
    if (im) *im = v.imag();
    return UF_OK;
  });
}

void uf_basis_free(uf_basis* basis) { delete basis; }

uf_status uf_quadrature_create(const uf_basis* basis, double oversample, uf_quadrature** out) {
  if (uf_status s = require_arg(basis && out, "uf_quadrature_create: bad arguments")) return s;
  return guarded([&] {
    *out = new uf_quadrature{ultrafun::make_quadrature(basis->value, oversample)};
    return UF_OK;
  });
}

int uf_quadrature_size(const uf_quadrature* quad) {
  return quad ? static_cast<int>(quad->value.size()) : 0;
}

double uf_quadrature_weight_sum(const uf_quadrature* quad) {
  return quad ? quad->value.weight_sum() : 0.0;
}

uf_status uf_quadrature_gram_defect(const uf_basis* basis, const uf_quadrature* quad,
                                    double* out) {
  if (uf_status s = require_arg(basis && quad && out, "uf_quadrature_gram_defect: bad arguments"))
    return s;
  return guarded([&] {
    const Eigen::MatrixXcd gram = ultrafun::gram_matrix(basis->value, quad->value);
    const Eigen::MatrixXcd eye =
        Eigen::MatrixXcd::Identity(gram.rows(), gram.cols());
    *out = (gram - eye).cwiseAbs().maxCoeff();
    return UF_OK;
  });
}

void uf_quadrature_free(uf_quadrature* quad) { delete quad; }

uf_status uf_fun_from_coeffs(const uf_basis* basis, const double* coeffs, int count,
                             uf_fun** out) {
  if (uf_status s = require_arg(basis && coeffs && out, "uf_fun_from_coeffs: bad arguments"))
    return s;
  return guarded([&] {
    Eigen::VectorXd c(count);
    for (int i = 0; i < count; ++i) c[i] = coeffs[i];
    *out = new uf_fun{ultrafun::Ultrafunction(basis->value, std::move(c))};
    return UF_OK;
  });
}

uf_status uf_fun_project(const uf_basis* basis, const uf_quadrature* quad, uf_field_fn f,
                         void* user, uf_fun** out) {
  if (uf_status s = require_arg(basis && quad && f && out, "uf_fun_project: bad arguments"))
    return s;
  return guarded([&] {
    *out = new uf_fun{ultrafun::project(
        [f, user](std::span<const double> x) { return f(x.data(), user); }, basis->value,
        quad->value)};
    return UF_OK;
  });
}

uf_status uf_fun_delta(const uf_basis* basis, const double* q, uf_fun** out) {
  if (uf_status s = require_arg(basis && q && out, "uf_fun_delta: bad arguments")) return s;
  return guarded([&] {
    *out = new uf_fun{ultrafun::delta(
        basis->value,
        std::span<const double>(q, static_cast<std::size_t>(basis->value.space_dim)))};
    return UF_OK;
  });
}

int uf_fun_theta(const uf_fun* fun) { return fun ? fun->value.theta() : 0; }

uf_status uf_fun_coeffs(const uf_fun* fun, double* out, int capacity) {
  if (uf_status s = require_arg(fun && out, "uf_fun_coeffs: bad arguments")) return s;
  if (uf_status s = require_arg(capacity >= fun->value.theta(), "uf_fun_coeffs: buffer too small"))
    return s;
  for (int i = 0; i < fun->value.theta(); ++i) out[i] = fun->value.coeffs[i];
  return UF_OK;
}

uf_status uf_fun_eval(const uf_fun* fun, const double* x, double* out) {
  if (uf_status s = require_arg(fun && x && out, "uf_fun_eval: bad arguments")) return s;
  return guarded([&] {
    *out = ultrafun::eval(
        fun->value,
        std::span<const double>(x, static_cast<std::size_t>(fun->value.spec.space_dim)));
    return UF_OK;
  });
}

uf_status uf_fun_inner(const uf_fun* a, const uf_fun* b, double* out) {
  if (uf_status s = require_arg(a && b && out, "uf_fun_inner: bad arguments")) return s;
  return guarded([&] {
    *out = ultrafun::inner(a->value, b->value);
    return UF_OK;
  });
}

uf_status uf_fun_to_json(const uf_fun* fun, char* buffer, int capacity, int* needed) {
  if (uf_status s = require_arg(fun != nullptr, "uf_fun_to_json: fun is NULL")) return s;
  return guarded([&] {
    const std::string text = ultrafun::to_json(fun->value);
    if (needed) *needed = static_cast<int>(text.size());
    if (buffer && capacity > static_cast<int>(text.size())) {
      std::memcpy(buffer, text.c_str(), text.size() + 1);
    }
    return UF_OK;
  });
}

void uf_fun_free(uf_fun* fun) { delete fun; }

uf_status uf_dirichlet_solve_smooth(const uf_basis* basis, const uf_quadrature* quad,
                                    uf_field_fn f, void* user, uf_fun** out) {
  if (uf_status s =
          require_arg(basis && quad && f && out, "uf_dirichlet_solve_smooth: bad arguments"))
    return s;
  return guarded([&] {
    const ultrafun::SourceSpec source = ultrafun::SourceSpec::smooth(
        [f, user](std::span<const double> x) { return f(x.data(), user); });
    *out = new uf_fun{ultrafun::solve_level(source, basis->value, quad->value)};
    return UF_OK;
  });
}

uf_status uf_dirichlet_solve_dirac(const uf_basis* basis, const uf_quadrature* quad,
                                   const double* y, uf_fun** out) {
  if (uf_status s = require_arg(basis && quad && y && out, "uf_dirichlet_solve_dirac: bad arguments"))
    return s;
  return guarded([&] {
    const ultrafun::SourceSpec source = ultrafun::SourceSpec::dirac(
        std::span<const double>(y, static_cast<std::size_t>(basis->value.space_dim)));
    *out = new uf_fun{ultrafun::solve_level(source, basis->value, quad->value)};
    return UF_OK;
  });
}

uf_status uf_qm_box_eigenvalues(int theta, double mass, double oversample, double* out,
                                int capacity) {
  if (uf_status s = require_arg(out != nullptr, "uf_qm_box_eigenvalues: out is NULL")) return s;
  if (uf_status s = require_arg(capacity >= theta, "uf_qm_box_eigenvalues: buffer too small"))
    return s;
  return guarded([&] {
    const ultrafun::BasisSpec spec = ultrafun::BasisSpec::sine_box1(theta);
    const ultrafun::QuadratureRule quad =
        ultrafun::make_quadrature(spec, oversample > 0.0 ? oversample : 2.0);
    const ultrafun::SpectralDecomposition decomp =
        ultrafun::eigh(ultrafun::hamiltonian(spec, quad, mass));
    for (int j = 0; j < theta; ++j) out[j] = decomp.eigenvalues[j];
    return UF_OK;
  });
}

uf_status uf_qm_commutator_max_defect(const char* basis_kind, int theta, double oversample,
                                      double* out) {
  if (uf_status s = require_arg(basis_kind && out, "uf_qm_commutator_max_defect: bad arguments"))
    return s;
  return guarded([&] {
    const ultrafun::BasisKind k = ultrafun::basis_kind_from_string(basis_kind);
    ultrafun::BasisSpec spec;
    if (k == ultrafun::BasisKind::sine_box) {
      spec = ultrafun::BasisSpec::sine_box1(theta);
    } else if (k == ultrafun::BasisKind::fourier_ring) {
      spec = ultrafun::BasisSpec::fourier_ring(theta);
    } else {
      spec = ultrafun::BasisSpec::hermite_line(theta);
    }
    const ultrafun::QuadratureRule quad =
        ultrafun::make_quadrature(spec, oversample > 0.0 ? oversample : 2.0);
    const ultrafun::ObservableMatrix q = ultrafun::position_matrix(spec, quad);
    const ultrafun::ObservableMatrix p = ultrafun::momentum_matrix(spec, quad);
    const ultrafun::SpectralDecomposition decomp = ultrafun::eigh(q);
    double worst = 0.0;
    for (Eigen::Index a = 0; a < decomp.eigenvalues.size(); ++a) {
      worst = std::max(worst,
                       std::abs(ultrafun::commutator_defect(p, q, decomp.eigenvectors.col(a))));
    }
    *out = worst;
    return UF_OK;
  });
}

uf_status uf_run_experiment(const char* config_json) {
  if (uf_status s = require_arg(config_json != nullptr, "uf_run_experiment: config is NULL"))
    return s;
  return guarded([&] {
    const ultrafun::RunOutcome outcome = ultrafun::run_experiment_json(config_json);
    if (outcome.exit_code == 1) {
      g_last_error = outcome.message;
      return UF_ERR_NONCONVERGED;
    }
    return UF_OK;
  });
}

} /* extern "C" */
