#include "ultrafun/ultrafunction.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "ultrafun/format.hpp"

namespace ultrafun {

namespace {

void check_real_family(const BasisSpec& spec, const char* who) {
  if (spec.kind == BasisKind::fourier_ring) {
    throw Error(Error::invalid_argument,
                std::string(who) + ": fourier_ring states are complex; use the qm module types");
  }
}

void check_same_spec(const Ultrafunction& u, const Ultrafunction& v, const char* who) {
  if (!(u.spec == v.spec)) {
    throw Error(Error::invalid_argument, std::string(who) + ": basis spec mismatch");
  }
}

void check_quad(const Ultrafunction& u, const QuadratureRule& quad, const char* who) {
  if (quad.kind != u.spec.kind || quad.space_dim != u.spec.space_dim) {
    throw Error(Error::invalid_argument, std::string(who) + ": quadrature does not match basis");
  }
}

std::string point_text(std::span<const double> x) {
  std::string s = "(";
  for (std::size_t a = 0; a < x.size(); ++a) {
    if (a) s += ", ";
    s += fmt17(x[a]);
  }
  return s + ")";
}

// y = (M_0 (x) M_1 (x) M_2) x for per-axis matrices, with the first axis
// running fastest in both input and output layouts.
Eigen::VectorXd tensor_apply(const std::array<const Eigen::MatrixXd*, 3>& mats, int naxes,
                             const Eigen::VectorXd& x) {
  Eigen::VectorXd cur = x;
  std::array<Eigen::Index, 3> shape{1, 1, 1};
  for (int a = 0; a < naxes; ++a) shape[static_cast<std::size_t>(a)] = mats[static_cast<std::size_t>(a)]->cols();

  // axis 0
  {
    const Eigen::MatrixXd& m = *mats[0];
    const Eigen::Index rest = cur.size() / shape[0];
    Eigen::Map<const Eigen::MatrixXd> in(cur.data(), shape[0], rest);
    Eigen::MatrixXd out = m * in;
    shape[0] = m.rows();
    cur = Eigen::Map<Eigen::VectorXd>(out.data(), out.size());
  }
  if (naxes >= 2) {
    const Eigen::MatrixXd& m = *mats[1];
    const Eigen::Index slice = shape[0] * shape[1];
    const Eigen::Index nslices = cur.size() / slice;
    Eigen::VectorXd next(shape[0] * m.rows() * nslices);
    for (Eigen::Index s = 0; s < nslices; ++s) {
      Eigen::Map<const Eigen::MatrixXd> in(cur.data() + s * slice, shape[0], shape[1]);
      Eigen::Map<Eigen::MatrixXd> out(next.data() + s * shape[0] * m.rows(), shape[0], m.rows());
      out = in * m.transpose();
    }
    shape[1] = m.rows();
    cur = std::move(next);
  }
  if (naxes >= 3) {
    const Eigen::MatrixXd& m = *mats[2];
    const Eigen::Index lead = shape[0] * shape[1];
    Eigen::Map<const Eigen::MatrixXd> in(cur.data(), lead, shape[2]);
    Eigen::MatrixXd out = in * m.transpose();
    cur = Eigen::Map<Eigen::VectorXd>(out.data(), out.size());
  }
  return cur;
}

}  // namespace

Ultrafunction::Ultrafunction(BasisSpec spec_, Eigen::VectorXd coeffs_)
    : spec(spec_), coeffs(std::move(coeffs_)) {
  check_real_family(spec, "Ultrafunction");
  if (coeffs.size() != spec.theta()) {
    throw Error(Error::invalid_argument, "Ultrafunction: coefficient count does not match theta");
  }
  if (!coeffs.allFinite()) {
    throw Error(Error::numeric, "Ultrafunction: non-finite coefficient");
  }
}

Ultrafunction Ultrafunction::zero(const BasisSpec& spec) {
  return Ultrafunction(spec, Eigen::VectorXd::Zero(spec.theta()));
}

Eigen::VectorXd basis_values_at_point(const BasisSpec& spec, std::span<const double> x) {
  check_real_family(spec, "basis_values_at_point");
  spec.check_point(x);
  const int theta = spec.theta();
  Eigen::VectorXd out(theta);
  if (spec.kind == BasisKind::hermite_line) {
    const std::vector<double> psi = detail::hermite_values(theta, x[0]);
    for (int j = 0; j < theta; ++j) out[j] = psi[static_cast<std::size_t>(j)];
    return out;
  }
  std::array<std::vector<double>, 3> axis_vals;
  for (int a = 0; a < spec.space_dim; ++a) {
    const int t = spec.theta_axis[static_cast<std::size_t>(a)];
    axis_vals[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(t));
    for (int j = 0; j < t; ++j) {
      axis_vals[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] =
          detail::sine_value(j + 1, x[static_cast<std::size_t>(a)]);
    }
  }
  for (int j = 0; j < theta; ++j) {
    int rest = j;
    double v = 1.0;
    for (int a = 0; a < spec.space_dim; ++a) {
      const int t = spec.theta_axis[static_cast<std::size_t>(a)];
      v *= axis_vals[static_cast<std::size_t>(a)][static_cast<std::size_t>(rest % t)];
      rest /= t;
    }
    out[j] = v;
  }
  return out;
}

double eval(const Ultrafunction& u, std::span<const double> x) {
  return u.coeffs.dot(basis_values_at_point(u.spec, x));
}

double inner(const Ultrafunction& u, const Ultrafunction& v) {
  check_same_spec(u, v, "inner");
  return u.coeffs.dot(v.coeffs);
}

double inner_quadrature(const Ultrafunction& u, const Ultrafunction& v,
                        const QuadratureRule& quad) {
  check_same_spec(u, v, "inner_quadrature");
  const Eigen::VectorXd un = eval_at_nodes(u, quad);
  const Eigen::VectorXd vn = eval_at_nodes(v, quad);
  const Eigen::Map<const Eigen::VectorXd> w(quad.weights.data(),
                                            static_cast<Eigen::Index>(quad.weights.size()));
  return un.cwiseProduct(w).dot(vn);
}

double norm(const Ultrafunction& u) { return u.coeffs.norm(); }

namespace detail {

NodeEvaluator::NodeEvaluator(const BasisSpec& spec, const QuadratureRule& quad) {
  check_real_family(spec, "NodeEvaluator");
  if (quad.kind != spec.kind || quad.space_dim != spec.space_dim) {
    throw Error(Error::invalid_argument, "NodeEvaluator: quadrature does not match basis");
  }
  naxes_ = (spec.kind == BasisKind::sine_box) ? spec.space_dim : 1;
  const AxisTables tables = axis_tables(spec, quad);
  for (int a = 0; a < naxes_; ++a) {
    value_[static_cast<std::size_t>(a)] = tables.value[static_cast<std::size_t>(a)];
    value_t_[static_cast<std::size_t>(a)] = tables.value[static_cast<std::size_t>(a)].transpose();
  }
  weights_ = Eigen::Map<const Eigen::VectorXd>(quad.weights.data(),
                                               static_cast<Eigen::Index>(quad.weights.size()));
}

Eigen::VectorXd NodeEvaluator::to_nodes(const Eigen::VectorXd& coeffs) const {
  std::array<const Eigen::MatrixXd*, 3> mats{&value_[0], &value_[1], &value_[2]};
  return tensor_apply(mats, naxes_, coeffs);
}

Eigen::VectorXd NodeEvaluator::from_nodes(const Eigen::VectorXd& node_values) const {
  std::array<const Eigen::MatrixXd*, 3> mats{&value_t_[0], &value_t_[1], &value_t_[2]};
  return tensor_apply(mats, naxes_, node_values.cwiseProduct(weights_));
}

}  // namespace detail

Eigen::VectorXd eval_at_nodes(const Ultrafunction& u, const QuadratureRule& quad) {
  check_quad(u, quad, "eval_at_nodes");
  return detail::NodeEvaluator(u.spec, quad).to_nodes(u.coeffs);
}

Eigen::VectorXd project_from_nodes(const Eigen::VectorXd& node_values, const BasisSpec& spec,
                                   const QuadratureRule& quad) {
  if (node_values.size() != static_cast<Eigen::Index>(quad.size())) {
    throw Error(Error::invalid_argument, "project_from_nodes: node count mismatch");
  }
  return detail::NodeEvaluator(spec, quad).from_nodes(node_values);
}

Ultrafunction project(const ScalarField& f, const BasisSpec& spec, const QuadratureRule& quad) {
  check_real_family(spec, "project");
  if (!f) throw Error(Error::invalid_argument, "project: missing function");
  const std::size_t n = quad.size();
  Eigen::VectorXd values(static_cast<Eigen::Index>(n));
  for (std::size_t q = 0; q < n; ++q) {
    const auto x = quad.node(q);
    const double v = f(x);
    if (!std::isfinite(v)) {
      throw Error(Error::numeric, "project: non-finite source value at node " + point_text(x));
    }
    values[static_cast<Eigen::Index>(q)] = v;
  }
  return Ultrafunction(spec, project_from_nodes(values, spec, quad));
}

Ultrafunction delta(const BasisSpec& spec, std::span<const double> q) {
  return Ultrafunction(spec, basis_values_at_point(spec, q));
}

Ultrafunction dual_project(const std::function<double(int)>& action, const BasisSpec& spec) {
  check_real_family(spec, "dual_project");
  if (!action) throw Error(Error::invalid_argument, "dual_project: missing action");
  const int theta = spec.theta();
  Eigen::VectorXd coeffs(theta);
  for (int j = 1; j <= theta; ++j) {
    const double v = action(j);
    if (!std::isfinite(v)) {
      throw Error(Error::numeric, "dual_project: non-finite action on element " + std::to_string(j));
    }
    coeffs[j - 1] = v;
  }
  return Ultrafunction(spec, std::move(coeffs));
}

ExtendResult extend_op(const std::function<double(double)>& g, const Ultrafunction& u,
                       const QuadratureRule& quad) {
  if (!g) throw Error(Error::invalid_argument, "extend_op: missing operator");
  check_quad(u, quad, "extend_op");

  auto image_coeffs = [&](const QuadratureRule& rule) {
    const Eigen::VectorXd un = eval_at_nodes(u, rule);
    Eigen::VectorXd img(un.size());
    for (Eigen::Index q = 0; q < un.size(); ++q) {
      const double v = g(un[q]);
      if (!std::isfinite(v)) {
        throw Error(Error::numeric, "extend_op: non-finite image value at node " +
                                        point_text(rule.node(static_cast<std::size_t>(q))));
      }
      img[q] = v;
    }
    return project_from_nodes(img, u.spec, rule);
  };

  Eigen::VectorXd coarse = image_coeffs(quad);
  const QuadratureRule fine = make_quadrature(u.spec, quad.oversample + 1.0);
  const Eigen::VectorXd refined = image_coeffs(fine);
  const double aliasing = (refined - coarse).norm() / std::max(1.0, coarse.norm());
  return ExtendResult{Ultrafunction(u.spec, std::move(coarse)), aliasing};
}

std::string to_json(const Ultrafunction& u) {
  std::string out = "{\"basis_kind\":\"";
  out += to_string(u.spec.kind);
  out += "\",\"space_dim\":";
  out += std::to_string(u.spec.space_dim);
  out += ",\"theta\":";
  out += std::to_string(u.theta());
  out += ",\"theta_axis\":[";
  for (int a = 0; a < u.spec.space_dim; ++a) {
    if (a) out += ',';
    out += std::to_string(u.spec.theta_axis[static_cast<std::size_t>(a)]);
  }
  out += "],\"coeffs\":[";
  for (int j = 0; j < u.theta(); ++j) {
    if (j) out += ',';
    out += fmt17(u.coeffs[j]);
  }
  out += "]}";
  return out;
}

Ultrafunction ultrafunction_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw Error(Error::io, std::string("ultrafunction_from_json: ") + e.what());
  }
  const std::string kind_name = j.at("basis_kind").get<std::string>();
  const BasisKind kind = basis_kind_from_string(kind_name);
  const int dim = j.at("space_dim").get<int>();
  std::vector<int> axis = j.value("theta_axis", std::vector<int>{});
  if (axis.empty()) axis.assign(1, j.at("theta").get<int>());
  BasisSpec spec;
  if (kind == BasisKind::sine_box) {
    spec = BasisSpec::sine_box(axis);
  } else if (kind == BasisKind::hermite_line) {
    spec = BasisSpec::hermite_line(axis.at(0));
  } else {
    spec = BasisSpec::fourier_ring(axis.at(0));
  }
  if (spec.space_dim != dim) {
    throw Error(Error::io, "ultrafunction_from_json: space_dim does not match theta_axis");
  }
  const std::vector<double> coeffs = j.at("coeffs").get<std::vector<double>>();
  Eigen::VectorXd c(static_cast<Eigen::Index>(coeffs.size()));
  for (std::size_t i = 0; i < coeffs.size(); ++i) c[static_cast<Eigen::Index>(i)] = coeffs[i];
  return Ultrafunction(spec, std::move(c));
}

Eigen::VectorXd pad_coeffs(const Ultrafunction& from, const BasisSpec& to) {
  if (!from.spec.same_family(to)) {
    throw Error(Error::invalid_argument, "pad_coeffs: basis families differ");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(to.theta());
  for (int j = 1; j <= from.theta(); ++j) {
    const auto idx = from.spec.multi_index(j);
    bool fits = true;
    for (int a = 0; a < to.space_dim; ++a) {
      if (idx[static_cast<std::size_t>(a)] > to.theta_axis[static_cast<std::size_t>(a)]) {
        fits = false;
        break;
      }
    }
    if (fits) out[to.linear_index(idx) - 1] = from.coeffs[j - 1];
  }
  return out;
}

UltrafunNet::UltrafunNet(LevelSchedule schedule_, std::vector<Ultrafunction> levels_)
    : schedule(std::move(schedule_)), levels(std::move(levels_)) {
  if (levels.size() != schedule.dims.size()) {
    throw Error(Error::invalid_argument, "UltrafunNet: one ultrafunction per level required");
  }
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (levels[k].theta() != schedule.dims[k]) {
      throw Error(Error::invalid_argument, "UltrafunNet: level dimension mismatch");
    }
  }
}

UltrafunNet make_ultrafun_net(const LevelSchedule& schedule,
                              const std::function<Ultrafunction(Level)>& build, int threads) {
  if (!build) throw Error(Error::invalid_argument, "make_ultrafun_net: missing builder");
  const int K = schedule.levels();
  std::vector<std::optional<Ultrafunction>> slots(static_cast<std::size_t>(K));
  const int workers = std::max(1, std::min(threads, K));
  if (workers == 1) {
    for (int k = 0; k < K; ++k) slots[static_cast<std::size_t>(k)] = build(Level{k, schedule.dim(k)});
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::string first_error;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int k = next.fetch_add(1);
          if (k >= K || failed.load()) return;
          try {
            slots[static_cast<std::size_t>(k)] = build(Level{k, schedule.dim(k)});
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!failed.exchange(true)) first_error = e.what();
            return;
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!failed.exchange(true)) first_error = "unknown error";
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) throw Error(Error::numeric, "make_ultrafun_net: " + first_error);
  }
  std::vector<Ultrafunction> levels;
  levels.reserve(static_cast<std::size_t>(K));
  for (auto& s : slots) levels.push_back(std::move(*s));
  return UltrafunNet(schedule, std::move(levels));
}

const char* to_string(DiagnosticTag tag) {
  switch (tag) {
    case DiagnosticTag::standard_like: return "standard-like";
    case DiagnosticTag::distributional_like: return "distributional-like";
    case DiagnosticTag::proper_like: return "proper-like";
  }
  return "proper-like";
}

DiagnosticTag classify_diagnostic(const UltrafunNet& net, const std::vector<ScalarField>& tests,
                                  double tol, double oversample) {
  if (net.levels.size() < 2) {
    throw Error(Error::invalid_argument, "classify_diagnostic: need at least two levels");
  }
  if (!(tol > 0.0)) throw Error(Error::invalid_argument, "classify_diagnostic: tol must be positive");

  const std::size_t K = net.levels.size();
  const Ultrafunction& last = net.levels[K - 1];
  const Eigen::VectorXd padded = pad_coeffs(net.levels[K - 2], last.spec);
  if ((padded - last.coeffs).norm() < tol) return DiagnosticTag::standard_like;

  // Coefficients keep moving; decide by the action nets against the tests.
  // Actions converge at the truncation rate, not the rounding rate, so they
  // are classified at the softer sqrt(tol).
  const double action_tol = std::sqrt(tol);
  for (const ScalarField& phi : tests) {
    std::vector<double> actions(K);
    for (std::size_t k = 0; k < K; ++k) {
      const Ultrafunction& uk = net.levels[k];
      const QuadratureRule quad = make_quadrature(uk.spec, oversample);
      actions[k] = inner(uk, project(phi, uk.spec, quad));
    }
    LambdaNet action_net(net.schedule, [actions](Level l) {
      return actions[static_cast<std::size_t>(l.index)];
    });
    const NumTag tag = classify(action_net, action_tol).tag;
    if (tag != NumTag::finite && tag != NumTag::infinitesimal) {
      return DiagnosticTag::proper_like;
    }
  }
  return DiagnosticTag::distributional_like;
}

}  // namespace ultrafun
