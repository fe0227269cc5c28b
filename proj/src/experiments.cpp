#include "ultrafun/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include <json.hpp>

#include "ultrafun/bubbling.hpp"
#include "ultrafun/dirichlet.hpp"
#include "ultrafun/format.hpp"
#include "ultrafun/qm.hpp"

namespace ultrafun {

namespace {

constexpr double kPi = 3.14159265358979323846;

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw Error(Error::config, "config field '" + field + "': " + why);
}

const std::set<std::string>& allowed_keys(const std::string& command) {
  static const std::set<std::string> common{"command", "output", "format", "seed", "threads"};
  static const std::set<std::string> net_demo = [] {
    auto s = common;
    s.insert({"tol", "levels"});
    return s;
  }();
  static const std::set<std::string> dirichlet_keys = [] {
    auto s = common;
    s.insert({"tol", "oversample", "levels", "dim", "source", "y", "grid"});
    return s;
  }();
  static const std::set<std::string> green_keys = [] {
    auto s = common;
    s.insert({"tol", "oversample", "levels", "dim", "y", "grid"});
    return s;
  }();
  static const std::set<std::string> oscillatory_keys = [] {
    auto s = common;
    s.insert({"tol", "oversample", "levels", "k"});
    return s;
  }();
  static const std::set<std::string> bubble_keys = [] {
    auto s = common;
    s.insert({"tol", "oversample", "levels", "dim", "p", "restarts", "max_iters", "step0",
              "tol_grad", "init", "max_axis"});
    return s;
  }();
  static const std::set<std::string> qm_keys = [] {
    auto s = common;
    s.insert({"oversample", "theta", "mass"});
    return s;
  }();
  static const std::set<std::string> qm_comm_keys = [] {
    auto s = common;
    s.insert({"oversample", "theta", "basis"});
    return s;
  }();
  if (command == "net-demo") return net_demo;
  if (command == "dirichlet") return dirichlet_keys;
  if (command == "green") return green_keys;
  if (command == "oscillatory") return oscillatory_keys;
  if (command == "bubble") return bubble_keys;
  if (command == "qm-box" || command == "qm-ring") return qm_keys;
  if (command == "qm-commutator") return qm_comm_keys;
  throw Error(Error::config, "config field 'command': unknown command '" + command + "'");
}

std::vector<int> parse_levels(const json& value) {
  std::vector<int> dims;
  if (value.is_array()) {
    for (const auto& v : value) {
      if (!v.is_number_integer()) bad_field("levels", "explicit dims must be integers");
      dims.push_back(v.get<int>());
    }
  } else if (value.is_string()) {
    // "base:growth:count"
    const std::string text = value.get<std::string>();
    int base = 0, count = 0;
    double growth = 0.0;
    if (std::sscanf(text.c_str(), "%d:%lf:%d", &base, &growth, &count) != 3) {
      bad_field("levels", "expected base:growth:count or an array of dims");
    }
    const LevelSchedule schedule = make_schedule(base, growth, count);
    dims = schedule.dims;
  } else {
    bad_field("levels", "expected base:growth:count or an array of dims");
  }
  if (dims.size() < 1) bad_field("levels", "at least one level required");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 1) bad_field("levels", "dims must be >= 1");
    if (i > 0 && dims[i] <= dims[i - 1]) bad_field("levels", "dims must be strictly increasing");
  }
  return dims;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ULTRAFUN_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw Error(Error::io, "cannot create directory " + p.parent_path().string());
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Error::io, "cannot open " + path + " for writing");
  out << content;
  if (!out) throw Error(Error::io, "write failed for " + path);
}

std::string grid_path(const std::string& output) {
  const std::filesystem::path p(output);
  std::filesystem::path q = p;
  q.replace_extension("");
  return q.string() + "_grid" + (p.has_extension() ? p.extension().string() : std::string(".csv"));
}

// Tabular output shared by the CSV-producing commands.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += columns[c];
    }
    out += '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += ',';
        out += row[c];
      }
      out += '\n';
    }
    return out;
  }

  std::string to_json(const std::string& command) const {
    std::string out = "{\"command\":\"" + command + "\",\"rows\":[";
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r) out += ',';
      out += '{';
      for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c) out += ',';
        out += '"' + columns[c] + "\":";
        const std::string& v = rows[r][c];
        const bool numeric = !v.empty() && (std::isdigit(static_cast<unsigned char>(v[0])) ||
                                            v[0] == '-' || v[0] == '+');
        if (numeric && v != "+inf" && v != "-inf") {
          out += v;
        } else {
          out += '"' + v + '"';
        }
      }
      out += '}';
    }
    out += "]}\n";
    return out;
  }
};

std::string render(const Table& table, const ExperimentConfig& cfg) {
  return cfg.format == "json" ? table.to_json(cfg.command) : table.to_csv();
}

ScalarField product_field(int dim, const std::function<double(double)>& f1) {
  return [dim, f1](std::span<const double> x) {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= f1(x[static_cast<std::size_t>(a)]);
    return v;
  };
}

SourceSpec make_source(const ExperimentConfig& cfg) {
  std::array<double, 3> y{0.5, 0.5, 0.5};
  for (std::size_t a = 0; a < cfg.y.size() && a < 3; ++a) y[a] = cfg.y[a];
  if (cfg.source == "sinpi") {
    return SourceSpec::smooth(product_field(cfg.dim, [](double x) { return std::sin(kPi * x); }));
  }
  if (cfg.source == "bump") {
    return SourceSpec::smooth(product_field(cfg.dim, [](double x) {
      const double t = (x - 0.5) / 0.3;
      return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
    }));
  }
  if (cfg.source == "dirac") {
    return SourceSpec::dirac(std::span<const double>(y.data(), static_cast<std::size_t>(cfg.dim)));
  }
  if (cfg.source == "dirac2") {
    return SourceSpec::dirac_squared(
        std::span<const double>(y.data(), static_cast<std::size_t>(cfg.dim)));
  }
  bad_field("source", "expected one of sinpi, bump, dirac, dirac2");
}

// --- command runners ----------------------------------------------------

RunOutcome run_net_demo(const ExperimentConfig& cfg) {
  LevelSchedule schedule(cfg.axis_dims, "net-demo");
  std::vector<std::pair<std::string, LambdaNet>> nets;
  nets.emplace_back("const_3", net_const(3.0, schedule));
  nets.emplace_back("inv_theta", LambdaNet(schedule, [](Level l) { return 1.0 / l.dim; }));
  nets.emplace_back("theta", LambdaNet(schedule, [](Level l) { return static_cast<double>(l.dim); }));
  nets.emplace_back("three_plus_inv_theta",
                    LambdaNet(schedule, [](Level l) { return 3.0 + 1.0 / l.dim; }));
  nets.emplace_back("geometric_sum", hyperfinite_sum(
                                         [](Level l) {
                                           std::vector<double> terms(static_cast<std::size_t>(l.dim));
                                           double t = 0.5;
                                           for (int j = 0; j < l.dim; ++j) {
                                             terms[static_cast<std::size_t>(j)] = t;
                                             t *= 0.5;
                                           }
                                           return terms;
                                         },
                                         schedule));
  nets.emplace_back("harmonic_sum", hyperfinite_sum(
                                        [](Level l) {
                                          std::vector<double> terms(static_cast<std::size_t>(l.dim));
                                          for (int j = 0; j < l.dim; ++j) {
                                            terms[static_cast<std::size_t>(j)] = 1.0 / (j + 1);
                                          }
                                          return terms;
                                        },
                                        schedule));

  Table table;
  table.columns = {"net", "level", "theta", "value", "tag", "shadow"};
  for (const auto& [name, net] : nets) {
    const NumClass cls = classify(net, cfg.tol);
    std::string shadow;
    if (cls.shadow) {
      if (std::isinf(*cls.shadow)) {
        shadow = *cls.shadow > 0 ? "+inf" : "-inf";
      } else {
        shadow = fmt17(*cls.shadow);
      }
    }
    for (int k = 0; k < schedule.levels(); ++k) {
      table.rows.push_back({name, std::to_string(k), std::to_string(schedule.dim(k)),
                            fmt17(net.at(k)), to_string(cls.tag), shadow});
    }
  }
  write_file(cfg.output, render(table, cfg));
  return RunOutcome{0, {cfg.output}, ""};
}

RunOutcome run_dirichlet(const ExperimentConfig& cfg) {
  const SourceSpec source = make_source(cfg);
  const double oversample =
      cfg.oversample > 0.0 ? cfg.oversample : (cfg.source == "dirac2" ? 3.0 : 2.0);
  const DirichletResult result =
      solve_net(source, cfg.axis_dims, cfg.dim, oversample, resolve_threads(cfg.threads), cfg.tol);

  Table table;
  table.columns = {"level", "theta", "residual", "energy", "classification"};
  for (const auto& row : result.rows) {
    table.rows.push_back({std::to_string(row.level), std::to_string(row.theta),
                          fmt17(row.residual), fmt17(row.energy),
                          row.prefix_tag ? to_string(*row.prefix_tag) : "n/a"});
  }
  write_file(cfg.output, render(table, cfg));
  RunOutcome outcome{0, {cfg.output}, ""};

  if (cfg.grid > 1) {
    Table grid;
    grid.columns = {"level", "theta"};
    for (int a = 0; a < cfg.dim; ++a) grid.columns.push_back("x" + std::to_string(a));
    grid.columns.push_back("u");
    for (std::size_t k = 0; k < result.net.levels.size(); ++k) {
      const Ultrafunction& u = result.net.levels[k];
      std::vector<double> x(static_cast<std::size_t>(cfg.dim), 0.0);
      std::size_t points = 1;
      for (int a = 0; a < cfg.dim; ++a) points *= static_cast<std::size_t>(cfg.grid);
      for (std::size_t i = 0; i < points; ++i) {
        std::size_t rest = i;
        for (int a = 0; a < cfg.dim; ++a) {
          const auto idx = rest % static_cast<std::size_t>(cfg.grid);
          rest /= static_cast<std::size_t>(cfg.grid);
          x[static_cast<std::size_t>(a)] =
              static_cast<double>(idx) / static_cast<double>(cfg.grid - 1);
        }
        std::vector<std::string> row{std::to_string(k), std::to_string(u.theta())};
        for (int a = 0; a < cfg.dim; ++a) row.push_back(fmt17(x[static_cast<std::size_t>(a)]));
        row.push_back(fmt17(eval(u, x)));
        grid.rows.push_back(std::move(row));
      }
    }
    const std::string path = grid_path(cfg.output);
    write_file(path, render(grid, cfg));
    outcome.files.push_back(path);
  }
  return outcome;
}

RunOutcome run_oscillatory(const ExperimentConfig& cfg) {
  const double oversample = cfg.oversample > 0.0 ? cfg.oversample : 2.0;
  // Fixed smooth probe, asymmetric so every mode couples to it.
  const ScalarField v = [](std::span<const double> x) {
    const double t = x[0];
    return t * t * (1.0 - t) * (1.0 - t) * std::exp(t);
  };
  const std::vector<OscillatoryRow> rows =
      oscillatory_report(cfg.k_list, v, cfg.axis_dims, oversample);
  Table table;
  table.columns = {"level", "theta", "k", "weak_action", "sup_node"};
  for (const auto& row : rows) {
    table.rows.push_back({std::to_string(row.level), std::to_string(row.theta),
                          fmt17(row.wavenumber), fmt17(row.weak_action), fmt17(row.sup_node)});
  }
  write_file(cfg.output, render(table, cfg));
  return RunOutcome{0, {cfg.output}, ""};
}

RunOutcome run_bubble(const ExperimentConfig& cfg) {
  MinimizeOptions opts;
  opts.max_iters = cfg.max_iters;
  opts.step0 = cfg.step0;
  opts.tol_grad = cfg.tol_grad;
  opts.restarts = cfg.restarts;
  opts.seed = cfg.seed;
  opts.init = (cfg.init == "random") ? MinimizeOptions::Init::random : MinimizeOptions::Init::bump;

  const std::vector<BubbleRow> rows = m_table(cfg.p_list, cfg.axis_dims, cfg.dim, opts,
                                              resolve_threads(cfg.threads), cfg.oversample);

  Table table;
  table.columns = {"N", "p", "theta", "m", "bx", "by", "bz", "conc_r02", "iters", "converged",
                   "seed"};
  bool best_nonconverged = false;
  for (const auto& row : rows) {
    if (row.best && !row.converged) best_nonconverged = true;
    table.rows.push_back({std::to_string(row.space_dim), fmt17(row.p), std::to_string(row.theta),
                          fmt17(row.m_value), fmt17(row.bary[0]), fmt17(row.bary[1]),
                          fmt17(row.bary[2]), fmt17(row.conc_r02), std::to_string(row.iterations),
                          row.converged ? "1" : "0", std::to_string(row.seed)});
  }
  write_file(cfg.output, render(table, cfg));
  RunOutcome outcome{best_nonconverged ? 1 : 0, {cfg.output}, ""};
  if (best_nonconverged) outcome.message = "best restart did not converge for at least one (p, level)";
  return outcome;
}

// Fidelity of the evolved two-mode superposition over one relative-phase
// period T = 2 pi / (E_b - E_a).
std::vector<double> fidelity_series(const SpectralDecomposition& decomp) {
  const Eigen::Index n = decomp.eigenvalues.size();
  if (n < 2) return {};
  Eigen::Index b = 1;
  while (b < n && std::abs(decomp.eigenvalues[b] - decomp.eigenvalues[0]) < 1e-12) ++b;
  if (b == n) return {};
  const double period = 2.0 * kPi / (decomp.eigenvalues[b] - decomp.eigenvalues[0]);
  const Eigen::VectorXcd psi0 =
      ((decomp.eigenvectors.col(0) + decomp.eigenvectors.col(b)) / std::sqrt(2.0)).eval();
  std::vector<double> fidelity;
  fidelity.reserve(17);
  for (int i = 0; i <= 16; ++i) {
    const double t = period * i / 16.0;
    const Eigen::VectorXcd psi_t = evolve(decomp, psi0, t);
    fidelity.push_back(std::abs(psi0.dot(psi_t)));
  }
  return fidelity;
}

std::string qm_json(int theta, const Eigen::VectorXd& eigenvalues,
                    const std::vector<double>& defects, const std::vector<double>& fidelity) {
  std::string out = "{\"theta\":" + std::to_string(theta) + ",\"eigenvalues\":[";
  for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) {
    if (j) out += ',';
    out += fmt17(eigenvalues[j]);
  }
  out += "],\"defects\":[";
  for (std::size_t j = 0; j < defects.size(); ++j) {
    if (j) out += ',';
    out += fmt17(defects[j]);
  }
  out += "],\"fidelity_series\":[";
  for (std::size_t j = 0; j < fidelity.size(); ++j) {
    if (j) out += ',';
    out += fmt17(fidelity[j]);
  }
  out += "]}\n";
  return out;
}

std::vector<double> commutator_defects(const ObservableMatrix& p, const ObservableMatrix& q,
                                       const SpectralDecomposition& q_decomp) {
  std::vector<double> defects;
  defects.reserve(static_cast<std::size_t>(q_decomp.eigenvalues.size()));
  for (Eigen::Index a = 0; a < q_decomp.eigenvalues.size(); ++a) {
    defects.push_back(std::abs(commutator_defect(p, q, q_decomp.eigenvectors.col(a))));
  }
  return defects;
}

RunOutcome run_qm(const ExperimentConfig& cfg) {
  const double oversample = cfg.oversample > 0.0 ? cfg.oversample : 2.0;
  BasisSpec spec;
  if (cfg.command == "qm-box") {
    spec = BasisSpec::sine_box1(cfg.theta);
  } else if (cfg.command == "qm-ring") {
    spec = BasisSpec::fourier_ring(cfg.theta);
  } else {
    spec = (cfg.qm_basis == "hermite_line") ? BasisSpec::hermite_line(cfg.theta)
           : (cfg.qm_basis == "fourier_ring") ? BasisSpec::fourier_ring(cfg.theta)
                                              : BasisSpec::sine_box1(cfg.theta);
  }
  const QuadratureRule quad = make_quadrature(spec, oversample);
  const ObservableMatrix q_obs = position_matrix(spec, quad);
  const ObservableMatrix p_obs = momentum_matrix(spec, quad);
  const SpectralDecomposition q_decomp = eigh(q_obs);
  const std::vector<double> defects = commutator_defects(p_obs, q_obs, q_decomp);

  std::string payload;
  if (cfg.command == "qm-commutator") {
    payload = qm_json(cfg.theta, q_decomp.eigenvalues, defects, {});
  } else {
    const ObservableMatrix h = hamiltonian(spec, quad, cfg.mass);
    const SpectralDecomposition h_decomp = eigh(h);
    payload = qm_json(cfg.theta, h_decomp.eigenvalues, defects, fidelity_series(h_decomp));
  }
  write_file(cfg.output, payload);
  return RunOutcome{0, {cfg.output}, ""};
}

}  // namespace

const char* artifact_version() { return "0.1.0"; }

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw Error(Error::config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Error::config, "config must be a JSON object");
  if (!j.contains("command") || !j["command"].is_string()) {
    bad_field("command", "required string");
  }

  ExperimentConfig cfg;
  cfg.command = j["command"].get<std::string>();
  const std::set<std::string>& allowed = allowed_keys(cfg.command);
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) {
      throw Error(Error::config, "unknown config key '" + key + "' for command " + cfg.command);
    }
  }

  auto get_int = [&](const char* key, int fallback, int lo, int hi) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) bad_field(key, "must be an integer");
    const int v = j[key].get<int>();
    if (v < lo || v > hi) {
      bad_field(key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
  };
  auto get_double = [&](const char* key, double fallback, double lo) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) bad_field(key, "must be a number");
    const double v = j[key].get<double>();
    if (!(v >= lo)) bad_field(key, "must be >= " + fmt17(lo));
    return v;
  };
  auto get_string = [&](const char* key, const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_string()) bad_field(key, "must be a string");
    return j[key].get<std::string>();
  };

  cfg.format = get_string("format", cfg.command.rfind("qm", 0) == 0 ? "json" : "csv");
  if (cfg.format != "csv" && cfg.format != "json") bad_field("format", "must be csv or json");
  if (cfg.command.rfind("qm", 0) == 0 && cfg.format != "json") {
    bad_field("format", "qm commands emit json only");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
      bad_field("seed", "must be a nonnegative integer");
    }
    const auto s = j["seed"].get<std::int64_t>();
    if (s < 0) bad_field("seed", "must be a nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  cfg.threads = get_int("threads", 0, 0, 4096);
  cfg.tol = get_double("tol", 1e-6, 0.0);
  if (!(cfg.tol > 0.0)) bad_field("tol", "must be positive");
  cfg.oversample = get_double("oversample", 0.0, 0.0);
  if (j.contains("oversample") && cfg.oversample < 1.0) bad_field("oversample", "must be >= 1");

  if (j.contains("levels")) {
    cfg.axis_dims = parse_levels(j["levels"]);
  } else if (cfg.command == "net-demo") {
    cfg.axis_dims = {4, 8, 16, 32};
  } else if (cfg.command == "bubble") {
    cfg.axis_dims = {4, 6, 8};
  } else {
    cfg.axis_dims = {16, 32, 64};
  }

  cfg.dim = get_int("dim", cfg.command == "bubble" ? 3 : 1, 1, 3);

  if (cfg.command == "dirichlet") cfg.source = get_string("source", "sinpi");
  if (cfg.command == "green") cfg.source = "dirac";
  if (j.contains("y")) {
    if (!j["y"].is_array()) {
      if (!j["y"].is_number()) bad_field("y", "must be a number or an array of numbers");
      cfg.y = {j["y"].get<double>()};
    } else {
      cfg.y = j["y"].get<std::vector<double>>();
    }
    for (double c : cfg.y) {
      if (!(c > 0.0 && c < 1.0)) bad_field("y", "coordinates must be interior to (0,1)");
    }
  }
  cfg.grid = get_int("grid", cfg.command == "green" ? 101 : 0, 0, 100000);
  if (cfg.grid == 1) bad_field("grid", "needs at least 2 points per axis (or 0 to disable)");

  if (cfg.command == "oscillatory") {
    if (j.contains("k")) {
      if (!j["k"].is_array()) bad_field("k", "must be an array of wavenumbers");
      cfg.k_list = j["k"].get<std::vector<double>>();
    } else {
      cfg.k_list = {4.0, 8.0, 16.0, 32.0};
    }
    for (double k : cfg.k_list) {
      if (!(k >= 1.0)) bad_field("k", "wavenumbers must be >= 1");
    }
  }

  if (cfg.command == "bubble") {
    if (!j.contains("p")) bad_field("p", "required for bubble (list of exponents > 2)");
    if (j["p"].is_number()) {
      cfg.p_list = {j["p"].get<double>()};
    } else if (j["p"].is_array()) {
      cfg.p_list = j["p"].get<std::vector<double>>();
    } else {
      bad_field("p", "must be a number or an array");
    }
    double p_max = 0.0;
    for (double p : cfg.p_list) {
      if (!(p > 2.0)) bad_field("p", "exponents must be > 2");
      p_max = std::max(p_max, p);
    }
    cfg.restarts = get_int("restarts", 3, 1, 64);
    cfg.max_iters = get_int("max_iters", 800, 1, 1000000);
    cfg.step0 = get_double("step0", 0.5, 0.0);
    if (!(cfg.step0 > 0.0)) bad_field("step0", "must be positive");
    cfg.tol_grad = get_double("tol_grad", 1e-5, 0.0);
    if (!(cfg.tol_grad > 0.0)) bad_field("tol_grad", "must be positive");
    cfg.init = get_string("init", "bump");
    if (cfg.init != "bump" && cfg.init != "random") bad_field("init", "must be bump or random");
    cfg.max_axis = get_int("max_axis", 8, 1, 64);
    if (cfg.oversample > 0.0 && cfg.oversample + 1e-12 < p_max + 1.0) {
      bad_field("oversample", "must be >= p + 1 for the |u|^p constraint");
    }
    // Geometric level requests are capped to the per-axis budget.
    std::vector<int> capped;
    for (int d : cfg.axis_dims) {
      if (d <= cfg.max_axis) capped.push_back(d);
    }
    if (capped.empty()) bad_field("levels", "all levels exceed max_axis");
    cfg.axis_dims = capped;
  }

  if (cfg.command.rfind("qm", 0) == 0) {
    cfg.theta = get_int("theta", cfg.command == "qm-ring" ? 17 : 32, 1, 4096);
    cfg.mass = get_double("mass", 1.0, 0.0);
    if (!(cfg.mass > 0.0)) bad_field("mass", "must be positive");
    if (cfg.command == "qm-commutator") {
      const std::string raw = get_string("basis", "sine_box");
      if (raw == "sine_box" || raw == "box" || raw == "sine") {
        cfg.qm_basis = "sine_box";
      } else if (raw == "fourier_ring" || raw == "ring" || raw == "fourier") {
        cfg.qm_basis = "fourier_ring";
      } else if (raw == "hermite_line" || raw == "hermite") {
        cfg.qm_basis = "hermite_line";
      } else {
        bad_field("basis", "expected sine_box, fourier_ring or hermite_line");
      }
    }
  }

  const bool json_default = cfg.command.rfind("qm", 0) == 0 || cfg.format == "json";
  cfg.output = get_string("output", cfg.command + (json_default ? ".json" : ".csv"));
  if (cfg.output.empty()) bad_field("output", "must not be empty");

  // Echo the resolved configuration for the manifest.
  json resolved = j;
  resolved["command"] = cfg.command;
  resolved["output"] = cfg.output;
  resolved["format"] = cfg.format;
  resolved["seed"] = cfg.seed;
  resolved["threads"] = cfg.threads;
  resolved["levels"] = cfg.axis_dims;
  cfg.resolved_json = resolved.dump();
  return cfg;
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  if (cfg.command == "net-demo") {
    outcome = run_net_demo(cfg);
  } else if (cfg.command == "dirichlet" || cfg.command == "green") {
    outcome = run_dirichlet(cfg);
  } else if (cfg.command == "oscillatory") {
    outcome = run_oscillatory(cfg);
  } else if (cfg.command == "bubble") {
    outcome = run_bubble(cfg);
  } else if (cfg.command.rfind("qm", 0) == 0) {
    outcome = run_qm(cfg);
  } else {
    throw Error(Error::config, "config field 'command': unknown command '" + cfg.command + "'");
  }

  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  json manifest;
  manifest["config"] = json::parse(cfg.resolved_json);
  manifest["version"] = artifact_version();
  manifest["wall_time_ms"] = elapsed;
  manifest["threads_resolved"] = resolve_threads(cfg.threads);
  manifest["files"] = outcome.files;
  manifest["exit_code"] = outcome.exit_code;
  write_file(cfg.output + ".manifest.json", manifest.dump(2) + "\n");
  return outcome;
}

RunOutcome run_experiment_json(const std::string& json_text) {
  return run_experiment(parse_experiment_config(json_text));
}

}  // namespace ultrafun
