// ufcli: experiment driver over the ultrafun C API.
//
// Subcommands mirror the experiment runner: net-demo, dirichlet, green,
// oscillatory, bubble, qm-box, qm-ring, qm-commutator. Flags resolve to one
// flat JSON config that is handed to uf_run_experiment; a config file
// (key=value lines or a JSON object) supplies defaults that command-line
// flags override.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ultrafun.h"

namespace {

using nlohmann::json;

struct OptionSpec {
  std::string name;         // flag name without dashes, also the config key
  std::string help;
  bool is_list = false;     // comma-separated numbers
  bool is_int = false;
  bool is_number = false;   // double
  bool is_levels = false;   // "base:growth:count" or comma list of dims
};

struct Subcommand {
  std::string name;
  std::string help;
  std::vector<OptionSpec> options;
  std::vector<std::string> required;
};

const std::vector<Subcommand>& subcommands() {
  static const OptionSpec output{"output", "output data file path", false, false, false, false};
  static const OptionSpec format{"format", "csv or json", false, false, false, false};
  static const OptionSpec seed{"seed", "random seed", false, true, false, false};
  static const OptionSpec threads{"threads", "worker threads (0 = auto)", false, true, false, false};
  static const OptionSpec tol{"tol", "classification tolerance", false, false, true, false};
  static const OptionSpec oversample{"oversample", "quadrature oversampling factor", false, false,
                                     true, false};
  static const OptionSpec levels{"levels", "level schedule: base:growth:count or dim list",
                                 false, false, false, true};
  static const OptionSpec dim{"dim", "space dimension (1..3)", false, true, false, false};
  static const OptionSpec theta{"theta", "basis size", false, true, false, false};
  static const OptionSpec mass{"mass", "particle mass", false, false, true, false};

  static const std::vector<Subcommand> cmds = {
      {"net-demo", "classify a family of reference level nets",
       {output, format, seed, threads, tol, levels}, {}},
      {"dirichlet", "generalized Dirichlet solves across levels",
       {output, format, seed, threads, tol, oversample, levels, dim,
        {"source", "sinpi | bump | dirac | dirac2", false, false, false, false},
        {"y", "source concentration point (comma list)", true, false, false, false},
        {"grid", "points per axis for the solution dump (0 = off)", false, true, false, false}},
       {}},
      {"green", "point-source potential (Dirichlet with a delta source)",
       {output, format, seed, threads, tol, oversample, levels, dim,
        {"y", "source location (comma list)", true, false, false, false},
        {"grid", "points per axis for the solution dump (0 = off)", false, true, false, false}},
       {}},
      {"oscillatory", "weak decay of fast-oscillating sources",
       {output, format, seed, threads, tol, oversample, levels,
        {"k", "wavenumbers (comma list)", true, false, false, false}},
       {}},
      {"bubble", "constrained minimization across the critical exponent",
       {output, format, seed, threads, tol, oversample, levels, dim,
        {"p", "constraint exponents > 2 (comma list)", true, false, false, false},
        {"restarts", "independent optimizer starts", false, true, false, false},
        {"max-iters", "iteration budget per run", false, true, false, false},
        {"step0", "initial step size", false, false, true, false},
        {"tol-grad", "stationarity tolerance", false, false, true, false},
        {"init", "bump or random", false, false, false, false},
        {"max-axis", "per-axis mode budget", false, true, false, false}},
       {"p"}},
      {"qm-box", "particle in a box: spectrum, commutator defects, revival",
       {output, format, seed, threads, oversample, theta, mass}, {}},
      {"qm-ring", "particle on a ring: spectrum, commutator defects, revival",
       {output, format, seed, threads, oversample, theta, mass}, {}},
      {"qm-commutator", "commutator defect per position eigenvector",
       {output, format, seed, threads, oversample, theta,
        {"basis", "sine_box | fourier_ring | hermite_line", false, false, false, false}},
       {}},
  };
  return cmds;
}

// Flag names use dashes; config keys use underscores.
std::string config_key(std::string name) {
  for (char& c : name) {
    if (c == '-') c = '_';
  }
  return name;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "'" + item + "' is not a number");
    }
  }
  if (out.empty()) throw CLI::ValidationError(flag, "empty list");
  return out;
}

json levels_value(const std::string& text) {
  if (text.find(':') != std::string::npos) return text;  // base:growth:count
  json dims = json::array();
  for (double v : parse_number_list(text, "levels")) dims.push_back(static_cast<int>(v));
  return dims;
}

// key=value lines; '#' starts a comment.
json parse_kv_config(std::istream& in) {
  json out = json::object();
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) out[key] = value;
    }
  return out;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "ufcli: cannot read config file " << path << "\n";
    std::exit(2);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return json::parse(text);
    } catch (const std::exception& e) {
      std::cerr << "ufcli: config file " << path << " is not valid JSON: " << e.what() << "\n";
      std::exit(2);
    }
  }
  std::stringstream stream(text);
  return parse_kv_config(stream);
}

int run(const std::string& command, const json& config) {
  const std::string payload = config.dump();
  const uf_status status = uf_run_experiment(payload.c_str());
  if (status == UF_OK) return 0;
  if (status == UF_ERR_NONCONVERGED) {
    std::cerr << "ufcli " << command << ": " << uf_last_error()
              << " (partial results written)\n";
    return 1;
  }
  std::cerr << "ufcli " << command << ": " << uf_last_error() << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ultrafun experiment driver"};
  app.set_version_flag("--version", std::string(uf_version()));
  app.require_subcommand(1);

  struct Captured {
    json config = json::object();
    std::string config_path;
  };
  std::vector<std::shared_ptr<Captured>> captured;
  std::string active;

  for (const Subcommand& spec : subcommands()) {
    auto cap = std::make_shared<Captured>();
    captured.push_back(cap);
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    sub->add_option("--config", cap->config_path, "config file (key=value lines or JSON)");
    for (const OptionSpec& opt : spec.options) {
      const std::string flag = "--" + opt.name;
      const bool required =
          std::find(spec.required.begin(), spec.required.end(), opt.name) != spec.required.end();
      auto handler = [cap, opt](const std::vector<std::string>& values) {
        const std::string& text = values.back();  // last occurrence wins
        const std::string key = config_key(opt.name);
        if (opt.is_levels) {
          cap->config[key] = levels_value(text);
        } else if (opt.is_list) {
          cap->config[key] = parse_number_list(text, opt.name);
        } else if (opt.is_int) {
          try {
            cap->config[key] = std::stoll(text);
          } catch (const std::exception&) {
            throw CLI::ValidationError(opt.name, "'" + text + "' is not an integer");
          }
        } else if (opt.is_number) {
          try {
            cap->config[key] = std::stod(text);
          } catch (const std::exception&) {
            throw CLI::ValidationError(opt.name, "'" + text + "' is not a number");
          }
        } else {
          cap->config[key] = text;
        }
        return true;
      };
      CLI::Option* o = sub->add_option_function<std::vector<std::string>>(flag, handler, opt.help);
      o->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
      if (required) o->required();
    }
    const std::string name = spec.name;
    sub->callback([&active, name] { active = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // CLI11 returns 0 for --help/--version; anything else is a usage error.
    return code == 0 ? 0 : 2;
  }

  for (std::size_t i = 0; i < subcommands().size(); ++i) {
    if (subcommands()[i].name != active) continue;
    Captured& cap = *captured[i];
    json config = json::object();
    if (!cap.config_path.empty()) {
      const json file = load_config_file(cap.config_path);
      const auto& opts = subcommands()[i].options;
      for (const auto& [key, value] : file.items()) {
        const std::string norm = config_key(key);
        const auto match = std::find_if(opts.begin(), opts.end(), [&](const OptionSpec& o) {
          return config_key(o.name) == norm;
        });
        if (match == opts.end()) {
          std::cerr << "ufcli " << active << ": unknown config key '" << key << "'\n";
          return 2;
        }
        if (value.is_string()) {
          const std::string text = value.get<std::string>();
          try {
            if (match->is_levels) {
              config[norm] = levels_value(text);
            } else if (match->is_list) {
              config[norm] = parse_number_list(text, key);
            } else if (match->is_int) {
              config[norm] = std::stoll(text);
            } else if (match->is_number) {
              config[norm] = std::stod(text);
            } else {
              config[norm] = text;
            }
          } catch (const std::exception&) {
            std::cerr << "ufcli " << active << ": config key '" << key << "' has a bad value\n";
            return 2;
          }
        } else {
          config[norm] = value;
        }
      }
    }
    // Command-line flags override file values.
    for (const auto& [key, value] : cap.config.items()) config[key] = value;
    config["command"] = active;
    return run(active, config);
  }
  std::cerr << "ufcli: no subcommand selected\n";
  return 2;
}
