#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ultrafun {

const char* artifact_version();

/// Fully resolved run description. The CLI (or any embedder) hands the run
/// a flat JSON object; parse_experiment_config validates every field against
/// the preconditions of the target module before any computation starts and
/// rejects unknown keys by name.
struct ExperimentConfig {
  std::string command;
  std::string output;
  std::string format = "csv";  // csv | json
  std::uint64_t seed = 1234;
  int threads = 0;             // 0 = ULTRAFUN_THREADS env or hardware default
  double tol = 1e-6;
  double oversample = 0.0;     // 0 = command default

  std::vector<int> axis_dims;  // resolved level schedule (per axis)

  // dirichlet / green
  int dim = 1;
  std::string source = "sinpi";  // sinpi | bump | dirac | dirac2
  std::vector<double> y;
  int grid = 0;

  // oscillatory
  std::vector<double> k_list;

  // bubble
  std::vector<double> p_list;
  int restarts = 3;
  int max_iters = 800;
  double step0 = 0.5;
  double tol_grad = 1e-5;
  std::string init = "bump";
  int max_axis = 8;

  // qm
  int theta = 32;
  double mass = 1.0;
  std::string qm_basis = "sine_box";

  /// The exact input echoed into the manifest.
  std::string resolved_json;
};

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 1 numerical nonconvergence (results still written)
  std::vector<std::string> files;
  std::string message;
};

/// Throws Error(Error::config, ...) naming the first offending field.
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// Runs the experiment, writes its data files plus `<output>.manifest.json`.
/// Identical configs produce byte-identical data files; the thread count
/// never changes them.
RunOutcome run_experiment(const ExperimentConfig& config);
RunOutcome run_experiment_json(const std::string& json_text);

}  // namespace ultrafun
