#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ultrafun/experiments.hpp"
#include "ultrafun/levels.hpp"

using namespace ultrafun;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("ultrafun_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config validation names the offending field") {
  CHECK_THROWS_WITH_AS(parse_experiment_config("{\"command\":\"bubble\"}"),
                       "config field 'p': required for bubble (list of exponents > 2)", Error);
  CHECK_THROWS_WITH_AS(
      parse_experiment_config("{\"command\":\"net-demo\",\"bogus\":1}"),
      "unknown config key 'bogus' for command net-demo", Error);
  CHECK_THROWS_AS(parse_experiment_config("{\"command\":\"qm-box\",\"format\":\"csv\"}"), Error);
  CHECK_THROWS_AS(parse_experiment_config("{\"command\":\"dirichlet\",\"y\":1.5}"), Error);
  CHECK_THROWS_AS(parse_experiment_config("{\"command\":\"nonsense\"}"), Error);
  CHECK_THROWS_AS(
      parse_experiment_config("{\"command\":\"bubble\",\"p\":[4],\"oversample\":3}"), Error);
  CHECK_THROWS_AS(parse_experiment_config("not json"), Error);

  const ExperimentConfig cfg = parse_experiment_config(
      "{\"command\":\"bubble\",\"p\":[4,6,8],\"levels\":\"4:2:3\"}");
  CHECK(cfg.p_list == std::vector<double>{4.0, 6.0, 8.0});
  CHECK(cfg.axis_dims == std::vector<int>{4, 8});  // 16 capped by max_axis = 8
  CHECK(cfg.dim == 3);
  CHECK(cfg.output == "bubble.csv");
}

TEST_CASE("defaults fall into place per command") {
  const ExperimentConfig net = parse_experiment_config("{\"command\":\"net-demo\"}");
  CHECK(net.axis_dims == std::vector<int>{4, 8, 16, 32});
  CHECK(net.format == "csv");
  CHECK(net.output == "net-demo.csv");

  const ExperimentConfig qm = parse_experiment_config("{\"command\":\"qm-ring\"}");
  CHECK(qm.format == "json");
  CHECK(qm.theta == 17);
  CHECK(qm.output == "qm-ring.json");

  const ExperimentConfig green = parse_experiment_config("{\"command\":\"green\"}");
  CHECK(green.source == "dirac");
  CHECK(green.grid == 101);
}

TEST_CASE("net-demo writes deterministic classification tables") {
  const auto dir = temp_dir("netdemo");
  const std::string out = (dir / "net.csv").string();
  const std::string config =
      "{\"command\":\"net-demo\",\"output\":\"" + out + "\",\"tol\":1e-6}";

  const RunOutcome first = run_experiment_json(config);
  CHECK(first.exit_code == 0);
  REQUIRE(first.files == std::vector<std::string>{out});
  const std::string csv1 = slurp(out);
  CHECK(csv1.find("net,level,theta,value,tag,shadow") == 0);
  CHECK(csv1.find("inv_theta,0,4,0.25,infinitesimal,0") != std::string::npos);
  CHECK(csv1.find("theta,0,4,4,infinite,+inf") != std::string::npos);

  const RunOutcome second = run_experiment_json(config);
  CHECK(second.exit_code == 0);
  CHECK(slurp(out) == csv1);

  // The manifest accompanies the data file.
  const nlohmann::json manifest = nlohmann::json::parse(slurp(out + ".manifest.json"));
  CHECK(manifest["version"] == artifact_version());
  CHECK(manifest["config"]["command"] == "net-demo");
}

TEST_CASE("dirichlet run emits rows, grid dump and classification") {
  const auto dir = temp_dir("dirichlet");
  const std::string out = (dir / "d.csv").string();
  const std::string config = "{\"command\":\"dirichlet\",\"output\":\"" + out +
                             "\",\"levels\":[8,16,32],\"grid\":11}";
  const RunOutcome outcome = run_experiment_json(config);
  CHECK(outcome.exit_code == 0);
  REQUIRE(outcome.files.size() == 2);

  const std::string csv = slurp(out);
  CHECK(csv.find("level,theta,residual,energy,classification") == 0);
  CHECK(csv.find("standard-like") != std::string::npos);

  const std::string grid = slurp(outcome.files[1]);
  CHECK(grid.find("level,theta,x0,u") == 0);
  // 3 levels x 11 grid points + header.
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 34);
}

TEST_CASE("qm-box run emits the documented JSON document") {
  const auto dir = temp_dir("qmbox");
  const std::string out = (dir / "qm.json").string();
  const RunOutcome outcome = run_experiment_json(
      "{\"command\":\"qm-box\",\"output\":\"" + out + "\",\"theta\":8}");
  CHECK(outcome.exit_code == 0);

  const nlohmann::json doc = nlohmann::json::parse(slurp(out));
  CHECK(doc["theta"] == 8);
  REQUIRE(doc["eigenvalues"].size() == 8);
  const double pi = 3.14159265358979323846;
  CHECK(std::abs(doc["eigenvalues"][0].get<double>() - pi * pi / 2.0) < 1e-8);
  REQUIRE(doc["defects"].size() == 8);
  for (const auto& d : doc["defects"]) CHECK(d.get<double>() <= 1e-10);
  REQUIRE(doc["fidelity_series"].size() == 17);
  CHECK(std::abs(doc["fidelity_series"][0].get<double>() - 1.0) < 1e-12);
  CHECK(std::abs(doc["fidelity_series"][16].get<double>() - 1.0) < 1e-8);
}

TEST_CASE("bubble smoke run is deterministic and feasible") {
  const auto dir = temp_dir("bubble");
  const std::string out = (dir / "b.csv").string();
  const std::string config = "{\"command\":\"bubble\",\"output\":\"" + out +
                             "\",\"dim\":1,\"p\":[4],\"levels\":[4,8],\"restarts\":2,"
                             "\"max_iters\":400,\"seed\":11}";
  const RunOutcome outcome = run_experiment_json(config);
  const std::string csv1 = slurp(out);
  CHECK(csv1.find("N,p,theta,m,bx,by,bz,conc_r02,iters,converged,seed") == 0);
  CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 5);  // header + 2 levels x 2 restarts
  CHECK(outcome.exit_code == 0);

  run_experiment_json(config);
  CHECK(slurp(out) == csv1);

  // Thread count must not leak into the data bytes.
  const std::string threaded = "{\"command\":\"bubble\",\"output\":\"" + out +
                               "\",\"dim\":1,\"p\":[4],\"levels\":[4,8],\"restarts\":2,"
                               "\"max_iters\":400,\"seed\":11,\"threads\":1}";
  run_experiment_json(threaded);
  CHECK(slurp(out) == csv1);
}

TEST_CASE("worker threads resolve from the environment when unset") {
  const auto dir = temp_dir("threads");
  const std::string out = (dir / "net.csv").string();

  setenv("ULTRAFUN_THREADS", "3", 1);
  run_experiment_json("{\"command\":\"net-demo\",\"output\":\"" + out + "\"}");
  nlohmann::json manifest = nlohmann::json::parse(slurp(out + ".manifest.json"));
  CHECK(manifest["threads_resolved"] == 3);

  // An explicit flag beats the environment.
  run_experiment_json("{\"command\":\"net-demo\",\"threads\":2,\"output\":\"" + out + "\"}");
  manifest = nlohmann::json::parse(slurp(out + ".manifest.json"));
  CHECK(manifest["threads_resolved"] == 2);
  unsetenv("ULTRAFUN_THREADS");
}

TEST_CASE("non-convergence exits 1 but still writes its rows") {
  const auto dir = temp_dir("bubble_stall");
  const std::string out = (dir / "stall.csv").string();
  const RunOutcome outcome = run_experiment_json(
      "{\"command\":\"bubble\",\"output\":\"" + out +
      "\",\"dim\":1,\"p\":[4],\"levels\":[4,8],\"restarts\":1,\"max_iters\":1}");
  CHECK(outcome.exit_code == 1);
  CHECK(outcome.message.find("converge") != std::string::npos);
  const std::string csv = slurp(out);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 levels
  CHECK(csv.find(",0,") != std::string::npos);           // converged=0 somewhere
}
