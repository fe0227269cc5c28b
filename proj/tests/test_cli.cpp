// Behavior tests for the ufcli binary itself: flag/config precedence, exit
// codes and error naming. The binary path arrives as --cli, forwarded by
// ctest.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

std::string g_cli;
std::filesystem::path g_root;

struct CliRun {
  int exit_code = -1;
  std::string stderr_text;
};

CliRun run_cli(const std::string& args) {
  const auto err = g_root / "stderr.txt";
  const std::string command = g_cli + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(command.c_str());
  CliRun result;
  result.exit_code = WEXITSTATUS(status);
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  result.stderr_text = ss.str();
  return result;
}

nlohmann::json manifest_of(const std::filesystem::path& data_file) {
  std::ifstream in(data_file.string() + ".manifest.json");
  REQUIRE(in);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("version flag") {
  CHECK(run_cli("--version").exit_code == 0);
}

TEST_CASE("flags override config-file values") {
  const auto cfg = g_root / "defaults.cfg";
  {
    std::ofstream out(cfg);
    out << "# defaults for the demo\n";
    out << "seed=7\n";
    out << "tol = 1e-3\n";
  }
  const auto data = g_root / "precedence.csv";
  const CliRun run =
      run_cli("net-demo --config " + cfg.string() + " --seed 9 --output " + data.string());
  CHECK(run.exit_code == 0);
  const nlohmann::json manifest = manifest_of(data);
  CHECK(manifest["config"]["seed"] == 9);      // flag wins
  CHECK(manifest["config"]["tol"] == 1e-3);    // file supplies the rest
}

TEST_CASE("json config files are accepted") {
  const auto cfg = g_root / "defaults.json";
  {
    std::ofstream out(cfg);
    out << "{\"seed\": 5, \"levels\": \"4:2:3\"}\n";
  }
  const auto data = g_root / "jsoncfg.csv";
  const CliRun run = run_cli("net-demo --config " + cfg.string() + " --output " + data.string());
  CHECK(run.exit_code == 0);
  const nlohmann::json manifest = manifest_of(data);
  CHECK(manifest["config"]["seed"] == 5);
  CHECK(manifest["config"]["levels"] == nlohmann::json({4, 8, 16}));
}

TEST_CASE("config errors exit 2 and name the offender") {
  SUBCASE("missing required flag") {
    const CliRun run = run_cli("bubble");
    CHECK(run.exit_code == 2);
    CHECK(run.stderr_text.find("--p") != std::string::npos);
  }
  SUBCASE("unknown flag") {
    const CliRun run = run_cli("net-demo --mystery 3");
    CHECK(run.exit_code == 2);
    CHECK(run.stderr_text.find("--mystery") != std::string::npos);
  }
  SUBCASE("unknown config-file key") {
    const auto cfg = g_root / "bad.cfg";
    {
      std::ofstream out(cfg);
      out << "mystery=3\n";
    }
    const CliRun run = run_cli("net-demo --config " + cfg.string());
    CHECK(run.exit_code == 2);
    CHECK(run.stderr_text.find("mystery") != std::string::npos);
  }
  SUBCASE("module precondition violations surface by field name") {
    const CliRun bad_y = run_cli("green --y 1.5");
    CHECK(bad_y.exit_code == 2);
    CHECK(bad_y.stderr_text.find("y") != std::string::npos);

    const CliRun bad_qm = run_cli("qm-box --format csv");
    CHECK(bad_qm.exit_code == 2);
    CHECK(bad_qm.stderr_text.find("format") != std::string::npos);

    const CliRun bad_over = run_cli("bubble --dim 1 --p 4 --oversample 2");
    CHECK(bad_over.exit_code == 2);
    CHECK(bad_over.stderr_text.find("oversample") != std::string::npos);
  }
}

TEST_CASE("numerical non-convergence exits 1 with partial results") {
  const auto data = g_root / "stalled.csv";
  const CliRun run = run_cli(
      "bubble --dim 1 --p 4 --levels 4,8 --restarts 1 --max-iters 1 --output " + data.string());
  CHECK(run.exit_code == 1);
  CHECK(std::filesystem::exists(data));
  CHECK(run.stderr_text.find("partial results") != std::string::npos);
}

int main(int argc, char** argv) {
  doctest::Context context;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--cli" && i + 1 < argc) {
      g_cli = argv[i + 1];
    }
  }
  context.applyCommandLine(argc, argv);
  if (g_cli.empty()) {
    std::fprintf(stderr, "usage: ultrafun_cli_tests --cli <path-to-ufcli>\n");
    return 1;
  }
  g_root = std::filesystem::temp_directory_path() / "ultrafun_cli_tests";
  std::filesystem::remove_all(g_root);
  std::filesystem::create_directories(g_root);
  return context.run();
}
