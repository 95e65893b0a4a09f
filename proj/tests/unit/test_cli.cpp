#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DTSE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dtse_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

const std::string kSmoke = std::string("--config ") + DTSE_CONFIG_DIR + "/smoke.cfg";

}  // namespace

TEST_CASE("bad invocations") {
  CHECK(run_cli("--command nonsense") != 0);
  CHECK(run_cli("--config /nonexistent.cfg") != 0);
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.cfg") << "dt_s = 10\n";
  CHECK(run_cli("--command simulate --config " + (dir / "bad.cfg").string() + " --out " + dir.string()) == 2);
}

TEST_CASE("simulate writes trajectories and fields") {
  const fs::path dir = scratch("simulate");
  REQUIRE(run_cli("--command simulate --out " + dir.string()) == 0);
  CHECK(fs::file_size(dir / "trajectories.csv") > 0);
  CHECK(count_lines(dir / "fields.csv") == 1 + 1201 * 25);
}

TEST_CASE("estimate exports are reproducible") {
  const fs::path a = scratch("estimate_a");
  const fs::path b = scratch("estimate_b");
  REQUIRE(run_cli("--command estimate " + kSmoke + " --out " + a.string()) == 0);
  REQUIRE(run_cli("--command estimate " + kSmoke + " --out " + b.string()) == 0);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    CHECK_MESSAGE(slurp(entry.path()) == slurp(b / entry.path().filename()), entry.path().filename().string());
  }
  for (const char* name : {"fields.csv", "measurements.csv", "graph_nodes.csv", "graph_edges.csv",
                           "heatmap_truth_density.csv", "heatmap_ego_density.csv", "ego_trajectory.csv",
                           "estimates_rsu1.csv"}) {
    CHECK_MESSAGE(fs::exists(a / name), name);
  }
  CHECK(files > 8);
}

TEST_CASE("montecarlo study") {
  const fs::path a = scratch("mc_a");
  const fs::path b = scratch("mc_b");
  REQUIRE(run_cli("--command montecarlo " + kSmoke + " --out " + a.string()) == 0);
  REQUIRE(run_cli("--command montecarlo " + kSmoke + " --out " + b.string()) == 0);
  CHECK(count_lines(a / "study.csv") == 1 + 4);
  CHECK(slurp(a / "study.csv") == slurp(b / "study.csv"));
  CHECK(slurp(a / "study_summary.json") == slurp(b / "study_summary.json"));

  const fs::path c = scratch("mc_c");
  REQUIRE(run_cli("--command montecarlo " + kSmoke + " --rates 5 --trials 3 --out " + c.string()) == 0);
  CHECK(count_lines(c / "study.csv") == 1 + 3);
}
