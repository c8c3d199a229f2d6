// Drives the hetlab binary end to end.
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = HETLAB_CLI_PATH;
const std::string kData = HETLAB_DATA_DIR;

struct Sandbox {
  fs::path root;
  Sandbox() {
    root = fs::temp_directory_path() / ("hetlab_cli_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Sandbox() { fs::remove_all(root); }
};

int run(const std::string& args, const fs::path& cwd) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" + kCli + "' " + args + " > stdout.txt 2> stderr.txt";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string spec(const std::string& name) { return "'" + kData + "/specs/" + name + ".json'"; }

}  // namespace

TEST_CASE("derive") {
  Sandbox sb;
  REQUIRE(run("derive --spec " + spec("two_node") + " --output-dir out", sb.root) == 0);
  const auto poly = read_json(sb.root / "out/polygon.json");
  CHECK(poly["vertices"][0][0].get<double>() == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(poly["vertices"][1][0].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(fs::exists(sb.root / "out/constants.json"));
  const auto side = read_json(sb.root / "out/derive.run.json");
  CHECK(side["subcommand"] == "derive");
  CHECK(side.contains("version"));
  CHECK(side["options"].contains("spec"));

  REQUIRE(run("derive --spec " + spec("symmetric_lift") + " --output-dir sym", sb.root) == 0);
  const auto sym = read_json(sb.root / "sym/polygon.json");
  CHECK(sym["collapsed"].get<bool>());
}

TEST_CASE("iterate") {
  Sandbox sb;
  REQUIRE(run("iterate --spec " + spec("two_node") + " --n-hits 60 --output-dir out", sb.root) == 0);
  std::ifstream in(sb.root / "out/itinerary.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("j,node,T,tau,w", 0) == 0);
  std::vector<double> tau;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    tau.push_back(std::stod(cells.at(3)));
  }
  REQUIRE(tau.size() == 60);
  for (std::size_t i = 1; i < tau.size(); ++i) CHECK(tau[i] / tau[i - 1] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("sternberg") {
  Sandbox sb;
  REQUIRE(run("sternberg --e 1.4142135623730951 --c 2 --k 2 --output-dir out", sb.root) == 0);
  const auto j = read_json(sb.root / "out/sternberg.json");
  CHECK(j["alpha"] == 14);
  CHECK(j["verdict"] == "linearizable");
}

TEST_CASE("tangency on the sine family") {
  Sandbox sb;
  REQUIRE(run("tangency --family sine --lambda-lo 1e-6 --lambda-hi 0.05 --output-dir out", sb.root) == 0);
  const auto j = read_json(sb.root / "out/tangency.json");
  CHECK(j["tangencies"].size() >= 3);
  for (const auto& r : j["ratios_skip_one"]) CHECK(r.get<double>() == doctest::Approx(std::exp(-2 * M_PI)).epsilon(0.1));
}

TEST_CASE("bad input exits with 2") {
  Sandbox sb;
  std::ofstream(sb.root / "bad.json") << "{\"k\": 2, \"nodes\": [";
  CHECK(run("derive --spec bad.json --output-dir out", sb.root) == 2);
  CHECK(slurp(sb.root / "stderr.txt").size() > 0);
  CHECK(run("derive --spec missing.json --output-dir out", sb.root) == 2);
  CHECK(run("iterate --no-such-flag", sb.root) == 2);
  CHECK(run("sternberg --k 1", sb.root) == 2);
}

TEST_CASE("--help and --version on every subcommand") {
  Sandbox sb;
  for (const char* sub : {"derive", "iterate", "average", "ode", "manifolds", "tangency", "sternberg", "sweep"}) {
    CAPTURE(sub);
    CHECK(run(std::string(sub) + " --help", sb.root) == 0);
    CHECK(slurp(sb.root / "stdout.txt").find("--output-dir") != std::string::npos);
    CHECK(run(std::string(sub) + " --version", sb.root) == 0);
    CHECK(slurp(sb.root / "stdout.txt").find(HETLAB_VERSION) != std::string::npos);
  }
  CHECK(run("--version", sb.root) == 0);
}

TEST_CASE("outputs are deterministic and stay in the output directory") {
  Sandbox sb;
  const std::string args = "average --spec " + spec("triangle") + " --n-hits 30 --samples-per-sojourn 20";
  REQUIRE(run(args + " --output-dir a", sb.root) == 0);
  REQUIRE(run(args + " --output-dir b", sb.root) == 0);
  CHECK(slurp(sb.root / "a/trace.csv") == slurp(sb.root / "b/trace.csv"));
  CHECK(slurp(sb.root / "a/polygon.json") == slurp(sb.root / "b/polygon.json"));
  for (const auto& entry : fs::directory_iterator(sb.root)) {
    const auto name = entry.path().filename().string();
    CHECK((name == "a" || name == "b" || name == "stdout.txt" || name == "stderr.txt"));
  }
  CHECK(fs::exists(sb.root / "a/average.run.json"));

  const std::string sw = "sweep --task ratio-law --seed 7 --samples 40";
  ::setenv("HETLAB_THREADS", "1", 1);
  REQUIRE(run(sw + " --output-dir s1", sb.root) == 0);
  ::setenv("HETLAB_THREADS", "4", 1);
  REQUIRE(run(sw + " --output-dir s2", sb.root) == 0);
  ::unsetenv("HETLAB_THREADS");
  CHECK(slurp(sb.root / "s1/sweep.csv") == slurp(sb.root / "s2/sweep.csv"));
}
