#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "qmcl/csv.hpp"
#include "qmcl/config.hpp"

using namespace qmcl;

TEST_SUITE_BEGIN("cli");

namespace {

namespace fs = std::filesystem;

std::string capture_path(const char* name) {
  return (fs::temp_directory_path() / name).string();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QMCL_CLI_PATH) + " " + args + " > " +
                          capture_path("qmcl_cli_stdout.txt") + " 2> " +
                          capture_path("qmcl_cli_stderr.txt");
  return std::system(cmd.c_str());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

void write_config(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

}  // namespace

TEST_CASE("generate-data smoke test writes n+1 rows") {
  TempDir dir("qmcl_cli_gen");
  write_config(dir.str() + "/cfg", R"(
system = l63
dt = 0.01
gen.n_samples = 11
gen.equilibration_time = 1
gen.substeps = 2
)");
  REQUIRE(run_cli("generate-data --config " + dir.str() + "/cfg --out " + dir.str() +
                  "/data") == 0);
  CsvTable t = read_csv(dir.str() + "/data/traj.csv");
  CHECK(t.data.rows() == 11);  // 10 steps plus the initial state
  CHECK(t.header[0] == "t");
  CHECK(t.header[3] == "a3");
}

TEST_CASE("full pipeline: train is deterministic, simulate reproducible") {
  TempDir dir("qmcl_cli_pipe");
  write_config(dir.str() + "/cfg", R"(
system = l63
dt = 0.01
gen.n_samples = 400
gen.equilibration_time = 5
gen.substeps = 2
train.L = 12
train.k_nn = 80
train.feature_bandwidth = 2
train.r = 5
sim.n_steps = 60
)");
  const std::string base = dir.str();
  REQUIRE(run_cli("generate-data --config " + base + "/cfg --out " + base + "/data") == 0);
  REQUIRE(run_cli("train --config " + base + "/cfg --data " + base + "/data --out " +
                  base + "/m1") == 0);
  REQUIRE(run_cli("train --config " + base + "/cfg --data " + base + "/data --out " +
                  base + "/m2") == 0);

  SUBCASE("repeated training yields byte-identical containers") {
    for (const auto& entry : fs::directory_iterator(base + "/m1")) {
      const std::string name = entry.path().filename().string();
      CHECK(slurp(entry.path().string()) == slurp(base + "/m2/" + name));
    }
  }

  SUBCASE("manifest echoes config and fingerprint") {
    const std::string manifest = slurp(base + "/m1/manifest.txt");
    CHECK(manifest.find("dataset_fingerprint") != std::string::npos);
    CHECK(manifest.find("train.L = 12") != std::string::npos);
  }

  SUBCASE("deterministic simulate ignores the seed") {
    REQUIRE(run_cli("simulate --config " + base + "/cfg --model " + base +
                    "/m1 --seed 1 --out " + base + "/s1") == 0);
    REQUIRE(run_cli("simulate --config " + base + "/cfg --model " + base +
                    "/m1 --seed 2 --out " + base + "/s2") == 0);
    CHECK(slurp(base + "/s1/run.csv") == slurp(base + "/s2/run.csv"));
  }

  SUBCASE("stochastic simulate reproduces bitwise under a fixed seed") {
    REQUIRE(run_cli("simulate --config " + base + "/cfg --model " + base +
                    "/m1 --mode stochastic --seed 7 --out " + base + "/s3") == 0);
    REQUIRE(run_cli("simulate --config " + base + "/cfg --model " + base +
                    "/m1 --mode stochastic --seed 7 --out " + base + "/s4") == 0);
    CHECK(slurp(base + "/s3/run.csv") == slurp(base + "/s4/run.csv"));
    REQUIRE(run_cli("simulate --config " + base + "/cfg --model " + base +
                    "/m1 --mode stochastic --seed 8 --out " + base + "/s5") == 0);
    CHECK(slurp(base + "/s3/run.csv") != slurp(base + "/s5/run.csv"));
  }

  SUBCASE("palmer-baseline runs without the model matrices") {
    REQUIRE(run_cli("simulate --config " + base + "/cfg --model " + base +
                    "/m1 --mode palmer-baseline --seed 3 --out " + base + "/sp") == 0);
    CsvTable t = read_csv(base + "/sp/run.csv");
    CHECK(t.data.rows() == 60);
  }

  SUBCASE("diagnose on identical files gives zero distances") {
    REQUIRE(run_cli("simulate --config " + base + "/cfg --model " + base +
                    "/m1 --out " + base + "/sd") == 0);
    REQUIRE(run_cli("diagnose --config " + base + "/cfg --truth " + base +
                    "/sd/run.csv --run " + base + "/sd/run.csv --out " + base +
                    "/diag") == 0);
    std::ifstream summary(base + "/diag/summary.csv");
    std::string line;
    std::getline(summary, line);  // header
    int rows = 0;
    while (std::getline(summary, line)) {
      // pair,tv_distance,max_autocorr_dev with both distances exactly zero.
      const auto c1 = line.find(','), c2 = line.rfind(',');
      REQUIRE(c1 != std::string::npos);
      CHECK(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) == 0.0);
      CHECK(std::stod(line.substr(c2 + 1)) == 0.0);
      ++rows;
    }
    CHECK(rows == 3);  // x1, x2, z1
  }

  SUBCASE("diagnose lag window: 2 time units at dt=0.01 gives 201 rows") {
    REQUIRE(run_cli("simulate --config " + base + "/cfg --model " + base +
                    "/m1 --out " + base + "/sl --set sim.n_steps=300") == 0);
    REQUIRE(run_cli("diagnose --config " + base + "/cfg --truth " + base +
                    "/sl/run.csv --run " + base + "/sl/run.csv --out " + base +
                    "/diag2 --set diag.truth_cols=x1 --set diag.run_cols=x1") == 0);
    CsvTable corr = read_csv(base + "/diag2/autocorr_run_x1:x1.csv");
    REQUIRE(corr.header.size() == 2);
    CHECK(corr.header[0] == "lag");
    CHECK(corr.header[1] == "value");
    CHECK(corr.data.rows() == 201);
    CsvTable hist = read_csv(base + "/diag2/hist_truth_x1:x1.csv");
    REQUIRE(hist.header.size() == 3);
    CHECK(hist.header[0] == "bin_left");
    CHECK(hist.header[2] == "density");
    CHECK(hist.data.rows() == 45);
  }

  SUBCASE("missing column is reported by name") {
    REQUIRE(run_cli("simulate --config " + base + "/cfg --model " + base +
                    "/m1 --out " + base + "/sm") == 0);
    CHECK(run_cli("diagnose --config " + base + "/cfg --truth " + base +
                  "/sm/run.csv --run " + base + "/sm/run.csv --out " + base +
                  "/diag3 --set diag.truth_cols=nope --set diag.run_cols=x1") != 0);
    CHECK(slurp(capture_path("qmcl_cli_stderr.txt")).find("nope") != std::string::npos);
  }

  SUBCASE("L = 0 is rejected at validation") {
    CHECK(run_cli("train --config " + base + "/cfg --data " + base + "/data --out " +
                  base + "/bad --set train.L=0") != 0);
    CHECK(slurp(capture_path("qmcl_cli_stderr.txt")).find("error:") != std::string::npos);
  }
}

TEST_CASE("l96 generate-data and hovmoller-ready columns") {
  TempDir dir("qmcl_cli_l96");
  write_config(dir.str() + "/cfg", R"(
system = l96
dt = 0.01
gen.n_samples = 30
gen.equilibration_time = 0.2
gen.substeps = 16
l96.K = 9
l96.J = 8
l96.F = 10
)");
  REQUIRE(run_cli("generate-data --config " + dir.str() + "/cfg --out " + dir.str() +
                  "/data") == 0);
  CsvTable t = read_csv(dir.str() + "/data/traj.csv");
  CHECK(t.header.size() == 19);  // t, x1..x9, z1..z9
  CHECK(t.data.rows() == 30);
  CHECK(t.header[1] == "x1");
  CHECK(t.header[10] == "z1");
}

TEST_SUITE_END();
