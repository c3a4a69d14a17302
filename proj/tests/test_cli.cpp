#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "segsamp/io.hpp"

using namespace segsamp;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "segsamp_test_cli";

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" SEGSAMP_CLI_PATH "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string out(const std::string& name) { return "\"" + (kRoot / name).string() + "\""; }

} // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
  fs::remove_all(kRoot);
  CHECK(run("--version") == 0);
  CHECK(run("") == 2);
  CHECK(run("density") == 2);
  CHECK(run("density --R 4 --bogus") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("patterns --R 4 --N 2 --mu 1.5 --out " + out("bad")) == 3);
  CHECK(run("density --R 0.5 --out " + out("bad")) == 3);
  CHECK(run("density --R 4 --grid 12x") == 3);
  CHECK(run("recon --data " + out("missing")) == 3);
  CHECK(run("experiment " + out("missing.json")) == 3);
}

TEST_CASE("default output root from the environment") {
  fs::remove_all(kRoot);
  CHECK(run("density --R 4 --grid 64x64", "SEGSAMP_OUT=\"" + (kRoot / "env").string() + "\"") == 0);
  CHECK(fs::exists(kRoot / "env" / "density" / "density.csv"));
  CHECK(fs::exists(kRoot / "env" / "density" / "density.json"));
}

TEST_CASE("pattern and coverage table outputs") {
  CHECK(run("patterns --R 4 --N 3 --grid 64x64 --strategy segregated --candidates 5 --out " + out("pat")) == 0);
  for (const char* f : {"mask_0.csv", "mask_2.pgm", "coverage_radial.csv", "manifest.json"}) {
    CAPTURE(f);
    CHECK(fs::exists(kRoot / "pat" / f));
  }
  CHECK(run("sweep-table1 --grid 32x32 --seeds 1 --candidates 2 --out " + out("t1")) == 0);
  CHECK(io::read_csv(kRoot / "t1" / "table1.csv").rows.size() == 24u);
}

TEST_CASE("simulate, reconstruct and evaluate") {
  const std::string common = "simulate --protocol bssfp --N 2 --grid 32x32 --seed 5 --candidates 3 ";
  CHECK(run(common + "--R 1 --out " + out("full")) == 0);
  CHECK(run(common + "--R 2 --out " + out("under")) == 0);
  CHECK(run(common + "--R 2 --out " + out("under2")) == 0);
  CHECK(io::read_file(kRoot / "under" / "kspace" / "acq1.raw") == io::read_file(kRoot / "under2" / "kspace" / "acq1.raw"));

  CHECK(run("recon --method zf --data " + out("full") + " --out " + out("zf_full")) == 0);
  CHECK(run("recon --method zf --data " + out("under") + " --out " + out("zf_under")) == 0);
  CHECK(run("evaluate --recon " + out("zf_full") + " --recon " + out("zf_under") + " --reference " + out("full") +
            " --out " + out("eval")) == 0);
  const auto q = io::read_csv(kRoot / "eval" / "quality.csv");
  REQUIRE(q.rows.size() == 4u);
  CHECK(std::stod(q.rows[0][3]) == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(std::stod(q.rows[1][2]) < std::stod(q.rows[0][2]));
  CHECK(q.rows[2][0] == "mean");
  CHECK(run("evaluate --recon " + out("zf_full") + " --out " + out("eval")) == 2);
}

} // TEST_SUITE
