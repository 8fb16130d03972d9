#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const std::string kCli = SEMILIN_CLI_PATH;
const std::string kConfigs = SEMILIN_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("semilin_cli_" + name);
  fs::remove_all(p);
  return p;
}

// Runs the CLI with stdout/stderr captured into `log`; returns the exit status.
int run(const std::string& args, const fs::path& log) {
  const std::string cmd = kCli + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string cfg(const std::string& name) { return "--config " + kConfigs + "/" + name; }

}  // namespace

TEST_CASE("solve-disk harmonic run writes artifacts and verifies") {
  const fs::path out = scratch("harmonic"), log = scratch("harmonic.log");
  REQUIRE(run("solve-disk " + cfg("harmonic_disk.ini") + " --out " + out.string(), log) == 0);
  for (const char* f : {"U.csv", "g.csv", "boundary.csv", "tau_trace.csv", "report.txt", "config.ini"})
    CHECK(fs::exists(out / f));
  CHECK(slurp(out / "report.txt").find("mode = solve-disk") != std::string::npos);
  CHECK(slurp(out / "U.csv").rfind("# scalar-field v1, grid=polar,n_r=128,n_theta=256", 0) == 0);
  CHECK(run("verify --out " + out.string(), log) == 0);

  // A tampered field fails verification.
  std::string u = slurp(out / "U.csv");
  const auto pos = u.find('\n', u.find('\n') + 1) + 1;
  const auto c1 = u.find(',', u.find(',', pos) + 1) + 1;
  u.replace(c1, u.find('\n', c1) - c1, "0.5");
  std::ofstream(out / "U.csv", std::ios::binary) << u;
  CHECK(run("verify --out " + out.string(), log) == 3);
  fs::remove_all(out);
}

TEST_CASE("configuration errors exit with status 1") {
  const fs::path out = scratch("bad"), log = scratch("bad.log");
  CHECK(run("solve-disk " + cfg("bad_power.ini") + " --out " + out.string(), log) == 1);
  CHECK(slurp(log).find("(0,1)") != std::string::npos);
  CHECK(run("solve-disk " + cfg("sqrt_disk.ini"), log) == 1);
  CHECK(run("solve-disk " + cfg("sqrt_disk.ini") + " --out " + out.string() + " --override solver.bogus=1", log) == 1);
  CHECK(run("solve-disk --config /nonexistent.ini --out " + out.string(), log) == 1);
  CHECK(run("frobnicate --out " + out.string(), log) == 1);
  fs::remove_all(out);
}

TEST_CASE("nonconvergence exits with status 2") {
  const fs::path out = scratch("noconv"), log = scratch("noconv.log");
  CHECK(run("solve-disk " + cfg("sqrt_disk.ini") + " --out " + out.string() +
                " --override solver.max_inner=2 --override solver.n_r=32 --override solver.n_theta=32",
            log) == 2);
  CHECK(slurp(log).find("no convergence at tau") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("solve-domain radial stretch reproduces the closed-form jacobian") {
  const fs::path out = scratch("stretch"), log = scratch("stretch.log");
  REQUIRE(run("solve-domain " + cfg("radial_stretch.ini") + " --out " + out.string(), log) == 0);
  for (const char* f : {"u.csv", "omega.csv", "omega_inverse.csv", "jacobian.csv", "report.txt"}) CHECK(fs::exists(out / f));
  CHECK(run("verify --out " + out.string(), log) == 0);
  CHECK(slurp(log).find("FAIL") == std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("qhyp writes distances and constants") {
  const fs::path out = scratch("qhyp"), log = scratch("qhyp.log");
  REQUIRE(run("qhyp " + cfg("qhyp_disk.ini") + " --out " + out.string(), log) == 0);
  CHECK(fs::exists(out / "distances.csv"));
  CHECK(slurp(out / "qhb.txt").find("a = ") != std::string::npos);
  CHECK(run("verify --out " + out.string(), log) == 0);
  fs::remove_all(out);
}

TEST_CASE("runs are deterministic") {
  const fs::path a = scratch("det_a"), b = scratch("det_b"), log = scratch("det.log");
  const std::string args = "solve-disk " + cfg("sqrt_disk.ini") + " --seed 7 --override solver.n_r=32 --override solver.n_theta=32";
  REQUIRE(run(args + " --out " + a.string(), log) == 0);
  REQUIRE(run(args + " --out " + b.string(), log) == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const fs::path other = b / e.path().filename();
    REQUIRE(fs::exists(other));
    if (e.path().filename() == "config.ini") continue;
    CHECK(slurp(e.path()) == slurp(other));
    ++files;
  }
  CHECK(files >= 5);
  fs::remove_all(a);
  fs::remove_all(b);
}
