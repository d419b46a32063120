#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "cmix/io.hpp"
#include "cmix/processes.hpp"
#include "cmix/smoothers.hpp"

namespace fs = std::filesystem;
using namespace cmix;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("cmix_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path operator/(const std::string& name) const { return dir / name; }
};

struct Result {
  int code = -1;
  std::string out, err;
};

Result run(const Scratch& s, const std::string& args, const std::string& env = "") {
  const auto out = s / "stdout.txt", err = s / "stderr.txt";
  const std::string cmd = "cd '" + s.dir.string() + "' && " + env + " '" CMIX_BINARY "' " + args +
                          " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = io::read_file(out);
  r.err = io::read_file(err);
  return r;
}

std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    out.push_back(cells);
  }
  return out;
}

}  // namespace

TEST_CASE("exit codes") {
  Scratch s;
  CHECK(run(s, "simulate --process doubling --n 3 --seed 1").code == 0);
  CHECK(run(s, "").code == 2);
  const auto unknown = run(s, "simulate --process doubling --n 3 --frob 1");
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("--frob") != std::string::npos);
  const auto missing = run(s, "bound --family geometric-1d --t 0.1");
  CHECK(missing.code == 2);
  CHECK(missing.err.find("--N") != std::string::npos);
  CHECK(run(s, "--help").code == 0);
}

TEST_CASE("bad CSV header names the column") {
  Scratch s;
  io::write_atomic(s / "bad.csv", "index,foo\n1,0.5\n");
  const auto r = run(s, "estimate --input bad.csv --estimator kde --seed 1");
  CHECK(r.code == 1);
  CHECK(r.err.find("x_1") != std::string::npos);
  CHECK(r.err.find("foo") != std::string::npos);
}

TEST_CASE("simulate writes N rows and a sidecar") {
  Scratch s;
  REQUIRE(run(s, "simulate --process doubling --n 50 --seed 3 --out s.csv").code == 0);
  const auto table = rows(io::read_file(s / "s.csv"));
  CHECK(table.size() == 51);
  CHECK(table[0] == std::vector<std::string>{"index", "x_1"});
  CHECK(fs::exists(s / "s.csv.json"));
  const auto side = nlohmann::json::parse(io::read_file(s / "s.csv.json"));
  CHECK(side["config"]["seed"] == 3);
  // no temporary files left behind
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(s.dir))
    if (e.path().filename().string().rfind("std", 0) != 0) ++files;
  CHECK(files == 2);

  const auto direct = simulate_doubling_map(50, 3);
  for (std::size_t i = 1; i < table.size(); ++i)
    CHECK(std::abs(std::stod(table[i][1]) - direct.values(static_cast<Eigen::Index>(i - 1), 0)) <=
          1e-15);
}

TEST_CASE("simulate then estimate round trip") {
  Scratch s;
  REQUIRE(run(s, "simulate --process cell-chain --n 400 --mean sin --sigma const:0.1 --seed 4 "
                 "--out r.csv")
              .code == 0);
  const auto est = run(s, "estimate --input r.csv --estimator mean --bandwidth value:0.2 "
                          "--grid-points 7 --seed 1");
  REQUIRE(est.code == 0);
  const auto ds = io::read_dataset(s / "r.csv");
  const auto grid = interior_grid(0.2, 7);
  const auto m = nw_mean(ds.x, ds.y, 0.2, Kernel<double>(), grid.points);
  const auto table = rows(est.out);
  REQUIRE(table.size() == 8);
  CHECK(table[0] == std::vector<std::string>{"grid_point", "estimate", "defined"});
  for (Eigen::Index g = 0; g < 7; ++g) {
    const auto& r = table[static_cast<std::size_t>(g + 1)];
    CHECK(std::abs(std::stod(r[0]) - grid.points(g, 0)) <= 1e-15);
    CHECK(std::abs(std::stod(r[1]) - m.values[g]) <= 1e-15);
    CHECK(r[2] == "1");
  }
}

TEST_CASE("seed resolution is echoed") {
  Scratch s;
  const auto flag = run(s, "simulate --process doubling --n 2 --seed 9");
  CHECK(flag.err.find("\"seed\":9") != std::string::npos);
  CHECK(flag.err.find("\"seed_source\":\"flag\"") != std::string::npos);
  const auto env = run(s, "simulate --process doubling --n 2", "CMIX_SEED=77");
  CHECK(env.err.find("\"seed\":77") != std::string::npos);
  CHECK(env.err.find("\"seed_source\":\"env\"") != std::string::npos);
  const auto a = run(s, "simulate --process doubling --n 4", "CMIX_SEED=77");
  CHECK(a.out == run(s, "simulate --process doubling --n 4 --seed 77").out);
  const auto entropy = run(s, "simulate --process doubling --n 2", "env -u CMIX_SEED");
  CHECK(entropy.err.find("\"seed_source\":\"entropy\"") != std::string::npos);
}

TEST_CASE("bound and conditions print JSON records") {
  Scratch s;
  const auto b = run(s, "bound --family geometric-1d --N 10000 --t 0.05 --sigma2 0.25 --seed 1");
  REQUIRE(b.code == 0);
  std::istringstream in(b.out);
  std::string line;
  std::getline(in, line);
  CHECK(nlohmann::json::parse(line)["record"] == "config");
  std::getline(in, line);
  const auto rec = nlohmann::json::parse(line);
  CHECK(rec["exponent"].get<double>() == doctest::Approx(2.26195).epsilon(1e-5));

  const auto c = run(s, "conditions --variant cor7 --N 10000 --t 0.1 --bandwidth 0.2 --seed 1");
  REQUIRE(c.code == 0);
  CHECK(c.out.find("\"D1\"") != std::string::npos);
}

TEST_CASE("blocks enumerate every index once") {
  Scratch s;
  const auto r = run(s, "blocks --nk 10 --P 3 --format csv --seed 1");
  REQUIRE(r.code == 0);
  const auto table = rows(r.out);
  CHECK(table.size() == 11);
  CHECK(table[1][0] == "1");
  CHECK(table[1][1] == "1");
}

TEST_CASE("invalid config file exits with 1") {
  Scratch s;
  io::write_atomic(s / "bad.ini", "[x]\ntype = tail\nbogus = 1\n");
  const auto r = run(s, "verify-tail --config bad.ini --seed 1");
  CHECK(r.code == 1);
  CHECK(r.err.find("bogus") != std::string::npos);
}
