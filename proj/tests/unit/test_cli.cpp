#include "doctest.h"

#include "seglab/cli.hpp"
#include "seglab/records.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace seglab;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "seglab");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("seglab_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& text) const {
    const fs::path p = path / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::size_t line_count(const std::string& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

const char* kSquare = R"("domain":{"kind":"rectangle","width":1,"height":1,"h":0.03125})";

}  // namespace

TEST_CASE("missing lambda is a config error") {
  TempDir t("missing");
  const std::string cfg = t.file("c.json", std::string("{") + kSquare + R"(,"k":1})");
  CHECK(run({"minimize", "--config", cfg, "--out", t.sub("o"), "--quiet"}) == kExitConfig);
}

TEST_CASE("unknown key and malformed file are config errors") {
  TempDir t("unknown");
  CHECK(run({"minimize", "--config", t.file("a.json", R"({"lamda":3})"), "--quiet"}) == kExitConfig);
  CHECK(run({"minimize", "--config", t.file("b.json", "{oops"), "--quiet"}) == kExitConfig);
  CHECK(run({"minimize", "--config", t.sub("absent.json"), "--quiet"}) == kExitConfig);
  CHECK(run({"frobnicate"}) == kExitConfig);
}

TEST_CASE("minimize appends one row per run and dumps fields on request") {
  TempDir t("minimize");
  const std::string cfg = t.file("c.json", std::string("{") + kSquare + R"(,"k":1,"lambda":100})");
  const std::string out = t.sub("o");
  CHECK(run({"minimize", "--config", cfg, "--out", out, "--quiet"}) == kExitOk);
  CHECK(line_count(out + "/results.csv") == 2);
  CHECK(run({"minimize", "--config", cfg, "--out", out, "--quiet", "--dump-fields", "--seed", "4"}) == kExitOk);
  const auto rows = read_records(out + "/results.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].seed == 4);
  CHECK(rows[0].converged);
  CHECK(line_count(out + "/manifest.txt") == 2);
  bool csv = false, pgm = false;
  for (const auto& e : fs::directory_iterator(out + "/fields")) {
    csv = csv || e.path().extension() == ".csv";
    pgm = pgm || e.path().extension() == ".pgm";
  }
  CHECK(csv);
  CHECK(pgm);
}

TEST_CASE("forced non-convergence exits with 2") {
  TempDir t("tight");
  const std::string cfg = t.file(
      "c.json", std::string("{") + kSquare +
                    R"(,"k":1,"lambda":100,"solver":{"max_iters":10,"tol_energy":1e-300,"tol_residual":1e-300}})");
  CHECK(run({"minimize", "--config", cfg, "--out", t.sub("o"), "--quiet"}) == kExitNotConverged);
}

TEST_CASE("partition commands") {
  TempDir t("partition");
  const std::string same = t.file("s.json", std::string("{") + kSquare + R"(,"k":2,"lambda":200,"identical":true})");
  CHECK(run({"partition", "--config", same, "--out", t.sub("a"), "--quiet"}) == kExitOk);
  CHECK(read_records(t.sub("a") + "/results.csv").at(0).alive_count <= 1);

  CHECK(run({"partition", "--out", t.sub("b"), "--quiet"}) == kExitOk);
  CHECK(read_records(t.sub("b") + "/results.csv").at(0).alive_count == 2);

  const std::string empty = t.file(
      "e.json", R"({"domain":{"kind":"rectangle","width":0.05,"height":0.05,"h":0.03125},"k":2,"lambda":200,"identical":true})");
  CHECK(run({"partition", "--config", empty, "--out", t.sub("c"), "--quiet"}) == kExitConfig);
}

TEST_CASE("verify dispatch") {
  TempDir t("verify");
  CHECK(run({"verify", "unknown-exp", "--out", t.sub("x"), "--quiet"}) == kExitConfig);
  CHECK(run({"verify", "eig", "--out", t.sub("e"), "--quiet"}) == kExitOk);
  CHECK(read_records(t.sub("e") + "/results.csv").at(0).verdict == "PASS");
  CHECK(run({"eig", "--config", t.file("d.json", R"({"domain":{"kind":"disc","radius":1,"h":0.0078125}})"), "--out",
             t.sub("d"), "--quiet"}) == kExitOk);
  CHECK(run({"eig", "--config", t.file("w.json", R"({"domain":{"kind":"wedge","m":2,"h":0.03125}})"), "--out",
             t.sub("w"), "--quiet"}) == kExitInconclusive);
  const std::string cut = t.file("cut.json", R"({"domain":{"kind":"rectangle","h":0.03125},"lambda":200,"deltas":[0.1,0.2,0.3,0.4]})");
  CHECK(run({"verify", "cutoff", "--config", cut, "--out", t.sub("c"), "--quiet"}) == kExitConfig);
}

TEST_CASE("verify reports FAIL with exit 3 and writes records") {
  TempDir t("fail");
  // A single lambda close to the first eigenvalue is far from the limit value.
  const std::string cfg = t.file("l.json", std::string("{") + kSquare + R"(,"lambdas":[25],"solver":{"restarts":1}})");
  CHECK(run({"verify", "limiti", "--config", cfg, "--out", t.sub("o"), "--quiet"}) == kExitFail);
  const auto rows = read_records(t.sub("o") + "/results.csv");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].verdict == "FAIL");
}

TEST_CASE("wedge-bound with the default config passes") {
  TempDir t("wedge");
  CHECK(run({"verify", "wedge-bound", "--out", t.sub("o"), "--quiet"}) == kExitOk);
}

TEST_CASE("sweep grid, resume and determinism") {
  TempDir t("sweep");
  const std::string cfg = t.file(
      "s.json", R"({"domain":{"kind":"rectangle","h":0.0625},"k":2,"lambdas":[100,200],"kappas":[0,50],"eps_grid":[0.5],"solver":{"restarts":1}})");
  const std::string out = t.sub("a");
  CHECK(run({"sweep", "--config", cfg, "--out", out, "--quiet", "--max-points", "1"}) == kExitNotConverged);
  CHECK(line_count(out + "/manifest.txt") == 1);
  CHECK(read_records(out + "/results.csv").size() == 1);
  CHECK(run({"sweep", "--config", cfg, "--out", out, "--quiet", "--jobs", "2"}) == kExitOk);
  CHECK(line_count(out + "/manifest.txt") == 4);
  const auto first = read_records(out + "/results.csv");
  CHECK(first.size() == 4);
  CHECK(run({"sweep", "--config", cfg, "--out", out, "--quiet"}) == kExitOk);
  CHECK(line_count(out + "/manifest.txt") == 4);

  CHECK(run({"sweep", "--config", cfg, "--out", t.sub("b"), "--quiet"}) == kExitOk);
  const auto second = read_records(t.sub("b") + "/results.csv");
  REQUIRE(second.size() == 4);
  for (std::size_t r = 0; r < 4; ++r) {
    CHECK(first[r].key == second[r].key);
    CHECK(first[r].energy == second[r].energy);
    CHECK(first[r].dirichlet == second[r].dirichlet);
    CHECK(first[r].potential == second[r].potential);
    CHECK(first[r].interaction == second[r].interaction);
  }
}
