#include "doctest.h"

#include "seglab/config.hpp"
#include "seglab/records.hpp"

#include <filesystem>
#include <fstream>

using namespace seglab;
using nlohmann::json;

namespace {

std::string error_key(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_CASE("config round trip is idempotent") {
  for (const char* name : {"minimize", "partition", "eig", "extinction", "eps-threshold", "limiti", "wedge-bound",
                           "cutoff", "system2", "sweep"}) {
    const json once = to_json(default_config(name));
    const json twice = to_json(parse_config(once));
    CHECK(once == twice);
    CHECK(to_json(parse_config(twice)) == twice);
  }
  const json raw = json::parse(R"({"domain":{"kind":"disc","radius":1,"h":0.0625},"k":3,"lambda":100,"eps":0.5})");
  const json once = to_json(parse_config(raw));
  CHECK(once["eps"] == json::array({0.5, 0.5}));
  CHECK(to_json(parse_config(once)) == once);
}

TEST_CASE("shipped config files parse and round trip") {
  const std::filesystem::path dir = SEGLAB_SOURCE_DIR "/configs";
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::ifstream in(entry.path());
    const json j = json::parse(in);
    const json once = to_json(parse_config(j));
    CHECK(to_json(parse_config(once)) == once);
    ++count;
  }
  CHECK(count >= 10);
}

TEST_CASE("unknown and malformed keys are named") {
  CHECK(error_key(json::parse(R"({"lamda":1})")) == "lamda");
  CHECK(error_key(json::parse(R"({"solver":{"armjio":{}}})")) == "solver.armjio");
  CHECK(error_key(json::parse(R"({"solver":{"armijo":{"shrink":2}}})")) == "solver");
  CHECK(error_key(json::parse(R"({"domain":{"kind":"square"}})")) == "domain.kind");
  CHECK(error_key(json::parse(R"({"domain":{"kind":"disc","size":1}})")) == "domain.size");
  CHECK(error_key(json::parse(R"({"lambda":"big"})")) == "lambda");
  CHECK(error_key(json::parse(R"({"k":2.5})")) == "k");
  CHECK(error_key(json::parse(R"({"eps":[0.5, 1.5]})")) == "eps");
  CHECK(error_key(json::parse(R"({"mode":"fast"})")) == "mode");
  CHECK(error_key(json::parse(R"({"lambdas":[]})")) == "lambdas");
  CHECK(error_key(json::parse(R"({"nonlinearity":"cubic"})")) == "nonlinearity");
  CHECK(error_key(json::parse(R"({"output":{"verbose":true}})")) == "output.verbose");
  CHECK(error_key(json::parse(R"({"solver":{"seed":-3}})")) == "solver.seed");
}

TEST_CASE("missing keys are named when a system is built") {
  const RunConfig cfg = parse_config(json::parse(R"({"domain":{"kind":"rectangle","h":0.125},"k":2})"));
  const MaskPtr mask = cfg.need(cfg.domain, "domain").build();
  try {
    cfg.make_system(mask);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "lambda");
    CHECK(std::string(e.what()).find("lambda") != std::string::npos);
  }
  const RunConfig no_eps = parse_config(json::parse(R"({"k":2,"lambda":100})"));
  CHECK_THROWS_AS(no_eps.make_system(mask), ConfigError);
  const RunConfig same = parse_config(json::parse(R"({"k":2,"lambda":100,"identical":true})"));
  CHECK(same.make_system(mask).family.identical);
}

TEST_CASE("domain errors are config errors") {
  DomainConfig d;
  d.width = 0.08;
  d.h = 0.05;
  CHECK_THROWS_AS(d.build(), ConfigError);
  DomainConfig w;
  w.kind = DomainKind::wedge;
  w.m = 1.0;
  CHECK_THROWS_AS(w.build(), ConfigError);
  CHECK_THROWS_AS(default_config("nope"), ConfigError);
}

TEST_CASE("records round trip through csv bit for bit") {
  RunRecord r;
  r.experiment = "sweep";
  r.key = "lambda=200;kappa=400;eps=0.5";
  r.domain = "disc";
  r.h = 1.0 / 64;
  r.k = 2;
  r.lambda = 200;
  r.kappa = 400;
  r.eps = {0.1 + 0.2};
  r.seed = 12345678901234ULL;
  r.start_label = "random-3";
  r.energy = -1.0 / 3;
  r.dirichlet = {0.1, 1e-300};
  r.potential = {2.0 / 7, 3.0 / 11};
  r.interaction = 5e-17;
  r.alive = {true, false};
  r.alive_count = 1;
  r.overlap = 5e-17;
  r.iters = 77;
  r.converged = true;
  r.residual = 1e-9;
  r.wall_time = 0.5;
  r.verdict = "PASS";
  r.note = "a \"quoted\", note";
  const RunRecord back = parse_csv_row(csv_row(r));
  CHECK(back.key == r.key);
  CHECK(back.eps[0] == r.eps[0]);
  CHECK(back.energy == r.energy);
  CHECK(back.dirichlet == r.dirichlet);
  CHECK(back.potential == r.potential);
  CHECK(back.alive == r.alive);
  CHECK(back.seed == r.seed);
  CHECK(back.note == r.note);
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(record_header().size() == 23);
  CHECK(record_header().front() == "experiment");
}

TEST_CASE("results file and manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "seglab_records_test";
  std::filesystem::remove_all(dir);
  const std::string path = (dir / "results.csv").string();
  RunRecord r;
  r.experiment = "x";
  r.key = "a";
  r.domain = "rectangle";
  append_records(path, {r});
  r.key = "b";
  append_records(path, {r});
  const auto rows = read_records(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].key == "b");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));

  Manifest m((dir / "manifest.txt").string());
  m.add("a", 1, "f1");
  m.add("b", 2, "f2");
  CHECK(m.keys() == std::vector<std::string>{"a", "b"});

  std::ofstream(dir / "bad.csv") << "not,a,header\n";
  CHECK_THROWS(append_records((dir / "bad.csv").string(), {r}));
  std::filesystem::remove_all(dir);
}
