#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "gwre/runner.hpp"

using namespace gwre;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("gwre-test-" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig base_config() {
  ExperimentConfig c;
  c.kernel.type = "iid";
  c.kernel.law = {{0.7, 1.0}};
  c.walk.horizon = 500;
  c.walk.replicas = 64;
  c.ray.n = 6;
  c.ray.replicas = 200;
  c.seed = 42;
  return c;
}

}  // namespace

TEST_CASE("config parsing reports field paths") {
  CHECK_THROWS_WITH_AS(
      ExperimentConfig::from_json({{"walk", {{"horizon", "soon"}}}}),
      "config.walk.horizon: expected an integer", ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json({{"walkk", 1}}),
                       "config.walkk: unknown key", ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json(
          {{"offspring", nlohmann::json::array({{2, 0.5}})}}),
      Error);  // probabilities must sum to 1
}

TEST_CASE("config hash ignores threads and out_dir") {
  ExperimentConfig a = base_config();
  ExperimentConfig b = base_config();
  b.threads = 8;
  b.out_dir = "/elsewhere";
  CHECK(a.hash() == b.hash());
  b.seed = 43;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("window bounds accept -inf") {
  nlohmann::json j{{"windows", nlohmann::json::array({{{"lower", "-inf"},
                                                       {"upper", 2.0}}})}};
  ExperimentConfig c = ExperimentConfig::from_json(j);
  REQUIRE(c.windows.size() == 1);
  CHECK(std::isinf(c.windows[0].lower));
}

TEST_CASE("simulate runs are byte-identical across reruns and threads") {
  ExperimentConfig c = base_config();
  c.out_dir = temp_dir("det1").string();
  run("simulate", c);
  std::string first = slurp(fs::path(c.out_dir) / "simulate.csv");

  c.out_dir = temp_dir("det2").string();
  c.threads = 4;
  run("simulate", c);
  std::string second = slurp(fs::path(c.out_dir) / "simulate.csv");
  CHECK(first == second);
}

TEST_CASE("csv round trip") {
  ExperimentConfig c = base_config();
  c.out_dir = temp_dir("csv").string();
  RunManifest m = run("ray", c);
  REQUIRE(m.files.size() == 1);
  CsvDocument doc = read_csv(m.files[0]);
  REQUIRE(!doc.header.empty());
  CHECK(doc.header.back().rfind("columns:", 0) == 0);
  REQUIRE(doc.rows.size() == static_cast<std::size_t>(c.ray.n));
  for (auto& row : doc.rows) {
    REQUIRE(row.size() == 4);
    double est = std::stod(row[1]);
    CHECK(est >= 0.0);
    CHECK(est <= 1.0);
  }
  // The config hash in the header matches the manifest.
  bool found = false;
  for (auto& h : doc.header)
    if (h.find(m.config_hash) != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("classify run emits the transient verdict for a = 1, b = 2") {
  ExperimentConfig c = base_config();
  c.kernel.law = {{1.0, 1.0}};
  c.out_dir = temp_dir("classify").string();
  run("classify", c);
  CsvDocument doc = read_csv((fs::path(c.out_dir) / "classify.csv").string());
  REQUIRE(doc.rows.size() == 1);
  CHECK(doc.rows[0][1] == "Transient");
}

TEST_CASE("phase diagram margin changes sign at a = 0.5 for b = 2") {
  ExperimentConfig c = base_config();
  c.sweep = SweepSpec{"a", 0.1, 1.0, 10};
  c.out_dir = temp_dir("phase").string();
  run("phase-diagram", c);
  CsvDocument doc =
      read_csv((fs::path(c.out_dir) / "phase_diagram.csv").string());
  REQUIRE(doc.rows.size() == 10);
  for (auto& row : doc.rows) {
    double a = std::stod(row[0]);
    double margin = std::stod(row[3]);
    if (a < 0.49) CHECK(margin < 0.0);
    if (a > 0.51) CHECK(margin > 0.0);
  }
}

TEST_CASE("the installed binary drives the same pipeline") {
  fs::path dir = temp_dir("binary");
  fs::path cfg = dir / "config.json";
  {
    std::ofstream out(cfg);
    out << R"({"offspring": [[2, 1.0]],
               "kernel": {"type": "iid", "law": [[1.0, 1.0]]},
               "seed": 5})";
  }
  std::string cmd = std::string(GWRE_CLI_PATH) + " classify --config " +
                    cfg.string() + " --out " + (dir / "out").string() +
                    " > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CsvDocument doc = read_csv((dir / "out" / "classify.csv").string());
  REQUIRE(doc.rows.size() == 1);
  CHECK(doc.rows[0][1] == "Transient");
}
