#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "enlab/errors.hpp"
#include "enlab/experiments.hpp"

using namespace enlab;
namespace fs = std::filesystem;

namespace {

// Path counts small enough for a unit test, large enough for every check to mean something.
std::size_t small_paths(const std::string& id) {
  if (id == "ruin-table") return 20000;
  if (id == "counterexample-stopped" || id == "evanescence-scan") return 200;
  if (id == "counterexample-honest") return 60;
  return 20;
}

ExperimentConfig small_config(const std::string& id) {
  ExperimentConfig cfg = default_config(id);
  cfg.n_paths = small_paths(id);
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ENLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("enlab_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("Experiment registry and shipped configs agree", "[experiments]") {
  const auto& ids = experiment_ids();
  CHECK(ids.size() == 7);
  for (const auto& id : ids) {
    INFO(id);
    CHECK_FALSE(experiment_description(id).empty());
    const auto def = default_config(id);
    CHECK_NOTHROW(def.validate());
    std::ifstream in(std::string(ENLAB_CONFIG_DIR) + "/" + id + ".json");
    REQUIRE(in.good());
    const auto shipped = ExperimentConfig::from_json(nlohmann::json::parse(in));
    CHECK(shipped.to_json() == def.to_json());
  }
  CHECK_THROWS_AS(default_config("no-such-experiment"), UsageError);
}

TEST_CASE("Malformed configs are usage errors", "[experiments]") {
  using nlohmann::json;
  CHECK_THROWS_AS(ExperimentConfig::from_json(json::array()), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"n_paths", 3}}), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "ruin-table"}, {"paths", 3}}), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "ruin-table"}, {"n_paths", 0}}), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "ruin-table"}, {"n_paths", "many"}}), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "ruin-table"}, {"execution", "gpu"}}), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "ruin-table"}, {"tolerances", {{"z", -1.0}}}}),
                  UsageError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "ruin-table"}, {"horizon", -2.0}}), UsageError);
  // model parameters outside their domain surface as usage errors when the run starts
  auto cfg = small_config("counterexample-stopped");
  cfg.model["k1"] = 0.9;
  cfg.model["k2"] = 0.9;
  CHECK_THROWS_AS(run_experiment(cfg), UsageError);
}

TEST_CASE("Config hash ignores execution settings and tracks results-relevant fields", "[experiments]") {
  auto a = default_config("positive-stopped");
  auto b = a;
  b.batch.execution = Execution::serial;
  b.batch.threads = 3;
  b.out_dir = "/elsewhere";
  CHECK(a.to_json() == b.to_json());
  auto c = a;
  c.seed = a.seed + 1;
  CHECK(fnv1a_hex(a.to_json().dump()) != fnv1a_hex(c.to_json().dump()));
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("Every experiment passes at reduced size and is reproducible", "[experiments]") {
  for (const auto& id : experiment_ids()) {
    INFO(id);
    auto cfg = small_config(id);
    cfg.batch.execution = Execution::parallel;
    const auto first = run_experiment(cfg);
    for (const auto& c : first.report.checks) {
      INFO(c.name << " value " << c.value << " limit " << c.limit << " " << c.detail);
      CHECK(c.pass);
    }
    CHECK(first.report.pass);
    REQUIRE(first.files.count("report.json") == 1);
    const auto report = nlohmann::json::parse(first.files.at("report.json"));
    CHECK(report.at("config_hash") == fnv1a_hex(cfg.to_json().dump()));
    CHECK(report.at("seed") == cfg.seed);

    // same seed: identical bytes; serial and parallel: identical bytes
    CHECK(run_experiment(cfg).files == first.files);
    cfg.batch.execution = Execution::serial;
    CHECK(run_experiment(cfg).files == first.files);
  }
}

TEST_CASE("Outputs land under the output directory", "[experiments]") {
  auto cfg = small_config("positive-honest-tree");
  cfg.out_dir = scratch_dir("outputs").string();
  const auto out = run_experiment(cfg);
  write_outputs(cfg, out);
  for (const auto& [rel, bytes] : out.files) {
    std::ifstream in(fs::path(cfg.out_dir) / rel, std::ios::binary);
    REQUIRE(in.good());
    const std::string disk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(disk == bytes);
  }
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("CLI exit codes", "[experiments][cli]") {
  CHECK(run_cli("list") == 0);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("run no-such-experiment") == 2);
  CHECK(run_cli("run tree-identities --paths 0") == 2);
  CHECK(run_cli("run tree-identities --execution gpu") == 2);

  const fs::path dir = scratch_dir("cli");
  fs::create_directories(dir);
  {
    std::ofstream bad(dir / "bad.json");
    bad << R"({"experiment": "evanescence-scan", "model": {"b": 2.0}})";
  }
  CHECK(run_cli("run evanescence-scan --config " + (dir / "bad.json").string() + " --out " + (dir / "x").string()) == 2);
  {
    std::ofstream broken(dir / "broken.json");
    broken << "{ not json";
  }
  CHECK(run_cli("run ruin-table --config " + (dir / "broken.json").string()) == 2);

  const fs::path out = dir / "run";
  CHECK(run_cli("run tree-identities --paths 5 --seed 3 --quiet --out " + out.string()) == 0);
  std::ifstream report(out / "report.json");
  REQUIRE(report.good());
  const auto j = nlohmann::json::parse(report);
  CHECK(j.at("pass") == true);
  CHECK(j.at("seed") == 3);
  fs::remove_all(dir);
}
