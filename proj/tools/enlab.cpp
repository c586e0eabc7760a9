#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "enlab/errors.hpp"
#include "enlab/experiments.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

enlab::ExperimentConfig load_config(const std::string& id, const std::string& file) {
  if (file.empty()) return enlab::default_config(id);
  std::ifstream in(file);
  if (!in) throw enlab::UsageError("cannot open config " + file);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw enlab::UsageError("config is not valid JSON: " + std::string(e.what()));
  }
  if (!j.contains("experiment")) j["experiment"] = id;
  if (j.at("experiment") != id) throw enlab::UsageError("config is for experiment " + j.at("experiment").dump());
  return enlab::ExperimentConfig::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"enlab: structure conditions under progressive enlargement"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "list experiment ids");
  auto* run = app.add_subcommand("run", "run one experiment");
  std::string id, config_file, out_dir, execution;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  bool quiet = false;
  run->add_option("experiment", id, "experiment id")->required();
  run->add_option("--config", config_file, "JSON config file (defaults when omitted)");
  run->add_option("--seed", seed, "override the seed");
  run->add_option("--paths", paths, "override n_paths (trees for the tree experiments)");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--execution", execution, "serial or parallel")->check(CLI::IsMember({"serial", "parallel"}));
  run->add_flag("--quiet", quiet, "print only the verdict line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  if (list->parsed()) {
    for (const auto& e : enlab::experiment_ids()) std::printf("%-24s %s\n", e.c_str(), enlab::experiment_description(e).c_str());
    return kPass;
  }

  try {
    enlab::ExperimentConfig cfg = load_config(id, config_file);
    if (seed) cfg.seed = *seed;
    if (paths) cfg.n_paths = *paths;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (cfg.out_dir.empty()) cfg.out_dir = "out/" + id;
    if (execution == "serial") cfg.batch.execution = enlab::Execution::serial;
    if (execution == "parallel") cfg.batch.execution = enlab::Execution::parallel;
    cfg.validate();

    const auto out = enlab::run_experiment(cfg);
    enlab::write_outputs(cfg, out);
    if (!quiet) {
      for (const auto& c : out.report.checks)
        std::printf("  [%s] %-44s value %.6g limit %.6g\n", c.pass ? "pass" : "FAIL", c.name.c_str(), c.value,
                    c.limit);
    }
    std::printf("%s: %s (report %s/report.json)\n", id.c_str(), out.report.pass ? "PASS" : "FAIL",
                cfg.out_dir.c_str());
    return out.report.pass ? kPass : kFail;
  } catch (const enlab::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const enlab::ParameterError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFail;
  }
}
