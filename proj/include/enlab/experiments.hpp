#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "enlab/batch.hpp"

namespace enlab {

// Unknown experiment id or malformed configuration (CLI exit code 2).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string experiment;
  nlohmann::json model = nlohmann::json::object();       // experiment-specific parameters
  nlohmann::json tolerances = nlohmann::json::object();  // overrides of the defaults
  std::size_t n_paths = 1000;
  double horizon = 5.0;
  std::uint64_t seed = 7;
  std::string out_dir;
  std::size_t csv_paths = 3;  // per-path CSVs written for the first paths
  BatchOptions batch;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;  // canonical form; feeds the config hash
  void validate() const;
  double tol(const std::string& key, double fallback) const;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
  nlohmann::json to_json() const;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<CheckResult> checks;
  nlohmann::json summary = nlohmann::json::object();
  std::string config_hash;
  std::uint64_t seed = 0;
  bool pass = false;
  nlohmann::json to_json() const;
};

// Report plus every output file (relative path -> bytes), so runs can be compared in memory.
struct ExperimentOutput {
  ExperimentReport report;
  std::map<std::string, std::string> files;
};

const std::vector<std::string>& experiment_ids();
std::string experiment_description(const std::string& id);
// Defaults for an experiment, matching the configs/ directory.
ExperimentConfig default_config(const std::string& id);

std::string fnv1a_hex(const std::string& bytes);

ExperimentOutput run_experiment(const ExperimentConfig& cfg);
// Writes report.json and the CSVs under cfg.out_dir (created if missing).
void write_outputs(const ExperimentConfig& cfg, const ExperimentOutput& out);

}  // namespace enlab
