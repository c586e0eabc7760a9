#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "enlab/batch.hpp"
#include "enlab/jump_path.hpp"
#include "enlab/random_time.hpp"

namespace enlab {

// Sample mean against a known expectation, judged in standard errors.
struct StatCheck {
  std::string name;
  std::size_t n = 0;
  double mean = 0.0;
  double expected = 0.0;
  double standard_error = 0.0;
  double z = 0.0;
  double limit = 0.0;  // pass iff z <= limit (plus `slack` in absolute terms)
  double slack = 0.0;
  bool pass = false;
  nlohmann::json to_json() const;
};

StatCheck mean_check(const std::string& name, const std::vector<double>& samples, double expected, double limit);

// Counting path cut back to [0, t].
PiecewiseJumpPath truncate_counts(const PiecewiseJumpPath& counts, double t);

// P(k1 T1 + k2 T2 <= t) for Poisson arrival times T1 < T2.
double weighted_tau_cdf(const WeightedJumpTimeModel& model, double t);

struct StatSuiteConfig {
  std::size_t paths = 100000;
  std::uint64_t seed = 2024;
  WeightedJumpTimeModel weighted{0.5, 0.5, 1.0};
  MarketModel weighted_market{1.0, 0.5, 1.0};
  double t_weighted = 3.0;
  std::vector<double> tau_law_points{0.5, 1.0, 2.0, 3.0};
  LastPassageModel last_passage{0.5, 1.0, 1.0};
  double t_last_passage = 5.0;
  std::size_t ruin_paths = 1000000;
  std::vector<double> ruin_points{0.0, 1.0, 2.5, 5.0};
  double z_limit = 4.0;
  double law_z_limit = 3.0;
  double ruin_z_limit = 3.0;
  double ruin_slack = 1e-4;
  BatchOptions batch;
};

struct StatSuiteReport {
  std::vector<StatCheck> checks;
  bool pass = false;
  nlohmann::json to_json() const;
};

StatSuiteReport run_statistical_suite(const StatSuiteConfig& cfg);

// Pieces of the suite, exposed for tests.
std::vector<StatCheck> weighted_checks(const StatSuiteConfig& cfg);
std::vector<StatCheck> last_passage_checks(const StatSuiteConfig& cfg);
std::vector<StatCheck> ruin_checks(const StatSuiteConfig& cfg);

}  // namespace enlab
