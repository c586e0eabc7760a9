// Acceptance run: one PASS/FAIL line per criterion, exit code 0 only if all pass.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "enlab/experiments.hpp"
#include "enlab/validation.hpp"

using namespace enlab;

namespace {

struct Timed {
  ExperimentOutput out;
  double seconds = 0.0;
};

ExperimentConfig shipped_config(const std::string& id) {
  std::ifstream in(std::string(ENLAB_CONFIG_DIR) + "/" + id + ".json");
  if (!in) throw std::runtime_error("missing config for " + id);
  return ExperimentConfig::from_json(nlohmann::json::parse(in));
}

Timed timed_run(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Timed r{run_experiment(cfg), 0.0};
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string failures(const ExperimentReport& rep) {
  std::string s;
  for (const auto& c : rep.checks)
    if (!c.pass) {
      char buf[256];
      std::snprintf(buf, sizeof buf, " %s=%.3g(limit %.3g)", c.name.c_str(), c.value, c.limit);
      s += buf;
    }
  return s.empty() ? "" : " failing:" + s;
}

int failed = 0;

void report(int n, const std::string& title, bool pass, const std::string& detail) {
  if (!pass) ++failed;
  std::printf("criterion %d [%s]: %s %s\n", n, title.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace

int main() {
  std::map<std::string, Timed> runs;
  auto run = [&](const std::string& id) -> const Timed& {
    runs[id] = timed_run(shipped_config(id));
    return runs[id];
  };

  try {
    {
      const auto& r = run("tree-identities");
      const bool ok = r.out.report.pass && r.seconds < 60.0;
      report(1, "tree identity suite", ok,
             fmt("(%g trees, %.1f s, limit 60 s)", r.out.report.summary.value("trees", 0.0), r.seconds) +
                 failures(r.out.report));
    }
    {
      const auto& r = run("counterexample-stopped");
      const bool ok = r.out.report.pass && r.seconds < 120.0;
      report(2, "counterexample, stopped", ok,
             fmt("(%g paths, %.1f s, limit 120 s)", r.out.report.summary.value("paths", 0.0), r.seconds) +
                 failures(r.out.report));
    }
    {
      const auto& r = run("counterexample-honest");
      const double frac = r.out.report.summary.value("charged_fraction", 0.0);
      report(3, "counterexample, honest", r.out.report.pass,
             fmt("(%g certified paths, charged fraction %.4f, %.1f s)", r.out.report.summary.value("paths", 0.0),
                 frac, r.seconds) +
                 failures(r.out.report));
    }
    {
      const auto& a = run("positive-stopped");
      const auto& b = run("positive-honest-tree");
      report(4, "positive cases", a.out.report.pass && b.out.report.pass,
             fmt("(%.1f s + %.1f s)", a.seconds, b.seconds) + failures(a.out.report) + failures(b.out.report));
    }
    {
      const auto& r = run("evanescence-scan");
      report(5, "evanescence scans", r.out.report.pass, fmt("(%.1f s)", r.seconds) + failures(r.out.report));
    }
    {
      StatSuiteConfig cfg;
      cfg.paths = 100000;
      cfg.ruin_paths = 1000000;
      const auto t0 = std::chrono::steady_clock::now();
      const auto suite = run_statistical_suite(cfg);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const auto& table = run("ruin-table");
      double worst_z = 0.0;
      std::string bad;
      for (const auto& c : suite.checks) {
        if (c.limit > 0.0 && c.slack == 0.0) worst_z = std::max(worst_z, c.z);
        if (!c.pass) bad += " " + c.name + fmt("(z %.2f)", c.z);
      }
      report(6, "statistical suite", suite.pass && table.out.report.pass,
             fmt("(%g checks at 1e5 paths, worst martingale z %.2f, %.1f s)", static_cast<double>(suite.checks.size()),
                 worst_z, secs) +
                 (bad.empty() ? "" : " failing:" + bad) + failures(table.out.report));
    }
    {
      // the runs above are the first parallel run; repeat each in parallel and once serially
      std::string bad;
      double secs = 0.0;
      for (const auto& id : experiment_ids()) {
        auto cfg = shipped_config(id);
        cfg.batch.execution = Execution::parallel;
        const auto again = timed_run(cfg);
        cfg.batch.execution = Execution::serial;
        const auto serial = timed_run(cfg);
        secs += again.seconds + serial.seconds;
        const auto& first = runs.at(id).out.files;
        if (again.out.files != first) bad += " " + id + "(rerun)";
        if (serial.out.files != first) bad += " " + id + "(serial)";
      }
      report(7, "reproducibility", bad.empty(),
             fmt("(%g experiments x 3 runs, %.1f s)", static_cast<double>(experiment_ids().size()), secs) +
                 (bad.empty() ? "" : " differing:" + bad));
    }
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d of 7 criteria failed\n", failed == 0 ? "ACCEPTED" : "REJECTED", failed);
  return failed == 0 ? 0 : 1;
}
