#include <catch_amalgamated.hpp>

#include <cmath>

#include "enlab/calculus.hpp"
#include "enlab/errors.hpp"
#include "enlab/rng.hpp"
#include "enlab/validation.hpp"

using namespace enlab;
using Catch::Matchers::WithinAbs;

namespace {

StatSuiteConfig reduced() {
  StatSuiteConfig cfg;
  cfg.paths = 20000;
  cfg.ruin_paths = 100000;
  cfg.seed = 11;
  return cfg;
}

void require_all_pass(const std::vector<StatCheck>& checks) {
  for (const auto& c : checks) {
    INFO(c.name << ": mean " << c.mean << " expected " << c.expected << " se " << c.standard_error << " z " << c.z);
    CHECK(c.pass);
  }
}

}  // namespace

TEST_CASE("Mean checks judge gaps in standard errors", "[statistics]") {
  const auto c = mean_check("flat", {1.0, 1.0, 1.0}, 1.0, 3.0);
  CHECK(c.pass);
  CHECK(c.z == 0.0);
  const auto d = mean_check("offset", {1.0, 1.0, 1.0}, 0.0, 3.0);
  CHECK_FALSE(d.pass);
  CHECK(std::isinf(d.z));
  const auto e = mean_check("spread", {0.0, 2.0, 0.0, 2.0}, 1.0, 3.0);
  CHECK_THAT(e.standard_error, WithinAbs(std::sqrt(4.0 / 3.0 / 4.0), 1e-15));
  CHECK_THROWS_AS(mean_check("tiny", {1.0}, 1.0, 3.0), ParameterError);

  const auto counts = counting_path({0.5, 1.5, 2.5}, 3.0);
  const auto cut = truncate_counts(counts, 2.0);
  CHECK(cut.horizon() == 2.0);
  CHECK(cut.event_times() == std::vector<double>{0.5, 1.5});
  CHECK_THROWS_AS(truncate_counts(counts, 4.0), RangeError);
}

TEST_CASE("Weighted model martingale and law checks pass", "[statistics]") { require_all_pass(weighted_checks(reduced())); }

TEST_CASE("Last-passage martingale checks pass", "[statistics]") {
  auto cfg = reduced();
  cfg.paths = 4000;
  require_all_pass(last_passage_checks(cfg));
}

TEST_CASE("Ruin function agrees with first-passage Monte Carlo", "[statistics]") { require_all_pass(ruin_checks(reduced())); }

TEST_CASE("Negative control: stopping without the drift is not a G-martingale", "[statistics]") {
  // M^tau alone has a nonzero mean; the checks must see it
  const WeightedJumpTimeModel model;
  const double T = 3.0;
  const auto samples = map_paths<double>(
      20000,
      [&](std::size_t i) {
        const auto counts = simulate_weighted_counts(model, T, 1.0, path_seed(99, i));
        const auto M = compensated_martingale(counts, model.lambda);
        return M.value(std::min(T, tau_weighted(counts, model)));
      },
      BatchOptions{});
  const auto c = mean_check("M^tau without drift", samples, 0.0, 4.0);
  INFO("mean " << c.mean << " z " << c.z);
  CHECK_FALSE(c.pass);
}

TEST_CASE("Negative control: a sign-flipped after-tau drift is rejected", "[statistics]") {
  const LastPassageModel model;
  const RuinFunction psi = model.ruin();
  const MarketModel market = model.market();
  const double t = 5.0;
  std::vector<double> right, wrong;
  const auto pairs = map_paths<std::pair<double, double>>(
      4000,
      [&](std::size_t i) -> std::pair<double, double> {
        const auto full = simulate_certified_counts(model, psi, t, path_seed(606, i));
        const PassageTime pt = tau_last_passage(full, model, psi);
        if (!(pt.tau < t)) return {0.0, 0.0};
        const auto counts = truncate_counts(full, t);
        AzemaTriple az = azema_last_passage(counts, model, psi);
        az.tau = pt.tau;
        az.certified = pt.certified;
        const auto X = stochastic_exponential(counts, market);
        const double hat = jeulin_hat_path(X, f_brackets(X, market, az).xm, az, Side::after).value(t);
        const double raw = X.value(t) - X.value(az.tau);
        // hat = raw + drift, so raw - drift flips the sign of the correction
        return {hat, 2.0 * raw - hat};
      },
      BatchOptions{});
  for (const auto& [a, b] : pairs) {
    right.push_back(a);
    wrong.push_back(b);
  }
  const auto ok = mean_check("right sign", right, 0.0, 4.0);
  const auto bad = mean_check("wrong sign", wrong, 0.0, 4.0);
  INFO("right z " << ok.z << " wrong z " << bad.z);
  CHECK(ok.pass);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("Negative control: a perturbed ruin function is rejected", "[statistics]") {
  auto cfg = reduced();
  cfg.ruin_points = {1.0};
  auto checks = ruin_checks(cfg);
  REQUIRE(checks.size() == 1);
  auto c = checks[0];
  const double gap = std::abs(c.mean - 1.05 * c.expected);
  CHECK(gap > c.limit * c.standard_error + c.slack);
}
