#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "enlab/calculus.hpp"
#include "enlab/errors.hpp"
#include "enlab/rng.hpp"

using namespace enlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("F-brackets of the market have their intensity densities", "[calculus]") {
  const WeightedJumpTimeModel model{0.4, 0.6, 1.0};
  const MarketModel market{1.0, 0.5, 1.0};
  const auto counts = simulate_weighted_counts(model, 2.0, 1.0, 42);
  const auto az = azema_weighted(counts, model);
  const auto X = stochastic_exponential(counts, market);
  const auto fb = f_brackets(X, market, az);
  const double h = model.hazard();
  for (double t : {0.5 * az.T1, az.T1 + 0.3 * (az.T2 - az.T1), az.T1 + 0.9 * (az.T2 - az.T1)}) {
    const double xl = X.left_limit(t);
    CHECK_THAT(fb.xx.density().value(t), WithinRel(market.poisson_rate * 0.25 * xl * xl, 1e-13));
    const double kernel = t > az.T1 ? -std::exp(-h * (t - az.T1)) : 0.0;
    CHECK_THAT(fb.xm.density().value(t), WithinAbs(market.poisson_rate * 0.5 * xl * kernel, 1e-14));
  }
  const auto ll = left_limits(X);
  for (double u : counts.event_times()) CHECK_THAT(ll.value(u), WithinRel(X.left_limit(u), 1e-14));
}

TEST_CASE("Weighted model: the G-bracket vanishes where the drift does not", "[calculus]") {
  const WeightedJumpTimeModel model{0.5, 0.5, 1.0};
  const MarketModel market{1.0, 0.5, 1.0};
  const double lp = market.poisson_rate * market.jump_multiplier;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto counts = simulate_weighted_counts(model, 1.0, 1.0, path_seed(3, i));
    const auto az = azema_weighted(counts, model);
    const auto X = stochastic_exponential(counts, market);
    const auto sb = g_bracket_stopped(X, market, az);
    CHECK(sb.max_rel_diff <= 1e-8);
    const double T1 = az.T1, tau = az.tau;
    // bracket: int_0^T1 lambda psi^2 X^2, X = e^{-lambda psi s} before T1
    const double bracket = market.jump_multiplier * (1.0 - std::exp(-2.0 * lp * T1)) / 2.0;
    CHECK_THAT(sb.closed.cumulative(tau), WithinRel(bracket, 1e-10));
    CHECK_THAT(sb.general.cumulative(tau), WithinRel(bracket, 1e-8));
    CHECK_THAT(sb.general.mass_on(IntervalSet::single(T1, tau, true, false)), WithinAbs(0.0, 1e-12));

    const auto pair = g_drift_stopped(X, market, az);
    // drift on ]T1, tau]: -lambda psi X_-, X = (1 + psi) e^{-lambda psi s}
    const double drift = -(1.0 + market.jump_multiplier) * (std::exp(-lp * T1) - std::exp(-lp * tau));
    CHECK_THAT(pair.drift.cumulative(tau), WithinRel(drift, 1e-10));
    const auto general = g_drift_stopped_general(X, market, az);
    CHECK_THAT(general.cumulative(tau), WithinRel(drift, 1e-10));
    CHECK(pair.drift.mass_on(IntervalSet::single(0.0, T1)) == 0.0);
  }
}

TEST_CASE("Jeulin hat of the compensated Poisson martingale before tau", "[calculus]") {
  const WeightedJumpTimeModel model{0.5, 0.5, 1.3};
  const auto counts = simulate_weighted_counts(model, 1.0, 1.0, 9);
  const auto az = azema_weighted(counts, model);
  const auto M = compensated_martingale(counts, model.lambda);
  const double T = counts.horizon();
  const auto cov = covariation_with_m(pw_constant(0.0, T, 1.0), az);
  const auto hat = jeulin_hat_path(M, cov, az, Side::before);
  // before T1 nothing changes; on [T1, tau] the drift cancels the compensator
  CHECK_THAT(hat.value(0.5 * az.T1), WithinAbs(-model.lambda * 0.5 * az.T1, 1e-13));
  for (double t : {az.T1, 0.5 * (az.T1 + az.tau), az.tau, 0.5 * (az.tau + T), T})
    CHECK_THAT(hat.value(t), WithinAbs(1.0 - model.lambda * az.T1, 1e-12));
}

TEST_CASE("Last passage after tau: bracket forms agree and match the ruin function", "[calculus]") {
  const LastPassageModel model;
  const RuinFunction psi = model.ruin();
  const MarketModel market = model.market();
  const double a = model.a();
  const double sig = model.sigma;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto counts = simulate_certified_counts(model, psi, 5.0, path_seed(404, i));
    const auto az = azema_last_passage(counts, model, psi);
    const auto X = stochastic_exponential(counts, market);
    const auto ab = g_bracket_after(X, market, az);
    worst = std::max(worst, ab.max_rel_diff);
    if (i >= 20) continue;
    const auto pair = g_drift_bracket_after(X, market, az);
    const double T = counts.horizon();
    for (int k = 1; k < 8; ++k) {
      const double t = az.tau + (T - az.tau) * k / 8.0;
      const double x = az.Y.left_limit(t) - a;
      const double xl = X.left_limit(t);
      INFO("path " << i << " t " << t << " x " << x);
      const double factor = x > 1.0 ? (1.0 - psi.value(x - 1.0)) / (1.0 - psi.value(x)) : 0.0;
      CHECK_THAT(pair.bracket.density().value(t), WithinAbs(model.lambda * sig * sig * xl * xl * factor, 1e-9 * xl * xl));
      const double kernel = x > 1.0 ? psi.value(x - 1.0) - psi.value(x) : 1.0 - psi.value(x);
      CHECK_THAT(pair.drift.density().value(t),
                 WithinAbs(model.lambda * sig * xl * kernel / (1.0 - psi.value(x)), 1e-9 * xl));
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("Path CSV export has one row per grid point", "[calculus]") {
  const WeightedJumpTimeModel model;
  const MarketModel market;
  const auto counts = simulate_weighted_counts(model, 1.0, 1.0, 1);
  const auto az = azema_weighted(counts, model);
  const auto X = stochastic_exponential(counts, market);
  std::ostringstream os;
  write_path_csv(os, az, g_drift_stopped(X, market, az), 11);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,Z,Ztilde,m,drift_density,bracket_density,in_window");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 11);
  CHECK_THROWS_AS(g_bracket_after(X, market, az), ModelError);
}
