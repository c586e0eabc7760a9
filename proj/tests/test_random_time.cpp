#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "enlab/errors.hpp"
#include "enlab/random_time.hpp"
#include "enlab/rng.hpp"
#include "enlab/validation.hpp"

using namespace enlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n = 4000) {
  if (!(b > a)) return 0.0;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// P(tau > t | F_t) on [T1, T2): T2 - t is exponential and tau > t iff T2 > (t - k1 T1) / k2.
double weighted_z_oracle(const WeightedJumpTimeModel& m, double T1, double t) {
  const double threshold = (t - m.k1 * T1) / m.k2;
  return 1.0 - simpson([&](double v) { return m.lambda * std::exp(-m.lambda * (v - t)); }, t, threshold);
}

}  // namespace

TEST_CASE("Weighted jump time: Z against a quadrature oracle", "[random_time]") {
  const WeightedJumpTimeModel model{0.3, 0.7, 1.4};
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const auto counts = simulate_weighted_counts(model, 1.0, 1.0, seed);
    const auto az = azema_weighted(counts, model);
    const double T1 = az.T1, T2 = az.T2;
    CHECK(az.tau == model.k1 * T1 + model.k2 * T2);
    CHECK(az.tau == tau_weighted(counts, model));
    CHECK(counts.horizon() >= T2 + 1.0);
    for (double f : {0.0, 0.5, 0.999}) {
      const double t = T1 + f * (T2 - T1);
      CHECK_THAT(az.Z.value(t), WithinAbs(weighted_z_oracle(model, T1, t), 1e-10));
      CHECK_THAT(az.z_tilde(t), WithinAbs(az.Z.value(t), 1e-14));
      // m on [T1, T2) carries no jumps: 1 + (k2 / k1)(1 - Z)
      CHECK_THAT(az.m.value(t), WithinRel(1.0 + model.k2 / model.k1 * (1.0 - az.Z.value(t)), 1e-12));
    }
    CHECK(az.Z.value(0.5 * T1) == 1.0);
    CHECK(az.Z.value(T2) == 0.0);
    CHECK(az.z_tilde(T1) == 1.0);
    CHECK(az.z_tilde(T2) == 0.0);
    CHECK_THAT(az.D_oF.jump_at(T2), WithinAbs(0.0, 1e-14));
    CHECK(ztilde_identity_error(az) < 1e-12);
    CHECK(m_decomposition_error(az) < 1e-12);
  }
  CHECK_THROWS_AS(tau_weighted(counting_path({0.5}, 2.0), model), HorizonTooShort);
  CHECK_THROWS_AS((WeightedJumpTimeModel{0.5, 0.6, 1.0}.validate()), ParameterError);
  CHECK_THROWS_AS((WeightedJumpTimeModel{0.0, 1.0, 1.0}.validate()), ParameterError);
}

TEST_CASE("Weighted jump time: law of tau against quadrature", "[random_time]") {
  const WeightedJumpTimeModel model{0.5, 0.5, 1.0};
  for (double t : {0.3, 1.0, 2.5, 6.0}) {
    // tau <= t iff T1 + k2 E <= t with E the second inter-arrival time
    const double ref = simpson(
        [&](double u) { return model.lambda * std::exp(-model.lambda * u) * (1.0 - std::exp(-model.lambda * (t - u) / model.k2)); },
        0.0, t);
    CHECK_THAT(weighted_tau_cdf(model, t), WithinAbs(ref, 1e-10));
  }
}

TEST_CASE("Last passage: tau, Z and the dual projection against path oracles", "[random_time]") {
  const LastPassageModel model;  // b = 1/2, sigma = 1, lambda = 1
  CHECK_THAT(model.a(), WithinRel(1.0, 1e-15));
  CHECK_THAT(model.mu(), WithinRel(1.0 / std::log(2.0), 1e-15));
  const RuinFunction psi = model.ruin();
  const double a = model.a();
  for (std::uint64_t i = 0; i < 12; ++i) {
    const auto counts = simulate_certified_counts(model, psi, 5.0, path_seed(31, i));
    const auto az = azema_last_passage(counts, model, psi);
    const double T = counts.horizon();
    INFO("path " << i << " horizon " << T);
    REQUIRE(az.certified);
    CHECK(az.Y.value(T) - a > psi.x_cert());

    // grid oracle for the last time Y sits at or below a, and for continuous upcrossings
    const double step = 1e-4;
    double last = 0.0;
    int upcrossings = 0;
    double prev = az.Y.value(0.0);
    for (double t = step; t <= T; t += step) {
      const double y = az.Y.value(t);
      if (y <= a) last = t;
      if (prev <= a && y > a) ++upcrossings;
      prev = y;
    }
    CHECK(std::abs(az.tau - last) <= 2.0 * step);
    CHECK_THAT(az.D_oF.value(T), WithinAbs(upcrossings * (1.0 - psi.value(0.0)), 1e-12));

    for (double t = 0.0; t <= T; t += 0.37) {
      const double y = az.Y.value(t) - a;
      CHECK_THAT(az.Z.value(t), WithinAbs(y <= 0.0 ? 1.0 : psi.value(y), 1e-9));
    }
    CHECK(ztilde_identity_error(az) < 1e-9);
    CHECK(m_decomposition_error(az) < 1e-9);
    // jumps of m happen only at jumps of N; piece breaks elsewhere match to rounding
    for (double u : az.m.jump_times(1e-12)) {
      INFO("m jumps by " << az.m.jump_at(u) << " at " << u);
      CHECK(counts.jump_at(u) == 1.0);
    }
  }
}

TEST_CASE("Last passage rejects mismatched ruin functions and bad parameters", "[random_time]") {
  const LastPassageModel model;
  const RuinFunction other(1.0, 2.0);
  const auto counts = counting_path({0.5}, 3.0);
  CHECK_THROWS_AS(azema_last_passage(counts, model, other), ModelError);
  CHECK_THROWS_AS((LastPassageModel{1.5, 1.0, 1.0}.validate()), ParameterError);
  CHECK_THROWS_AS((LastPassageModel{0.5, 0.0, 1.0}.validate()), ParameterError);
  // surrogate reads only the past
  const auto Y = drifted_level(counting_path({0.5, 1.0}, 3.0), 1.0);
  CHECK_THAT(last_passage_surrogate(Y, 0.0, 3.0), WithinAbs(2.0, 1e-14));
  CHECK(last_passage_surrogate(Y, 0.0, 1.5) == 1.5);
}
