#include <catch_amalgamated.hpp>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>

#include "enlab/errors.hpp"
#include "enlab/ruin.hpp"

using namespace enlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

using big = boost::multiprecision::cpp_dec_float_50;

// Survival probability for unit claims, written out as the alternating
// finite sum and evaluated in 50-digit arithmetic.
double ruin_oracle(double x, double lambda, double mu) {
  const big rho = big(lambda) / big(mu);
  const big u = big(x);
  big sum = 0, fact = 1;
  for (int k = 0; k <= static_cast<int>(std::floor(x)); ++k) {
    if (k > 0) fact *= k;
    const big base = rho * (big(k) - u);
    sum += exp(rho * (u - big(k))) * pow(base, k) / fact;
  }
  return static_cast<double>(big(1) - (big(1) - rho) * sum);
}

const double kLambda = 1.0;
const double kMu = 1.0 / std::log(2.0);

}  // namespace

TEST_CASE("Ruin function matches frozen reference values", "[ruin]") {
  const RuinFunction psi(kLambda, kMu);
  CHECK_THAT(psi.value(0.0), WithinRel(0.6931471805599453, 1e-14));
  CHECK_THAT(psi.value(5.0), WithinRel(0.02482366496508547, 1e-12));
  CHECK_THAT(psi.value(10.0), WithinRel(7.7573215463166e-4, 1e-10));
  CHECK_THAT(psi.value(20.0), WithinRel(7.5755093076e-7, 1e-9));
  CHECK_THAT(psi.adjustment_coefficient(), WithinRel(std::log(2.0), 1e-13));
  CHECK_THAT(psi.asymptotic_constant(), WithinRel(0.794349724781045, 1e-12));
  CHECK(psi.switch_point() == 11);
  CHECK_THAT(psi.x_max() - psi.x_cert(), WithinAbs(10.0, 1e-12));
}

TEST_CASE("Ruin function agrees with the high-precision series", "[ruin]") {
  for (auto [lambda, mu] : {std::pair{kLambda, kMu}, std::pair{0.5, 1.0}, std::pair{2.0, 2.5}}) {
    const RuinFunction psi(lambda, mu);
    for (double x : {0.0, 0.25, 1.0, 1.5, 3.9, 6.0, 9.99, 14.2, 20.0}) {
      const double ref = ruin_oracle(x, lambda, mu);
      INFO("lambda " << lambda << " mu " << mu << " x " << x);
      CHECK_THAT(psi.value(x), WithinRel(ref, 1e-8));
    }
    CHECK_THAT(psi.value(0.0), WithinRel(lambda / mu, 1e-14));
  }
}

TEST_CASE("Lundberg exponent and Cramer constant follow their closed forms", "[ruin]") {
  for (auto [lambda, mu] : {std::pair{1.0, 2.0}, std::pair{0.3, 0.4}, std::pair{kLambda, kMu}}) {
    const double R = lundberg_exponent(lambda, mu);
    CHECK(R > 0.0);
    CHECK_THAT(lambda * (std::exp(R) - 1.0), WithinRel(mu * R, 1e-12));
    const RuinFunction psi(lambda, mu);
    CHECK_THAT(psi.asymptotic_constant(), WithinRel((mu - lambda) / (lambda * std::exp(R) - mu), 1e-10));
    // the tail and the series coincide beyond the switch point
    const double x = psi.switch_point() + 3.5;
    CHECK_THAT(psi.value(x), WithinRel(ruin_oracle(x, lambda, mu), 1e-8));
  }
  CHECK_THROWS_AS(RuinFunction(1.0, 1.0), ParameterError);
  CHECK_THROWS_AS(RuinFunction(-1.0, 2.0), ParameterError);
}

TEST_CASE("Ruin pieces and compositions reproduce point values", "[ruin]") {
  const RuinFunction psi(kLambda, kMu);
  for (int k : {0, 3, 10, 11, 14}) {
    const ExpPoly p = psi.piece(k);
    for (double s : {0.0, 0.3, 0.99}) CHECK_THAT(p.value(k + s), WithinRel(psi.value(k + s), 1e-12));
  }
  // Psi(0.4 + kMu (t - 1)) over (1, 4]
  const auto pieces = psi.compose_linear(0.4, kMu, 1.0, 1.0, 4.0);
  const PiecewiseFunction f(pieces);
  for (double t : {1.01, 1.5, 2.2, 3.0, 3.99, 4.0})
    CHECK_THAT(f.value(t), WithinRel(psi.value(0.4 + kMu * (t - 1.0)), 1e-12));
  for (std::size_t i = 1; i < pieces.size(); ++i) CHECK(pieces[i].lo == pieces[i - 1].hi);

  const auto table = psi.table();
  REQUIRE(table.size() > 2);
  CHECK(table.front().first == 0.0);
  CHECK_THAT(table.back().first, WithinAbs(psi.x_max(), 0.011));
  for (std::size_t i = 1; i < table.size(); ++i) CHECK(table[i].second <= table[i - 1].second);
}

TEST_CASE("First-passage Monte Carlo agrees with the series", "[ruin][statistics]") {
  const RuinFunction psi(kLambda, kMu);
  const double escape = escape_level_for_bias(kLambda, kMu, 1e-6);
  CHECK(std::exp(-psi.adjustment_coefficient() * escape) <= 1e-6 * (1.0 + 1e-9));
  for (double x : {0.0, 1.0, 3.0}) {
    const auto est = ruin_probability_mc(x, kLambda, kMu, 40000, 17 + static_cast<std::uint64_t>(x), escape);
    INFO("x " << x << " estimate " << est.estimate << " se " << est.standard_error);
    CHECK(std::abs(est.estimate - psi.value(x)) <= 4.0 * est.standard_error + est.bias_bound + 1e-4);
  }
}
