#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "enlab/exp_poly.hpp"
#include "enlab/segment.hpp"

using namespace enlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Composite Simpson rule, independent of the library's quadrature.
double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

ExpPoly sample() {
  // (2 + 3s - s^2) e^{0.5 s} + 4 - s, about origin 1
  return ExpPoly(1.0, {{{2.0, 3.0, -1.0}, 0.5}, {{4.0, -1.0}, 0.0}});
}

double sample_direct(double t) {
  const double s = t - 1.0;
  return (2.0 + 3.0 * s - s * s) * std::exp(0.5 * s) + 4.0 - s;
}

}  // namespace

TEST_CASE("ExpPoly evaluates its defining sum", "[exp_poly]") {
  const ExpPoly p = sample();
  for (double t : {1.0, 1.3, 2.0, 3.7})
    CHECK_THAT(p.value(t), WithinRel(sample_direct(t), 1e-14));
  CHECK(p.degree() == 2);
  CHECK(ExpPoly::constant(2.5).value(17.0) == 2.5);
  CHECK_THAT(ExpPoly::linear(1.0, 2.0, 3.0).value(4.5), WithinAbs(4.0, 1e-15));
  CHECK_THAT(ExpPoly::exponential(2.0, -1.0, 1.0).value(2.0), WithinRel(2.0 * std::exp(-1.0), 1e-15));
}

TEST_CASE("ExpPoly algebra matches pointwise arithmetic", "[exp_poly]") {
  const ExpPoly a = sample();
  const ExpPoly b = ExpPoly(0.5, {{{1.0, -2.0}, -0.3}});
  const ExpPoly sum = a.plus(b), prod = a.times(b), sc = a.scaled(-2.5);
  for (double t : {0.7, 1.0, 1.9, 2.6}) {
    CHECK_THAT(sum.value(t), WithinRel(a.value(t) + b.value(t), 1e-13));
    CHECK_THAT(prod.value(t), WithinRel(a.value(t) * b.value(t), 1e-13));
    CHECK_THAT(sc.value(t), WithinRel(-2.5 * a.value(t), 1e-15));
    CHECK_THAT(a.rebased(2.2).value(t), WithinRel(a.value(t), 1e-13));
  }
  // g(t) = a(origin + 0.4 + 2 (t - 3))
  const ExpPoly g = a.composed_affine(0.4, 2.0, 3.0);
  for (double t : {3.0, 3.25, 3.5})
    CHECK_THAT(g.value(t), WithinRel(a.value(1.0 + 0.4 + 2.0 * (t - 3.0)), 1e-13));
}

TEST_CASE("ExpPoly keeps precision when combined with a constant far from its origin", "[exp_poly][regression]") {
  // a truncated exponential series about t = 82, typical of composed ruin pieces
  const ExpPoly far(82.0, {{{1.0, -1.0, 0.5, -1.0 / 6.0, 1.0 / 24.0, -1.0 / 120.0}, 1.0}});
  const ExpPoly one = ExpPoly::constant(1.0, 0.0);
  for (double t : {82.1, 82.4, 82.69}) {
    const double expected = 1.0 - far.value(t);
    CHECK_THAT(one.plus(far.scaled(-1.0)).value(t), WithinRel(expected, 1e-14));
    CHECK_THAT(one.scaled(3.0).times(far).value(t), WithinRel(3.0 * far.value(t), 1e-14));
  }
}

TEST_CASE("ExpPoly integrals agree with Simpson's rule", "[exp_poly]") {
  const ExpPoly p = sample();
  const double exact = simpson(sample_direct, 0.2, 2.9);
  CHECK_THAT(p.integral(0.2, 2.9), WithinRel(exact, 1e-10));
  const ExpPoly F = p.antiderivative();
  CHECK_THAT(F.value(2.9) - F.value(0.2), WithinRel(exact, 1e-10));
  CHECK_THAT(F.value(F.origin()), WithinAbs(0.0, 1e-14));
  for (int k : {0, 1, 3}) {
    for (double c : {0.0, -1.5, 0.8}) {
      const double ref = simpson([&](double s) { return std::pow(s, k) * std::exp(c * s); }, 0.0, 1.7);
      CHECK_THAT(power_exp_integral(k, c, 1.7), WithinRel(ref, 1e-10));
    }
  }
  // near-zero rates must not lose digits
  CHECK_THAT(power_exp_integral(2, 1e-12, 2.0), WithinRel(8.0 / 3.0, 1e-10));
}

TEST_CASE("Piecewise algebra and quadrature", "[segment]") {
  const PiecewiseFunction f({{0.0, 1.0, Segment(sample())}, {1.0, 2.0, Segment(ExpPoly::constant(3.0))}});
  const PiecewiseFunction g = pw_constant(0.5, 1.5, 2.0);
  const auto prod = pw_product(f, g);
  const auto sum = pw_sum(f, g);
  const auto quot = pw_quotient(f, g);
  CHECK_THAT(prod.value(0.75), WithinRel(2.0 * sample().value(0.75), 1e-14));
  CHECK_THAT(prod.value(1.25), WithinRel(6.0, 1e-15));
  CHECK(prod.value(0.25) == 0.0);  // outside g's pieces
  CHECK_THAT(sum.value(0.25), WithinRel(sample().value(0.25), 1e-14));
  CHECK_THAT(sum.value(1.75), WithinRel(3.0, 1e-15));
  CHECK_THAT(quot.value(1.2), WithinRel(1.5, 1e-15));
  CHECK_THAT(f.value(1.0), WithinRel(sample().value(1.0), 1e-14));  // left-continuous at the break

  const double ref = simpson([&](double t) { return f.value(t); }, 0.0, 1.0) + 3.0;
  CHECK_THAT(f.integral(0.0, 2.0), WithinRel(ref, 1e-10));
  CHECK_THAT(f.restricted(0.5, 1.5).integral(0.0, 2.0), WithinRel(f.integral(0.5, 1.5), 1e-12));

  // a generic callable integrates by adaptive quadrature
  const Segment generic([](double t) { return std::sin(t); }, "sin");
  CHECK_THAT(integrate(generic, 0.0, M_PI), WithinRel(2.0, 1e-9));
  CHECK_THAT(integrate_numerically(Segment(sample()), 0.2, 2.9), WithinRel(sample().integral(0.2, 2.9), 1e-9));
  CHECK_THAT(integrate_abs(generic, 0.0, 2.0 * M_PI), WithinRel(4.0, 1e-8));
}
