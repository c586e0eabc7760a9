#include <catch_amalgamated.hpp>

#include <cmath>

#include "enlab/calculus.hpp"
#include "enlab/errors.hpp"
#include "enlab/rng.hpp"
#include "enlab/sc_checker.hpp"

using namespace enlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

PathMeasure lebesgue(double horizon, double lo, double hi, ExpPoly density, std::vector<Atom> atoms = {}) {
  IntervalSet support = IntervalSet::single(lo, hi);
  for (const auto& a : atoms) support = support.unite(IntervalSet::point(a.t));
  return PathMeasure(horizon, PiecewiseFunction({{lo, hi, Segment(std::move(density))}}), std::move(atoms), support);
}

}  // namespace

TEST_CASE("Drift proportional to the bracket satisfies SC", "[sc]") {
  const DriftBracketPair pair{lebesgue(2.0, 0.0, 2.0, ExpPoly::linear(0.0, 2.0, 0.0), {{0.5, 3.0}}),
                              lebesgue(2.0, 0.0, 2.0, ExpPoly::linear(0.0, 1.0, 0.0), {{0.5, 1.5}}),
                              IntervalSet::single(0.0, 2.0), "synthetic"};
  const auto v = check_sc(pair);
  CHECK(v.status == SCStatus::satisfied);
  CHECK(v.residual == 0.0);
  CHECK_FALSE(v.has_witness());
  CHECK_THAT(v.lambda_hat.value(1.3), WithinRel(2.0, 1e-14));
  REQUIRE(v.lambda_hat_atoms.size() == 1);
  CHECK_THAT(v.lambda_hat_atoms[0].weight, WithinRel(2.0, 1e-15));
  // int lambda-hat^2 d<M-hat>: 4 * int_0^2 t dt plus 4 * 1.5 from the atom
  CHECK_THAT(v.l2_norm, WithinRel(8.0 + 6.0, 1e-12));
  CHECK(v.reconstruction_error < 1e-13);
  CHECK(v.lambda_hat_samples.size() == 64 + 1);
}

TEST_CASE("Drift on a bracket-free stretch violates SC with that stretch as witness", "[sc]") {
  const DriftBracketPair pair{lebesgue(2.0, 0.0, 2.0, ExpPoly::constant(1.0)),
                              lebesgue(2.0, 0.0, 1.0, ExpPoly::constant(1.0)), IntervalSet::single(0.0, 2.0),
                              "synthetic"};
  const auto v = check_sc(pair);
  CHECK(v.status == SCStatus::violated);
  CHECK_THAT(v.residual, WithinAbs(1.0, 1e-13));
  CHECK(v.witness.approx_equal(IntervalSet::single(1.0, 2.0, true, false), 1e-12));
  CHECK(pair.bracket.abs_mass_on(v.witness) < 1e-15);

  // the same drift outside the window is ignored
  DriftBracketPair inside = pair;
  inside.window = IntervalSet::single(0.0, 1.0);
  CHECK(check_sc(inside).status == SCStatus::satisfied);
}

TEST_CASE("A drift atom without a bracket atom is a point witness", "[sc]") {
  const DriftBracketPair pair{lebesgue(1.0, 0.0, 1.0, ExpPoly::constant(0.5), {{0.25, 2.0}}),
                              lebesgue(1.0, 0.0, 1.0, ExpPoly::constant(1.0)), IntervalSet::single(0.0, 1.0), "atom"};
  const auto v = check_sc(pair);
  CHECK(v.status == SCStatus::violated);
  CHECK_THAT(v.residual, WithinAbs(2.0, 1e-15));
  CHECK(v.witness.contains(0.25));
  CHECK(v.witness.length() == 0.0);
}

TEST_CASE("Checker input validation and split windows", "[sc]") {
  const auto d = lebesgue(1.0, 0.0, 1.0, ExpPoly::constant(1.0));
  CHECK_THROWS_AS(check_sc({d, lebesgue(2.0, 0.0, 1.0, ExpPoly::constant(1.0)), IntervalSet::single(0.0, 1.0), ""}),
                  ParameterError);
  CHECK_THROWS_AS(check_sc({d, d, IntervalSet::single(0.0, 1.5), ""}), ParameterError);

  SCVerdict a, b;
  a.window = IntervalSet::single(0.0, 1.0);
  b.window = IntervalSet::single(0.5, 2.0, true, false);
  CHECK_THROWS_AS(check_sc_split(a, b), ParameterError);
  b.window = IntervalSet::single(1.0, 2.0, true, false);
  a.status = SCStatus::satisfied;
  b.status = SCStatus::violated;
  CHECK(check_sc_split(a, b).status == SCStatus::violated);
  b.status = SCStatus::satisfied;
  CHECK(check_sc_split(a, b).status == SCStatus::satisfied);

  const auto agg = aggregate({a, b, check_sc({d, lebesgue(1.0, 0.0, 0.5, ExpPoly::constant(1.0)), IntervalSet::single(0.0, 1.0), ""})});
  CHECK(agg.paths == 3);
  CHECK(agg.satisfied == 2);
  CHECK(agg.violated == 1);
  CHECK(agg.status == SCStatus::violated);
  CHECK_THAT(agg.max_residual, WithinAbs(0.5, 1e-13));
}

TEST_CASE("Predictable finite-variation processes satisfy SC only when constant", "[sc]") {
  const PiecewiseJumpPath flat(2.0, {}, {Segment(ExpPoly::constant(3.0))});
  CHECK(check_constant_predictable(flat).status == SCStatus::satisfied);
  const PiecewiseJumpPath step(2.0, {1.0}, {Segment(ExpPoly::constant(0.0)), Segment(ExpPoly::constant(1.0, 1.0))});
  const auto v = check_constant_predictable(step);
  CHECK(v.status == SCStatus::violated);
  CHECK_THAT(v.residual, WithinAbs(1.0, 1e-15));
  const PiecewiseJumpPath ramp(2.0, {}, {Segment(ExpPoly::linear(0.0, 0.5, 0.0))});
  CHECK(check_constant_predictable(ramp).status == SCStatus::violated);
}

TEST_CASE("Weighted model: SC fails on ]T1, tau] on every path", "[sc]") {
  const WeightedJumpTimeModel model;
  const MarketModel market;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto counts = simulate_weighted_counts(model, 1.0, 1.0, path_seed(12, i));
    const auto az = azema_weighted(counts, model);
    const auto X = stochastic_exponential(counts, market);
    const auto v = check_sc(g_drift_stopped(X, market, az));
    INFO("path " << i);
    CHECK(v.status == SCStatus::violated);
    CHECK(v.witness.approx_equal(IntervalSet::single(az.T1, az.tau, true, false), 1e-9));
    CHECK(v.witness.intersect(IntervalSet::single(0.0, az.T1)).length() == 0.0);
  }
}

TEST_CASE("Tree verdicts: positive cases and the converse construction", "[sc][tree]") {
  // independent geometric time: G-drift and F-drift coincide before tau
  const ProbTree tree = ProbTree::uniform(3, {0.5, 0.3, 0.2});
  const TreeSpace s(tree, geometric_time(tree, 0.3));
  const TreeAzema az = project_optional(s);
  const Proc M = s.from_nodes(walk_martingale(tree, {1.0, 0.0, -2.0}));
  const auto r = positive_case_verify(s, az, M, 0.4, TreeSide::before);
  CHECK(r.hypothesis_holds);
  CHECK(r.verdict.status == SCStatus::satisfied);
  CHECK(r.route_f_gap < 1e-12);
  CHECK(r.route_phi_gap < 1e-12);
  for (int t = 1; t <= s.depth(); ++t)
    for (std::size_t w = 0; w < s.size(); ++w)
      if (s.tau(w) >= t) CHECK_THAT(r.lambda_hat[t][w], WithinAbs(0.4, 1e-12));

  // tau revealing the next move: the thin set is charged and the converse martingale breaks SC
  const ProbTree small = ProbTree::uniform(2, {0.5, 0.5});
  for (auto side : {TreeSide::before, TreeSide::after}) {
    const TreeSpace rs(small, revealing_time(small, 1, 1, side == TreeSide::before));
    const auto raz = project_optional(rs);
    const auto c = converse_construction(rs, raz, side);
    CHECK(c.charged);
    CHECK(c.predictable);
    CHECK(c.nonconstant);
    CHECK(c.verdict.status == SCStatus::violated);
  }

  // evanescence: independent time charges neither thin set
  CHECK(evanescence_scan(s, az, M, ThinSet::ztilde_zero).charged_fraction == 0.0);
  CHECK(evanescence_scan(s, az, M, ThinSet::ztilde_one).charged_fraction == 0.0);
}
