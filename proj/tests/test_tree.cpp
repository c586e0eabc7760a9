#include <catch_amalgamated.hpp>

#include <fstream>
#include <json.hpp>

#include "enlab/errors.hpp"
#include "enlab/tree.hpp"

using namespace enlab;
using Catch::Matchers::WithinAbs;

namespace {

nlohmann::json load_fixture(const std::string& name) {
  std::ifstream in(std::string(ENLAB_FIXTURE_DIR) + "/" + name);
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

// Compares an outcome-indexed process with node-indexed expected values.
void check_against_nodes(const TreeSpace& s, const Proc& got, const nlohmann::json& expected, const char* label) {
  const auto want = expected.get<std::vector<std::vector<double>>>();
  REQUIRE(static_cast<int>(want.size()) == s.depth() + 1);
  for (int t = 0; t <= s.depth(); ++t)
    for (std::size_t w = 0; w < s.size(); ++w) {
      INFO(label << " t " << t << " outcome " << w);
      CHECK_THAT(got[t][w], WithinAbs(want[t][s.node(t, w)], 1e-14));
    }
}

void check_fixture(const std::string& name) {
  const auto fx = load_fixture(name);
  const TreeModel model = tree_from_json(fx.at("spec"));
  const TreeSpace s(model.tree, model.tau);
  const auto leaf_tau = fx.at("leaf_tau").get<std::vector<int>>();
  REQUIRE(s.size() == leaf_tau.size());
  for (std::size_t w = 0; w < s.size(); ++w) CHECK(s.tau(w) == leaf_tau[s.outcomes()[w].leaf]);

  const TreeAzema az = project_optional(s);
  const auto& ex = fx.at("expected");
  check_against_nodes(s, az.Z, ex.at("Z"), "Z");
  check_against_nodes(s, az.Zt, ex.at("Zt"), "Zt");
  check_against_nodes(s, az.Do, ex.at("Do"), "Do");
  check_against_nodes(s, az.m, ex.at("m"), "m");
  CHECK(verify_ztilde_identity(s, az) < 1e-14);
  CHECK(martingale_error(s, az.m, Filtration::F) < 1e-14);

  const Proc M = s.from_nodes(model.martingale);
  if (ex.contains("M")) check_against_nodes(s, M, ex.at("M"), "M");
  if (ex.contains("mM_bracket"))
    check_against_nodes(s, sharp_bracket(s, az.m, M, Filtration::F), ex.at("mM_bracket"), "<m,M>");
  if (ex.contains("Mhat_before"))
    check_against_nodes(s, jeulin_hat(s, az, M, TreeSide::before), ex.at("Mhat_before"), "Mhat");
}

}  // namespace

TEST_CASE("Hand-computed first-hit tree", "[tree][fixture]") { check_fixture("two_step_first_hit.json"); }

TEST_CASE("Hand-computed last-visit tree", "[tree][fixture]") {
  check_fixture("two_step_last_visit.json");
  const auto fx = load_fixture("two_step_last_visit.json");
  const TreeModel model = tree_from_json(fx.at("spec"));
  CHECK(TreeSpace(model.tree, model.tau).is_honest());
}

TEST_CASE("Probability trees carry consistent node bookkeeping", "[tree]") {
  const ProbTree t = ProbTree::uniform(3, {0.2, 0.3, 0.5});
  CHECK(t.leaves() == 27);
  for (int lvl = 0; lvl <= 3; ++lvl) {
    double total = 0.0;
    for (std::size_t i = 0; i < t.level_size(lvl); ++i) total += t.probability(lvl, i);
    CHECK_THAT(total, WithinAbs(1.0, 1e-14));
  }
  // level-1 node i is child i of the root; children follow parent order
  for (std::size_t i = 0; i < 3; ++i) CHECK(t.child_index(1, i) == static_cast<int>(i));
  CHECK(t.first_child(1, 2) == 6);
  CHECK(t.parent(2, 7) == 2);
  CHECK(t.ancestor(1, 26) == 2);
  CHECK(t.ancestor(2, 26) == 8);
  CHECK_THAT(t.probability(3, 26), WithinAbs(0.125, 1e-15));

  CHECK_THROWS_AS(ProbTree(2, {{{0.5, 0.4}}, {{1.0}, {1.0}}}), ParameterError);
  CHECK_THROWS_AS(ProbTree(2, {{{0.5, 0.5}}}), ParameterError);
  CHECK_THROWS_AS(ProbTree(0, {}), ParameterError);
  CHECK_THROWS_AS(ProbTree::uniform(13, {0.5, 0.5}), RangeError);  // 8192 paths exceed the cap
}

TEST_CASE("Tree random times validate their laws", "[tree]") {
  const ProbTree t = ProbTree::uniform(2, {0.5, 0.5});
  CHECK_NOTHROW(constant_time(t, 3).validate(t));
  TreeRandomTime bad = constant_time(t, 1);
  bad.law[0][1] = 0.7;
  CHECK_THROWS_AS(bad.validate(t), ParameterError);
  CHECK_THROWS_AS(TreeRandomTime::deterministic({0, 1, 2}, 2).validate(t), ParameterError);

  // a stopping time charges no thin G-set before it and sees Z-tilde = 1 up to tau
  const TreeSpace s(t, first_hit_time(t, 1));
  const auto az = project_optional(s);
  for (std::size_t w = 0; w < s.size(); ++w)
    for (int k = 0; k <= s.tau(w) && k <= s.depth(); ++k) CHECK(az.Zt[k][w] == 1.0);
  CHECK(s.is_adapted(az.Z, Filtration::F));
  CHECK(s.is_predictable(az.Zm, Filtration::F));

  // geometric time is independent of the tree
  const TreeSpace g(ProbTree::uniform(3, {0.5, 0.5}), geometric_time(ProbTree::uniform(3, {0.5, 0.5}), 0.3));
  const auto gz = project_optional(g);
  for (std::size_t w = 0; w < g.size(); ++w) CHECK_THAT(gz.Z[2][w], WithinAbs(0.49, 1e-14));
}

TEST_CASE("Tree process algebra", "[tree]") {
  const ProbTree t = ProbTree::uniform(2, {0.5, 0.5});
  const TreeSpace s(t, constant_time(t, 3));
  const Proc M = s.from_nodes(walk_martingale(t, {1.0, -1.0}));
  CHECK(martingale_error(s, M, Filtration::F) < 1e-15);
  CHECK(max_abs_diff(s, cumulate(increments(M)), M) == 0.0);
  // <M>_t = t for a fair +-1 walk
  const Proc b = sharp_bracket(s, M, M, Filtration::F);
  for (std::size_t w = 0; w < s.size(); ++w) {
    CHECK(b[1][w] == 1.0);
    CHECK(b[2][w] == 2.0);
  }
  // M^2 - <M> is a martingale
  Proc sq = s.zeros();
  for (int k = 0; k <= 2; ++k)
    for (std::size_t w = 0; w < s.size(); ++w) sq[k][w] = M[k][w] * M[k][w] - b[k][w];
  CHECK(martingale_error(s, sq, Filtration::F) < 1e-15);
  Proc m2 = s.zeros();
  for (int k = 0; k <= 2; ++k)
    for (std::size_t w = 0; w < s.size(); ++w) m2[k][w] = M[k][w] * M[k][w];
  CHECK(max_abs_diff(s, compensator(s, m2, Filtration::F), b) < 1e-15);
}
