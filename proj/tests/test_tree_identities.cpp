#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "enlab/rng.hpp"
#include "enlab/sc_checker.hpp"
#include "enlab/tree.hpp"

using namespace enlab;
using Catch::Matchers::WithinAbs;

namespace {

constexpr std::size_t kTrees = 150;
constexpr double kTol = 1e-11;

// Z_t at each outcome by direct summation over the leaves below its node.
Proc z_oracle(const TreeSpace& s) {
  const ProbTree& tree = s.tree();
  const auto& law = s.random_time().law;
  Proc z = s.zeros();
  for (int t = 0; t <= s.depth(); ++t)
    for (std::size_t w = 0; w < s.size(); ++w) {
      const std::size_t node = s.node(t, w);
      double num = 0.0;
      for (std::size_t leaf = 0; leaf < tree.leaves(); ++leaf) {
        if (tree.ancestor(t, leaf) != node) continue;
        double survive = 0.0;
        for (int v = t + 1; v <= s.depth() + 1; ++v) survive += law[leaf][static_cast<std::size_t>(v)];
        num += tree.probability(s.depth(), leaf) * survive;
      }
      z[t][w] = num / tree.probability(t, node);
    }
  return z;
}

Proc squared(Proc p) {
  for (auto& r : p)
    for (auto& x : r) x *= x;
  return p;
}

}  // namespace

TEST_CASE("Azema supermartingale matches leaf enumeration", "[tree][property]") {
  for (std::size_t i = 0; i < kTrees; ++i) {
    std::mt19937_64 rng(path_seed(2024, i));
    const ProbTree tree = random_tree(rng);
    const TreeSpace s(tree, random_time(tree, rng));
    const TreeAzema az = project_optional(s);
    INFO("tree " << i);
    CHECK(max_abs_diff(s, az.Z, z_oracle(s)) < 1e-13);
    CHECK(verify_ztilde_identity(s, az) < kTol);
    CHECK(martingale_error(s, az.m, Filtration::F) < kTol);
    CHECK(s.is_adapted(az.Z, Filtration::F, 1e-14));
    // Z is a supermartingale: E[Z_{t+1} | F_t] <= Z_t
    for (int t = 0; t < s.depth(); ++t) {
      const auto next = s.cond_exp(az.Z[static_cast<std::size_t>(t) + 1], t, Filtration::F);
      for (std::size_t w = 0; w < s.size(); ++w) CHECK(next[w] <= az.Z[t][w] + 1e-14);
    }
  }
}

TEST_CASE("Before-tau identities hold on random trees", "[tree][property]") {
  for (std::size_t i = 0; i < kTrees; ++i) {
    std::mt19937_64 rng(path_seed(77, i));
    const ProbTree tree = random_tree(rng);
    const TreeSpace s(tree, random_time(tree, rng));
    const TreeAzema az = project_optional(s);
    const Proc M = s.from_nodes(random_martingale(tree, rng));
    INFO("tree " << i);
    CHECK(verify_g_compensator_stopped(s, az, squared(M)).max_error < kTol);
    CHECK(verify_predictable_projection_identities(s, az, M, false).max() < 1e-10);
    CHECK(martingale_error(s, jeulin_hat(s, az, M, TreeSide::before), Filtration::G) < kTol);
    const auto tr = truncation_densities(s, az, M, TreeSide::before);
    CHECK(tr.max_orthogonality_error < kTol);
    CHECK(tr.n_star <= tr.n_indicator);
    const Proc Mh = s.from_nodes(hypothesis_martingale(s, az, TreeSide::before, rng));
    const auto ph = verify_phi_hat_identity(s, az, Mh, TreeSide::before);
    REQUIRE(ph.hypothesis_holds);
    CHECK(ph.max_error < kTol);
    const Proc H = random_optional(s, Filtration::F, rng);
    CHECK(oi_defining_property_error(s, H, M, Filtration::F) < kTol);
  }
}

TEST_CASE("After-tau identities hold for honest times", "[tree][property]") {
  for (std::size_t i = 0; i < kTrees; ++i) {
    std::mt19937_64 rng(path_seed(91, i));
    const ProbTree tree = random_tree(rng);
    const TreeSpace s(tree, random_honest_time(tree, rng));
    REQUIRE(s.is_honest());
    const TreeAzema az = project_optional(s);
    const Proc M = s.from_nodes(random_martingale(tree, rng));
    INFO("tree " << i);
    CHECK(verify_g_compensator_after(s, az, squared(M)).max_error < kTol);
    CHECK(verify_predictable_projection_identities(s, az, M, true).max() < 1e-10);
    CHECK(martingale_error(s, jeulin_hat(s, az, M, TreeSide::after), Filtration::G) < kTol);
    const Proc Mh = s.from_nodes(hypothesis_martingale(s, az, TreeSide::after, rng));
    const auto ph = verify_phi_hat_identity(s, az, Mh, TreeSide::after);
    REQUIRE(ph.hypothesis_holds);
    CHECK(ph.max_error < kTol);
  }
}

TEST_CASE("Negative controls: dropping the drift or flipping its sign is detected", "[tree][property]") {
  double stopped_error = 0.0;     // M^tau without the Jeulin correction
  double wrong_sign_gap = 0.0;    // after-tau lambda-hat with the density subtracted
  double right_sign_gap = 0.0;
  for (std::size_t i = 0; i < kTrees; ++i) {
    std::mt19937_64 rng(path_seed(5150, i));
    const ProbTree tree = random_tree(rng);
    {
      const TreeSpace s(tree, random_time(tree, rng));
      const Proc M = s.from_nodes(random_martingale(tree, rng));
      stopped_error = std::max(stopped_error, martingale_error(s, stopped(s, M), Filtration::G));
    }
    const TreeSpace s(tree, random_honest_time(tree, rng));
    const TreeAzema az = project_optional(s);
    const Proc M = s.from_nodes(hypothesis_martingale(s, az, TreeSide::after, rng));
    const double lambda = 0.8;
    const auto ph = verify_phi_hat_identity(s, az, M, TreeSide::after);
    if (!ph.hypothesis_holds) continue;
    const auto d = g_doob(s, tree_market(s, M, lambda), TreeSide::after);
    Proc lh;
    check_sc_tree(s, d, Filtration::G, 1e-12, &lh);
    const Proc dmm = increments(sharp_bracket(s, M, M, Filtration::F));
    for (int t = 1; t <= s.depth(); ++t)
      for (std::size_t w = 0; w < s.size(); ++w) {
        const double b = d.bracket[t][w];
        if (!(b > 1e-9)) continue;
        const double base = lambda * dmm[t][w] / b;
        right_sign_gap = std::max(right_sign_gap, std::abs(base + ph.phi_hat[t][w] - lh[t][w]) * b);
        wrong_sign_gap = std::max(wrong_sign_gap, std::abs(base - ph.phi_hat[t][w] - lh[t][w]) * b);
      }
  }
  CHECK(stopped_error > 1e-3);
  CHECK(right_sign_gap < 1e-12);
  CHECK(wrong_sign_gap > 1e-3);
}

TEST_CASE("Density identity reports a violated hypothesis", "[tree]") {
  // tau reads the next move, so {Z-tilde = 0 < Z_-} is charged where M jumps
  const ProbTree tree = ProbTree::uniform(2, {0.5, 0.5});
  const TreeSpace s(tree, revealing_time(tree, 1, 1, true));
  const TreeAzema az = project_optional(s);
  const Proc M = s.from_nodes(walk_martingale(tree, {1.0, -1.0}));
  const auto ph = verify_phi_hat_identity(s, az, M, TreeSide::before);
  CHECK_FALSE(ph.hypothesis_holds);
  CHECK(ph.violating_cells > 0);
  const auto ev = evanescence_scan(s, az, M, ThinSet::ztilde_zero);
  CHECK(ev.charged_fraction > 0.0);
}

TEST_CASE("Coarsening the last level keeps earlier Z", "[tree][property]") {
  for (std::size_t i = 0; i < 60; ++i) {
    std::mt19937_64 rng(path_seed(8, i));
    const ProbTree tree = random_tree(rng);
    if (tree.depth() < 2) continue;
    const TreeSpace s(tree, random_time(tree, rng));
    const TreeSpace c = coarsen_final_level(s);
    CHECK(c.depth() == s.depth() - 1);
    const Proc zs = z_oracle(s), zc = z_oracle(c);
    // compare per node at levels below n
    for (int t = 0; t < s.depth(); ++t)
      for (std::size_t w = 0; w < s.size(); ++w)
        for (std::size_t v = 0; v < c.size(); ++v)
          if (c.node(t, v) == s.node(t, w)) CHECK_THAT(zc[t][v], WithinAbs(zs[t][w], 1e-13));
  }
}
