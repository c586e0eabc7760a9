#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace enlab {

// Finite discrete-time probability tree. Nodes at each level are numbered in
// parent order; level n holds the leaves (full paths).
class ProbTree {
 public:
  static constexpr std::size_t kDefaultPathCap = 4096;

  // transitions[t][i]: child probabilities of node i at level t (t < depth).
  ProbTree(int depth, std::vector<std::vector<std::vector<double>>> transitions,
           std::size_t path_cap = kDefaultPathCap);
  // Same branching law at every node.
  static ProbTree uniform(int depth, const std::vector<double>& probs);

  int depth() const { return depth_; }
  std::size_t level_size(int t) const { return parent_[static_cast<std::size_t>(t)].size(); }
  std::size_t leaves() const { return level_size(depth_); }
  int parent(int t, std::size_t i) const { return parent_[t][i]; }
  int child_index(int t, std::size_t i) const { return child_index_[t][i]; }
  double transition(int t, std::size_t i) const { return cond_prob_[t][i]; }
  double probability(int t, std::size_t i) const { return abs_prob_[t][i]; }
  std::size_t first_child(int t, std::size_t i) const { return first_child_[t][i]; }
  std::size_t child_count(int t, std::size_t i) const { return child_count_[t][i]; }
  // node at level t on the path to `leaf`
  std::size_t ancestor(int t, std::size_t leaf) const { return ancestor_[t][leaf]; }

 private:
  int depth_;
  std::vector<std::vector<int>> parent_, child_index_;
  std::vector<std::vector<double>> cond_prob_, abs_prob_;
  std::vector<std::vector<std::size_t>> first_child_, child_count_, ancestor_;
};

// Random time on a tree, possibly randomized: law[leaf][v] = P(tau = v | leaf),
// v = 0..n and v = n+1 standing for +infinity.
struct TreeRandomTime {
  std::vector<std::vector<double>> law;
  bool honest_flag = false;            // declared last visit to `visit_set`
  std::vector<std::pair<int, std::size_t>> visit_set;  // (level, node)
  std::string rule = "table";

  static TreeRandomTime deterministic(const std::vector<int>& tau_per_leaf, int depth);
  void validate(const ProbTree& tree) const;
};

enum class Filtration { F, G };
enum class TreeSide { before, after };

// Process indexed [t][outcome], t = 0..n.
using Proc = std::vector<std::vector<double>>;

struct Outcome {
  std::size_t leaf = 0;
  int tau = 0;  // n+1 is +infinity
  double prob = 0.0;
};

// Positive-probability outcomes (leaf, tau) with their F- and G-atoms at every time.
class TreeSpace {
 public:
  TreeSpace(ProbTree tree, TreeRandomTime tau);

  const ProbTree& tree() const { return tree_; }
  const TreeRandomTime& random_time() const { return tau_; }
  int depth() const { return tree_.depth(); }
  int infinity() const { return tree_.depth() + 1; }
  std::size_t size() const { return outcomes_.size(); }
  const std::vector<Outcome>& outcomes() const { return outcomes_; }
  std::size_t node(int t, std::size_t w) const { return tree_.ancestor(t, outcomes_[w].leaf); }
  int tau(std::size_t w) const { return outcomes_[w].tau; }

  std::size_t atom(int t, std::size_t w, Filtration f) const { return atom_[f == Filtration::G][t][w]; }
  std::size_t atom_count(int t, Filtration f) const { return atom_count_[f == Filtration::G][t]; }
  double atom_prob(int t, std::size_t a, Filtration f) const { return atom_prob_[f == Filtration::G][t][a]; }

  Proc zeros() const;
  // F-adapted process from node values[t][node].
  Proc from_nodes(const std::vector<std::vector<double>>& values) const;
  // E[x | atoms at time t], returned per outcome.
  std::vector<double> cond_exp(const std::vector<double>& x, int t, Filtration f) const;
  double expectation(const std::vector<double>& x) const;
  bool is_adapted(const Proc& p, Filtration f, double tol = 0.0) const;
  // increments at time t measurable at t-1
  bool is_predictable(const Proc& p, Filtration f, double tol = 0.0) const;
  bool is_honest() const;

 private:
  ProbTree tree_;
  TreeRandomTime tau_;
  std::vector<Outcome> outcomes_;
  std::vector<std::vector<std::size_t>> atom_[2];
  std::vector<std::size_t> atom_count_[2];
  std::vector<std::vector<double>> atom_prob_[2];
};

// Process algebra.
Proc increments(const Proc& x);  // dx_0 = 0
Proc cumulate(const Proc& dx);   // sums of increments from 0
Proc stopped(const TreeSpace& s, const Proc& x);  // x_{t ^ tau}
Proc compensator(const TreeSpace& s, const Proc& v, Filtration f);
Proc sharp_bracket(const TreeSpace& s, const Proc& x, const Proc& y, Filtration f);
double martingale_error(const TreeSpace& s, const Proc& x, Filtration f);
double max_abs_diff(const TreeSpace& s, const Proc& a, const Proc& b);

struct TreeAzema {
  Proc Z, Zt, m, Do;
  Proc Zm;  // Z_{t-1}, with Z_{-1} = 1
};

TreeAzema project_optional(const TreeSpace& s);
double verify_ztilde_identity(const TreeSpace& s, const TreeAzema& az);

struct CompensatorCheck {
  double max_error = 0.0;
  std::size_t excluded_cells = 0;  // inside [0, tau] with Z_- = 0; must carry zero mass
};
CompensatorCheck verify_g_compensator_stopped(const TreeSpace& s, const TreeAzema& az, const Proc& v);
// after-tau counterpart (1 - Z_-)^{-1} I_]tau,inf[ . ((1 - Z-tilde) . V)^{p,F}; needs honesty
CompensatorCheck verify_g_compensator_after(const TreeSpace& s, const TreeAzema& az, const Proc& v);

struct ProjectionCheck {
  double before_dm = 0.0;     // p,G(dM / Zt) on [0,tau]
  double before_inv = 0.0;    // p,G(1 / Zt) on [0,tau]
  double after_dv = 0.0;      // p,G(dM) after tau
  double after_dm = 0.0;      // p,G(dM / (1 - Zt)) after tau
  bool after_checked = false;
  double max() const;
};
ProjectionCheck verify_predictable_projection_identities(const TreeSpace& s, const TreeAzema& az, const Proc& M,
                                                         bool include_after);

Proc jeulin_hat(const TreeSpace& s, const TreeAzema& az, const Proc& M, TreeSide side);

Proc optional_integral(const TreeSpace& s, const Proc& H, const Proc& N, Filtration f);
// max |E[I_n Y_n] - E[sum H d[N, Y]]| over the basis martingales Y of f
double oi_defining_property_error(const TreeSpace& s, const Proc& H, const Proc& N, Filtration f);
double verify_oi_covariation(const TreeSpace& s, const Proc& H, const Proc& N, const Proc& K, const Proc& M,
                             Filtration f);

struct TruncationLevel {
  int n = 0;
  Proc phi;  // GKW coefficient at truncation level n
  double orthogonality_error = 0.0;
};
struct TruncationResult {
  std::vector<TruncationLevel> levels;  // critical n in increasing order
  int n_indicator = 0;  // from here on the truncation indicator equals its limit
  int n_star = 0;       // from here on the coefficient equals its limit
  Proc phi_limit;
  Proc beta_m;  // F-GKW coefficient of m on M
  double max_orthogonality_error = 0.0;
};
TruncationResult truncation_densities(const TreeSpace& s, const TreeAzema& az, const Proc& M, TreeSide side);

struct PhiHatCheck {
  bool hypothesis_holds = true;
  std::size_t violating_cells = 0;
  double max_error = 0.0;
  bool surrogate_finite = true;  // local-boundedness surrogate V finite where charged
  Proc phi_hat;
};
PhiHatCheck verify_phi_hat_identity(const TreeSpace& s, const TreeAzema& az, const Proc& M, TreeSide side);

// Tree built from a JSON description {depth, transitions, martingale, tau_rule}.
struct TreeModel {
  ProbTree tree;
  TreeRandomTime tau;
  std::vector<std::vector<double>> martingale;  // node values [t][node]
  double lambda = 0.0;                          // market X = M - lambda <M>^F
};
TreeModel tree_from_json(const nlohmann::json& desc);

// Martingale with per-node increments given by child-index values, centred per node.
std::vector<std::vector<double>> walk_martingale(const ProbTree& tree, const std::vector<double>& values);
// Martingale from explicit increments [t][node at t+1] (not centred; validated).
std::vector<std::vector<double>> martingale_from_increments(const ProbTree& tree,
                                                           const std::vector<std::vector<double>>& inc);

// tau rules
TreeRandomTime first_hit_time(const ProbTree& tree, int child);
TreeRandomTime last_visit_time(const ProbTree& tree, const std::vector<std::pair<int, std::size_t>>& nodes);
TreeRandomTime constant_time(const ProbTree& tree, int value);  // value n+1 = infinity
TreeRandomTime independent_time(const ProbTree& tree, const std::vector<double>& law);

// Independent of the tree: P(tau = k) = p (1-p)^{k-1} for k = 1..n, the rest at infinity.
TreeRandomTime geometric_time(const ProbTree& tree, double p);
// tau = 0 on paths that take `child` at `level` and infinity elsewhere (or the reverse when
// zero_on_child is false). tau reads a future move, so a thin set is charged at `level`.
TreeRandomTime revealing_time(const ProbTree& tree, int level, int child, bool zero_on_child);
// Trinomial tree (probabilities .3/.3/.4, market steps 1/-1/0) with tau in {0, infinity}
// and Z a martingale built so that <M-hat>^G = <M>^F on [0, tau]; Z_0 = z0.
TreeModel orthogonal_bracket_tree(int depth, double z0, double lambda);

struct RandomTreeOptions {
  int max_depth = 4;
  int max_branch = 3;
  double zero_law_prob = 0.3;  // chance a law entry is zeroed (charges thin sets)
};
ProbTree random_tree(std::mt19937_64& rng, const RandomTreeOptions& opt = {});
std::vector<std::vector<double>> random_martingale(const ProbTree& tree, std::mt19937_64& rng);
// Random martingale with zero increments on the thin cells of `side`
// ({Zt = 0 < Z_-} before, {Zt = 1 > Z_-} after), so the density identity's hypothesis holds.
std::vector<std::vector<double>> hypothesis_martingale(const TreeSpace& s, const TreeAzema& az, TreeSide side,
                                                       std::mt19937_64& rng);
TreeRandomTime random_time(const ProbTree& tree, std::mt19937_64& rng, const RandomTreeOptions& opt = {});
TreeRandomTime random_honest_time(const ProbTree& tree, std::mt19937_64& rng);
Proc random_optional(const TreeSpace& s, Filtration f, std::mt19937_64& rng);

// Drops the final level: each node at n-1 becomes a leaf carrying the mixed tau law,
// with tau = n folded into infinity. Z_t for t <= n-1 is unchanged.
TreeSpace coarsen_final_level(const TreeSpace& s);

}  // namespace enlab
