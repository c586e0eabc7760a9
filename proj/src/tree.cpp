#include "enlab/tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "enlab/errors.hpp"

namespace enlab {

namespace {
constexpr double kProbTol = 1e-12;
}

ProbTree::ProbTree(int depth, std::vector<std::vector<std::vector<double>>> transitions, std::size_t path_cap)
    : depth_(depth) {
  if (depth < 1) throw ParameterError("tree depth must be at least 1");
  if (transitions.size() != static_cast<std::size_t>(depth))
    throw ParameterError("tree needs one transition table per level");
  const std::size_t L = static_cast<std::size_t>(depth) + 1;
  parent_.assign(L, {});
  child_index_.assign(L, {});
  cond_prob_.assign(L, {});
  abs_prob_.assign(L, {});
  first_child_.assign(L, {});
  child_count_.assign(L, {});
  parent_[0] = {-1};
  child_index_[0] = {0};
  cond_prob_[0] = {1.0};
  abs_prob_[0] = {1.0};
  for (int t = 0; t < depth; ++t) {
    const auto& tab = transitions[static_cast<std::size_t>(t)];
    if (tab.size() != level_size(t))
      throw ParameterError("transition table at level " + std::to_string(t) + " has wrong node count");
    for (std::size_t i = 0; i < tab.size(); ++i) {
      const auto& probs = tab[i];
      if (probs.empty()) throw ParameterError("every non-leaf node needs children");
      double sum = 0.0;
      for (double p : probs) {
        if (!(p > 0.0) || p > 1.0) throw ParameterError("transition probabilities must be positive and at most 1");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("transition probabilities must sum to 1");
      first_child_[t].push_back(parent_[t + 1].size());
      child_count_[t].push_back(probs.size());
      for (std::size_t c = 0; c < probs.size(); ++c) {
        parent_[t + 1].push_back(static_cast<int>(i));
        child_index_[t + 1].push_back(static_cast<int>(c));
        cond_prob_[t + 1].push_back(probs[c]);
        abs_prob_[t + 1].push_back(abs_prob_[t][i] * probs[c]);
      }
      if (parent_[t + 1].size() > path_cap)
        throw RangeError("tree exceeds the path cap of " + std::to_string(path_cap));
    }
  }
  const std::size_t nl = leaves();
  ancestor_.assign(L, std::vector<std::size_t>(nl));
  for (std::size_t leaf = 0; leaf < nl; ++leaf) {
    std::size_t node = leaf;
    for (int t = depth; t >= 0; --t) {
      ancestor_[t][leaf] = node;
      if (t > 0) node = static_cast<std::size_t>(parent_[t][node]);
    }
  }
}

ProbTree ProbTree::uniform(int depth, const std::vector<double>& probs) {
  std::vector<std::vector<std::vector<double>>> tr;
  std::size_t count = 1;
  for (int t = 0; t < depth; ++t) {
    tr.emplace_back(count, probs);
    count *= probs.size();
  }
  return ProbTree(depth, std::move(tr));
}

TreeRandomTime TreeRandomTime::deterministic(const std::vector<int>& tau_per_leaf, int depth) {
  TreeRandomTime r;
  r.rule = "deterministic";
  for (int v : tau_per_leaf) {
    if (v < 0 || v > depth + 1) throw ParameterError("tau value outside 0..n+1");
    std::vector<double> law(static_cast<std::size_t>(depth) + 2, 0.0);
    law[static_cast<std::size_t>(v)] = 1.0;
    r.law.push_back(std::move(law));
  }
  return r;
}

void TreeRandomTime::validate(const ProbTree& tree) const {
  if (law.size() != tree.leaves()) throw ParameterError("tau law needs one row per leaf");
  for (const auto& row : law) {
    if (row.size() != static_cast<std::size_t>(tree.depth()) + 2)
      throw ParameterError("tau law row must cover 0..n and infinity");
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw ParameterError("negative tau probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("tau law row must sum to 1");
  }
}

TreeSpace::TreeSpace(ProbTree tree, TreeRandomTime tau) : tree_(std::move(tree)), tau_(std::move(tau)) {
  tau_.validate(tree_);
  const int n = tree_.depth();
  for (std::size_t leaf = 0; leaf < tree_.leaves(); ++leaf) {
    const double pl = tree_.probability(n, leaf);
    for (int v = 0; v <= n + 1; ++v) {
      const double p = pl * tau_.law[leaf][static_cast<std::size_t>(v)];
      if (p > 0.0) outcomes_.push_back({leaf, v, p});
    }
  }
  for (int g = 0; g < 2; ++g) {
    atom_[g].assign(static_cast<std::size_t>(n) + 1, std::vector<std::size_t>(outcomes_.size()));
    atom_count_[g].assign(static_cast<std::size_t>(n) + 1, 0);
    atom_prob_[g].assign(static_cast<std::size_t>(n) + 1, {});
    for (int t = 0; t <= n; ++t) {
      // G-atom key: node at t plus tau if already revealed, else "alive"
      std::map<std::pair<std::size_t, int>, std::size_t> ids;
      for (std::size_t w = 0; w < outcomes_.size(); ++w) {
        const std::size_t nd = node(t, w);
        const int state = (g == 1 && outcomes_[w].tau <= t) ? outcomes_[w].tau : -1;
        auto [it, fresh] = ids.emplace(std::make_pair(nd, state), ids.size());
        atom_[g][t][w] = it->second;
        if (fresh) atom_prob_[g][t].push_back(0.0);
        atom_prob_[g][t][it->second] += outcomes_[w].prob;
      }
      atom_count_[g][t] = ids.size();
    }
  }
}

Proc TreeSpace::zeros() const {
  return Proc(static_cast<std::size_t>(depth()) + 1, std::vector<double>(size(), 0.0));
}

Proc TreeSpace::from_nodes(const std::vector<std::vector<double>>& values) const {
  if (values.size() != static_cast<std::size_t>(depth()) + 1) throw ParameterError("node values need n+1 levels");
  Proc p = zeros();
  for (int t = 0; t <= depth(); ++t) {
    if (values[t].size() != tree_.level_size(t)) throw ParameterError("node values have wrong level size");
    for (std::size_t w = 0; w < size(); ++w) p[t][w] = values[t][node(t, w)];
  }
  return p;
}

std::vector<double> TreeSpace::cond_exp(const std::vector<double>& x, int t, Filtration f) const {
  const int g = f == Filtration::G;
  std::vector<double> sums(atom_count_[g][t], 0.0);
  for (std::size_t w = 0; w < size(); ++w) sums[atom_[g][t][w]] += outcomes_[w].prob * x[w];
  std::vector<double> out(size());
  for (std::size_t w = 0; w < size(); ++w) {
    const std::size_t a = atom_[g][t][w];
    out[w] = sums[a] / atom_prob_[g][t][a];
  }
  return out;
}

double TreeSpace::expectation(const std::vector<double>& x) const {
  double s = 0.0;
  for (std::size_t w = 0; w < size(); ++w) s += outcomes_[w].prob * x[w];
  return s;
}

namespace {
bool constant_on_atoms(const TreeSpace& s, const std::vector<double>& x, int t, Filtration f, double tol) {
  std::vector<double> ref(s.atom_count(t, f), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t w = 0; w < s.size(); ++w) {
    double& r = ref[s.atom(t, w, f)];
    if (std::isnan(r)) {
      r = x[w];
    } else if (std::abs(r - x[w]) > tol) {
      return false;
    }
  }
  return true;
}
}  // namespace

bool TreeSpace::is_adapted(const Proc& p, Filtration f, double tol) const {
  for (int t = 0; t <= depth(); ++t)
    if (!constant_on_atoms(*this, p[t], t, f, tol)) return false;
  return true;
}

bool TreeSpace::is_predictable(const Proc& p, Filtration f, double tol) const {
  if (!constant_on_atoms(*this, p[0], 0, f, tol)) return false;
  for (int t = 1; t <= depth(); ++t) {
    std::vector<double> d(size());
    for (std::size_t w = 0; w < size(); ++w) d[w] = p[t][w] - p[t - 1][w];
    if (!constant_on_atoms(*this, d, t - 1, f, tol)) return false;
  }
  return true;
}

// For each t and F-node at t, outcomes through the node with tau <= t share one tau value.
bool TreeSpace::is_honest() const {
  for (int t = 0; t <= depth(); ++t) {
    std::map<std::size_t, int> seen;
    for (std::size_t w = 0; w < size(); ++w) {
      if (tau(w) > t) continue;
      auto [it, fresh] = seen.emplace(node(t, w), tau(w));
      if (!fresh && it->second != tau(w)) return false;
    }
  }
  return true;
}

Proc increments(const Proc& x) {
  Proc d = x;
  for (auto& v : d[0]) v = 0.0;
  for (std::size_t t = 1; t < x.size(); ++t)
    for (std::size_t w = 0; w < x[t].size(); ++w) d[t][w] = x[t][w] - x[t - 1][w];
  return d;
}

Proc cumulate(const Proc& dx) {
  Proc x = dx;
  for (std::size_t t = 1; t < x.size(); ++t)
    for (std::size_t w = 0; w < x[t].size(); ++w) x[t][w] = x[t - 1][w] + dx[t][w];
  return x;
}

Proc stopped(const TreeSpace& s, const Proc& x) {
  Proc y = x;
  for (int t = 0; t <= s.depth(); ++t)
    for (std::size_t w = 0; w < s.size(); ++w)
      if (s.tau(w) < t) y[t][w] = x[s.tau(w)][w];
  return y;
}

Proc compensator(const TreeSpace& s, const Proc& v, Filtration f) {
  if (!s.is_adapted(v, f, 1e-12)) {
    throw FiltrationMismatch(f == Filtration::F ? "process is not F-adapted; compensate in G instead"
                                                : "process is not G-adapted");
  }
  Proc a = s.zeros();
  for (int t = 1; t <= s.depth(); ++t) {
    std::vector<double> d(s.size());
    for (std::size_t w = 0; w < s.size(); ++w) d[w] = v[t][w] - v[t - 1][w];
    const auto e = s.cond_exp(d, t - 1, f);
    for (std::size_t w = 0; w < s.size(); ++w) a[t][w] = a[t - 1][w] + e[w];
  }
  return a;
}

Proc sharp_bracket(const TreeSpace& s, const Proc& x, const Proc& y, Filtration f) {
  const Proc dx = increments(x), dy = increments(y);
  Proc a = s.zeros();
  for (int t = 1; t <= s.depth(); ++t) {
    std::vector<double> d(s.size());
    for (std::size_t w = 0; w < s.size(); ++w) d[w] = dx[t][w] * dy[t][w];
    const auto e = s.cond_exp(d, t - 1, f);
    for (std::size_t w = 0; w < s.size(); ++w) a[t][w] = a[t - 1][w] + e[w];
  }
  return a;
}

double martingale_error(const TreeSpace& s, const Proc& x, Filtration f) {
  const Proc dx = increments(x);
  double err = 0.0;
  for (int t = 1; t <= s.depth(); ++t) {
    const auto e = s.cond_exp(dx[t], t - 1, f);
    for (double v : e) err = std::max(err, std::abs(v));
  }
  return err;
}

double max_abs_diff(const TreeSpace& s, const Proc& a, const Proc& b) {
  double err = 0.0;
  for (int t = 0; t <= s.depth(); ++t)
    for (std::size_t w = 0; w < s.size(); ++w) err = std::max(err, std::abs(a[t][w] - b[t][w]));
  return err;
}

}  // namespace enlab
