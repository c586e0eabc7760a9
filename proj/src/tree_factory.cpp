#include <algorithm>
#include <cmath>
#include <set>

#include "enlab/errors.hpp"
#include "enlab/tree.hpp"

namespace enlab {

namespace {

std::vector<std::vector<std::vector<double>>> transitions_of(const ProbTree& tree, int levels) {
  std::vector<std::vector<std::vector<double>>> tr(static_cast<std::size_t>(levels));
  for (int t = 0; t < levels; ++t)
    for (std::size_t i = 0; i < tree.level_size(t); ++i) {
      std::vector<double> probs;
      for (std::size_t c = 0; c < tree.child_count(t, i); ++c) probs.push_back(tree.transition(t + 1, tree.first_child(t, i) + c));
      tr[t].push_back(std::move(probs));
    }
  return tr;
}

int parse_tau_value(const nlohmann::json& j, int depth) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return depth + 1;
    throw ParameterError("tau value must be an integer or \"inf\"");
  }
  const int v = j.get<int>();
  if (v < 0 || v > depth + 1) throw ParameterError("tau value outside 0..n");
  return v;
}

}  // namespace

std::vector<std::vector<double>> walk_martingale(const ProbTree& tree, const std::vector<double>& values) {
  std::vector<std::vector<double>> m(static_cast<std::size_t>(tree.depth()) + 1);
  m[0] = {0.0};
  for (int t = 0; t < tree.depth(); ++t) {
    m[t + 1].assign(tree.level_size(t + 1), 0.0);
    for (std::size_t i = 0; i < tree.level_size(t); ++i) {
      const std::size_t k = tree.child_count(t, i), f = tree.first_child(t, i);
      if (k > values.size()) throw ParameterError("walk needs one value per child index");
      double mean = 0.0;
      for (std::size_t c = 0; c < k; ++c) mean += tree.transition(t + 1, f + c) * values[c];
      for (std::size_t c = 0; c < k; ++c) m[t + 1][f + c] = m[t][i] + values[c] - mean;
    }
  }
  return m;
}

std::vector<std::vector<double>> martingale_from_increments(const ProbTree& tree,
                                                           const std::vector<std::vector<double>>& inc) {
  if (inc.size() != static_cast<std::size_t>(tree.depth())) throw ParameterError("increments need one row per step");
  std::vector<std::vector<double>> m(static_cast<std::size_t>(tree.depth()) + 1);
  m[0] = {0.0};
  for (int t = 0; t < tree.depth(); ++t) {
    if (inc[t].size() != tree.level_size(t + 1)) throw ParameterError("increment row has wrong node count");
    m[t + 1].assign(tree.level_size(t + 1), 0.0);
    for (std::size_t i = 0; i < tree.level_size(t); ++i) {
      double mean = 0.0, scale = 0.0;
      for (std::size_t c = 0; c < tree.child_count(t, i); ++c) {
        const std::size_t j = tree.first_child(t, i) + c;
        mean += tree.transition(t + 1, j) * inc[t][j];
        scale += std::abs(inc[t][j]);
        m[t + 1][j] = m[t][i] + inc[t][j];
      }
      if (std::abs(mean) > 1e-12 * std::max(1.0, scale))
        throw ModelError("increments are not centred at level " + std::to_string(t) + " node " + std::to_string(i));
    }
  }
  return m;
}

TreeRandomTime first_hit_time(const ProbTree& tree, int child) {
  std::vector<int> v(tree.leaves(), tree.depth() + 1);
  for (std::size_t leaf = 0; leaf < tree.leaves(); ++leaf)
    for (int t = 1; t <= tree.depth(); ++t)
      if (tree.child_index(t, tree.ancestor(t, leaf)) == child) {
        v[leaf] = t;
        break;
      }
  auto r = TreeRandomTime::deterministic(v, tree.depth());
  r.rule = "first_hit";
  return r;
}

// last t with the path inside the node set; 0 when the path never enters it
TreeRandomTime last_visit_time(const ProbTree& tree, const std::vector<std::pair<int, std::size_t>>& nodes) {
  std::set<std::pair<int, std::size_t>> h(nodes.begin(), nodes.end());
  for (const auto& [t, i] : h)
    if (t < 0 || t > tree.depth() || i >= tree.level_size(t)) throw ParameterError("visit node outside the tree");
  std::vector<int> v(tree.leaves(), 0);
  for (std::size_t leaf = 0; leaf < tree.leaves(); ++leaf)
    for (int t = 0; t <= tree.depth(); ++t)
      if (h.count({t, tree.ancestor(t, leaf)})) v[leaf] = t;
  auto r = TreeRandomTime::deterministic(v, tree.depth());
  r.rule = "last_visit";
  r.honest_flag = true;
  r.visit_set.assign(h.begin(), h.end());
  return r;
}

TreeRandomTime constant_time(const ProbTree& tree, int value) {
  auto r = TreeRandomTime::deterministic(std::vector<int>(tree.leaves(), value), tree.depth());
  r.rule = "constant";
  return r;
}

TreeRandomTime independent_time(const ProbTree& tree, const std::vector<double>& law) {
  TreeRandomTime r;
  r.rule = "independent";
  r.law.assign(tree.leaves(), law);
  r.validate(tree);
  return r;
}

TreeRandomTime geometric_time(const ProbTree& tree, double p) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("geometric parameter must lie in (0,1)");
  std::vector<double> law(static_cast<std::size_t>(tree.depth()) + 2, 0.0);
  double rest = 1.0;
  for (int k = 1; k <= tree.depth(); ++k) {
    law[static_cast<std::size_t>(k)] = rest * p;
    rest *= 1.0 - p;
  }
  law.back() = rest;
  auto r = independent_time(tree, law);
  r.rule = "geometric";
  return r;
}

TreeRandomTime revealing_time(const ProbTree& tree, int level, int child, bool zero_on_child) {
  if (level < 1 || level > tree.depth()) throw ParameterError("revealing level outside 1..n");
  std::vector<int> v(tree.leaves());
  for (std::size_t leaf = 0; leaf < tree.leaves(); ++leaf) {
    const bool took = tree.child_index(level, tree.ancestor(level, leaf)) == child;
    v[leaf] = took == zero_on_child ? 0 : tree.depth() + 1;
  }
  auto r = TreeRandomTime::deterministic(v, tree.depth());
  r.rule = "revealing";
  return r;
}

TreeModel orthogonal_bracket_tree(int depth, double z0, double lambda) {
  if (!(z0 > 0.0 && z0 < 1.0)) throw ParameterError("z0 must lie in (0,1)");
  ProbTree tree = ProbTree::uniform(depth, {0.3, 0.3, 0.4});
  // Z steps (x1, x2, x3) centred, with x1 - x2 = d and x1 + x2 = 0.3 d^2 / z; this
  // makes the G-variance of the Jeulin increment equal the F-variance 0.6.
  std::vector<std::vector<double>> z(static_cast<std::size_t>(depth) + 1);
  z[0] = {z0};
  for (int t = 0; t < depth; ++t) {
    z[t + 1].resize(tree.level_size(t + 1));
    for (std::size_t i = 0; i < tree.level_size(t); ++i) {
      const double zi = z[t][i];
      const double d = 0.4 * std::min(zi, 1.0 - zi);
      const double sum = 0.3 * d * d / zi;
      const double x[3] = {0.5 * (sum + d), 0.5 * (sum - d), -0.75 * sum};
      for (std::size_t c = 0; c < 3; ++c) z[t + 1][tree.first_child(t, i) + c] = zi + x[c];
    }
  }
  TreeRandomTime tau;
  tau.rule = "orthogonal_bracket";
  for (std::size_t leaf = 0; leaf < tree.leaves(); ++leaf) {
    std::vector<double> law(static_cast<std::size_t>(depth) + 2, 0.0);
    law[0] = 1.0 - z[depth][leaf];
    law.back() = z[depth][leaf];
    tau.law.push_back(std::move(law));
  }
  auto m = walk_martingale(tree, {1.0, -1.0, 0.0});
  return TreeModel{std::move(tree), std::move(tau), std::move(m), lambda};
}

TreeModel tree_from_json(const nlohmann::json& desc) {
  const int depth = desc.at("depth").get<int>();
  std::vector<std::vector<std::vector<double>>> tr;
  if (desc.contains("transitions")) {
    tr = desc.at("transitions").get<std::vector<std::vector<std::vector<double>>>>();
  } else {
    const auto probs = desc.at("branching").get<std::vector<double>>();
    std::size_t count = 1;
    for (int t = 0; t < depth; ++t) {
      tr.emplace_back(count, probs);
      count *= probs.size();
    }
  }
  TreeModel model{ProbTree(depth, std::move(tr)), {}, {}, desc.value("lambda", 0.0)};
  const auto& tree = model.tree;

  const auto& mj = desc.contains("martingale") ? desc.at("martingale") : nlohmann::json{{"kind", "walk"}, {"values", {1.0, -1.0}}};
  const std::string mk = mj.at("kind").get<std::string>();
  if (mk == "walk") {
    model.martingale = walk_martingale(tree, mj.at("values").get<std::vector<double>>());
  } else if (mk == "increments") {
    model.martingale = martingale_from_increments(tree, mj.at("values").get<std::vector<std::vector<double>>>());
  } else {
    throw ParameterError("unknown martingale kind: " + mk);
  }

  const auto& tj = desc.at("tau_rule");
  const std::string kind = tj.at("kind").get<std::string>();
  if (kind == "first_hit") {
    model.tau = first_hit_time(tree, tj.at("child").get<int>());
  } else if (kind == "last_visit") {
    model.tau = last_visit_time(tree, tj.at("nodes").get<std::vector<std::pair<int, std::size_t>>>());
  } else if (kind == "constant") {
    model.tau = constant_time(tree, parse_tau_value(tj.at("value"), depth));
  } else if (kind == "independent") {
    model.tau = independent_time(tree, tj.at("law").get<std::vector<double>>());
  } else if (kind == "deterministic") {
    std::vector<int> v;
    for (const auto& x : tj.at("values")) v.push_back(parse_tau_value(x, depth));
    model.tau = TreeRandomTime::deterministic(v, depth);
  } else if (kind == "geometric") {
    model.tau = geometric_time(tree, tj.at("p").get<double>());
  } else if (kind == "revealing") {
    model.tau = revealing_time(tree, tj.at("level").get<int>(), tj.at("child").get<int>(),
                               tj.value("zero_on_child", true));
  } else if (kind == "table") {
    model.tau.law = tj.at("law").get<std::vector<std::vector<double>>>();
  } else {
    throw ParameterError("unknown tau rule: " + kind);
  }
  model.tau.validate(tree);
  return model;
}

ProbTree random_tree(std::mt19937_64& rng, const RandomTreeOptions& opt) {
  std::uniform_int_distribution<int> depth_d(1, opt.max_depth), branch_d(2, opt.max_branch);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  const int depth = depth_d(rng);
  std::vector<std::vector<std::vector<double>>> tr;
  std::size_t count = 1;
  for (int t = 0; t < depth; ++t) {
    std::vector<std::vector<double>> level;
    std::size_t next = 0;
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<double> probs(static_cast<std::size_t>(branch_d(rng)));
      double sum = 0.0;
      for (double& p : probs) sum += (p = w(rng));
      for (double& p : probs) p /= sum;
      next += probs.size();
      level.push_back(std::move(probs));
    }
    tr.push_back(std::move(level));
    count = next;
  }
  return ProbTree(depth, std::move(tr));
}

std::vector<std::vector<double>> random_martingale(const ProbTree& tree, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> inc(static_cast<std::size_t>(tree.depth()));
  for (int t = 0; t < tree.depth(); ++t) {
    inc[t].assign(tree.level_size(t + 1), 0.0);
    for (std::size_t i = 0; i < tree.level_size(t); ++i) {
      const std::size_t f = tree.first_child(t, i), k = tree.child_count(t, i);
      double mean = 0.0;
      for (std::size_t c = 0; c < k; ++c) mean += tree.transition(t + 1, f + c) * (inc[t][f + c] = u(rng));
      for (std::size_t c = 0; c < k; ++c) inc[t][f + c] -= mean;
    }
  }
  std::vector<std::vector<double>> m(static_cast<std::size_t>(tree.depth()) + 1);
  m[0] = {0.0};
  for (int t = 0; t < tree.depth(); ++t) {
    m[t + 1].resize(tree.level_size(t + 1));
    for (std::size_t j = 0; j < tree.level_size(t + 1); ++j)
      m[t + 1][j] = m[t][static_cast<std::size_t>(tree.parent(t + 1, j))] + inc[t][j];
  }
  return m;
}

std::vector<std::vector<double>> hypothesis_martingale(const TreeSpace& s, const TreeAzema& az, TreeSide side,
                                                       std::mt19937_64& rng) {
  const ProbTree& tree = s.tree();
  const int n = tree.depth();
  // node-level Zt and Z_-; nodes without positive-probability outcomes stay free
  std::vector<std::vector<char>> thin(static_cast<std::size_t>(n) + 1);
  for (int t = 0; t <= n; ++t) thin[t].assign(tree.level_size(t), 0);
  for (int t = 1; t <= n; ++t)
    for (std::size_t w = 0; w < s.size(); ++w) {
      const double zt = az.Zt[t][w], zm = az.Zm[t][w];
      if (side == TreeSide::before ? (zt == 0.0 && zm > 0.0) : (zt == 1.0 && zm < 1.0)) thin[t][s.node(t, w)] = 1;
    }
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> m(static_cast<std::size_t>(n) + 1);
  m[0] = {0.0};
  for (int t = 0; t < n; ++t) {
    m[t + 1].assign(tree.level_size(t + 1), 0.0);
    for (std::size_t i = 0; i < tree.level_size(t); ++i) {
      const std::size_t f = tree.first_child(t, i), k = tree.child_count(t, i);
      std::vector<double> inc(k, 0.0);
      std::size_t free = 0;
      double mass = 0.0, mean = 0.0;
      for (std::size_t c = 0; c < k; ++c)
        if (!thin[t + 1][f + c]) {
          ++free;
          inc[c] = u(rng);
          mass += tree.transition(t + 1, f + c);
          mean += tree.transition(t + 1, f + c) * inc[c];
        }
      for (std::size_t c = 0; c < k; ++c) {
        if (free >= 2 && !thin[t + 1][f + c]) m[t + 1][f + c] = m[t][i] + inc[c] - mean / mass;
        else m[t + 1][f + c] = m[t][i];
      }
    }
  }
  return m;
}

TreeRandomTime random_time(const ProbTree& tree, std::mt19937_64& rng, const RandomTreeOptions& opt) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TreeRandomTime r;
  r.rule = "random";
  const std::size_t width = static_cast<std::size_t>(tree.depth()) + 2;
  for (std::size_t leaf = 0; leaf < tree.leaves(); ++leaf) {
    std::vector<double> law(width);
    double sum = 0.0;
    for (double& p : law) sum += (p = u(rng) < opt.zero_law_prob ? 0.0 : u(rng));
    if (sum == 0.0) {
      law[std::uniform_int_distribution<std::size_t>(0, width - 1)(rng)] = 1.0;
      sum = 1.0;
    }
    for (double& p : law) p /= sum;
    r.law.push_back(std::move(law));
  }
  return r;
}

TreeRandomTime random_honest_time(const ProbTree& tree, std::mt19937_64& rng) {
  std::bernoulli_distribution pick(0.35);
  std::vector<std::pair<int, std::size_t>> h;
  for (int t = 0; t <= tree.depth(); ++t)
    for (std::size_t i = 0; i < tree.level_size(t); ++i)
      if (pick(rng)) h.emplace_back(t, i);
  return last_visit_time(tree, h);
}

Proc random_optional(const TreeSpace& s, Filtration f, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Proc p = s.zeros();
  for (int t = 0; t <= s.depth(); ++t) {
    std::vector<double> vals(s.atom_count(t, f));
    for (double& v : vals) v = u(rng);
    for (std::size_t w = 0; w < s.size(); ++w) p[t][w] = vals[s.atom(t, w, f)];
  }
  return p;
}

TreeSpace coarsen_final_level(const TreeSpace& s) {
  const ProbTree& tree = s.tree();
  const int n = tree.depth();
  if (n < 2) throw ParameterError("coarsening needs depth at least 2");
  ProbTree coarse(n - 1, transitions_of(tree, n - 1));
  TreeRandomTime tau;
  tau.rule = "coarsened";
  tau.law.assign(coarse.leaves(), std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
  const auto& law = s.random_time().law;
  for (std::size_t leaf = 0; leaf < tree.leaves(); ++leaf) {
    const std::size_t up = static_cast<std::size_t>(tree.parent(n, leaf));
    const double p = tree.transition(n, leaf);
    for (int v = 0; v <= n + 1; ++v) {
      const int folded = v >= n ? n : v;  // index n is infinity on the coarse tree
      tau.law[up][static_cast<std::size_t>(folded)] += p * law[leaf][static_cast<std::size_t>(v)];
    }
  }
  return TreeSpace(std::move(coarse), std::move(tau));
}

}  // namespace enlab
