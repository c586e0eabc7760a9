#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "enlab/errors.hpp"
#include "enlab/sc_checker.hpp"

namespace enlab {

namespace {

std::vector<double> col(const TreeSpace& s, auto&& fn) {
  std::vector<double> v(s.size());
  for (std::size_t w = 0; w < s.size(); ++w) v[w] = fn(w);
  return v;
}

TreeDecomposition doob(const TreeSpace& s, const Proc& Y, Filtration f) {
  TreeDecomposition d{s.zeros(), s.zeros(), s.zeros()};
  const Proc dy = increments(Y);
  d.martingale[0] = Y[0];
  for (int t = 1; t <= s.depth(); ++t) {
    const auto a = s.cond_exp(dy[t], t - 1, f);
    const auto b = s.cond_exp(col(s, [&](std::size_t w) { return (dy[t][w] - a[w]) * (dy[t][w] - a[w]); }), t - 1, f);
    for (std::size_t w = 0; w < s.size(); ++w) {
      d.drift[t][w] = a[w];
      d.bracket[t][w] = b[w];
      d.martingale[t][w] = d.martingale[t - 1][w] + dy[t][w] - a[w];
    }
  }
  return d;
}

int tau_state(const TreeSpace& s, std::size_t w, int t) { return s.tau(w) <= t ? s.tau(w) : -1; }

bool thin_cell(const TreeAzema& az, int t, std::size_t w, TreeSide side) {
  const double zt = az.Zt[t][w], zm = az.Zm[t][w];
  return side == TreeSide::before ? (zt == 0.0 && zm > 0.0) : (zt == 1.0 && zm < 1.0);
}

}  // namespace

Proc tree_market(const TreeSpace& s, const Proc& M, double lambda) {
  const Proc br = sharp_bracket(s, M, M, Filtration::F);
  Proc X = M;
  for (int t = 0; t <= s.depth(); ++t)
    for (std::size_t w = 0; w < s.size(); ++w) X[t][w] -= lambda * br[t][w];
  return X;
}

TreeDecomposition g_doob(const TreeSpace& s, const Proc& X, TreeSide side) {
  Proc Y = stopped(s, X);
  if (side == TreeSide::after)
    for (int t = 0; t <= s.depth(); ++t)
      for (std::size_t w = 0; w < s.size(); ++w) Y[t][w] = X[t][w] - Y[t][w];
  return doob(s, Y, Filtration::G);
}

TreeDecomposition f_doob(const TreeSpace& s, const Proc& X) { return doob(s, X, Filtration::F); }

TreeDecomposition g_doob_from_f(const TreeSpace& s, const TreeAzema& az, const Proc& M, double lambda,
                                TreeSide side) {
  const bool before = side == TreeSide::before;
  const Proc cov = increments(sharp_bracket(s, M, az.m, Filtration::F));
  const Proc dmm = increments(sharp_bracket(s, M, M, Filtration::F));
  const Proc dM = increments(M);
  TreeDecomposition d{s.zeros(), s.zeros(), jeulin_hat(s, az, M, side)};
  for (int t = 1; t <= s.depth(); ++t) {
    // c is F-predictable: it enters the F-expectation on every outcome of the atom
    std::vector<double> c(s.size(), 0.0);
    for (std::size_t w = 0; w < s.size(); ++w) {
      const double q = before ? az.Zm[t][w] : 1.0 - az.Zm[t][w];
      if (q > 0.0) c[w] = cov[t][w] / q;
    }
    // G-conditional second moments through the F weights Zt and 1 - Zt
    const auto e = s.cond_exp(col(s,
                                  [&](std::size_t w) {
                                    const double weight = before ? az.Zt[t][w] : 1.0 - az.Zt[t][w];
                                    const double inc = before ? dM[t][w] - c[w] : dM[t][w] + c[w];
                                    return weight * inc * inc;
                                  }),
                              t - 1, Filtration::F);
    for (std::size_t w = 0; w < s.size(); ++w) {
      if ((t <= s.tau(w)) != before) continue;
      const double q = before ? az.Zm[t][w] : 1.0 - az.Zm[t][w];
      d.drift[t][w] = -lambda * dmm[t][w] + (before ? c[w] : -c[w]);
      d.bracket[t][w] = e[w] / q;
    }
  }
  return d;
}

SCVerdict check_sc_tree(const TreeSpace& s, const TreeDecomposition& d, Filtration f, double tol, Proc* lambda_hat,
                        const std::string& label) {
  SCVerdict v;
  v.label = label;
  v.window = IntervalSet::single(0.0, s.depth());
  Proc lh = s.zeros();
  for (int t = 1; t <= s.depth(); ++t) {
    std::vector<char> seen(s.atom_count(t - 1, f), 0);
    for (std::size_t w = 0; w < s.size(); ++w) {
      const double a = d.drift[t][w], b = d.bracket[t][w];
      double l = 0.0;
      if (b > tol) l = -a / b;
      lh[t][w] = l;
      const std::size_t atom = s.atom(t - 1, w, f);
      if (seen[atom]) continue;
      seen[atom] = 1;
      const double p = s.atom_prob(t - 1, atom, f);
      if (b > tol) {
        v.l2_norm += p * l * l * b;
        v.reconstruction_error = std::max(v.reconstruction_error, std::abs(a + l * b));
        if (v.lambda_hat_samples.size() < 64) v.lambda_hat_samples.emplace_back(t, l);
      } else if (std::abs(a) > tol) {
        v.residual += p * std::abs(a);
        v.witness_cells.push_back({t, s.node(t - 1, w), f == Filtration::G ? tau_state(s, w, t - 1) : -1, p, a, b});
      }
    }
  }
  v.status = v.residual > tol ? SCStatus::violated : SCStatus::satisfied;
  if (lambda_hat != nullptr) *lambda_hat = std::move(lh);
  return v;
}

SCVerdict check_constant_predictable(const TreeSpace& s, const Proc& V, Filtration f, double tol) {
  if (!s.is_predictable(V, f, 1e-12)) throw ModelError("process is not predictable in the requested filtration");
  SCVerdict v;
  v.label = "constant-predictable";
  v.window = IntervalSet::single(0.0, s.depth());
  const Proc dv = increments(V);
  for (int t = 1; t <= s.depth(); ++t) {
    v.residual += s.expectation(col(s, [&](std::size_t w) { return std::abs(dv[t][w]); }));
    for (std::size_t w = 0; w < s.size(); ++w)
      if (v.witness_cells.empty() && std::abs(V[t][w] - V[0][w]) > tol)
        v.witness_cells.push_back({t, s.node(t - 1, w), f == Filtration::G ? tau_state(s, w, t - 1) : -1,
                                   s.outcomes()[w].prob, dv[t][w], 0.0});
  }
  v.status = v.witness_cells.empty() ? SCStatus::satisfied : SCStatus::violated;
  return v;
}

nlohmann::json PositiveCaseReport::to_json() const {
  return {{"hypothesis_holds", hypothesis_holds},
          {"violating_cells", violating_cells},
          {"verdict", verdict.to_json()},
          {"route_f_gap", route_f_gap},
          {"route_phi_gap", route_phi_gap},
          {"route_f_lambda_gap", route_f_lambda_gap},
          {"route_phi_lambda_gap", route_phi_lambda_gap}};
}

PositiveCaseReport positive_case_verify(const TreeSpace& s, const TreeAzema& az, const Proc& M, double lambda,
                                        TreeSide side, double tol) {
  PositiveCaseReport r;
  const bool before = side == TreeSide::before;
  const PhiHatCheck ph = verify_phi_hat_identity(s, az, M, side);
  r.hypothesis_holds = ph.hypothesis_holds;
  r.violating_cells = ph.violating_cells;
  if (!ph.hypothesis_holds) {
    r.verdict.status = SCStatus::inconclusive;
    r.verdict.note = "hypothesis violated: thin set charged with market jumps; see evanescence report";
    return r;
  }
  const Proc X = tree_market(s, M, lambda);
  const TreeDecomposition direct = g_doob(s, X, side);
  r.verdict = check_sc_tree(s, direct, Filtration::G, tol, &r.lambda_hat, before ? "before" : "after");
  if (r.verdict.reconstruction_error > tol) {
    r.verdict.status = SCStatus::inconclusive;
    r.verdict.note = "reconstruction above tolerance";
  }

  const TreeDecomposition viaf = g_doob_from_f(s, az, M, lambda, side);
  const Proc dmm = increments(sharp_bracket(s, M, M, Filtration::F));
  for (int t = 1; t <= s.depth(); ++t)
    for (std::size_t w = 0; w < s.size(); ++w) {
      const double b = direct.bracket[t][w];
      if (!(b > tol)) continue;
      const double lf = viaf.bracket[t][w] > tol ? -viaf.drift[t][w] / viaf.bracket[t][w]
                                                 : std::numeric_limits<double>::infinity();
      const double phi = ph.phi_hat[t][w];
      const double lc = lambda * dmm[t][w] / b + (before ? -phi : phi);
      const double gf = std::abs(lf - r.lambda_hat[t][w]), gp = std::abs(lc - r.lambda_hat[t][w]);
      r.route_f_lambda_gap = std::max(r.route_f_lambda_gap, gf);
      r.route_phi_lambda_gap = std::max(r.route_phi_lambda_gap, gp);
      // drift units: a tiny bracket increment amplifies rounding in the quotient
      r.route_f_gap = std::max(r.route_f_gap, gf * b);
      r.route_phi_gap = std::max(r.route_phi_gap, gp * b);
    }
  return r;
}

ConverseResult converse_construction(const TreeSpace& s, const TreeAzema& az, TreeSide side) {
  ConverseResult r;
  r.V = s.zeros();
  for (std::size_t w = 0; w < s.size(); ++w) {
    int T = s.depth() + 1;
    for (int t = 1; t <= s.depth(); ++t)
      if (thin_cell(az, t, w, side)) {
        T = t;
        break;
      }
    if (T <= s.depth()) r.charged = true;
    for (int t = T; t <= s.depth(); ++t) r.V[t][w] = 1.0;
  }
  r.V_comp = compensator(s, r.V, Filtration::F);
  r.M = r.V;
  for (int t = 0; t <= s.depth(); ++t)
    for (std::size_t w = 0; w < s.size(); ++w) r.M[t][w] -= r.V_comp[t][w];
  const Proc ms = stopped(s, r.M);
  r.M_window = ms;
  if (side == TreeSide::after)
    for (int t = 0; t <= s.depth(); ++t)
      for (std::size_t w = 0; w < s.size(); ++w) r.M_window[t][w] = r.M[t][w] - ms[t][w];
  r.predictable = s.is_predictable(r.M_window, Filtration::G, 1e-12);
  for (int t = 0; t <= s.depth(); ++t)
    for (std::size_t w = 0; w < s.size(); ++w)
      if (std::abs(r.M_window[t][w] - r.M_window[0][w]) > 1e-12) r.nonconstant = true;
  if (r.predictable) {
    r.verdict = check_constant_predictable(s, r.M_window, Filtration::G);
  } else {
    r.verdict.status = SCStatus::inconclusive;
    r.verdict.note = "constructed process is not G-predictable";
  }
  return r;
}

EvanescenceReport evanescence_scan(const TreeSpace& s, const TreeAzema& az, const Proc& M, ThinSet set) {
  const TreeSide side = set == ThinSet::ztilde_zero ? TreeSide::before : TreeSide::after;
  const Proc dM = increments(M);
  EvanescenceReport r;
  r.set = set;
  r.paths = s.size();
  std::set<std::pair<int, std::size_t>> cells, quiet;
  double mass = 0.0;
  for (std::size_t w = 0; w < s.size(); ++w) {
    bool hit = false;
    for (int t = 1; t <= s.depth(); ++t) {
      if (!thin_cell(az, t, w, side)) continue;
      hit = true;
      cells.insert({t, s.node(t, w)});
      if (std::abs(dM[t][w]) <= 1e-14) quiet.insert({t, s.node(t, w)});
    }
    if (hit) {
      ++r.charged_paths;
      mass += s.outcomes()[w].prob;
    }
  }
  for (const auto& c : cells)
    if (r.example_times.size() < 10) r.example_times.push_back(c.first);
  r.charged_fraction = mass;
  r.charges_without_co_jump = quiet.size();
  r.co_jump = !cells.empty() && quiet.empty();
  return r;
}

}  // namespace enlab
