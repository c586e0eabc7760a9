#include "enlab/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "enlab/calculus.hpp"
#include "enlab/errors.hpp"
#include "enlab/rng.hpp"
#include "enlab/ruin.hpp"
#include "enlab/sc_checker.hpp"
#include "enlab/tree.hpp"

namespace enlab {

using nlohmann::json;

namespace {

const std::vector<std::pair<std::string, std::string>>& catalogue() {
  static const std::vector<std::pair<std::string, std::string>> c = {
      {"tree-identities", "enlargement identities on random finite trees, checked by enumeration"},
      {"counterexample-stopped", "weighted jump-time model: the stopped market fails SC(G) on ]]T1,tau]]"},
      {"counterexample-honest", "last-passage model: the market after tau fails SC(G) on {Y- in (a,a+1]}"},
      {"positive-stopped", "trees and last-passage paths where the stopped market keeps SC(G)"},
      {"positive-honest-tree", "honest random times on trees where the market after tau keeps SC(G)"},
      {"evanescence-scan", "thin-set charges on both models, a Z>0 tree and the converse construction"},
      {"ruin-table", "ruin probability table with its first-passage Monte Carlo oracle"},
  };
  return c;
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string path_file(std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "paths/path_%04zu.csv", i);
  return buf;
}

double get_num(const json& model, const char* key, double fallback) {
  if (!model.contains(key)) return fallback;
  const auto& v = model.at(key);
  if (!v.is_number()) throw UsageError(std::string("model.") + key + " must be a number");
  return v.get<double>();
}

std::vector<double> get_list(const json& model, const char* key, std::vector<double> fallback) {
  if (!model.contains(key)) return fallback;
  const auto& v = model.at(key);
  if (!v.is_array()) throw UsageError(std::string("model.") + key + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw UsageError(std::string("model.") + key + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

class Checks {
 public:
  // pass iff value <= limit
  void upper(const std::string& name, double value, double limit, const std::string& detail = "") {
    add(name, value, limit, std::isfinite(value) && value <= limit, detail);
  }
  void flag(const std::string& name, bool ok, const std::string& detail = "") {
    add(name, ok ? 1.0 : 0.0, 1.0, ok, detail);
  }
  void add(const std::string& name, double value, double limit, bool pass, const std::string& detail) {
    CheckResult c;
    c.name = name;
    c.value = value;
    c.limit = limit;
    c.pass = pass;
    c.detail = detail;
    list.push_back(std::move(c));
  }
  std::vector<CheckResult> list;
};

double fraction(std::size_t k, std::size_t n) { return n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n); }

WeightedJumpTimeModel weighted_model(const ExperimentConfig& cfg) {
  WeightedJumpTimeModel w{get_num(cfg.model, "k1", 0.5), get_num(cfg.model, "k2", 0.5),
                          get_num(cfg.model, "lambda", 1.0)};
  w.validate();
  return w;
}

MarketModel weighted_market(const ExperimentConfig& cfg) {
  MarketModel m{get_num(cfg.model, "lambda", 1.0), get_num(cfg.model, "psi", 0.5), get_num(cfg.model, "x0", 1.0)};
  m.validate();
  return m;
}

LastPassageModel last_passage_model(const ExperimentConfig& cfg) {
  LastPassageModel lp{get_num(cfg.model, "b", 0.5), get_num(cfg.model, "sigma", 1.0),
                      get_num(cfg.model, "lambda", 1.0)};
  lp.validate();
  return lp;
}

std::vector<double> probes_for(double horizon, std::initializer_list<double> extra) {
  std::vector<double> p;
  for (int i = 1; i <= 64; ++i) p.push_back(horizon * i / 64.0);
  for (double t : extra)
    if (t > 0.0 && t <= horizon) p.push_back(t);
  std::sort(p.begin(), p.end());
  return p;
}

// {t in (tau, T] : Y_{t-} - a in (0, 1]} read directly off the piecewise-linear level path.
IntervalSet excursion_band(const PiecewiseJumpPath& counts, double mu, double a, double tau) {
  const auto events = counting_events(counts);
  const double T = counts.horizon();
  std::vector<Interval> parts;
  double start = 0.0, y = 0.0;
  for (std::size_t i = 0; i <= events.size(); ++i) {
    const double end = i < events.size() ? events[i] : T;
    // on (start, end] the left limit is y + mu (t - start)
    const double lo = std::max({start, tau, start + (a - y) / mu});
    const double hi = std::min(end, start + (a + 1.0 - y) / mu);
    if (hi > lo) parts.push_back({lo, hi, true, false});
    y += mu * (end - start) - 1.0;
    start = end;
  }
  return IntervalSet(std::move(parts));
}

// ------------------------------------------------------------------ tree-identities

enum TreeCheck {
  kZtilde,
  kMMartingale,
  kCompStopped,
  kCompAfter,
  kProjection,
  kJeulinBefore,
  kJeulinAfter,
  kOiProperty,
  kOiCovariation,
  kTruncOrth,
  kTruncStable,
  kPhiBefore,
  kPhiAfter,
  kTower,
  kTreeCheckCount
};

const std::array<const char*, kTreeCheckCount> kTreeCheckNames = {
    "ztilde_identity",          "m_f_martingale",          "g_compensator_stopped", "g_compensator_after",
    "projection_identities",    "jeulin_before_martingale", "jeulin_after_martingale", "oi_defining_property",
    "oi_covariation",           "truncation_orthogonality", "truncation_stabilization", "phi_hat_before",
    "phi_hat_after",            "coarsening_tower"};

struct TreeRow {
  int depth = 0;
  std::size_t leaves = 0;
  std::array<double, kTreeCheckCount> err{};
  bool honest = true;
  bool random_m_hypothesis = false;  // the unconstrained martingale met the before hypothesis
  int n_star_before = 0, n_indicator_before = 0, n_star_after = 0, n_indicator_after = 0;
  std::size_t excluded_cells = 0;
  std::string failure;
};

// Per-level node values of an F-adapted process; NaN marks an inconsistency.
std::vector<double> node_values(const TreeSpace& s, const Proc& x, int t) {
  std::vector<double> v(s.tree().level_size(t), std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> seen(v.size(), false);
  for (std::size_t w = 0; w < s.size(); ++w) {
    const std::size_t k = s.node(t, w);
    if (!seen[k]) {
      v[k] = x[t][w];
      seen[k] = true;
    } else if (std::abs(v[k] - x[t][w]) > 1e-14) {
      v[k] = std::numeric_limits<double>::infinity();
    }
  }
  return v;
}

double stabilization_error(const TruncationResult& tr, const TreeSpace& s) {
  if (tr.n_star > tr.n_indicator) return std::numeric_limits<double>::infinity();
  double e = 0.0;
  for (const auto& lv : tr.levels)
    if (lv.n >= tr.n_star) e = std::max(e, max_abs_diff(s, lv.phi, tr.phi_limit));
  return e;
}

TreeRow tree_identity_row(std::uint64_t seed, std::size_t index, const RandomTreeOptions& opt) {
  TreeRow row;
  std::mt19937_64 rng(path_seed(seed, index));
  const ProbTree tree = random_tree(rng, opt);
  const auto mv = random_martingale(tree, rng);
  row.depth = tree.depth();
  row.leaves = tree.leaves();
  auto up = [&row](TreeCheck c, double v) { row.err[c] = std::max(row.err[c], std::isnan(v) ? INFINITY : v); };
  auto square = [](Proc p) {
    for (auto& r : p)
      for (auto& x : r) x *= x;
    return p;
  };
  auto abs_path = [](const Proc& p) {
    Proc d = increments(p);
    for (auto& r : d)
      for (auto& x : r) x = std::abs(x);
    return cumulate(d);
  };

  // general random time: before-tau identities
  {
    const TreeSpace s(tree, random_time(tree, rng, opt));
    const TreeAzema az = project_optional(s);
    const Proc M = s.from_nodes(mv);
    up(kZtilde, verify_ztilde_identity(s, az));
    up(kMMartingale, martingale_error(s, az.m, Filtration::F));
    for (const Proc& V : {square(M), abs_path(M)}) {
      const auto c = verify_g_compensator_stopped(s, az, V);
      up(kCompStopped, c.max_error);
      row.excluded_cells += c.excluded_cells;
    }
    up(kProjection, verify_predictable_projection_identities(s, az, M, false).max());
    const Proc Mhat = jeulin_hat(s, az, M, TreeSide::before);
    const Proc mhat = jeulin_hat(s, az, az.m, TreeSide::before);
    up(kJeulinBefore, martingale_error(s, Mhat, Filtration::G));
    up(kJeulinBefore, martingale_error(s, mhat, Filtration::G));
    {
      const Proc H = random_optional(s, Filtration::F, rng), K = random_optional(s, Filtration::F, rng);
      up(kOiProperty, oi_defining_property_error(s, H, M, Filtration::F));
      up(kOiCovariation, verify_oi_covariation(s, H, M, K, az.m, Filtration::F));
    }
    {
      const Proc H = random_optional(s, Filtration::G, rng), K = random_optional(s, Filtration::G, rng);
      up(kOiProperty, oi_defining_property_error(s, H, Mhat, Filtration::G));
      up(kOiCovariation, verify_oi_covariation(s, H, Mhat, K, mhat, Filtration::G));
    }
    const auto tr = truncation_densities(s, az, M, TreeSide::before);
    up(kTruncOrth, tr.max_orthogonality_error);
    up(kTruncStable, stabilization_error(tr, s));
    row.n_star_before = tr.n_star;
    row.n_indicator_before = tr.n_indicator;
    const auto ph = verify_phi_hat_identity(s, az, M, TreeSide::before);
    row.random_m_hypothesis = ph.hypothesis_holds;
    if (ph.hypothesis_holds) up(kPhiBefore, ph.max_error);
    const Proc Mh = s.from_nodes(hypothesis_martingale(s, az, TreeSide::before, rng));
    const auto ph2 = verify_phi_hat_identity(s, az, Mh, TreeSide::before);
    if (!ph2.hypothesis_holds) row.failure = "hypothesis martingale violates the before hypothesis";
    up(kPhiBefore, ph2.hypothesis_holds ? ph2.max_error : INFINITY);
    up(kTruncOrth, truncation_densities(s, az, Mh, TreeSide::before).max_orthogonality_error);

    // Z_t for t <= n-1 is unchanged when the last level is folded into tau = infinity
    if (s.depth() >= 2) {
      const TreeSpace c = coarsen_final_level(s);
      const TreeAzema azc = project_optional(c);
      for (int t = 0; t < s.depth(); ++t) {
        const auto a = node_values(s, az.Z, t), b = node_values(c, azc.Z, t);
        for (std::size_t k = 0; k < a.size(); ++k) {
          // nodes with no positive-probability outcome appear in neither
          if (std::isnan(a[k]) && std::isnan(b[k])) continue;
          up(kTower, std::abs(a[k] - b[k]));
        }
      }
    }
  }

  // honest random time: after-tau identities
  {
    const TreeSpace s(tree, random_honest_time(tree, rng));
    row.honest = s.is_honest();
    const TreeAzema az = project_optional(s);
    const Proc M = s.from_nodes(mv);
    up(kZtilde, verify_ztilde_identity(s, az));
    up(kMMartingale, martingale_error(s, az.m, Filtration::F));
    for (const Proc& V : {square(M), abs_path(M)}) {
      up(kCompStopped, verify_g_compensator_stopped(s, az, V).max_error);
      up(kCompAfter, verify_g_compensator_after(s, az, V).max_error);
    }
    up(kProjection, verify_predictable_projection_identities(s, az, M, true).max());
    up(kJeulinBefore, martingale_error(s, jeulin_hat(s, az, M, TreeSide::before), Filtration::G));
    up(kJeulinAfter, martingale_error(s, jeulin_hat(s, az, M, TreeSide::after), Filtration::G));
    up(kJeulinAfter, martingale_error(s, jeulin_hat(s, az, az.m, TreeSide::after), Filtration::G));
    const auto tr = truncation_densities(s, az, M, TreeSide::after);
    up(kTruncOrth, tr.max_orthogonality_error);
    up(kTruncStable, stabilization_error(tr, s));
    row.n_star_after = tr.n_star;
    row.n_indicator_after = tr.n_indicator;
    const Proc Ma = s.from_nodes(hypothesis_martingale(s, az, TreeSide::after, rng));
    const auto ph = verify_phi_hat_identity(s, az, Ma, TreeSide::after);
    if (!ph.hypothesis_holds) row.failure = "hypothesis martingale violates the after hypothesis";
    up(kPhiAfter, ph.hypothesis_holds ? ph.max_error : INFINITY);
    const auto tra = truncation_densities(s, az, Ma, TreeSide::after);
    up(kTruncOrth, tra.max_orthogonality_error);
    up(kTruncStable, stabilization_error(tra, s));
  }
  return row;
}

ExperimentOutput run_tree_identities(const ExperimentConfig& cfg) {
  RandomTreeOptions opt;
  opt.max_depth = static_cast<int>(get_num(cfg.model, "max_depth", 4));
  opt.max_branch = static_cast<int>(get_num(cfg.model, "max_branch", 3));
  opt.zero_law_prob = get_num(cfg.model, "zero_law_prob", 0.3);
  if (opt.max_depth < 1 || opt.max_branch < 2 || opt.zero_law_prob < 0.0 || opt.zero_law_prob >= 1.0)
    throw UsageError("tree options out of range");
  const double limit = cfg.tol("identity", 1e-12);

  const auto rows = map_paths<TreeRow>(
      cfg.n_paths, [&](std::size_t i) { return tree_identity_row(cfg.seed, i, opt); }, cfg.batch);

  ExperimentOutput out;
  Checks checks;
  std::array<double, kTreeCheckCount> worst{};
  std::size_t dishonest = 0, random_hyp = 0, excluded = 0, failures = 0;
  int max_depth = 0;
  std::size_t max_leaves = 0;
  std::ostringstream csv;
  csv << "tree,depth,leaves,honest,random_m_hypothesis,n_star_before,n_indicator_before,n_star_after,"
         "n_indicator_after";
  for (const char* n : kTreeCheckNames) csv << ',' << n;
  csv << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    for (int c = 0; c < kTreeCheckCount; ++c) worst[c] = std::max(worst[c], r.err[c]);
    dishonest += r.honest ? 0 : 1;
    random_hyp += r.random_m_hypothesis ? 1 : 0;
    excluded += r.excluded_cells;
    failures += r.failure.empty() ? 0 : 1;
    max_depth = std::max(max_depth, r.depth);
    max_leaves = std::max(max_leaves, r.leaves);
    csv << i << ',' << r.depth << ',' << r.leaves << ',' << r.honest << ',' << r.random_m_hypothesis << ','
        << r.n_star_before << ',' << r.n_indicator_before << ',' << r.n_star_after << ',' << r.n_indicator_after;
    for (double e : r.err) csv << ',' << num(e);
    csv << '\n';
  }
  for (int c = 0; c < kTreeCheckCount; ++c) checks.upper(kTreeCheckNames[c], worst[c], limit);
  checks.upper("honest_times_pass_honesty_check", static_cast<double>(dishonest), 0.0);
  checks.upper("hypothesis_martingales_meet_hypothesis", static_cast<double>(failures), 0.0);
  checks.upper("max_paths_per_tree", static_cast<double>(max_leaves), static_cast<double>(ProbTree::kDefaultPathCap));

  out.report.checks = std::move(checks.list);
  out.report.summary = {{"trees", rows.size()},
                        {"max_depth", max_depth},
                        {"max_leaves", max_leaves},
                        {"unconstrained_m_meeting_before_hypothesis", random_hyp},
                        {"compensator_excluded_cells", excluded}};
  out.files["trees.csv"] = csv.str();
  return out;
}

// ------------------------------------------------------------------ counterexample-stopped

struct StoppedRow {
  double T1 = 0, T2 = 0, tau = 0, horizon = 0;
  SCStatus status = SCStatus::inconclusive;
  std::string witness;
  double residual = 0, bracket_rel = 0, drift_rel = 0, bracket_on_witness = 0;
  bool witness_ok = false, disjoint = false;
  std::string error;
};

ExperimentOutput run_counterexample_stopped(const ExperimentConfig& cfg) {
  const auto model = weighted_model(cfg);
  const auto market = weighted_market(cfg);
  if (market.poisson_rate != model.lambda) throw UsageError("market and random-time intensities differ");
  const double rel = cfg.tol("bracket_rel", 1e-8);
  const double wtol = cfg.tol("witness_endpoint", 1e-9);
  SCOptions opt;
  opt.tol = cfg.tol("sc", 1e-9);

  ExperimentOutput out;
  std::vector<std::string> csvs(std::min(cfg.csv_paths, cfg.n_paths));
  const auto rows = map_paths<StoppedRow>(
      cfg.n_paths,
      [&](std::size_t i) {
        StoppedRow r;
        const auto counts = simulate_weighted_counts(model, cfg.horizon, 1.0, path_seed(cfg.seed, i));
        const auto az = azema_weighted(counts, model);
        const auto X = stochastic_exponential(counts, market);
        r.T1 = az.T1;
        r.T2 = az.T2;
        r.tau = az.tau;
        r.horizon = counts.horizon();
        try {
          r.bracket_rel = g_bracket_stopped(X, market, az, rel).max_rel_diff;
        } catch (const ConsistencyError& e) {
          r.bracket_rel = INFINITY;
          r.error = e.what();
        }
        const auto pair = g_drift_stopped(X, market, az);
        r.drift_rel = cumulative_rel_diff(pair.drift, g_drift_stopped_general(X, market, az),
                                          probes_for(r.horizon, {r.T1, r.tau}));
        const auto v = check_sc(pair, opt);
        r.status = v.status;
        r.residual = v.residual;
        r.witness = v.witness.empty() ? "" : v.witness.parts().front().str();
        if (v.witness.parts().size() > 1) r.witness += "+";
        r.witness_ok = v.witness.approx_equal(IntervalSet::single(r.T1, r.tau, true, false), wtol);
        const IntervalSet bracket_support = IntervalSet::single(0.0, r.T1);
        r.disjoint = v.witness.intersect(bracket_support).length() == 0.0;
        r.bracket_on_witness = pair.bracket.abs_mass_on(v.witness);
        if (i < csvs.size()) {
          std::ostringstream os;
          write_path_csv(os, az, pair, 401);
          csvs[i] = os.str();
        }
        return r;
      },
      cfg.batch);

  std::size_t violated = 0, witness_ok = 0, disjoint = 0;
  double max_bracket_rel = 0, max_drift_rel = 0, max_on_witness = 0, min_residual = INFINITY;
  std::ostringstream csv;
  csv << "path,T1,T2,tau,horizon,status,witness,residual,bracket_rel_diff,drift_rel_diff,witness_matches,"
         "disjoint_from_bracket\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    violated += r.status == SCStatus::violated;
    witness_ok += r.witness_ok;
    disjoint += r.disjoint;
    max_bracket_rel = std::max(max_bracket_rel, r.bracket_rel);
    max_drift_rel = std::max(max_drift_rel, r.drift_rel);
    max_on_witness = std::max(max_on_witness, r.bracket_on_witness);
    min_residual = std::min(min_residual, r.residual);
    csv << i << ',' << num(r.T1) << ',' << num(r.T2) << ',' << num(r.tau) << ',' << num(r.horizon) << ','
        << to_string(r.status) << ",\"" << r.witness << "\"," << num(r.residual) << ',' << num(r.bracket_rel)
        << ',' << num(r.drift_rel) << ',' << r.witness_ok << ',' << r.disjoint << '\n';
  }
  const std::size_t n = rows.size();
  Checks checks;
  checks.upper("paths_not_violated", static_cast<double>(n - violated), 0.0);
  checks.upper("witness_differs_from_T1_tau", static_cast<double>(n - witness_ok), 0.0);
  checks.upper("witness_meets_bracket_support", static_cast<double>(n - disjoint), 0.0);
  checks.upper("bracket_mass_on_witness", max_on_witness, opt.tol);
  checks.upper("bracket_general_vs_closed_rel", max_bracket_rel, rel);
  checks.upper("drift_general_vs_simplified_rel", max_drift_rel, rel);
  out.report.checks = std::move(checks.list);
  out.report.summary = {{"paths", n},
                        {"violated_fraction", fraction(violated, n)},
                        {"witness_match_fraction", fraction(witness_ok, n)},
                        {"max_bracket_rel_diff", max_bracket_rel},
                        {"max_drift_rel_diff", max_drift_rel},
                        {"min_residual", n > 0 ? min_residual : 0.0}};
  out.files["verdicts.csv"] = csv.str();
  for (std::size_t i = 0; i < csvs.size(); ++i) out.files[path_file(i)] = csvs[i];
  return out;
}

// ------------------------------------------------------------------ counterexample-honest

struct HonestRow {
  double tau = 0, horizon = 0, band_length = 0;
  std::size_t band_parts = 0;
  SCStatus status = SCStatus::inconclusive;
  double residual = 0, bracket_rel = 0, bracket_on_witness = 0;
  bool charged = false, witness_ok = false;
};

ExperimentOutput run_counterexample_honest(const ExperimentConfig& cfg) {
  const auto model = last_passage_model(cfg);
  const auto psi = model.ruin();
  const auto market = model.market(get_num(cfg.model, "x0", 1.0));
  const double rel = cfg.tol("bracket_rel", 1e-8);
  const double wtol = cfg.tol("witness_endpoint", 1e-9);
  SCOptions opt;
  opt.tol = cfg.tol("sc", 1e-9);

  ExperimentOutput out;
  std::vector<std::string> csvs(std::min(cfg.csv_paths, cfg.n_paths));
  const auto rows = map_paths<HonestRow>(
      cfg.n_paths,
      [&](std::size_t i) {
        HonestRow r;
        const auto counts = simulate_certified_counts(model, psi, cfg.horizon, path_seed(cfg.seed, i));
        const auto az = azema_last_passage(counts, model, psi);
        const auto X = stochastic_exponential(counts, market);
        r.tau = az.tau;
        r.horizon = counts.horizon();
        try {
          r.bracket_rel = g_bracket_after(X, market, az, rel).max_rel_diff;
        } catch (const ConsistencyError&) {
          r.bracket_rel = INFINITY;
        }
        const auto pair = g_drift_bracket_after(X, market, az);
        const auto v = check_sc(pair, opt);
        r.status = v.status;
        r.residual = v.residual;
        r.bracket_on_witness = pair.bracket.abs_mass_on(v.witness);
        // oracle: the band is read off Y alone, without the calculus layer
        const IntervalSet band = excursion_band(counts, model.mu(), model.a(), az.tau);
        r.band_length = band.length();
        r.band_parts = band.parts().size();
        r.charged = pair.drift.abs_mass_on(band) > opt.tol;
        r.witness_ok = v.witness.approx_equal(band, wtol);
        if (i < csvs.size()) {
          std::ostringstream os;
          write_path_csv(os, az, pair, 801);
          csvs[i] = os.str();
        }
        return r;
      },
      cfg.batch);

  std::size_t charged = 0, charged_violated = 0, charged_witness = 0, uncharged_flagged = 0;
  double max_bracket_rel = 0, max_on_witness = 0;
  std::ostringstream csv;
  csv << "path,tau,horizon,band_length,band_parts,charged,status,residual,bracket_rel_diff,witness_matches\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.charged) {
      ++charged;
      charged_violated += r.status == SCStatus::violated;
      charged_witness += r.witness_ok;
    } else if (r.status != SCStatus::satisfied) {
      ++uncharged_flagged;
    }
    max_bracket_rel = std::max(max_bracket_rel, r.bracket_rel);
    max_on_witness = std::max(max_on_witness, r.bracket_on_witness);
    csv << i << ',' << num(r.tau) << ',' << num(r.horizon) << ',' << num(r.band_length) << ',' << r.band_parts
        << ',' << r.charged << ',' << to_string(r.status) << ',' << num(r.residual) << ',' << num(r.bracket_rel)
        << ',' << r.witness_ok << '\n';
  }
  const std::size_t n = rows.size();
  const double frac = fraction(charged, n);
  Checks checks;
  checks.add("charged_fraction_positive", frac, 0.0, frac > 0.0, "measured");
  checks.upper("charged_paths_not_violated", static_cast<double>(charged - charged_violated), 0.0);
  checks.upper("charged_witness_differs_from_band", static_cast<double>(charged - charged_witness), 0.0);
  checks.upper("uncharged_paths_not_satisfied", static_cast<double>(uncharged_flagged), 0.0);
  checks.upper("bracket_mass_on_witness", max_on_witness, opt.tol);
  checks.upper("bracket_general_vs_closed_rel", max_bracket_rel, rel);
  out.report.checks = std::move(checks.list);
  out.report.summary = {{"paths", n},
                        {"level_a", model.a()},
                        {"drift_mu", model.mu()},
                        {"charged_paths", charged},
                        {"charged_fraction", frac},
                        {"max_bracket_rel_diff", max_bracket_rel}};
  out.files["verdicts.csv"] = csv.str();
  for (std::size_t i = 0; i < csvs.size(); ++i) out.files[path_file(i)] = csvs[i];
  return out;
}

// ------------------------------------------------------------------ positive cases

// lambda-hat by least squares inside each G-cell: the drift of X per cell over its conditional variance.
Proc least_squares_lambda(const TreeSpace& s, const Proc& X, TreeSide side) {
  Proc out = s.zeros();
  const Proc dX = increments(X);
  for (int t = 1; t <= s.depth(); ++t) {
    std::vector<double> x(s.size()), x2(s.size());
    for (std::size_t w = 0; w < s.size(); ++w) {
      x[w] = dX[t][w];
      x2[w] = dX[t][w] * dX[t][w];
    }
    const auto mean = s.cond_exp(x, t - 1, Filtration::G), second = s.cond_exp(x2, t - 1, Filtration::G);
    for (std::size_t w = 0; w < s.size(); ++w) {
      const bool in = side == TreeSide::before ? t <= s.tau(w) : t > s.tau(w);
      const double var = second[w] - mean[w] * mean[w];
      if (in && var > 1e-14) out[t][w] = -mean[w] / var;
    }
  }
  return out;
}

double lambda_gap(const TreeSpace& s, const Proc& a, const Proc& b, const Proc& bracket) {
  double e = 0.0;
  for (int t = 1; t <= s.depth(); ++t)
    for (std::size_t w = 0; w < s.size(); ++w)
      if (std::abs(bracket[t][w]) > 1e-14) e = std::max(e, std::abs(a[t][w] - b[t][w]));
  return e;
}

ExperimentOutput run_positive_stopped(const ExperimentConfig& cfg) {
  const double tol = cfg.tol("lambda", 1e-10);
  const double lambda = get_num(cfg.model, "tree_lambda", 0.4);
  Checks checks;
  ExperimentOutput out;
  json summary;

  // (i) Z-tilde > 0 everywhere: tau independent of a trinomial market
  {
    const ProbTree tree = ProbTree::uniform(3, {0.5, 0.3, 0.2});
    const TreeSpace s(tree, geometric_time(tree, 0.3));
    const TreeAzema az = project_optional(s);
    const Proc M = s.from_nodes(walk_martingale(tree, {1.0, 0.0, -2.0}));
    double min_zt = INFINITY;
    for (int t = 0; t <= s.depth(); ++t)
      for (std::size_t w = 0; w < s.size(); ++w)
        if (t <= s.tau(w)) min_zt = std::min(min_zt, az.Zt[t][w]);
    const auto rep = positive_case_verify(s, az, M, lambda, TreeSide::before, tol);
    const Proc X = tree_market(s, M, lambda);
    const auto d = g_doob(s, X, TreeSide::before);
    const double ls = lambda_gap(s, rep.lambda_hat, least_squares_lambda(s, X, TreeSide::before), d.bracket);
    checks.add("i_ztilde_positive", min_zt, 0.0, min_zt > 0.0, "");
    checks.flag("i_satisfied", rep.verdict.status == SCStatus::satisfied);
    checks.upper("i_reconstruction_error", rep.verdict.reconstruction_error, tol);
    checks.upper("i_lambda_vs_least_squares", ls, tol);
    checks.upper("i_route_f_lambda_gap", rep.route_f_lambda_gap, tol);
    checks.upper("i_route_phi_lambda_gap", rep.route_phi_lambda_gap, tol);
    summary["case_i"] = rep.to_json();
  }
  // (ii) <M-hat>^G = <M>^F: lambda-hat = lambda - beta_m / Z_- on [0, tau]
  {
    const TreeModel tm = orthogonal_bracket_tree(3, 0.6, 0.7);
    const TreeSpace s(tm.tree, tm.tau);
    const TreeAzema az = project_optional(s);
    const Proc M = s.from_nodes(tm.martingale);
    const auto rep = positive_case_verify(s, az, M, tm.lambda, TreeSide::before, tol);
    const auto tr = truncation_densities(s, az, M, TreeSide::before);
    const Proc Mh = jeulin_hat(s, az, M, TreeSide::before);
    const Proc bG = increments(sharp_bracket(s, Mh, Mh, Filtration::G));
    const Proc bF = increments(sharp_bracket(s, M, M, Filtration::F));
    double gap = 0.0, bracket_gap = 0.0;
    for (int t = 1; t <= s.depth(); ++t)
      for (std::size_t w = 0; w < s.size(); ++w) {
        if (t > s.tau(w)) continue;
        gap = std::max(gap, std::abs(rep.lambda_hat[t][w] - (tm.lambda - tr.beta_m[t][w] / az.Zm[t][w])));
        bracket_gap = std::max(bracket_gap, std::abs(bG[t][w] - bF[t][w]));
      }
    checks.flag("ii_satisfied", rep.verdict.status == SCStatus::satisfied);
    checks.upper("ii_bracket_g_equals_f", bracket_gap, tol);
    checks.upper("ii_lambda_vs_closed_form", gap, tol);
    summary["case_ii"] = rep.to_json();
  }
  // (iii) tau = infinity: G and F verdicts coincide exactly
  {
    const ProbTree tree = ProbTree::uniform(3, {0.5, 0.3, 0.2});
    const TreeSpace s(tree, constant_time(tree, tree.depth() + 1));
    const Proc M = s.from_nodes(walk_martingale(tree, {1.0, 0.0, -2.0}));
    const Proc X = tree_market(s, M, lambda);
    Proc lg, lf;
    const auto vg = check_sc_tree(s, g_doob(s, X, TreeSide::before), Filtration::G, 1e-12, &lg, "G");
    const auto vf = check_sc_tree(s, f_doob(s, X), Filtration::F, 1e-12, &lf, "F");
    checks.flag("iii_status_equal", vg.status == vf.status && vg.status == SCStatus::satisfied);
    checks.flag("iii_lambda_hat_identical", lg == lf);
  }
  // last-passage paths before tau: {Z-tilde = 0 < Z_-} is never charged
  {
    const auto model = last_passage_model(cfg);
    const auto psi = model.ruin();
    const auto market = model.market(get_num(cfg.model, "x0", 1.0));
    const double rel = cfg.tol("reconstruction_rel", 1e-6);
    struct Row {
      SCStatus status = SCStatus::inconclusive;
      double recon = 0.0;
      std::size_t zero_charges = 0;
    };
    const auto rows = map_paths<Row>(
        cfg.n_paths,
        [&](std::size_t i) {
          const auto counts = simulate_certified_counts(model, psi, cfg.horizon, path_seed(cfg.seed, i));
          const auto az = azema_last_passage(counts, model, psi);
          const auto X = stochastic_exponential(counts, market);
          const auto v = positive_case_verify(g_drift_stopped(X, market, az), rel);
          Row r;
          r.status = v.status;
          r.recon = v.reconstruction_rel;
          r.zero_charges = thin_set_charges(az, X, 1e-12, nullptr).ztilde_zero.size();
          return r;
        },
        cfg.batch);
    std::size_t sat = 0, charges = 0;
    double recon = 0.0;
    std::ostringstream csv;
    csv << "path,status,reconstruction_rel,ztilde_zero_charges\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sat += rows[i].status == SCStatus::satisfied;
      charges += rows[i].zero_charges;
      recon = std::max(recon, rows[i].recon);
      csv << i << ',' << to_string(rows[i].status) << ',' << num(rows[i].recon) << ',' << rows[i].zero_charges
          << '\n';
    }
    checks.upper("paths_not_satisfied", static_cast<double>(rows.size() - sat), 0.0);
    checks.upper("paths_reconstruction_rel", recon, rel);
    checks.upper("paths_ztilde_zero_charges", static_cast<double>(charges), 0.0);
    summary["last_passage"] = {{"paths", rows.size()}, {"satisfied", sat}, {"max_reconstruction_rel", recon}};
    out.files["verdicts.csv"] = csv.str();
  }
  out.report.checks = std::move(checks.list);
  out.report.summary = summary;
  return out;
}

ExperimentOutput run_positive_honest_tree(const ExperimentConfig& cfg) {
  const double tol = cfg.tol("lambda", 1e-10);
  const double lambda = get_num(cfg.model, "tree_lambda", 0.4);
  RandomTreeOptions opt;
  opt.max_depth = static_cast<int>(get_num(cfg.model, "max_depth", 4));
  opt.max_branch = static_cast<int>(get_num(cfg.model, "max_branch", 3));
  if (opt.max_depth < 1 || opt.max_branch < 2) throw UsageError("tree options out of range");

  struct Row {
    bool honest = false, hypothesis = false, nontrivial = false;
    SCStatus status = SCStatus::inconclusive;
    double recon = 0, route_f = 0, route_phi = 0, least_squares = 0;
    double route_f_lambda = 0, route_phi_lambda = 0;
  };
  auto evaluate = [&](const TreeSpace& s, const Proc& M) {
    Row r;
    r.honest = s.is_honest();
    const TreeAzema az = project_optional(s);
    const auto rep = positive_case_verify(s, az, M, lambda, TreeSide::after, tol);
    const Proc X = tree_market(s, M, lambda);
    const auto d = g_doob(s, X, TreeSide::after);
    r.hypothesis = rep.hypothesis_holds;
    r.status = rep.verdict.status;
    r.recon = rep.verdict.reconstruction_error;
    r.route_f = rep.route_f_gap;
    r.route_phi = rep.route_phi_gap;
    r.route_f_lambda = rep.route_f_lambda_gap;
    r.route_phi_lambda = rep.route_phi_lambda_gap;
    r.least_squares = lambda_gap(s, rep.lambda_hat, least_squares_lambda(s, X, TreeSide::after), d.bracket);
    for (const auto& row : d.bracket)
      for (double b : row) r.nontrivial = r.nontrivial || std::abs(b) > 1e-14;
    return r;
  };

  // fixed example: last visit to the top node at level 1 of a binomial tree
  const ProbTree fixed_tree = ProbTree::uniform(3, {0.4, 0.6});
  const TreeSpace fixed(fixed_tree, last_visit_time(fixed_tree, {{1, 0}, {2, 1}}));
  std::mt19937_64 fixed_rng(cfg.seed);
  const Row fixed_row = evaluate(
      fixed, fixed.from_nodes(hypothesis_martingale(fixed, project_optional(fixed), TreeSide::after, fixed_rng)));

  const auto rows = map_paths<Row>(
      cfg.n_paths,
      [&](std::size_t i) {
        std::mt19937_64 rng(path_seed(cfg.seed, i));
        const ProbTree tree = random_tree(rng, opt);
        const TreeSpace s(tree, random_honest_time(tree, rng));
        const TreeAzema az = project_optional(s);
        return evaluate(s, s.from_nodes(hypothesis_martingale(s, az, TreeSide::after, rng)));
      },
      cfg.batch);

  std::size_t bad_status = 0, dishonest = 0, nontrivial = 0, no_hyp = 0;
  double recon = 0, route_f = 0, route_phi = 0, ls = 0, raw_f = 0, raw_phi = 0;
  std::ostringstream csv;
  csv << "tree,honest,hypothesis,nontrivial_window,status,reconstruction_error,route_f_gap,route_phi_gap,"
         "route_f_lambda_gap,route_phi_lambda_gap,least_squares_gap\n";
  std::vector<Row> all{fixed_row};
  all.insert(all.end(), rows.begin(), rows.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& r = all[i];
    bad_status += r.status != SCStatus::satisfied;
    dishonest += !r.honest;
    no_hyp += !r.hypothesis;
    nontrivial += r.nontrivial;
    recon = std::max(recon, r.recon);
    route_f = std::max(route_f, r.route_f);
    route_phi = std::max(route_phi, r.route_phi);
    ls = std::max(ls, r.least_squares);
    raw_f = std::max(raw_f, r.route_f_lambda);
    raw_phi = std::max(raw_phi, r.route_phi_lambda);
    csv << (i == 0 ? std::string("fixed") : std::to_string(i - 1)) << ',' << r.honest << ',' << r.hypothesis << ','
        << r.nontrivial << ',' << to_string(r.status) << ',' << num(r.recon) << ',' << num(r.route_f) << ','
        << num(r.route_phi) << ',' << num(r.route_f_lambda) << ',' << num(r.route_phi_lambda) << ','
        << num(r.least_squares) << '\n';
  }
  Checks checks;
  checks.flag("fixed_example_nontrivial", fixed_row.nontrivial);
  checks.upper("times_not_honest", static_cast<double>(dishonest), 0.0);
  checks.upper("hypothesis_not_met", static_cast<double>(no_hyp), 0.0);
  checks.upper("trees_not_satisfied", static_cast<double>(bad_status), 0.0);
  checks.upper("reconstruction_error", recon, tol);
  // route comparisons in drift units; raw lambda-hat gaps go to the summary
  const double drift_tol = cfg.tol("drift", 1e-12);
  checks.upper("route_f_drift_gap", route_f, drift_tol);
  checks.upper("route_phi_drift_gap", route_phi, drift_tol);
  checks.upper("lambda_vs_least_squares", ls, tol);
  ExperimentOutput out;
  out.report.checks = std::move(checks.list);
  out.report.summary = {{"trees", all.size()},
                        {"nontrivial_after_windows", nontrivial},
                        {"max_route_f_lambda_gap", raw_f},
                        {"max_route_phi_lambda_gap", raw_phi}};
  out.files["trees.csv"] = csv.str();
  return out;
}

// ------------------------------------------------------------------ evanescence-scan

ExperimentOutput run_evanescence_scan(const ExperimentConfig& cfg) {
  const auto wmodel = weighted_model(cfg);
  const auto wmarket = weighted_market(cfg);
  const auto lp = last_passage_model(cfg);
  const std::size_t lp_paths = static_cast<std::size_t>(get_num(cfg.model, "last_passage_paths", 2000));
  Checks checks;
  json summary;

  // weighted model: every path charges {Z-tilde = 0 < Z_-} exactly at T2, with the market jumping too
  struct WRow {
    PathCharges charges;
    std::size_t without = 0;
    bool at_t2 = false;
  };
  const auto wrows = map_paths<WRow>(
      cfg.n_paths,
      [&](std::size_t i) {
        const auto counts = simulate_weighted_counts(wmodel, cfg.horizon, 1.0, path_seed(cfg.seed, i));
        const auto az = azema_weighted(counts, wmodel);
        const auto X = stochastic_exponential(counts, wmarket);
        WRow r;
        r.charges = thin_set_charges(az, X, 1e-12, &r.without);
        r.at_t2 = r.charges.ztilde_zero.size() == 1 && r.charges.ztilde_zero[0] == az.T2;
        return r;
      },
      cfg.batch);
  std::vector<PathCharges> wch;
  std::size_t wwithout = 0, at_t2 = 0, wone = 0;
  for (const auto& r : wrows) {
    wch.push_back(r.charges);
    wwithout += r.without;
    at_t2 += r.at_t2;
    wone += !r.charges.ztilde_one.empty();
  }
  const auto wrep = summarize_charges(ThinSet::ztilde_zero, wch, wwithout);
  checks.add("weighted_charged_fraction", wrep.charged_fraction, 1.0, wrep.charged_fraction == 1.0, "");
  checks.upper("weighted_charge_not_at_T2", static_cast<double>(wrows.size() - at_t2), 0.0);
  checks.flag("weighted_co_jump", wrep.co_jump);
  summary["weighted"] = wrep.to_json();
  summary["weighted_ztilde_one_paths"] = wone;

  // last-passage model: {Z-tilde = 1 > Z_-} against jumps from Y_- - a in (0, 1] read off Y
  {
    const auto psi = lp.ruin();
    const auto market = lp.market();
    struct LRow {
      PathCharges charges;
      std::size_t without = 0;
      std::size_t oracle = 0;
    };
    const auto rows = map_paths<LRow>(
        lp_paths,
        [&](std::size_t i) {
          const auto counts = simulate_certified_counts(lp, psi, cfg.horizon, path_seed(cfg.seed ^ 0x9e3779b9ULL, i));
          const auto az = azema_last_passage(counts, lp, psi);
          const auto X = stochastic_exponential(counts, market);
          LRow r;
          r.charges = thin_set_charges(az, X, 1e-12, &r.without);
          double y = 0.0, prev = 0.0;
          for (double u : counting_events(counts)) {
            const double left = y + lp.mu() * (u - prev) - lp.a();
            if (left > 0.0 && left <= 1.0) ++r.oracle;
            y += lp.mu() * (u - prev) - 1.0;
            prev = u;
          }
          return r;
        },
        cfg.batch);
    std::vector<PathCharges> ch;
    std::size_t without = 0, mismatch = 0, zero_paths = 0;
    for (const auto& r : rows) {
      ch.push_back(r.charges);
      without += r.without;
      mismatch += r.charges.ztilde_one.size() != r.oracle;
      zero_paths += !r.charges.ztilde_zero.empty();
    }
    const auto rep = summarize_charges(ThinSet::ztilde_one, ch, without);
    checks.upper("last_passage_charges_vs_level_oracle", static_cast<double>(mismatch), 0.0);
    checks.upper("last_passage_ztilde_zero_paths", static_cast<double>(zero_paths), 0.0);
    checks.flag("last_passage_co_jump", rep.charged_paths == 0 || rep.co_jump);
    summary["last_passage"] = rep.to_json();
  }

  // Z > 0 tree: neither thin set is charged
  {
    const ProbTree tree = ProbTree::uniform(3, {0.5, 0.3, 0.2});
    const TreeSpace s(tree, geometric_time(tree, 0.3));
    const TreeAzema az = project_optional(s);
    const Proc M = s.from_nodes(walk_martingale(tree, {1.0, 0.0, -2.0}));
    const auto e0 = evanescence_scan(s, az, M, ThinSet::ztilde_zero);
    const auto e1 = evanescence_scan(s, az, M, ThinSet::ztilde_one);
    checks.upper("positive_tree_ztilde_zero_mass", e0.charged_fraction, 0.0);
    checks.upper("positive_tree_ztilde_one_mass", e1.charged_fraction, 0.0);
  }

  // converse: on a charging tree the compensated indicator of the first charge breaks constancy
  for (const TreeSide side : {TreeSide::before, TreeSide::after}) {
    const bool before = side == TreeSide::before;
    const ProbTree tree = ProbTree::uniform(2, {0.5, 0.5});
    const TreeSpace s(tree, revealing_time(tree, 1, 1, before));
    const TreeAzema az = project_optional(s);
    const auto scan =
        evanescence_scan(s, az, s.from_nodes(walk_martingale(tree, {1.0, -1.0})),
                         before ? ThinSet::ztilde_zero : ThinSet::ztilde_one);
    const auto c = converse_construction(s, az, side);
    const std::string p = before ? "converse_before_" : "converse_after_";
    checks.add(p + "charged_mass", scan.charged_fraction, 0.0, scan.charged_fraction > 0.0 && c.charged, "");
    checks.flag(p + "predictable", c.predictable);
    checks.flag(p + "nonconstant", c.nonconstant);
    checks.flag(p + "violated", c.verdict.status == SCStatus::violated);
    summary[p + "verdict"] = c.verdict.to_json();
  }

  ExperimentOutput out;
  out.report.checks = std::move(checks.list);
  out.report.summary = summary;
  std::ostringstream csv;
  csv << "path,ztilde_zero_times,ztilde_one_times\n";
  for (std::size_t i = 0; i < wch.size(); ++i) {
    csv << i << ",\"";
    for (std::size_t k = 0; k < wch[i].ztilde_zero.size(); ++k) csv << (k ? ";" : "") << num(wch[i].ztilde_zero[k]);
    csv << "\",\"";
    for (std::size_t k = 0; k < wch[i].ztilde_one.size(); ++k) csv << (k ? ";" : "") << num(wch[i].ztilde_one[k]);
    csv << "\"\n";
  }
  out.files["weighted_charges.csv"] = csv.str();
  return out;
}

// ------------------------------------------------------------------ ruin-table

ExperimentOutput run_ruin_table(const ExperimentConfig& cfg) {
  const auto model = last_passage_model(cfg);
  const auto psi = model.ruin();
  const auto points = get_list(cfg.model, "points", {0.0, 1.0, 2.5, 5.0});
  const double z_limit = cfg.tol("z", 3.0);
  const double slack = cfg.tol("slack", 1e-4);
  const double bias = cfg.tol("escape_bias", 1e-7);
  const double x_escape = escape_level_for_bias(model.lambda, model.mu(), bias);

  Checks checks;
  ExperimentOutput out;
  // closed form at the origin
  checks.upper("psi_zero_vs_rho", std::abs(psi.value(0.0) - model.lambda / model.mu()), 1e-12);
  std::ostringstream mc;
  mc << "x,psi,mc_estimate,mc_standard_error,bias_bound,deviation,allowed\n";
  json rows = json::array();
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double x = points[k];
    if (x < 0.0) throw UsageError("ruin points must be >= 0");
    const auto est = ruin_probability_mc(x, model.lambda, model.mu(), cfg.n_paths, path_seed(cfg.seed, k), x_escape,
                                         cfg.batch);
    const double value = psi.value(x);
    const double dev = std::abs(est.estimate - value);
    const double allowed = z_limit * est.standard_error + slack + est.bias_bound;
    checks.upper("psi_mc_at_" + num(x), dev, allowed);
    mc << num(x) << ',' << num(value) << ',' << num(est.estimate) << ',' << num(est.standard_error) << ','
       << num(est.bias_bound) << ',' << num(dev) << ',' << num(allowed) << '\n';
    rows.push_back({{"x", x}, {"psi", value}, {"mc", est.estimate}, {"se", est.standard_error}});
  }
  std::ostringstream table;
  table << "x,psi\n";
  double monotone_violation = 0.0, prev = INFINITY;
  for (const auto& [x, v] : psi.table()) {
    table << num(x) << ',' << num(v) << '\n';
    monotone_violation = std::max(monotone_violation, v - prev);
    prev = v;
  }
  checks.upper("table_nonincreasing", monotone_violation, 0.0);
  out.report.checks = std::move(checks.list);
  out.report.summary = {{"lundberg_R", psi.adjustment_coefficient()},
                        {"asymptotic_C", psi.asymptotic_constant()},
                        {"switch_point", psi.switch_point()},
                        {"x_cert", psi.x_cert()},
                        {"x_max", psi.x_max()},
                        {"x_escape", x_escape},
                        {"points", rows}};
  out.files["paths/ruin_table.csv"] = table.str();
  out.files["ruin_mc.csv"] = mc.str();
  return out;
}

}  // namespace

// ------------------------------------------------------------------ config and report

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  static const std::vector<std::string> known = {"experiment", "model",    "tolerances", "n_paths", "horizon",
                                                 "seed",       "out",      "csv_paths",  "execution", "threads"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw UsageError("unknown config field: " + key);
  ExperimentConfig c;
  try {
    if (j.contains("experiment")) {
      c = default_config(j.at("experiment").get<std::string>());
    } else {
      throw UsageError("config lacks the experiment id");
    }
    if (j.contains("model")) {
      if (!j.at("model").is_object()) throw UsageError("model must be an object");
      for (const auto& [k, v] : j.at("model").items()) c.model[k] = v;
    }
    if (j.contains("tolerances")) {
      if (!j.at("tolerances").is_object()) throw UsageError("tolerances must be an object");
      for (const auto& [k, v] : j.at("tolerances").items()) c.tolerances[k] = v;
    }
    if (j.contains("n_paths")) {
      const auto& v = j.at("n_paths");
      if (!v.is_number_integer() || v.get<long long>() < 1) throw UsageError("n_paths must be an integer >= 1");
      c.n_paths = v.get<std::size_t>();
    }
    if (j.contains("horizon")) c.horizon = j.at("horizon").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
    if (j.contains("csv_paths")) c.csv_paths = j.at("csv_paths").get<std::size_t>();
    if (j.contains("execution")) {
      const auto e = j.at("execution").get<std::string>();
      if (e == "serial") c.batch.execution = Execution::serial;
      else if (e == "parallel") c.batch.execution = Execution::parallel;
      else throw UsageError("execution must be serial or parallel");
    }
    if (j.contains("threads")) c.batch.threads = j.at("threads").get<int>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  // execution mode and output location do not change results, so they stay out of the hash
  return {{"experiment", experiment}, {"model", model},         {"tolerances", tolerances}, {"n_paths", n_paths},
          {"horizon", horizon},       {"seed", seed},           {"csv_paths", csv_paths}};
}

void ExperimentConfig::validate() const {
  const auto& ids = experiment_ids();
  if (std::find(ids.begin(), ids.end(), experiment) == ids.end())
    throw UsageError("unknown experiment: " + experiment);
  if (n_paths < 1) throw UsageError("n_paths must be >= 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw UsageError("horizon must be > 0");
  if (batch.threads < 0) throw UsageError("threads must be >= 0");
  for (const auto& [k, v] : tolerances.items())
    if (!v.is_number() || !(v.get<double>() >= 0.0)) throw UsageError("tolerance " + k + " must be a number >= 0");
}

double ExperimentConfig::tol(const std::string& key, double fallback) const {
  return tolerances.contains(key) ? tolerances.at(key).get<double>() : fallback;
}

json CheckResult::to_json() const {
  return {{"name", name}, {"pass", pass}, {"value", value}, {"limit", limit}, {"detail", detail}};
}

json ExperimentReport::to_json() const {
  json cs = json::array();
  for (const auto& c : checks) cs.push_back(c.to_json());
  return {{"experiment", experiment}, {"pass", pass},       {"seed", seed},
          {"config_hash", config_hash}, {"checks", cs},     {"summary", summary}};
}

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& [id, _] : catalogue()) v.push_back(id);
    return v;
  }();
  return ids;
}

std::string experiment_description(const std::string& id) {
  for (const auto& [k, d] : catalogue())
    if (k == id) return d;
  throw UsageError("unknown experiment: " + id);
}

ExperimentConfig default_config(const std::string& id) {
  ExperimentConfig c;
  c.experiment = id;
  if (id == "tree-identities") {
    c.n_paths = 100;
    c.model = {{"max_depth", 4}, {"max_branch", 3}, {"zero_law_prob", 0.3}};
    c.tolerances = {{"identity", 1e-12}};
  } else if (id == "counterexample-stopped") {
    c.n_paths = 10000;
    c.horizon = 1.0;
    c.model = {{"lambda", 1.0}, {"psi", 0.5}, {"k1", 0.5}, {"k2", 0.5}, {"x0", 1.0}};
    c.tolerances = {{"bracket_rel", 1e-8}, {"witness_endpoint", 1e-9}, {"sc", 1e-9}};
  } else if (id == "counterexample-honest") {
    c.n_paths = 10000;
    c.model = {{"lambda", 1.0}, {"sigma", 1.0}, {"b", 0.5}, {"x0", 1.0}};
    c.tolerances = {{"bracket_rel", 1e-8}, {"witness_endpoint", 1e-9}, {"sc", 1e-9}};
  } else if (id == "positive-stopped") {
    c.n_paths = 200;
    c.model = {{"lambda", 1.0}, {"sigma", 1.0}, {"b", 0.5}, {"x0", 1.0}, {"tree_lambda", 0.4}};
    c.tolerances = {{"lambda", 1e-10}, {"reconstruction_rel", 1e-6}};
  } else if (id == "positive-honest-tree") {
    c.n_paths = 100;
    c.model = {{"max_depth", 4}, {"max_branch", 3}, {"tree_lambda", 0.4}};
    c.tolerances = {{"lambda", 1e-10}, {"drift", 1e-12}};
  } else if (id == "evanescence-scan") {
    c.n_paths = 10000;
    c.horizon = 1.0;
    c.model = {{"lambda", 1.0}, {"psi", 0.5}, {"k1", 0.5}, {"k2", 0.5}, {"b", 0.5},
               {"sigma", 1.0},  {"last_passage_paths", 2000}};
  } else if (id == "ruin-table") {
    c.n_paths = 1000000;
    c.model = {{"lambda", 1.0}, {"sigma", 1.0}, {"b", 0.5}, {"points", {0.0, 1.0, 2.5, 5.0}}};
    c.tolerances = {{"z", 3.0}, {"slack", 1e-4}, {"escape_bias", 1e-7}};
  } else {
    throw UsageError("unknown experiment: " + id);
  }
  return c;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentOutput out;
  try {
    const std::string& id = cfg.experiment;
    if (id == "tree-identities") out = run_tree_identities(cfg);
    else if (id == "counterexample-stopped") out = run_counterexample_stopped(cfg);
    else if (id == "counterexample-honest") out = run_counterexample_honest(cfg);
    else if (id == "positive-stopped") out = run_positive_stopped(cfg);
    else if (id == "positive-honest-tree") out = run_positive_honest_tree(cfg);
    else if (id == "evanescence-scan") out = run_evanescence_scan(cfg);
    else out = run_ruin_table(cfg);
  } catch (const ParameterError& e) {
    throw UsageError(std::string("invalid model parameters: ") + e.what());
  }
  out.report.experiment = cfg.experiment;
  out.report.seed = cfg.seed;
  out.report.config_hash = fnv1a_hex(cfg.to_json().dump());
  out.report.pass = !out.report.checks.empty() &&
                    std::all_of(out.report.checks.begin(), out.report.checks.end(),
                                [](const CheckResult& c) { return c.pass; });
  json report = out.report.to_json();
  report["config"] = cfg.to_json();
  out.files["report.json"] = report.dump(2) + "\n";
  return out;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentOutput& out) {
  namespace fs = std::filesystem;
  if (cfg.out_dir.empty()) throw UsageError("no output directory");
  for (const auto& [rel, bytes] : out.files) {
    const fs::path p = fs::path(cfg.out_dir) / rel;
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << bytes;
  }
}

}  // namespace enlab
