#include "enlab/sc_checker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "enlab/errors.hpp"
#include "enlab/rng.hpp"

namespace enlab {

std::string to_string(SCStatus s) {
  switch (s) {
    case SCStatus::satisfied: return "satisfied";
    case SCStatus::violated: return "violated";
    case SCStatus::inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::string to_string(ThinSet s) { return s == ThinSet::ztilde_zero ? "Ztilde=0<Z-" : "Ztilde=1>Z-"; }

SCVerdict SCVerdict::not_applicable(const std::string& label) {
  SCVerdict v;
  v.status = SCStatus::satisfied;
  v.label = label;
  v.note = "not applicable";
  return v;
}

nlohmann::json SCVerdict::to_json() const {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& [t, v] : lambda_hat_samples) samples.push_back({t, v});
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : witness_cells)
    cells.push_back({{"t", c.t}, {"node", c.node}, {"tau_state", c.tau_state}, {"prob", c.prob},
                     {"drift", c.drift}, {"bracket", c.bracket}});
  nlohmann::json j{{"status", to_string(status)},
                   {"residual", residual},
                   {"l2_norm", l2_norm},
                   {"reconstruction_error", reconstruction_error},
                   {"lambda_hat_samples", samples},
                   {"witness", {{"intervals", witness.to_json()}, {"cells", cells}}},
                   {"window", window.to_json()}};
  if (!label.empty()) j["label"] = label;
  if (!note.empty()) j["note"] = note;
  return j;
}

namespace {

PathMeasure lebesgue_part(const PathMeasure& m) {
  return PathMeasure(m.horizon(), m.density(), {}, m.support(), m.support_exact());
}

IntervalSet effective_support(const PathMeasure& m, const SCOptions& opt) {
  if (m.support_exact()) return m.support();
  return m.scanned_support(m.horizon() / static_cast<double>(opt.scan_cells), opt.tol);
}

const Atom* atom_at(const std::vector<Atom>& atoms, double t) {
  for (const auto& a : atoms)
    if (std::abs(a.t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return &a;
  return nullptr;
}

// Breakpoints of all density pieces inside the window, plus the window ends.
std::vector<double> probe_points(const PathMeasure& a, const PathMeasure& b, const IntervalSet& window) {
  std::vector<double> p;
  for (const auto* m : {&a, &b})
    for (const auto& pc : m->density().pieces()) {
      p.push_back(pc.lo);
      p.push_back(pc.hi);
    }
  for (const auto& iv : window.parts()) {
    p.push_back(iv.lo);
    p.push_back(iv.hi);
  }
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return p;
}

}  // namespace

SCVerdict check_sc(const DriftBracketPair& pair, const SCOptions& opt) {
  const PathMeasure& drift = pair.drift;
  const PathMeasure& bracket = pair.bracket;
  if (std::abs(drift.horizon() - bracket.horizon()) > 1e-12 * std::max(1.0, drift.horizon()))
    throw ParameterError("drift and bracket live on different horizons");
  for (const auto& iv : pair.window.parts())
    if (iv.lo < 0.0 || iv.hi > drift.horizon() + 1e-12) throw ParameterError("window extends past the horizon");

  SCVerdict v;
  v.label = pair.label;
  v.window = pair.window;
  const IntervalSet dsup = effective_support(drift, opt).intersect(pair.window);
  const IntervalSet bsup = effective_support(bracket, opt).intersect(pair.window);

  // Lebesgue witness: drift density where the bracket has none
  const IntervalSet gap = dsup.subtract(bsup);
  const PathMeasure d_leb = lebesgue_part(drift);
  std::vector<Interval> witness_parts;
  for (const auto& iv : gap.parts()) {
    if (iv.length() <= 0.0) continue;
    const double mass = d_leb.abs_mass_on(IntervalSet({iv}));
    if (mass > opt.tol) {
      v.residual += mass;
      witness_parts.push_back(iv);
    }
  }
  // Atom witness: a drift atom with no bracket atom at the same time
  for (const auto& a : drift.atoms()) {
    if (!pair.window.contains(a.t) || std::abs(a.weight) <= opt.tol) continue;
    const Atom* b = atom_at(bracket.atoms(), a.t);
    if (b == nullptr || std::abs(b->weight) <= opt.tol) {
      v.residual += std::abs(a.weight);
      witness_parts.push_back({a.t, a.t, false, false});
    }
  }
  v.witness = IntervalSet(std::move(witness_parts));

  // lambda-hat on the bracket support
  PiecewiseFunction dd = clip_density(drift.density(), bsup);
  PiecewiseFunction bd = clip_density(bracket.density(), bsup);
  v.lambda_hat = pw_quotient(dd, bd);
  for (const auto& a : drift.atoms()) {
    if (!pair.window.contains(a.t)) continue;
    const Atom* b = atom_at(bracket.atoms(), a.t);
    if (b != nullptr && std::abs(b->weight) > opt.tol) v.lambda_hat_atoms.push_back({a.t, a.weight / b->weight});
  }
  v.l2_norm = pw_quotient(pw_product(dd, dd), bd).integral(0.0, drift.horizon());
  for (const auto& a : v.lambda_hat_atoms) {
    const Atom* b = atom_at(bracket.atoms(), a.t);
    v.l2_norm += a.weight * a.weight * b->weight;
  }

  // reconstruction: drift on the bracket support against lambda-hat . bracket
  const PathMeasure drift_on(drift.horizon(), dd, {}, bsup);
  const PathMeasure rebuilt(drift.horizon(), pw_product(v.lambda_hat, bd), {}, bsup);
  double scale = 0.0, x = 0.0, y = 0.0, prev = 0.0;
  // running cumulatives: each stretch between sorted probes is integrated once
  for (double t : probe_points(drift_on, rebuilt, pair.window)) {
    x += drift_on.density().integral(prev, t);
    y += rebuilt.density().integral(prev, t);
    prev = t;
    v.reconstruction_error = std::max(v.reconstruction_error, std::abs(x - y));
    scale = std::max(scale, std::abs(x));
  }
  v.reconstruction_rel = scale > 0.0 ? v.reconstruction_error / scale : v.reconstruction_error;

  // samples across the bracket-supported part of the window
  const double len = bsup.length();
  if (len > 0.0 && opt.samples > 0) {
    const double step = len / static_cast<double>(opt.samples);
    double walked = 0.0, next = 0.5 * step;
    for (const auto& iv : bsup.parts()) {
      while (next <= walked + iv.length() && v.lambda_hat_samples.size() < opt.samples) {
        const double t = iv.lo + (next - walked);
        v.lambda_hat_samples.emplace_back(t, v.lambda_hat.value(t));
        next += step;
      }
      walked += iv.length();
    }
  }
  for (const auto& a : v.lambda_hat_atoms) v.lambda_hat_samples.emplace_back(a.t, a.weight);

  if (v.residual > opt.tol) {
    v.status = SCStatus::violated;
    // re-check: the witness carries no bracket mass
    if (bracket.abs_mass_on(v.witness) > opt.tol) {
      v.status = SCStatus::inconclusive;
      v.note = "witness overlaps bracket mass";
    }
  } else if (!std::isfinite(v.l2_norm)) {
    v.status = SCStatus::inconclusive;
    v.note = "lambda-hat not square integrable on the window";
  } else {
    v.status = SCStatus::satisfied;
    v.witness = IntervalSet();
  }
  return v;
}

SCVerdict check_sc_split(const SCVerdict& before, const SCVerdict& after) {
  const IntervalSet overlap = before.window.intersect(after.window);
  if (overlap.length() > 0.0) throw ParameterError("before and after windows overlap");
  SCVerdict v;
  v.label = "split";
  v.window = before.window.unite(after.window);
  v.residual = before.residual + after.residual;
  v.l2_norm = before.l2_norm + after.l2_norm;
  v.reconstruction_error = std::max(before.reconstruction_error, after.reconstruction_error);
  v.witness = before.witness.unite(after.witness);
  v.witness_cells = before.witness_cells;
  v.witness_cells.insert(v.witness_cells.end(), after.witness_cells.begin(), after.witness_cells.end());
  if (before.status == SCStatus::violated || after.status == SCStatus::violated) {
    v.status = SCStatus::violated;
  } else if (before.status == SCStatus::satisfied && after.status == SCStatus::satisfied) {
    v.status = SCStatus::satisfied;
    v.lambda_hat_samples = before.lambda_hat_samples;
    v.lambda_hat_samples.insert(v.lambda_hat_samples.end(), after.lambda_hat_samples.begin(),
                                after.lambda_hat_samples.end());
  } else {
    v.status = SCStatus::inconclusive;
  }
  return v;
}

SCVerdict check_constant_predictable(const PiecewiseJumpPath& V, double tol) {
  SCVerdict v;
  v.label = "constant-predictable";
  const double T = V.horizon();
  v.window = IntervalSet::single(0.0, T);
  const double v0 = V.value(0.0);
  // grid plus breakpoints; pieces are smooth between breakpoints
  std::vector<double> grid;
  const std::size_t cells = 10000;
  for (std::size_t i = 0; i <= cells; ++i) grid.push_back(T * static_cast<double>(i) / cells);
  for (double t : V.event_times()) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());  // a repeated breakpoint would recount its jump
  double tv = 0.0, prev = v0;
  double first = std::numeric_limits<double>::quiet_NaN();
  for (double t : grid) {
    const double left = t > 0.0 ? V.left_limit(t) : v0;
    const double x = V.value(t);
    tv += std::abs(left - prev) + std::abs(x - left);
    if (std::isnan(first) && (std::abs(left - v0) > tol || std::abs(x - v0) > tol)) first = t;
    prev = x;
  }
  v.residual = tv;
  if (tv < tol) {
    v.status = SCStatus::satisfied;
  } else {
    v.status = SCStatus::violated;
    v.witness = IntervalSet::point(std::isnan(first) ? T : first);
  }
  return v;
}

nlohmann::json BatchVerdict::to_json() const {
  return {{"paths", paths},         {"satisfied", satisfied}, {"violated", violated},
          {"inconclusive", inconclusive}, {"max_residual", max_residual}, {"status", to_string(status)}};
}

BatchVerdict aggregate(const std::vector<SCVerdict>& verdicts) {
  BatchVerdict b;
  for (const auto& v : verdicts) {
    ++b.paths;
    switch (v.status) {
      case SCStatus::satisfied: ++b.satisfied; break;
      case SCStatus::violated: ++b.violated; break;
      case SCStatus::inconclusive: ++b.inconclusive; break;
    }
    b.max_residual = std::max(b.max_residual, v.residual);
  }
  b.status = b.violated > 0 ? SCStatus::violated : (b.inconclusive > 0 ? SCStatus::inconclusive : SCStatus::satisfied);
  return b;
}

nlohmann::json EvanescenceReport::to_json() const {
  return {{"set", to_string(set)},
          {"paths", paths},
          {"charged_paths", charged_paths},
          {"charged_fraction", charged_fraction},
          {"example_times", example_times},
          {"co_jump", co_jump},
          {"charges_without_co_jump", charges_without_co_jump}};
}

PathCharges thin_set_charges(const AzemaTriple& az, const PiecewiseJumpPath& market_path, double tol,
                             std::size_t* without_co_jump) {
  PathCharges c;
  for (const auto& a : az.delta_m_atoms) {
    const bool zero = a.z_tilde <= tol && a.z_left > tol;
    const bool one = a.z_tilde >= 1.0 - tol && a.z_left < 1.0 - tol;
    if (!zero && !one) continue;
    if (without_co_jump != nullptr && std::abs(market_path.jump_at(a.t)) <= tol) ++*without_co_jump;
    (zero ? c.ztilde_zero : c.ztilde_one).push_back(a.t);
  }
  return c;
}

EvanescenceReport summarize_charges(ThinSet set, const std::vector<PathCharges>& per_path,
                                    std::size_t without_co_jump) {
  EvanescenceReport r;
  r.set = set;
  r.paths = per_path.size();
  std::size_t charges = 0;
  for (const auto& c : per_path) {
    const auto& times = set == ThinSet::ztilde_zero ? c.ztilde_zero : c.ztilde_one;
    if (!times.empty()) ++r.charged_paths;
    charges += times.size();
    for (double t : times)
      if (r.example_times.size() < 10) r.example_times.push_back(t);
  }
  r.charged_fraction = r.paths > 0 ? static_cast<double>(r.charged_paths) / static_cast<double>(r.paths) : 0.0;
  r.charges_without_co_jump = without_co_jump;
  r.co_jump = charges > 0 && without_co_jump == 0;
  return r;
}

namespace {
struct ScanItem {
  PathCharges charges;
  std::size_t without = 0;
};

EvanescenceReport finish_scan(ThinSet set, const std::vector<ScanItem>& items) {
  std::vector<PathCharges> per;
  std::size_t without = 0;
  for (const auto& it : items) {
    per.push_back(it.charges);
    without += it.without;
  }
  return summarize_charges(set, per, without);
}
}  // namespace

EvanescenceReport evanescence_scan(const WeightedJumpTimeModel& model, const MarketModel& market,
                                   std::size_t n_paths, std::uint64_t seed, ThinSet set,
                                   const BatchOptions& batch) {
  auto items = map_paths<ScanItem>(
      n_paths,
      [&](std::size_t i) {
        const auto counts = simulate_weighted_counts(model, 1.0, 1.0, path_seed(seed, i));
        const auto az = azema_weighted(counts, model);
        const auto X = stochastic_exponential(counts, market);
        ScanItem it;
        it.charges = thin_set_charges(az, X, 1e-12, nullptr);
        const auto& own = set == ThinSet::ztilde_zero ? it.charges.ztilde_zero : it.charges.ztilde_one;
        for (double t : own)
          if (std::abs(X.jump_at(t)) <= 1e-12) ++it.without;
        return it;
      },
      batch);
  return finish_scan(set, items);
}

EvanescenceReport evanescence_scan(const LastPassageModel& model, std::size_t n_paths, std::uint64_t seed,
                                   ThinSet set, double t_min, const BatchOptions& batch) {
  const RuinFunction psi = model.ruin();
  const MarketModel market = model.market();
  auto items = map_paths<ScanItem>(
      n_paths,
      [&](std::size_t i) {
        const auto counts = simulate_certified_counts(model, psi, t_min, path_seed(seed, i));
        const auto az = azema_last_passage(counts, model, psi);
        const auto X = stochastic_exponential(counts, market);
        ScanItem it;
        it.charges = thin_set_charges(az, X, 1e-12, nullptr);
        const auto& own = set == ThinSet::ztilde_zero ? it.charges.ztilde_zero : it.charges.ztilde_one;
        for (double t : own)
          if (std::abs(X.jump_at(t)) <= 1e-12) ++it.without;
        return it;
      },
      batch);
  return finish_scan(set, items);
}

SCVerdict positive_case_verify(const DriftBracketPair& pair, double rel_tol, const SCOptions& opt) {
  SCVerdict v = check_sc(pair, opt);
  if (v.status == SCStatus::satisfied && v.reconstruction_rel > rel_tol) {
    v.status = SCStatus::inconclusive;
    v.note = "reconstruction above tolerance";
  }
  return v;
}

}  // namespace enlab
