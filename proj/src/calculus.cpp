#include "enlab/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "enlab/errors.hpp"

namespace enlab {

PiecewiseFunction left_limits(const PiecewiseJumpPath& path) {
  std::vector<Piece> out;
  for (std::size_t i = 0; i < path.segments().size(); ++i)
    out.push_back({path.segment_start(i), path.segment_end(i), path.segments()[i]});
  return PiecewiseFunction(std::move(out));
}

IntervalSet piece_support(const PiecewiseFunction& f) {
  std::vector<Interval> parts;
  for (const auto& p : f.pieces()) {
    if (p.f.is_closed() && p.f.closed().is_zero()) continue;
    parts.push_back({p.lo, p.hi, p.lo > 0.0, false});
  }
  return IntervalSet(std::move(parts));
}

namespace {

void check_pair(const PiecewiseJumpPath& X, const MarketModel& market, const AzemaTriple& az) {
  market.validate();
  if (X.horizon() != az.counts.horizon()) throw ModelError("market path and Azema triple use different horizons");
  if (std::abs(market.poisson_rate - az.lambda) > 1e-12 * az.lambda)
    throw ModelError("market intensity does not match the random-time model");
}

PiecewiseFunction xx_density(const PiecewiseJumpPath& X, const MarketModel& market) {
  const auto xl = left_limits(X);
  const double psi = market.jump_multiplier;
  return pw_product(xl, xl).scaled(market.poisson_rate * psi * psi);
}

PiecewiseFunction restricted(const PiecewiseFunction& f, const IntervalSet& window) {
  return clip_density(f, window);
}

IntervalSet stopped_window(const AzemaTriple& az) {
  return IntervalSet::single(0.0, std::min(az.tau, az.counts.horizon()));
}

IntervalSet after_window(const AzemaTriple& az) {
  return IntervalSet::single(az.tau, az.counts.horizon(), true, false);
}

std::vector<double> probes_of(const std::vector<const PathMeasure*>& ms, const std::vector<double>& extra) {
  std::vector<double> out = extra;
  for (const auto* m : ms)
    for (const auto& p : m->density().pieces()) {
      out.push_back(p.lo);
      out.push_back(p.hi);
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PiecewiseFunction one_minus(const PiecewiseFunction& f, double horizon) {
  return pw_sum(pw_constant(0.0, horizon, 1.0), f.scaled(-1.0));
}

// Cumulative of a density plus atoms, as a path with zero-jump breakpoints at piece ends.
PiecewiseJumpPath cumulative_path(const PiecewiseFunction& g, const std::vector<Atom>& atoms, double horizon) {
  std::vector<double> breaks;
  for (const auto& p : g.pieces()) {
    if (p.lo > 0.0 && p.lo < horizon) breaks.push_back(p.lo);
    if (p.hi > 0.0 && p.hi < horizon) breaks.push_back(p.hi);
  }
  for (const auto& a : atoms)
    if (a.t > 0.0) breaks.push_back(a.t);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double level = 0.0;
  for (const auto& a : atoms)
    if (a.t == 0.0) level += a.weight;
  std::vector<Segment> segs;
  for (std::size_t i = 0; i <= breaks.size(); ++i) {
    const double lo = i == 0 ? 0.0 : breaks[i - 1];
    const double hi = i == breaks.size() ? horizon : breaks[i];
    if (i > 0)
      for (const auto& a : atoms)
        if (a.t == lo) level += a.weight;
    const Segment* f = nullptr;
    for (const auto& p : g.pieces())
      if (p.lo <= lo && hi <= p.hi && hi > lo) f = &p.f;
    if (f == nullptr) {
      segs.emplace_back(ExpPoly::constant(level, lo));
    } else if (f->is_closed()) {
      segs.emplace_back(ExpPoly::constant(level, lo).plus(f->closed().rebased(lo).antiderivative()));
    } else {
      const Segment fc = *f;
      const double base = level;
      segs.emplace_back([fc, base, lo](double t) { return base + integrate(fc, lo, t); }, "cumulative");
    }
    level = segs.back().value(hi);
  }
  return PiecewiseJumpPath(horizon, breaks, std::move(segs));
}

PiecewiseJumpPath stopped_path(const PiecewiseJumpPath& p, double tau) {
  if (tau >= p.horizon()) return p;
  std::vector<double> breaks;
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < p.segments().size(); ++i) {
    if (p.segment_start(i) >= tau && i > 0) break;
    if (i > 0) breaks.push_back(p.segment_start(i));
    segs.push_back(p.segments()[i]);
  }
  if (tau > 0.0) breaks.push_back(tau);
  segs.emplace_back(ExpPoly::constant(p.value(tau), tau));
  if (tau == 0.0) return PiecewiseJumpPath(p.horizon(), {}, {segs.back()});
  return PiecewiseJumpPath(p.horizon(), breaks, std::move(segs));
}

// a + k b on the union of breakpoints
PiecewiseJumpPath path_sum(const PiecewiseJumpPath& a, const PiecewiseJumpPath& b, double k) {
  std::vector<double> breaks = a.event_times();
  breaks.insert(breaks.end(), b.event_times().begin(), b.event_times().end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<Segment> segs;
  for (std::size_t i = 0; i <= breaks.size(); ++i) {
    const double lo = i == 0 ? 0.0 : breaks[i - 1];
    segs.push_back(a.segments()[a.segment_index(lo)].plus(b.segments()[b.segment_index(lo)].scaled(k)));
  }
  return PiecewiseJumpPath(a.horizon(), breaks, std::move(segs));
}

}  // namespace

PathMeasure covariation_with_m(const PiecewiseFunction& jump_size, const AzemaTriple& az) {
  const double T = az.counts.horizon();
  auto density = pw_product(jump_size, az.jump_kernel).scaled(az.lambda);
  return PathMeasure(T, std::move(density), {}, piece_support(az.jump_kernel).intersect(IntervalSet::single(0.0, T)));
}

FBrackets f_brackets(const PiecewiseJumpPath& X, const MarketModel& market, const AzemaTriple& az) {
  check_pair(X, market, az);
  const double T = X.horizon();
  FBrackets out;
  out.xx = PathMeasure(T, xx_density(X, market), {}, IntervalSet::single(0.0, T));
  out.xm = covariation_with_m(left_limits(X).scaled(market.jump_multiplier), az);
  return out;
}

double cumulative_rel_diff(const PathMeasure& a, const PathMeasure& b, const std::vector<double>& probes,
                           double floor) {
  std::vector<double> ts;
  for (double t : probes)
    if (t >= 0.0 && t <= a.horizon() && t <= b.horizon()) ts.push_back(t);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  // running cumulatives, integrating each stretch between probes once
  auto running = [&ts](const PathMeasure& m) {
    std::vector<double> out(ts.size(), 0.0);
    double acc = 0.0;
    double prev = 0.0;
    std::size_t atom = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      acc += m.density().integral(prev, ts[i]);
      while (atom < m.atoms().size() && m.atoms()[atom].t <= ts[i]) acc += m.atoms()[atom++].weight;
      out[i] = acc;
      prev = ts[i];
    }
    return out;
  };
  const auto ca = running(a);
  const auto cb = running(b);
  double worst = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double scale = std::max({std::abs(ca[i]), std::abs(cb[i]), floor});
    worst = std::max(worst, std::abs(ca[i] - cb[i]) / scale);
  }
  return worst;
}

StoppedBracket g_bracket_stopped(const PiecewiseJumpPath& X, const MarketModel& market, const AzemaTriple& az,
                                 double rel_tol) {
  check_pair(X, market, az);
  const double T = X.horizon();
  const IntervalSet window = stopped_window(az);
  const auto xx = xx_density(X, market);

  // jump part compensator: lambda * kernel * (psi X_-)^2, divided by Z_-
  const auto jump_part = pw_product(pw_quotient(restricted(az.jump_kernel, window), az.z_left), xx);
  StoppedBracket out;
  out.general = PathMeasure(T, pw_sum(restricted(xx, window), jump_part), {}, window, false);

  if (az.kind == ModelKind::weighted) {
    const IntervalSet support = IntervalSet::single(0.0, std::min(az.T1, az.tau));
    out.closed = PathMeasure(T, restricted(xx, support), {}, support);
  } else {
    // Z-tilde on a hypothetical jump over Z_-: Psi(x - 1) / Psi(x)
    const auto one = pw_constant(0.0, T, 1.0);
    const auto ratio = pw_quotient(pw_sum(one, az.phi1), pw_sum(one, az.phi2));
    out.closed = PathMeasure(T, restricted(pw_product(xx, ratio), window), {}, window);
  }
  const double total = std::max(out.closed.cumulative(T), 1e-300);
  out.max_rel_diff =
      cumulative_rel_diff(out.general, out.closed, probes_of({&out.general, &out.closed}, {az.tau, T}), 1e-12 * total);
  if (out.max_rel_diff > rel_tol)
    throw ConsistencyError("stopped G-bracket: general and closed forms disagree (rel " +
                           std::to_string(out.max_rel_diff) + ")");
  return out;
}

PathMeasure g_drift_stopped_general(const PiecewiseJumpPath& X, const MarketModel& market, const AzemaTriple& az) {
  check_pair(X, market, az);
  const IntervalSet window = stopped_window(az);
  const auto xm = f_brackets(X, market, az).xm;
  auto density = pw_quotient(restricted(xm.density(), window), az.z_left);
  return PathMeasure(X.horizon(), std::move(density), {}, xm.support().intersect(window), false);
}

DriftBracketPair g_drift_stopped(const PiecewiseJumpPath& X, const MarketModel& market, const AzemaTriple& az) {
  check_pair(X, market, az);
  const double T = X.horizon();
  const IntervalSet window = stopped_window(az);
  const double psi = market.jump_multiplier;
  DriftBracketPair pair;
  pair.window = window;
  pair.label = "[0,tau]";
  pair.bracket = g_bracket_stopped(X, market, az).closed;
  if (az.kind == ModelKind::weighted) {
    // phi^m cancels against Z_- on ]T1, tau]
    const IntervalSet support = IntervalSet::single(az.T1, std::min(az.tau, T), true, false);
    const auto density = pw_product(left_limits(X), pw_constant(az.T1, std::min(az.tau, T), -market.poisson_rate * psi));
    pair.drift = PathMeasure(T, density, {}, support);
  } else {
    const auto density = pw_product(pw_quotient(restricted(az.jump_kernel, window), az.z_left), left_limits(X))
                             .scaled(market.poisson_rate * psi);
    pair.drift = PathMeasure(T, density, {}, piece_support(az.jump_kernel).intersect(window));
  }
  return pair;
}

AfterBracket g_bracket_after(const PiecewiseJumpPath& X, const MarketModel& market, const AzemaTriple& az,
                             double rel_tol) {
  check_pair(X, market, az);
  if (az.kind != ModelKind::last_passage) throw ModelError("after-tau bracket needs the last-passage model");
  if (!az.certified) throw HorizonTooShort("after-tau bracket needs a certified random time");
  const double T = X.horizon();
  const IntervalSet window = after_window(az);
  const auto xx = xx_density(X, market);
  const auto omz = restricted(one_minus(az.z_left, T), window);
  const auto numer = pw_sum(omz, restricted(az.jump_kernel, window).scaled(-1.0));
  AfterBracket out;
  out.general = PathMeasure(T, pw_product(pw_quotient(numer, omz), xx), {}, window, false);

  const auto phi1 = restricted(az.phi1, window);
  out.closed = PathMeasure(T, pw_product(pw_quotient(phi1, restricted(az.phi2, window)), xx), {},
                           piece_support(phi1));
  const double total = std::max(out.closed.cumulative(T), 1e-300);
  out.max_rel_diff =
      cumulative_rel_diff(out.general, out.closed, probes_of({&out.general, &out.closed}, {az.tau, T}), 1e-12 * total);
  if (out.max_rel_diff > rel_tol)
    throw ConsistencyError("after-tau G-bracket: general and closed forms disagree (rel " +
                           std::to_string(out.max_rel_diff) + ")");
  return out;
}

DriftBracketPair g_drift_bracket_after(const PiecewiseJumpPath& X, const MarketModel& market,
                                       const AzemaTriple& az) {
  const AfterBracket bracket = g_bracket_after(X, market, az);
  const double T = X.horizon();
  const double z_tau = az.Z.value(az.tau);
  if (!(z_tau < 1.0)) throw SingularityError("Z_tau = 1 on this path; the after-tau decomposition is undefined");
  const IntervalSet window = after_window(az);
  const auto xm = f_brackets(X, market, az).xm;
  const auto omz = restricted(one_minus(az.z_left, T), window);
  DriftBracketPair pair;
  pair.window = window;
  pair.label = "]tau,T]";
  pair.bracket = bracket.closed;
  pair.drift = PathMeasure(T, pw_quotient(restricted(xm.density(), window), omz), {}, xm.support().intersect(window));
  return pair;
}

PiecewiseJumpPath jeulin_hat_path(const PiecewiseJumpPath& M, const PathMeasure& cov_Mm, const AzemaTriple& az,
                                  Side side) {
  const double T = M.horizon();
  if (cov_Mm.horizon() != T) throw ModelError("covariation and path horizons differ");
  if (side == Side::before) {
    const IntervalSet window = stopped_window(az);
    for (const auto& a : cov_Mm.atoms())
      if (window.contains(a.t) && !(az.Z.left_limit(a.t) > 0.0)) throw SingularityError("Z_- = 0 inside [0,tau]");
    std::vector<Atom> atoms;
    for (const auto& a : cov_Mm.atoms())
      if (window.contains(a.t)) atoms.push_back({a.t, a.weight / az.Z.left_limit(a.t)});
    const auto g = pw_quotient(clip_density(cov_Mm.density(), window), az.z_left);
    return path_sum(stopped_path(M, az.tau), cumulative_path(g, atoms, T), -1.0);
  }
  const IntervalSet window = after_window(az);
  std::vector<Atom> atoms;
  for (const auto& a : cov_Mm.atoms())
    if (window.contains(a.t)) {
      const double omz = 1.0 - az.Z.left_limit(a.t);
      if (!(omz > 0.0)) throw SingularityError("Z_- = 1 after tau");
      atoms.push_back({a.t, a.weight / omz});
    }
  const auto g = pw_quotient(clip_density(cov_Mm.density(), window), one_minus(az.z_left, T));
  const auto increments = path_sum(M, stopped_path(M, az.tau), -1.0);
  return path_sum(increments, cumulative_path(g, atoms, T), 1.0);
}

void write_path_csv(std::ostream& out, const AzemaTriple& az, const DriftBracketPair& pair, std::size_t points) {
  const double T = az.counts.horizon();
  out << "t,Z,Ztilde,m,drift_density,bracket_density,in_window\n";
  char buf[256];
  for (std::size_t i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : T * static_cast<double>(i) / static_cast<double>(points - 1);
    std::snprintf(buf, sizeof buf, "%.10f,%.12e,%.12e,%.12e,%.12e,%.12e,%d\n", t, az.Z.value(t), az.z_tilde(t),
                  az.m.value(t), pair.drift.density().value(t), pair.bracket.density().value(t),
                  pair.window.contains(t) ? 1 : 0);
    out << buf;
  }
}

}  // namespace enlab
