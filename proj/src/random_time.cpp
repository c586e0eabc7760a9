#include "enlab/random_time.hpp"

#include <algorithm>
#include <cmath>

#include "enlab/errors.hpp"

namespace enlab {

void WeightedJumpTimeModel::validate() const {
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw ParameterError("weights must be positive");
  if (std::abs(k1 + k2 - 1.0) > 1e-12) throw ParameterError("weights must sum to 1");
  if (!(lambda > 0.0)) throw ParameterError("poisson rate must be > 0");
}

void LastPassageModel::validate() const {
  if (!(b > 0.0 && b < 1.0)) throw ParameterError("barrier b must lie in (0,1)");
  if (!(sigma > 0.0)) throw ParameterError("sigma must be > 0");
  if (!(lambda > 0.0)) throw ParameterError("poisson rate must be > 0");
}

double LastPassageModel::a() const { return -std::log(b) / std::log1p(sigma); }
double LastPassageModel::mu() const { return lambda * sigma / std::log1p(sigma); }

RuinFunction LastPassageModel::ruin(const RuinOptions& options) const {
  validate();
  return RuinFunction(lambda, mu(), options);
}

namespace {

const Piece* piece_at(const PiecewiseFunction& f, double t) {
  for (const auto& p : f.pieces())
    if (p.lo <= t && t <= p.hi) return &p;
  return nullptr;
}

std::vector<double> first_events(const PiecewiseJumpPath& counts, std::size_t n) {
  const auto events = counting_events(counts);
  if (events.size() < n) throw HorizonTooShort("path has fewer jumps than the random time needs");
  return {events.begin(), events.begin() + static_cast<long>(n)};
}

// Psi(x) along a segment where x = x_lo + slope (t - lo); k indexes the unit
// interval holding x (negative: ruin already certain).
Segment psi_along(const RuinFunction& psi, int k, double x_lo, double slope, double lo) {
  if (k < 0) return Segment(ExpPoly::constant(1.0, lo));
  const ExpPoly p = psi.piece(std::min(k, psi.switch_point()));
  return Segment(p.composed_affine(x_lo - p.origin(), slope, lo));
}

}  // namespace

double tau_weighted(const PiecewiseJumpPath& counts, const WeightedJumpTimeModel& model) {
  model.validate();
  const auto t = first_events(counts, 2);
  return model.k1 * t[0] + model.k2 * t[1];
}

PiecewiseJumpPath martingale_from_kernel(const PiecewiseJumpPath& counts, const PiecewiseFunction& kernel,
                                         double lambda, double m0) {
  const auto events = counting_events(counts);
  const double horizon = counts.horizon();
  std::vector<double> breaks = events;
  for (const auto& p : kernel.pieces()) {
    if (p.lo > 0.0 && p.lo < horizon) breaks.push_back(p.lo);
    if (p.hi > 0.0 && p.hi < horizon) breaks.push_back(p.hi);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  std::vector<Segment> segs;
  double level = m0;  // m at the start of the current interval
  for (std::size_t i = 0; i <= breaks.size(); ++i) {
    const double lo = i == 0 ? 0.0 : breaks[i - 1];
    const double hi = i == breaks.size() ? horizon : breaks[i];
    if (i > 0 && std::binary_search(events.begin(), events.end(), lo)) level += kernel.value(lo);
    const Piece* p = hi > lo ? piece_at(kernel, 0.5 * (lo + hi)) : nullptr;
    ExpPoly seg = ExpPoly::constant(level, lo);
    if (p != nullptr) {
      if (!p->f.is_closed()) throw ModelError("kernel piece must be closed-form");
      const ExpPoly anti = p->f.closed().rebased(lo).antiderivative();  // zero at lo
      seg = seg.plus(anti.scaled(-lambda));
    }
    segs.emplace_back(seg);
    level = seg.value(hi);
  }
  return PiecewiseJumpPath(horizon, breaks, std::move(segs));
}

AzemaTriple azema_weighted(const PiecewiseJumpPath& counts, const WeightedJumpTimeModel& model) {
  model.validate();
  const auto t = first_events(counts, 2);
  const double T1 = t[0];
  const double T2 = t[1];
  const double T = counts.horizon();
  const double h = model.hazard();
  const ExpPoly decay = ExpPoly::exponential(1.0, -h, T1);  // phi^m on [T1, T2)
  const double phi_T2 = std::exp(-h * (T2 - T1));

  AzemaTriple az;
  az.kind = ModelKind::weighted;
  az.counts = counts;
  az.T1 = T1;
  az.T2 = T2;
  az.tau = model.k1 * T1 + model.k2 * T2;
  az.certified = true;
  az.lambda = model.lambda;

  std::vector<double> zb{T1};
  std::vector<Segment> zs{Segment(ExpPoly::constant(1.0)), Segment(decay)};
  if (T2 < T) {
    zb.push_back(T2);
    zs.emplace_back(ExpPoly::constant(0.0, T2));
  }
  az.Z = PiecewiseJumpPath(T, zb, zs);

  // dual optional projection: density (lambda / k2) phi^m on (T1, T2)
  std::vector<Segment> ds{Segment(ExpPoly::constant(0.0)),
                          Segment(ExpPoly::constant(1.0 / model.k1, T1).plus(decay.scaled(-1.0 / model.k1)))};
  if (T2 < T) ds.emplace_back(ExpPoly::constant((1.0 - phi_T2) / model.k1, T2));
  az.D_oF = PiecewiseJumpPath(T, zb, ds);

  // m = 1 - phi^m I_{]T1, T2]} . M
  az.jump_kernel = PiecewiseFunction({{T1, T2, Segment(decay.scaled(-1.0))}});
  az.m = martingale_from_kernel(counts, az.jump_kernel, model.lambda, 1.0);
  az.z_left = PiecewiseFunction({{0.0, T1, Segment(ExpPoly::constant(1.0))},
                                 {T1, T2, Segment(decay)},
                                 {T2, T, Segment(ExpPoly::constant(0.0, T2))}});
  az.z_tilde = [T1, T2, h](double s) {
    if (s <= T1) return 1.0;
    if (s < T2) return std::exp(-h * (s - T1));
    return 0.0;
  };
  for (double u : counting_events(counts))
    az.delta_m_atoms.push_back({u, az.jump_kernel.value(u), az.Z.left_limit(u), az.z_tilde(u)});
  return az;
}

PiecewiseJumpPath drifted_level(const PiecewiseJumpPath& counts, double mu) {
  const auto events = counting_events(counts);
  std::vector<Segment> segs;
  for (std::size_t k = 0; k <= events.size(); ++k) {
    const double s = k == 0 ? 0.0 : events[k - 1];
    segs.emplace_back(ExpPoly::linear(mu * s - static_cast<double>(k), mu, s));
  }
  return PiecewiseJumpPath(counts.horizon(), events, std::move(segs));
}

double last_passage_surrogate(const PiecewiseJumpPath& level, double a, double t) {
  if (t < 0.0 || t > level.horizon()) throw RangeError("surrogate time outside horizon");
  if (level.value(t) <= a) return t;
  // the last segment starting at or below a, looking only at segments that begin by t
  const std::size_t last = level.segment_index(t);
  for (std::size_t i = last + 1; i-- > 0;) {
    const double s = level.segment_start(i);
    const double y = level.segments()[i].value(s);
    if (y <= a) {
      const double slope = level.segments()[i].closed().derivative_value(s);
      return slope > 0.0 ? s + (a - y) / slope : s;
    }
  }
  return 0.0;
}

PassageTime tau_last_passage(const PiecewiseJumpPath& counts, const LastPassageModel& model,
                             const RuinFunction& psi) {
  model.validate();
  const double a = model.a();
  const auto Y = drifted_level(counts, model.mu());
  const double T = counts.horizon();
  PassageTime out;
  out.tau = last_passage_surrogate(Y, a, T);
  out.certified = Y.value(T) - a > psi.x_cert();
  return out;
}

AzemaTriple azema_last_passage(const PiecewiseJumpPath& counts, const LastPassageModel& model,
                               const RuinFunction& psi) {
  model.validate();
  const double a = model.a();
  const double mu = model.mu();
  if (std::abs(psi.mu() - mu) > 1e-12 * mu || std::abs(psi.lambda() - model.lambda) > 1e-12 * model.lambda)
    throw ModelError("ruin function built for a different model");
  const auto Y = drifted_level(counts, mu);
  const double T = counts.horizon();
  const int K = psi.switch_point();

  // intervals on which Y - a stays inside one unit cell
  struct Cell {
    double lo, hi;
    std::size_t seg;
    int k;
  };
  std::vector<Cell> cells;
  std::vector<double> upcrossings;
  double x_peak = -INFINITY;
  for (std::size_t i = 0; i < Y.segments().size(); ++i) {
    const double s = Y.segment_start(i);
    const double e = Y.segment_end(i);
    if (!(e > s)) continue;
    const double x0 = Y.segments()[i].value(s) - a;
    const double x1 = x0 + mu * (e - s);
    x_peak = std::max(x_peak, x1);
    std::vector<double> cuts{s};
    for (double j = std::max(0.0, std::floor(x0) + 1.0); j < x1 && j <= K + 1; j += 1.0) {
      if (j <= x0) continue;
      const double tj = s + (j - x0) / mu;
      if (tj > cuts.back() && tj < e) {
        cuts.push_back(tj);
        if (j == 0.0) upcrossings.push_back(tj);
      }
    }
    cuts.push_back(e);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double xm = x0 + mu * (0.5 * (cuts[c] + cuts[c + 1]) - s);
      cells.push_back({cuts[c], cuts[c + 1], i, xm < 0.0 ? -1 : static_cast<int>(std::floor(xm))});
    }
  }
  if (x_peak > psi.x_max()) throw RangeError("path climbs past the ruin function's coverage x_max");

  AzemaTriple az;
  az.kind = ModelKind::last_passage;
  az.counts = counts;
  az.Y = Y;
  az.level_a = a;
  az.lambda = model.lambda;
  const PassageTime pt = tau_last_passage(counts, model, psi);
  az.tau = pt.tau;
  az.certified = pt.certified;

  std::vector<double> zb;
  std::vector<Segment> zs;
  std::vector<Piece> p1, p2, kern, zl;
  for (const auto& c : cells) {
    const double s = Y.segment_start(c.seg);
    const double x_lo = Y.segments()[c.seg].value(s) - a + mu * (c.lo - s);
    const Segment psi0 = psi_along(psi, c.k, x_lo, mu, c.lo);            // Psi(x)
    const Segment psi1 = psi_along(psi, c.k - 1, x_lo - 1.0, mu, c.lo);  // Psi(x - 1)
    if (c.lo > 0.0) zb.push_back(c.lo);
    zs.push_back(psi0);
    zl.push_back({c.lo, c.hi, psi0});
    const Segment phi2 = psi0.plus(Segment(ExpPoly::constant(-1.0, c.lo)));
    const Segment phi1 = psi1.plus(Segment(ExpPoly::constant(-1.0, c.lo)));
    p1.push_back({c.lo, c.hi, phi1});
    p2.push_back({c.lo, c.hi, phi2});
    if (c.k >= 1) {
      kern.push_back({c.lo, c.hi, phi1.plus(phi2.scaled(-1.0))});
    } else if (c.k == 0) {
      kern.push_back({c.lo, c.hi, phi2.scaled(-1.0)});
    }
  }
  az.Z = PiecewiseJumpPath(T, zb, zs);
  az.z_left = PiecewiseFunction(std::move(zl));
  az.phi1 = PiecewiseFunction(std::move(p1));
  az.phi2 = PiecewiseFunction(std::move(p2));
  az.jump_kernel = PiecewiseFunction(std::move(kern));
  az.m = martingale_from_kernel(counts, az.jump_kernel, model.lambda, 1.0);

  // D^{o,F}: atoms 1 - Psi(0) at continuous upcrossings of a
  std::vector<Segment> ds;
  const double atom = 1.0 - psi.value(0.0);
  for (std::size_t i = 0; i <= upcrossings.size(); ++i)
    ds.emplace_back(ExpPoly::constant(atom * static_cast<double>(i), i == 0 ? 0.0 : upcrossings[i - 1]));
  az.D_oF = PiecewiseJumpPath(T, upcrossings, std::move(ds));

  const PiecewiseJumpPath Ycopy = Y;
  const RuinFunction psi_copy = psi;
  az.z_tilde = [Ycopy, a, psi_copy](double s) {
    const double y = Ycopy.value(s);
    return y <= a ? 1.0 : psi_copy.value(y - a);
  };
  for (double u : counting_events(counts))
    az.delta_m_atoms.push_back({u, az.jump_kernel.value(u), az.Z.left_limit(u), az.z_tilde(u)});
  return az;
}

PiecewiseJumpPath simulate_weighted_counts(const WeightedJumpTimeModel& model, double t_min, double margin,
                                           std::uint64_t seed) {
  model.validate();
  if (!(t_min > 0.0) || margin < 0.0) throw ParameterError("bad horizon request");
  PoissonStream stream(model.lambda, seed);
  std::vector<double> times{stream.next(), stream.next()};
  const double horizon = std::max(t_min, times[1] + margin);
  for (double t = stream.next(); t <= horizon; t = stream.next()) times.push_back(t);
  while (!times.empty() && times.back() > horizon) times.pop_back();
  return counting_path(times, horizon);
}

PiecewiseJumpPath simulate_certified_counts(const LastPassageModel& model, const RuinFunction& psi, double t_min,
                                            std::uint64_t seed) {
  model.validate();
  if (!(t_min > 0.0)) throw ParameterError("t_min must be > 0");
  const double a = model.a();
  const double mu = model.mu();
  const double target = psi.x_cert() + 0.5;  // Y - a level that certifies
  PoissonStream stream(model.lambda, seed);
  std::vector<double> times;
  double seg_start = 0.0;
  double y_start = 0.0;
  for (std::size_t guard = 0; guard < 100000000; ++guard) {
    const double next = stream.next();
    const double c = std::max(seg_start, t_min);
    if (c < next) {
      const double yc = y_start + mu * (c - seg_start);
      const double hit = yc - a >= target ? c : c + (target + a - yc) / mu;
      if (hit < next) return counting_path(times, hit);
    }
    times.push_back(next);
    y_start = y_start + mu * (next - seg_start) - 1.0;
    seg_start = next;
  }
  throw HorizonTooShort("path failed to certify");
}

double ztilde_identity_error(const AzemaTriple& az) {
  double worst = 0.0;
  for (const auto& atom : az.delta_m_atoms) {
    // values read off the Z and m paths, not the stored atom fields
    const double z_minus = az.Z.left_limit(atom.t);
    const double dm = az.m.jump_at(atom.t);
    worst = std::max(worst, std::abs(az.z_tilde(atom.t) - (z_minus + dm)));
  }
  return worst;
}

double m_decomposition_error(const AzemaTriple& az) {
  std::vector<double> probes{0.0, az.Z.horizon()};
  auto add = [&](const std::vector<double>& ts) {
    for (double t : ts) {
      probes.push_back(t);
      probes.push_back(std::nextafter(t, 0.0));
    }
  };
  add(az.Z.event_times());
  add(az.m.event_times());
  add(az.D_oF.event_times());
  const std::size_t n = probes.size();
  for (std::size_t i = 0; i + 1 < n; ++i) probes.push_back(0.5 * (probes[i] + probes[i + 1]));
  double worst = 0.0;
  for (double t : probes) {
    if (t < 0.0 || t > az.Z.horizon()) continue;
    worst = std::max(worst, std::abs(az.m.value(t) - az.Z.value(t) - az.D_oF.value(t)));
  }
  return worst;
}

}  // namespace enlab
