#include "enlab/path_measure.hpp"

#include <algorithm>
#include <cmath>

#include "enlab/errors.hpp"

namespace enlab {

PathMeasure::PathMeasure(double horizon, PiecewiseFunction density, std::vector<Atom> atoms, IntervalSet support,
                         bool support_exact)
    : horizon_(horizon),
      density_(std::move(density)),
      atoms_(std::move(atoms)),
      support_(std::move(support)),
      support_exact_(support_exact) {
  if (!(horizon_ > 0.0)) throw ParameterError("measure horizon must be > 0");
  std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.t < b.t; });
  for (std::size_t i = 1; i < atoms_.size(); ++i)
    if (atoms_[i].t == atoms_[i - 1].t) throw ModelError("measure atoms must sit at distinct times");
  for (const auto& a : atoms_)
    if (a.t < 0.0 || a.t > horizon_) throw RangeError("measure atom outside horizon");
}

PathMeasure PathMeasure::zero(double horizon) { return PathMeasure(horizon, {}, {}, {}, true); }

double PathMeasure::cumulative(double t, const QuadratureOptions& q) const {
  if (t > horizon_ || t < 0.0) throw RangeError("time outside measure horizon");
  double acc = density_.integral(0.0, t, q);
  for (const auto& a : atoms_)
    if (a.t <= t) acc += a.weight;
  return acc;
}

double PathMeasure::mass_on(const IntervalSet& set, const QuadratureOptions& q) const {
  double acc = 0.0;
  for (const auto& part : set.parts()) acc += density_.integral(part.lo, part.hi, q);
  for (const auto& a : atoms_)
    if (set.contains(a.t)) acc += a.weight;
  return acc;
}

double PathMeasure::abs_mass_on(const IntervalSet& set, const QuadratureOptions& q) const {
  double acc = 0.0;
  for (const auto& part : set.parts())
    for (const auto& p : density_.pieces()) {
      const double lo = std::max(p.lo, part.lo);
      const double hi = std::min(p.hi, part.hi);
      if (hi > lo) acc += integrate_abs(p.f, lo, hi, q);
    }
  for (const auto& a : atoms_)
    if (set.contains(a.t)) acc += std::abs(a.weight);
  return acc;
}

double PathMeasure::total_abs_mass(const QuadratureOptions& q) const {
  return abs_mass_on(IntervalSet::single(0.0, horizon_), q);
}

PiecewiseFunction clip_density(const PiecewiseFunction& f, const IntervalSet& window) {
  std::vector<Piece> out;
  for (const auto& part : window.parts())
    for (const auto& p : f.pieces()) {
      const double lo = std::max(p.lo, part.lo);
      const double hi = std::min(p.hi, part.hi);
      if (hi > lo) out.push_back({lo, hi, p.f});
    }
  return PiecewiseFunction(std::move(out));
}

PathMeasure PathMeasure::restricted(const IntervalSet& window) const {
  std::vector<Atom> kept;
  for (const auto& a : atoms_)
    if (window.contains(a.t)) kept.push_back(a);
  return PathMeasure(horizon_, clip_density(density_, window), std::move(kept), support_.intersect(window),
                     support_exact_);
}

PathMeasure PathMeasure::scaled(double k) const {
  std::vector<Atom> atoms = atoms_;
  for (auto& a : atoms) a.weight *= k;
  if (k == 0.0) return zero(horizon_);
  return PathMeasure(horizon_, density_.scaled(k), std::move(atoms), support_, support_exact_);
}

IntervalSet PathMeasure::scanned_support(double step, double tol) const {
  if (!(step > 0.0)) throw ParameterError("scan step must be > 0");
  std::vector<Interval> parts;
  const auto cells = static_cast<std::size_t>(std::ceil(horizon_ / step));
  // cell (lo, hi] is charged when the density at its midpoint or right end exceeds tol
  for (std::size_t i = 0; i < cells; ++i) {
    const double lo = static_cast<double>(i) * step;
    const double hi = std::min(horizon_, lo + step);
    const double mid = 0.5 * (lo + hi);
    if (std::abs(density_.value(mid)) > tol || std::abs(density_.value(hi)) > tol)
      parts.push_back({lo, hi, true, false});
  }
  for (const auto& a : atoms_)
    if (std::abs(a.weight) > tol) parts.push_back({a.t, a.t, false, false});
  return IntervalSet(std::move(parts));
}

nlohmann::json PathMeasure::to_json() const {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : atoms_) atoms.push_back({{"t", a.t}, {"weight", a.weight}});
  return {{"horizon", horizon_}, {"atoms", atoms}, {"support", support_.to_json()},
          {"support_exact", support_exact_}, {"density_pieces", density_.pieces().size()}};
}

PiecewiseFunction multiply_by_path(const PiecewiseFunction& density, const PiecewiseJumpPath& integrand) {
  std::vector<Piece> out;
  const auto& events = integrand.event_times();
  for (const auto& p : density.pieces()) {
    if (p.hi > integrand.horizon()) throw RangeError("density extends past integrand horizon");
    // segment i of the path governs the open interval (b_i, b_{i+1}), which is all the
    // Lebesgue part sees
    double lo = p.lo;
    auto it = std::upper_bound(events.begin(), events.end(), lo);
    std::size_t idx = static_cast<std::size_t>(it - events.begin());
    while (lo < p.hi) {
      const double hi = idx < events.size() ? std::min(events[idx], p.hi) : p.hi;
      if (hi > lo) out.push_back({lo, hi, p.f.times(integrand.segments()[idx])});
      lo = hi;
      ++idx;
    }
  }
  return PiecewiseFunction(std::move(out));
}

double integrate_path_measure(const PiecewiseJumpPath& integrand, const PathMeasure& measure, double t,
                              const QuadratureOptions& q) {
  if (t > measure.horizon() || t < 0.0) throw RangeError("integration time outside measure horizon");
  if (t > integrand.horizon()) throw RangeError("integration time outside integrand horizon");
  double acc = multiply_by_path(measure.density().restricted(0.0, t), integrand).integral(0.0, t, q);
  for (const auto& a : measure.atoms())
    if (a.t <= t) acc += integrand.left_limit(a.t) * a.weight;
  return acc;
}

}  // namespace enlab
