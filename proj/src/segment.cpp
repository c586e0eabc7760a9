#include "enlab/segment.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "enlab/errors.hpp"

namespace enlab {

Segment Segment::plus(const Segment& other) const {
  if (is_closed() && other.is_closed()) return Segment(closed().plus(other.closed()));
  Segment a = *this;
  Segment b = other;
  return Segment([a, b](double t) { return a.value(t) + b.value(t); }, "sum");
}

Segment Segment::times(const Segment& other) const {
  if (is_closed() && other.is_closed()) return Segment(closed().times(other.closed()));
  Segment a = *this;
  Segment b = other;
  return Segment([a, b](double t) { return a.value(t) * b.value(t); }, "product");
}

Segment Segment::scaled(double k) const {
  if (is_closed()) return Segment(closed().scaled(k));
  Segment a = *this;
  return Segment([a, k](double t) { return k * a.value(t); }, "scaled");
}

Segment Segment::divided_by(const Segment& other) const {
  if (is_closed() && other.is_closed()) {
    // a single c e^{r s} denominator inverts in closed form
    const auto& terms = other.closed().terms();
    if (terms.size() == 1 && terms[0].coeffs.size() == 1 && terms[0].coeffs[0] != 0.0) {
      const ExpPoly inv = ExpPoly::exponential(1.0 / terms[0].coeffs[0], -terms[0].rate, other.closed().origin());
      return Segment(closed().times(inv));
    }
  }
  Segment a = *this;
  Segment b = other;
  return Segment([a, b](double t) { return a.value(t) / b.value(t); }, "ratio");
}

Segment Segment::absolute() const {
  Segment a = *this;
  return Segment([a](double t) { return std::abs(a.value(t)); }, "abs");
}

double integrate_numerically(const Segment& f, double a, double b, const QuadratureOptions& q) {
  if (a == b) return 0.0;
  auto fn = [&f](double t) { return f.value(t); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, a, b, q.max_depth,
                                                                        q.rel_tol);
}

double integrate(const Segment& f, double a, double b, const QuadratureOptions& q) {
  if (a == b) return 0.0;
  if (f.is_closed()) return f.closed().integral(a, b);
  return integrate_numerically(f, a, b, q);
}

double integrate_abs(const Segment& f, double a, double b, const QuadratureOptions& q) {
  if (a == b) return 0.0;
  if (f.is_closed()) {
    const auto& terms = f.closed().terms();
    // a single c*e^{rs} term keeps its sign
    if (terms.size() == 1 && terms[0].coeffs.size() == 1) return std::abs(f.closed().integral(a, b));
    if (terms.empty()) return 0.0;
  }
  return integrate_numerically(f.absolute(), a, b, q);
}

PiecewiseFunction::PiecewiseFunction(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
  pieces_.erase(std::remove_if(pieces_.begin(), pieces_.end(),
                               [](const Piece& p) { return !(p.hi > p.lo); }),
                pieces_.end());
  std::sort(pieces_.begin(), pieces_.end(), [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < pieces_.size(); ++i)
    if (pieces_[i].lo < pieces_[i - 1].hi) throw ModelError("overlapping pieces in piecewise function");
}

double PiecewiseFunction::value(double t) const {
  // first piece with hi >= t
  auto it = std::lower_bound(pieces_.begin(), pieces_.end(), t,
                             [](const Piece& p, double x) { return p.hi < x; });
  if (it == pieces_.end()) return 0.0;
  if (t > it->lo || (t == it->lo && it == pieces_.begin() && t == 0.0)) return it->f.value(t);
  return 0.0;
}

PiecewiseFunction PiecewiseFunction::restricted(double lo, double hi) const {
  std::vector<Piece> out;
  for (const auto& p : pieces_) {
    const double a = std::max(p.lo, lo);
    const double b = std::min(p.hi, hi);
    if (b > a) out.push_back({a, b, p.f});
  }
  return PiecewiseFunction(std::move(out));
}

PiecewiseFunction PiecewiseFunction::scaled(double k) const {
  std::vector<Piece> out = pieces_;
  for (auto& p : out) p.f = p.f.scaled(k);
  return PiecewiseFunction(std::move(out));
}

double PiecewiseFunction::integral(double a, double b, const QuadratureOptions& q) const {
  double acc = 0.0;
  for (const auto& p : pieces_) {
    const double lo = std::max(p.lo, a);
    const double hi = std::min(p.hi, b);
    if (hi > lo) acc += integrate(p.f, lo, hi, q);
  }
  return acc;
}

namespace {

std::vector<double> merged_cuts(const PiecewiseFunction& a, const PiecewiseFunction& b) {
  std::vector<double> cuts;
  for (const auto* f : {&a, &b})
    for (const auto& p : f->pieces()) {
      cuts.push_back(p.lo);
      cuts.push_back(p.hi);
    }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

const Segment* segment_on(const PiecewiseFunction& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  for (const auto& p : f.pieces())
    if (p.lo <= lo && hi <= p.hi && p.lo < mid) return &p.f;
  return nullptr;
}

template <class Op>
PiecewiseFunction combine(const PiecewiseFunction& a, const PiecewiseFunction& b, bool need_both, Op op) {
  const auto cuts = merged_cuts(a, b);
  std::vector<Piece> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    const Segment* fa = segment_on(a, lo, hi);
    const Segment* fb = segment_on(b, lo, hi);
    if (need_both ? (fa == nullptr || fb == nullptr) : (fa == nullptr && fb == nullptr)) continue;
    const Segment zero(ExpPoly::constant(0.0, lo));
    out.push_back({lo, hi, op(fa ? *fa : zero, fb ? *fb : zero)});
  }
  return PiecewiseFunction(std::move(out));
}

}  // namespace

PiecewiseFunction pw_product(const PiecewiseFunction& a, const PiecewiseFunction& b) {
  return combine(a, b, true, [](const Segment& x, const Segment& y) { return x.times(y); });
}

PiecewiseFunction pw_quotient(const PiecewiseFunction& a, const PiecewiseFunction& b) {
  return combine(a, b, true, [](const Segment& x, const Segment& y) { return x.divided_by(y); });
}

PiecewiseFunction pw_sum(const PiecewiseFunction& a, const PiecewiseFunction& b) {
  return combine(a, b, false, [](const Segment& x, const Segment& y) { return x.plus(y); });
}

PiecewiseFunction pw_constant(double lo, double hi, double value) {
  return PiecewiseFunction({{lo, hi, Segment(ExpPoly::constant(value, lo))}});
}

}  // namespace enlab
