#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "enlab/exp_poly.hpp"

namespace enlab {

// Psi-based integrands carry ~1e-10 relative rounding noise at large arguments,
// so a tighter tolerance only drives the recursion to its depth limit.
struct QuadratureOptions {
  double rel_tol = 1e-9;
  unsigned max_depth = 4;
};

// One analytic piece of a path or density. Closed pieces are ExpPoly and
// integrate exactly; generic pieces carry a callable and fall back to
// adaptive Gauss-Kronrod.
class Segment {
 public:
  Segment() : closed_(ExpPoly()) {}
  explicit Segment(ExpPoly closed) : closed_(std::move(closed)) {}
  Segment(std::function<double(double)> fn, std::string label)
      : fn_(std::move(fn)), label_(std::move(label)) {}

  bool is_closed() const { return closed_.has_value(); }
  const ExpPoly& closed() const { return *closed_; }
  const std::string& label() const { return label_; }
  double value(double t) const { return closed_ ? closed_->value(t) : fn_(t); }

  Segment plus(const Segment& other) const;
  Segment times(const Segment& other) const;
  Segment scaled(double k) const;
  Segment divided_by(const Segment& other) const;
  Segment absolute() const;

 private:
  std::optional<ExpPoly> closed_;
  std::function<double(double)> fn_;
  std::string label_;
};

double integrate(const Segment& f, double a, double b, const QuadratureOptions& q = {});
// Adaptive quadrature regardless of closed form; used as the cross-check route.
double integrate_numerically(const Segment& f, double a, double b, const QuadratureOptions& q = {});
double integrate_abs(const Segment& f, double a, double b, const QuadratureOptions& q = {});

// Left-continuous piecewise function on [0, T]: piece i applies on (lo, hi],
// and the first piece also at its lo. Gaps evaluate to 0.
struct Piece {
  double lo = 0.0;
  double hi = 0.0;
  Segment f;
};

class PiecewiseFunction {
 public:
  PiecewiseFunction() = default;
  explicit PiecewiseFunction(std::vector<Piece> pieces);

  const std::vector<Piece>& pieces() const { return pieces_; }
  double value(double t) const;
  // Pieces clipped to (lo, hi].
  PiecewiseFunction restricted(double lo, double hi) const;
  PiecewiseFunction scaled(double k) const;
  double integral(double a, double b, const QuadratureOptions& q = {}) const;

 private:
  std::vector<Piece> pieces_;
};

// Pointwise algebra on piecewise functions. Products and quotients live on the
// intersection of the two piece sets; sums on the union, with gaps read as 0.
PiecewiseFunction pw_product(const PiecewiseFunction& a, const PiecewiseFunction& b);
PiecewiseFunction pw_quotient(const PiecewiseFunction& a, const PiecewiseFunction& b);
PiecewiseFunction pw_sum(const PiecewiseFunction& a, const PiecewiseFunction& b);
PiecewiseFunction pw_constant(double lo, double hi, double value);

}  // namespace enlab
