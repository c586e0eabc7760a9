#pragma once

#include <vector>

namespace enlab {

// p(s) * exp(rate * s), coefficients in increasing powers of s.
struct ExpPolyTerm {
  std::vector<double> coeffs;
  double rate = 0.0;
};

// Finite sum of polynomial-times-exponential terms in s = t - origin.
// Closed under sums, products, shifts and antiderivatives.
class ExpPoly {
 public:
  ExpPoly() = default;
  ExpPoly(double origin, std::vector<ExpPolyTerm> terms);

  static ExpPoly constant(double value, double origin = 0.0);
  static ExpPoly linear(double value_at_origin, double slope, double origin);
  static ExpPoly exponential(double scale, double rate, double origin);

  double origin() const { return origin_; }
  const std::vector<ExpPolyTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  double value(double t) const;
  double derivative_value(double t) const;

  // Same function expanded about another origin.
  ExpPoly rebased(double new_origin) const;
  ExpPoly scaled(double k) const;
  ExpPoly plus(const ExpPoly& other) const;
  ExpPoly times(const ExpPoly& other) const;
  // Substitutes s -> offset + slope * s (affine change of the variable).
  ExpPoly composed_affine(double offset, double slope, double new_origin) const;
  // F with F' = f and F(origin) = 0.
  ExpPoly antiderivative() const;
  double integral(double a, double b) const;

 private:
  void normalize();

  double origin_ = 0.0;
  std::vector<ExpPolyTerm> terms_;
};

// Integral of s^k e^{c s} over [0, L].
double power_exp_integral(int k, double c, double length);

}  // namespace enlab
