#include "enlab/exp_poly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace enlab {

namespace {

double eval_poly(const std::vector<double>& c, double s) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
  return acc;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

void poly_add_into(std::vector<double>& dst, const std::vector<double>& src, double k = 1.0) {
  if (dst.size() < src.size()) dst.resize(src.size(), 0.0);
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] += k * src[i];
}

// Coefficients of p(offset + slope * s).
std::vector<double> poly_affine(const std::vector<double>& p, double offset, double slope) {
  std::vector<double> out;
  std::vector<double> power{1.0};  // (offset + slope s)^k
  const std::vector<double> base{offset, slope};
  for (double ck : p) {
    poly_add_into(out, power, ck);
    power = poly_mul(power, base);
  }
  return out;
}

std::vector<double> poly_derivative(const std::vector<double>& p) {
  if (p.size() <= 1) return {};
  std::vector<double> out(p.size() - 1);
  for (std::size_t k = 1; k < p.size(); ++k) out[k - 1] = static_cast<double>(k) * p[k];
  return out;
}

}  // namespace

ExpPoly::ExpPoly(double origin, std::vector<ExpPolyTerm> terms)
    : origin_(origin), terms_(std::move(terms)) {
  normalize();
}

ExpPoly ExpPoly::constant(double value, double origin) {
  return ExpPoly(origin, {ExpPolyTerm{{value}, 0.0}});
}

ExpPoly ExpPoly::linear(double value_at_origin, double slope, double origin) {
  return ExpPoly(origin, {ExpPolyTerm{{value_at_origin, slope}, 0.0}});
}

ExpPoly ExpPoly::exponential(double scale, double rate, double origin) {
  return ExpPoly(origin, {ExpPolyTerm{{scale}, rate}});
}

void ExpPoly::normalize() {
  std::vector<ExpPolyTerm> merged;
  for (auto& term : terms_) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const ExpPolyTerm& m) { return m.rate == term.rate; });
    if (it == merged.end()) {
      merged.push_back(term);
    } else {
      poly_add_into(it->coeffs, term.coeffs);
    }
  }
  terms_.clear();
  for (auto& term : merged) {
    while (!term.coeffs.empty() && term.coeffs.back() == 0.0) term.coeffs.pop_back();
    if (!term.coeffs.empty()) terms_.push_back(std::move(term));
  }
  std::sort(terms_.begin(), terms_.end(),
            [](const ExpPolyTerm& a, const ExpPolyTerm& b) { return a.rate < b.rate; });
}

int ExpPoly::degree() const {
  int d = -1;
  for (const auto& term : terms_) d = std::max(d, static_cast<int>(term.coeffs.size()) - 1);
  return d;
}

double ExpPoly::value(double t) const {
  const double s = t - origin_;
  double acc = 0.0;
  for (const auto& term : terms_) {
    const double p = eval_poly(term.coeffs, s);
    acc += term.rate == 0.0 ? p : p * std::exp(term.rate * s);
  }
  return acc;
}

double ExpPoly::derivative_value(double t) const {
  const double s = t - origin_;
  double acc = 0.0;
  for (const auto& term : terms_) {
    const double dp = eval_poly(poly_derivative(term.coeffs), s);
    if (term.rate == 0.0) {
      acc += dp;
    } else {
      acc += (dp + term.rate * eval_poly(term.coeffs, s)) * std::exp(term.rate * s);
    }
  }
  return acc;
}

ExpPoly ExpPoly::rebased(double new_origin) const {
  if (new_origin == origin_) return *this;
  const double d = new_origin - origin_;
  std::vector<ExpPolyTerm> out;
  for (const auto& term : terms_) {
    // p(s) e^{cs} with s = u + d  ->  p(u + d) e^{cd} e^{cu}
    auto shifted = poly_affine(term.coeffs, d, 1.0);
    const double factor = term.rate == 0.0 ? 1.0 : std::exp(term.rate * d);
    for (double& c : shifted) c *= factor;
    out.push_back({std::move(shifted), term.rate});
  }
  return ExpPoly(new_origin, std::move(out));
}

ExpPoly ExpPoly::scaled(double k) const {
  std::vector<ExpPolyTerm> out = terms_;
  for (auto& term : out)
    for (double& c : term.coeffs) c *= k;
  return ExpPoly(origin_, std::move(out));
}

namespace {
// Constants rebase exactly; anything else loses digits when moved far from its origin.
bool origin_free(const ExpPoly& p) {
  for (const auto& t : p.terms())
    if (t.rate != 0.0 || t.coeffs.size() > 1) return false;
  return true;
}
}  // namespace

ExpPoly ExpPoly::plus(const ExpPoly& other) const {
  if (origin_free(*this) && !origin_free(other)) return other.plus(*this);
  std::vector<ExpPolyTerm> out = terms_;
  const ExpPoly o = other.rebased(origin_);
  out.insert(out.end(), o.terms_.begin(), o.terms_.end());
  return ExpPoly(origin_, std::move(out));
}

ExpPoly ExpPoly::times(const ExpPoly& other) const {
  if (origin_free(*this) && !origin_free(other)) return other.times(*this);
  const ExpPoly o = other.rebased(origin_);
  std::vector<ExpPolyTerm> out;
  for (const auto& a : terms_)
    for (const auto& b : o.terms_) out.push_back({poly_mul(a.coeffs, b.coeffs), a.rate + b.rate});
  return ExpPoly(origin_, std::move(out));
}

ExpPoly ExpPoly::composed_affine(double offset, double slope, double new_origin) const {
  // g(t) = f(origin + offset + slope (t - new_origin))
  std::vector<ExpPolyTerm> out;
  for (const auto& term : terms_) {
    auto coeffs = poly_affine(term.coeffs, offset, slope);
    const double factor = term.rate == 0.0 ? 1.0 : std::exp(term.rate * offset);
    for (double& c : coeffs) c *= factor;
    out.push_back({std::move(coeffs), term.rate * slope});
  }
  return ExpPoly(new_origin, std::move(out));
}

ExpPoly ExpPoly::antiderivative() const {
  std::vector<ExpPolyTerm> out;
  double constant = 0.0;
  for (const auto& term : terms_) {
    const double c = term.rate;
    if (c == 0.0) {
      std::vector<double> q(term.coeffs.size() + 1, 0.0);
      for (std::size_t k = 0; k < term.coeffs.size(); ++k)
        q[k + 1] = term.coeffs[k] / static_cast<double>(k + 1);
      out.push_back({std::move(q), 0.0});
    } else {
      // q' + c q = p  =>  q = sum_j (-1)^j p^{(j)} / c^{j+1}
      std::vector<double> q;
      std::vector<double> deriv = term.coeffs;
      double sign = 1.0;
      double cpow = c;
      while (!deriv.empty()) {
        poly_add_into(q, deriv, sign / cpow);
        deriv = poly_derivative(deriv);
        sign = -sign;
        cpow *= c;
      }
      constant -= q.empty() ? 0.0 : q[0];
      out.push_back({std::move(q), c});
    }
  }
  out.push_back({{constant}, 0.0});
  return ExpPoly(origin_, std::move(out));
}

double power_exp_integral(int k, double c, double length) {
  if (length == 0.0) return 0.0;
  const double x = c * length;
  if (std::abs(x) < 1.0) {
    // sum_j c^j L^{k+j+1} / (j! (k+j+1))
    double term = std::pow(length, k + 1);  // j = 0 factor c^j L^{k+j+1} / j!
    double sum = term / (k + 1);
    for (int j = 1; j < 60; ++j) {
      term *= x / j;
      const double add = term / (k + j + 1);
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  double ik = std::expm1(x) / c;
  const double e = std::exp(x);
  double lpow = 1.0;
  for (int j = 1; j <= k; ++j) {
    lpow *= length;
    ik = (lpow * e - j * ik) / c;
  }
  return ik;
}

double ExpPoly::integral(double a, double b) const {
  if (a == b) return 0.0;
  if (b < a) return -integral(b, a);
  const ExpPoly base = rebased(a);
  const double length = b - a;
  double acc = 0.0;
  for (const auto& term : base.terms_)
    for (std::size_t k = 0; k < term.coeffs.size(); ++k)
      if (term.coeffs[k] != 0.0)
        acc += term.coeffs[k] * power_exp_integral(static_cast<int>(k), term.rate, length);
  return acc;
}

}  // namespace enlab
