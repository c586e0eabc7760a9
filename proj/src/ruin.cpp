#include "enlab/ruin.hpp"

#include <cmath>
#include <numeric>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "enlab/errors.hpp"
#include "enlab/rng.hpp"

namespace enlab {

double lundberg_exponent(double lambda, double mu) {
  if (!(lambda > 0.0) || !(mu > lambda)) throw ParameterError("ruin needs 0 < lambda < mu");
  // g(R) = lambda (e^R - 1) - mu R is convex with g(0) = 0, g'(0) < 0
  auto g = [&](double r) { return lambda * std::expm1(r) - mu * r; };
  double lo = 0.0;
  double hi = 1.0;
  while (g(hi) < 0.0) hi *= 2.0;
  lo = std::log(mu / lambda);  // minimiser of g, so the root is above it
  for (int i = 0; i < 200 && hi - lo > 1e-16 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  double r = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) r -= g(r) / (lambda * std::exp(r) - mu);
  return r;
}

namespace {

long double binomial(int n, int k) {
  long double b = 1.0L;
  for (int i = 1; i <= k; ++i) b = b * static_cast<long double>(n - k + i) / static_cast<long double>(i);
  return b;
}

}  // namespace

RuinFunction::RuinFunction(double lambda, double mu, RuinOptions options)
    : lambda_(lambda), mu_(mu), rho_(lambda / mu), options_(options) {
  if (!(lambda > 0.0) || !(mu > lambda)) throw ParameterError("ruin function needs 0 < lambda < mu");
  if (!(options.eps_cert > 0.0 && options.eps_cert < 1.0)) throw ParameterError("eps_cert must be in (0,1)");
  if (!(options.grid_step > 0.0)) throw ParameterError("grid step must be > 0");
  R_ = lundberg_exponent(lambda, mu);
  C_ = (mu - lambda) / (lambda * std::exp(R_) - mu);

  // survival phi(k+u) = (1-rho) sum_{j<=k} (rho(j-k-u))^j / j! e^{rho(k-j)} e^{rho u}.
  // The alternating sum cancels heavily, so coefficients and the switch test run in 50 digits.
  using big = boost::multiprecision::cpp_dec_float_50;
  const big rho = big(lambda) / big(mu);
  auto build = [&](int k) {
    std::vector<big> c(static_cast<std::size_t>(k) + 1, big(0));
    big fact = 1;
    for (int j = 0; j <= k; ++j) {
      if (j > 0) fact *= j;
      const big lead = (1 - rho) * pow(-rho, j) * exp(rho * (k - j)) / fact;
      // (k - j + u)^j expanded in u
      const big base = big(k - j);
      for (int i = 0; i <= j; ++i)
        c[static_cast<std::size_t>(i)] += lead * big(static_cast<double>(binomial(j, i))) * pow(base, j - i);
    }
    return c;
  };
  auto survival_at_right_end = [&](const std::vector<big>& c) {
    big poly = 0;
    for (const auto& x : c) poly += x;
    return exp(rho) * poly;
  };

  // switch at the first integer where the series and the asymptote agree
  constexpr int kMaxSwitch = 60;
  big psi_at_k = 0;
  bool matched = false;
  for (int k = 1; k <= kMaxSwitch; ++k) {
    const auto c = build(k - 1);
    coeffs_.emplace_back(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) coeffs_.back()[i] = static_cast<long double>(c[i]);
    psi_at_k = 1 - survival_at_right_end(c);
    K_ = k;
    const double asym = C_ * std::exp(-R_ * k);
    if (abs(psi_at_k - big(asym)) <= big(options.tail_rel_tol * asym)) {
      matched = true;
      break;
    }
  }
  if (!matched) throw ParameterError("ruin series does not reach its exponential tail; lambda / mu too close to 1");
  tail_scale_ = static_cast<double>(psi_at_k);

  if (tail_scale_ > options.eps_cert) {
    x_cert_ = K_ + std::log(tail_scale_ / options.eps_cert) / R_;
  } else {
    double lo = 0.0;
    double hi = K_;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (value(mid) < options.eps_cert ? hi : lo) = mid;
    }
    x_cert_ = hi;
  }
  x_max_ = x_cert_ + options.coverage_margin;
}

long double RuinFunction::series_value(double x) const {
  const int k = static_cast<int>(std::floor(x));
  const auto& c = coeffs_[static_cast<std::size_t>(k)];
  const long double u = static_cast<long double>(x) - k;
  long double poly = 0.0L;
  for (std::size_t i = c.size(); i-- > 0;) poly = poly * u + c[i];
  return 1.0L - std::exp(static_cast<long double>(rho_) * u) * poly;
}

double RuinFunction::value(double x) const {
  if (x < 0.0) return 1.0;
  if (x >= K_) return tail_scale_ * std::exp(-R_ * (x - K_));
  const double v = static_cast<double>(series_value(x));
  return std::min(1.0, std::max(0.0, v));
}

ExpPoly RuinFunction::piece(int k) const {
  if (k < 0) return ExpPoly::constant(1.0, static_cast<double>(k));
  if (k >= K_) return ExpPoly::exponential(tail_scale_, -R_, static_cast<double>(K_));
  const auto& c = coeffs_[static_cast<std::size_t>(k)];
  std::vector<double> neg(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) neg[i] = -static_cast<double>(c[i]);
  return ExpPoly(static_cast<double>(k), {{{1.0}, 0.0}, {std::move(neg), rho_}});
}

std::vector<Piece> RuinFunction::compose_linear(double x0, double slope, double t0, double t_lo,
                                                double t_hi) const {
  if (slope < 0.0) throw ParameterError("compose_linear needs a nondecreasing argument");
  std::vector<Piece> out;
  auto arg = [&](double t) { return x0 + slope * (t - t0); };
  double lo = t_lo;
  while (lo < t_hi) {
    const double x_lo = arg(lo);
    // which piece governs just to the right of lo
    int k;
    double next_x;  // argument value where the piece ends
    if (x_lo < 0.0) {
      k = -1;
      next_x = 0.0;
    } else if (x_lo >= K_) {
      k = K_;
      next_x = INFINITY;
    } else {
      k = static_cast<int>(std::floor(x_lo));
      next_x = k + 1.0;
    }
    double hi = t_hi;
    if (slope > 0.0 && std::isfinite(next_x)) hi = std::min(t_hi, t0 + (next_x - x0) / slope);
    if (!(hi > lo)) hi = std::nextafter(lo, INFINITY);  // guard against rounding stalls
    if (hi > t_hi) hi = t_hi;
    Segment seg;
    if (k < 0) {
      seg = Segment(ExpPoly::constant(1.0, lo));
    } else {
      // s_old = x - origin = (x_lo - origin) + slope (t - lo)
      const ExpPoly p = piece(k);
      seg = Segment(p.composed_affine(x_lo - p.origin(), slope, lo));
    }
    out.push_back({lo, hi, std::move(seg)});
    lo = hi;
  }
  return out;
}

std::vector<std::pair<double, double>> RuinFunction::table() const {
  std::vector<std::pair<double, double>> out;
  const auto n = static_cast<std::size_t>(std::floor(x_max_ / options_.grid_step + 1e-9));
  out.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) * options_.grid_step;
    out.emplace_back(x, value(x));
  }
  return out;
}

double escape_level_for_bias(double lambda, double mu, double bias) {
  if (!(bias > 0.0 && bias < 1.0)) throw ParameterError("bias bound must be in (0,1)");
  return -std::log(bias) / lundberg_exponent(lambda, mu);
}

RuinEstimate ruin_probability_mc(double x, double lambda, double mu, std::size_t n_paths, std::uint64_t seed,
                                 double x_escape, const BatchOptions& batch) {
  if (!(lambda > 0.0) || !(mu > lambda)) throw ParameterError("ruin oracle needs 0 < lambda < mu");
  if (n_paths == 0) throw ParameterError("ruin oracle needs at least one path");
  if (x < 0.0) return {1.0, 0.0, 0.0, n_paths};
  if (!(x_escape > x)) throw ParameterError("escape level must exceed the start level");
  const auto ruined = map_paths<char>(
      n_paths,
      [&](std::size_t i) -> char {
        PathRng rng(path_seed(seed, i));
        double level = x;
        for (;;) {
          level += mu * rng.exponential(lambda);
          if (level >= x_escape) return 0;
          level -= 1.0;
          if (level < 0.0) return 1;
        }
      },
      batch);
  const double hits = static_cast<double>(std::accumulate(ruined.begin(), ruined.end(), std::size_t{0}));
  const double n = static_cast<double>(n_paths);
  const double p = hits / n;
  RuinEstimate est;
  est.estimate = p;
  est.standard_error = std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
  // Lundberg: ruin probability from any level >= x_escape is at most e^{-R x_escape}
  est.bias_bound = std::exp(-lundberg_exponent(lambda, mu) * x_escape);
  est.paths = n_paths;
  return est;
}

}  // namespace enlab
