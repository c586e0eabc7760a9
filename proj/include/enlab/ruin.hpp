#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "enlab/batch.hpp"
#include "enlab/exp_poly.hpp"
#include "enlab/segment.hpp"

namespace enlab {

struct RuinOptions {
  double eps_cert = 1e-6;         // certification level for last-passage paths
  double tail_rel_tol = 1e-9;     // series/asymptotic agreement required at the switch point
  double coverage_margin = 10.0;  // x_max = x_cert + margin
  double grid_step = 0.01;        // export grid
};

// Probability that x + (mu t - N_t) ever goes below 0, N Poisson(lambda), unit jumps.
// Exact series on each [k, k+1) below a switch point, Cramer-Lundberg exponential beyond.
class RuinFunction {
 public:
  RuinFunction(double lambda, double mu, RuinOptions options = {});

  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  double rho() const { return rho_; }
  double adjustment_coefficient() const { return R_; }  // Lundberg exponent
  double asymptotic_constant() const { return C_; }     // Psi(x) ~ C e^{-R x}
  int switch_point() const { return K_; }
  double x_cert() const { return x_cert_; }
  double x_max() const { return x_max_; }
  const RuinOptions& options() const { return options_; }

  double value(double x) const;
  // Psi restricted to [k, k+1) (k < switch point) or [K, inf) (k >= K), as an
  // ExpPoly in x with origin k (or K).
  ExpPoly piece(int k) const;

  // Psi(x0 + slope (t - t0)) for t in (t_lo, t_hi], split wherever the argument
  // crosses an integer below the switch point or zero. slope must be >= 0.
  std::vector<Piece> compose_linear(double x0, double slope, double t0, double t_lo, double t_hi) const;

  // (x, Psi(x)) on the export grid over [0, x_max].
  std::vector<std::pair<double, double>> table() const;

 private:
  long double series_value(double x) const;

  double lambda_;
  double mu_;
  double rho_;
  RuinOptions options_;
  double R_ = 0.0;
  double C_ = 0.0;
  int K_ = 0;
  double tail_scale_ = 0.0;  // Psi(K)
  // coeffs_[k][i]: survival on [k, k+1) is e^{rho u} sum_i coeffs_[k][i] u^i
  std::vector<std::vector<long double>> coeffs_;
  double x_cert_ = 0.0;
  double x_max_ = 0.0;
};

// Solves lambda (e^R - 1) = mu R for R > 0.
double lundberg_exponent(double lambda, double mu);

struct RuinEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  double bias_bound = 0.0;  // upper bound on ruin after escaping past x_escape
  std::size_t paths = 0;
};

// Brute-force first-passage simulation; a path counts as safe once it climbs past
// x_escape. Ruin can only happen at jump times, so only those are inspected.
RuinEstimate ruin_probability_mc(double x, double lambda, double mu, std::size_t n_paths, std::uint64_t seed,
                                 double x_escape, const BatchOptions& batch = {});

// Smallest escape level with Lundberg bound e^{-R x} below `bias`.
double escape_level_for_bias(double lambda, double mu, double bias);

}  // namespace enlab
