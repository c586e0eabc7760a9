#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "enlab/jump_path.hpp"
#include "enlab/ruin.hpp"
#include "enlab/segment.hpp"

namespace enlab {

// tau = k1 T1 + k2 T2 for the first two jumps of N.
struct WeightedJumpTimeModel {
  double k1 = 0.5;
  double k2 = 0.5;
  double lambda = 1.0;

  void validate() const;
  // decay rate of P(tau > t | F_t) on [T1, T2)
  double hazard() const { return lambda * k1 / k2; }
};

// tau = last time Y_t = mu t - N_t sits at or below a, with a = -ln b / ln(1+sigma).
struct LastPassageModel {
  double b = 0.5;
  double sigma = 1.0;
  double lambda = 1.0;

  void validate() const;
  double a() const;
  double mu() const;
  MarketModel market(double x0 = 1.0) const { return {lambda, sigma, x0}; }
  RuinFunction ruin(const RuinOptions& options = {}) const;
};

enum class ModelKind { weighted, last_passage };

// Jump of m at a jump time of N, with the left limit of Z and the value of Z-tilde there.
struct DeltaMAtom {
  double t = 0.0;
  double delta_m = 0.0;
  double z_left = 0.0;
  double z_tilde = 0.0;
};

struct AzemaTriple {
  ModelKind kind = ModelKind::weighted;
  PiecewiseJumpPath counts;
  PiecewiseJumpPath Z;
  PiecewiseJumpPath m;
  PiecewiseJumpPath D_oF;
  std::vector<DeltaMAtom> delta_m_atoms;
  // Z-tilde_t = P(tau >= t | F_t) from the closed form, independent of Z and m
  std::function<double(double)> z_tilde;
  // jump m would take if N jumped at u (left-continuous pieces)
  PiecewiseFunction jump_kernel;
  // Z_{u-} as pieces, for density formulas
  PiecewiseFunction z_left;
  double tau = 0.0;
  bool certified = true;

  // weighted model
  double T1 = 0.0;
  double T2 = 0.0;

  // last-passage model
  PiecewiseJumpPath Y;
  PiecewiseFunction phi1;  // Psi(Y_- - a - 1) - 1
  PiecewiseFunction phi2;  // Psi(Y_- - a) - 1
  double level_a = 0.0;
  double lambda = 0.0;
};

// Event times of the first two jumps; throws HorizonTooShort when missing.
double tau_weighted(const PiecewiseJumpPath& counts, const WeightedJumpTimeModel& model);
AzemaTriple azema_weighted(const PiecewiseJumpPath& counts, const WeightedJumpTimeModel& model);

// Y_t = mu t - N_t
PiecewiseJumpPath drifted_level(const PiecewiseJumpPath& counts, double mu);

struct PassageTime {
  double tau = 0.0;
  bool certified = false;
};

PassageTime tau_last_passage(const PiecewiseJumpPath& counts, const LastPassageModel& model,
                             const RuinFunction& psi);
// Last s <= t with Y_s <= a, computed from the path up to t only.
double last_passage_surrogate(const PiecewiseJumpPath& level, double a, double t);
AzemaTriple azema_last_passage(const PiecewiseJumpPath& counts, const LastPassageModel& model,
                               const RuinFunction& psi);

// Counting paths simulated long enough to resolve tau. Events come from one
// sequential stream, so a longer horizon only appends events.
PiecewiseJumpPath simulate_weighted_counts(const WeightedJumpTimeModel& model, double t_min, double margin,
                                           std::uint64_t seed);
PiecewiseJumpPath simulate_certified_counts(const LastPassageModel& model, const RuinFunction& psi,
                                            double t_min, std::uint64_t seed);

// Invariant checks; each returns the largest violation seen.
double ztilde_identity_error(const AzemaTriple& az);
double m_decomposition_error(const AzemaTriple& az);

// m = 1 + kernel . (N - lambda t), built segment by segment in closed form.
PiecewiseJumpPath martingale_from_kernel(const PiecewiseJumpPath& counts, const PiecewiseFunction& kernel,
                                         double lambda, double m0);

}  // namespace enlab
