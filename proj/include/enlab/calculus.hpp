#pragma once

#include <ostream>
#include <string>

#include "enlab/interval_set.hpp"
#include "enlab/jump_path.hpp"
#include "enlab/path_measure.hpp"
#include "enlab/random_time.hpp"

namespace enlab {

enum class Side { before, after };

// Finite-variation part to absorb and the G-bracket it must be absorbed by,
// both restricted to one stochastic window of a single path.
struct DriftBracketPair {
  PathMeasure drift;
  PathMeasure bracket;
  IntervalSet window;
  std::string label;
};

struct FBrackets {
  PathMeasure xx;  // <X, X>^F
  PathMeasure xm;  // <X, m>^F
};

// Left limits of a path as left-continuous pieces on (b_i, b_{i+1}].
PiecewiseFunction left_limits(const PiecewiseJumpPath& path);
IntervalSet piece_support(const PiecewiseFunction& f);

// <M, m>^F when M jumps by jump_size(u) at jumps of N (intensity lambda).
PathMeasure covariation_with_m(const PiecewiseFunction& jump_size, const AzemaTriple& az);

FBrackets f_brackets(const PiecewiseJumpPath& X, const MarketModel& market, const AzemaTriple& az);

struct StoppedBracket {
  PathMeasure general;  // I_[0,tau] <X,X> + Z_-^{-1} I_[0,tau] (sum dm (dX)^2)^{p,F}
  PathMeasure closed;   // simplified form
  double max_rel_diff = 0.0;
};

// Both evaluations of <X-hat, X-hat>^G on [0, tau]; throws ConsistencyError when
// they differ by more than rel_tol.
StoppedBracket g_bracket_stopped(const PiecewiseJumpPath& X, const MarketModel& market, const AzemaTriple& az,
                                 double rel_tol = 1e-8);
// Drift Z_-^{-1} I_[0,tau] . <X, m>^F with the G-bracket on [0, tau].
DriftBracketPair g_drift_stopped(const PiecewiseJumpPath& X, const MarketModel& market, const AzemaTriple& az);
// Same drift evaluated without simplification (ratio of kernel and Z_-).
PathMeasure g_drift_stopped_general(const PiecewiseJumpPath& X, const MarketModel& market, const AzemaTriple& az);

struct AfterBracket {
  PathMeasure general;  // (1 - Z_-)^{-1} ((1 - Z-tilde) . [X, X])^{p,F}
  PathMeasure closed;   // lambda sigma^2 X_-^2 (phi1 / phi2) on {Y_- > a + 1}
  double max_rel_diff = 0.0;
};
AfterBracket g_bracket_after(const PiecewiseJumpPath& X, const MarketModel& market, const AzemaTriple& az,
                             double rel_tol = 1e-8);
// Drift (1 - Z_-)^{-1} I_]tau,T] . <X, m>^F and the G-bracket on ]tau, T].
DriftBracketPair g_drift_bracket_after(const PiecewiseJumpPath& X, const MarketModel& market,
                                       const AzemaTriple& az);

// G-martingale part of M^tau (before) or M - M^tau (after), given <M, m>^F.
PiecewiseJumpPath jeulin_hat_path(const PiecewiseJumpPath& M, const PathMeasure& cov_Mm, const AzemaTriple& az,
                                  Side side);

// Largest relative gap between cumulative masses of two measures at the given probes.
double cumulative_rel_diff(const PathMeasure& a, const PathMeasure& b, const std::vector<double>& probes,
                           double floor = 1e-300);

// Grid table t, Z, Ztilde, m, drift_density, bracket_density, in_window.
void write_path_csv(std::ostream& out, const AzemaTriple& az, const DriftBracketPair& pair, std::size_t points);

}  // namespace enlab
