#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "enlab/batch.hpp"
#include "enlab/calculus.hpp"
#include "enlab/interval_set.hpp"
#include "enlab/jump_path.hpp"
#include "enlab/random_time.hpp"
#include "enlab/tree.hpp"

namespace enlab {

enum class SCStatus { satisfied, violated, inconclusive };
std::string to_string(SCStatus s);

// One G-cell of a tree: time t, F-node at t-1 and the tau information at t-1
// (-1 while tau has not occurred).
struct TreeCell {
  int t = 0;
  std::size_t node = 0;
  int tau_state = -1;
  double prob = 0.0;
  double drift = 0.0;
  double bracket = 0.0;
};

struct SCVerdict {
  SCStatus status = SCStatus::inconclusive;
  double residual = 0.0;          // drift mass left unabsorbed by the bracket
  double l2_norm = 0.0;           // int lambda-hat^2 d(bracket)
  double reconstruction_error = 0.0;
  double reconstruction_rel = 0.0;
  IntervalSet window;
  IntervalSet witness;
  std::vector<TreeCell> witness_cells;
  PiecewiseFunction lambda_hat;
  std::vector<Atom> lambda_hat_atoms;
  std::vector<std::pair<double, double>> lambda_hat_samples;
  std::string label;
  std::string note;

  static SCVerdict not_applicable(const std::string& label);
  bool has_witness() const { return !witness.empty() || !witness_cells.empty(); }
  nlohmann::json to_json() const;
};

struct SCOptions {
  double tol = 1e-9;
  std::size_t samples = 64;
  std::size_t scan_cells = 10000;  // grid fallback resolution: horizon / scan_cells
};

SCVerdict check_sc(const DriftBracketPair& pair, const SCOptions& opt = {});
SCVerdict check_sc_split(const SCVerdict& before, const SCVerdict& after);
// V predictable finite variation; satisfied iff V is constant.
SCVerdict check_constant_predictable(const PiecewiseJumpPath& V, double tol = 1e-9);

struct BatchVerdict {
  std::size_t paths = 0, satisfied = 0, violated = 0, inconclusive = 0;
  double max_residual = 0.0;
  SCStatus status = SCStatus::satisfied;  // violated if any path violates
  nlohmann::json to_json() const;
};
BatchVerdict aggregate(const std::vector<SCVerdict>& verdicts);

// Thin sets of the evanescence theorems.
enum class ThinSet { ztilde_zero, ztilde_one };  // {Zt = 0 < Z_-}, {Zt = 1 > Z_-}
std::string to_string(ThinSet s);

struct EvanescenceReport {
  ThinSet set = ThinSet::ztilde_zero;
  std::size_t paths = 0;
  std::size_t charged_paths = 0;
  double charged_fraction = 0.0;   // paths, or probability mass on trees
  std::vector<double> example_times;
  bool co_jump = false;            // every charge carries a jump of the market martingale
  std::size_t charges_without_co_jump = 0;
  nlohmann::json to_json() const;
};

// Charges on one path, inspected at the jump times of N (the only times m jumps).
struct PathCharges {
  std::vector<double> ztilde_zero, ztilde_one;
};

// Charges on one path, with the co-jump flag read off the market path.
PathCharges thin_set_charges(const AzemaTriple& az, const PiecewiseJumpPath& market_path, double tol,
                             std::size_t* without_co_jump);
EvanescenceReport summarize_charges(ThinSet set, const std::vector<PathCharges>& per_path,
                                    std::size_t without_co_jump);

EvanescenceReport evanescence_scan(const WeightedJumpTimeModel& model, const MarketModel& market,
                                   std::size_t n_paths, std::uint64_t seed, ThinSet set,
                                   const BatchOptions& batch = {});
EvanescenceReport evanescence_scan(const LastPassageModel& model, std::size_t n_paths, std::uint64_t seed,
                                   ThinSet set, double t_min = 5.0, const BatchOptions& batch = {});
EvanescenceReport evanescence_scan(const TreeSpace& s, const TreeAzema& az, const Proc& M, ThinSet set);

// ---- trees ----

// Doob decomposition of X^tau (before) or X - X^tau (after) in G by enumeration:
// per-step drift dA and bracket d<M-hat>^G.
struct TreeDecomposition {
  Proc drift;
  Proc bracket;
  Proc martingale;
};
TreeDecomposition g_doob(const TreeSpace& s, const Proc& X, TreeSide side);
TreeDecomposition f_doob(const TreeSpace& s, const Proc& X);
// Same quantities from the F formulas (Jeulin drift and the compensator lemma).
TreeDecomposition g_doob_from_f(const TreeSpace& s, const TreeAzema& az, const Proc& M, double lambda,
                                TreeSide side);

// lambda-hat = -dA / d<M-hat>, so X = X0 + M-hat - lambda-hat . <M-hat>.
SCVerdict check_sc_tree(const TreeSpace& s, const TreeDecomposition& d, Filtration f, double tol, Proc* lambda_hat,
                        const std::string& label = "");
SCVerdict check_constant_predictable(const TreeSpace& s, const Proc& V, Filtration f, double tol = 1e-12);

// Market X = M - lambda <M>^F on the tree.
Proc tree_market(const TreeSpace& s, const Proc& M, double lambda);

struct PositiveCaseReport {
  bool hypothesis_holds = true;
  std::size_t violating_cells = 0;
  SCVerdict verdict;
  Proc lambda_hat;            // direct G enumeration
  // Route gaps in drift units, |lambda-hat difference| times d<M-hat>^G per cell;
  // the *_lambda_gap fields hold the raw lambda-hat differences.
  double route_f_gap = 0.0;   // vs the F-formula route
  double route_phi_gap = 0.0; // vs lambda <M>^F / <M-hat>^G -+ Phi-hat
  double route_f_lambda_gap = 0.0;
  double route_phi_lambda_gap = 0.0;
  nlohmann::json to_json() const;
};
PositiveCaseReport positive_case_verify(const TreeSpace& s, const TreeAzema& az, const Proc& M, double lambda,
                                        TreeSide side, double tol = 1e-10);
// Continuous model window (last passage before tau): check_sc plus relative reconstruction.
SCVerdict positive_case_verify(const DriftBracketPair& pair, double rel_tol = 1e-6, const SCOptions& opt = {});

struct ConverseResult {
  bool charged = false;            // thin set carries positive mass
  Proc V, V_comp, M, M_window;     // M_window = M^tau (before) or M - M^tau (after)
  bool predictable = false;
  bool nonconstant = false;
  SCVerdict verdict;
};
// M = I_[T,inf[ - compensator, T the first entrance into the thin set of `side`.
ConverseResult converse_construction(const TreeSpace& s, const TreeAzema& az, TreeSide side);

}  // namespace enlab
