#pragma once

#include <vector>

#include <json.hpp>

#include "enlab/interval_set.hpp"
#include "enlab/jump_path.hpp"
#include "enlab/segment.hpp"

namespace enlab {

struct Atom {
  double t = 0.0;
  double weight = 0.0;
};

// Signed measure on [0, T]: Lebesgue density plus finitely many atoms.
// `support` lists where the measure charges this path; when support_exact is
// false it is only an outer bound and consumers scan the density instead.
class PathMeasure {
 public:
  PathMeasure() = default;
  PathMeasure(double horizon, PiecewiseFunction density, std::vector<Atom> atoms, IntervalSet support,
              bool support_exact = true);
  static PathMeasure zero(double horizon);

  double horizon() const { return horizon_; }
  const PiecewiseFunction& density() const { return density_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const IntervalSet& support() const { return support_; }
  bool support_exact() const { return support_exact_; }

  // mu([0, t])
  double cumulative(double t, const QuadratureOptions& q = {}) const;
  // mu(S) and |mu|(S); Lebesgue parts ignore endpoint flags.
  double mass_on(const IntervalSet& set, const QuadratureOptions& q = {}) const;
  double abs_mass_on(const IntervalSet& set, const QuadratureOptions& q = {}) const;
  double total_abs_mass(const QuadratureOptions& q = {}) const;

  PathMeasure restricted(const IntervalSet& window) const;
  PathMeasure scaled(double k) const;

  // Support rebuilt from a density grid scan at `step` plus the atom list.
  IntervalSet scanned_support(double step, double tol) const;

  nlohmann::json to_json() const;

 private:
  double horizon_ = 0.0;
  PiecewiseFunction density_;
  std::vector<Atom> atoms_;
  IntervalSet support_;
  bool support_exact_ = true;
};

// Density pieces clipped to a window (Lebesgue sense).
PiecewiseFunction clip_density(const PiecewiseFunction& f, const IntervalSet& window);

// Pieces of `integrand` (left limits) times `density`, split at the path's breakpoints.
PiecewiseFunction multiply_by_path(const PiecewiseFunction& density, const PiecewiseJumpPath& integrand);

// int_0^t f(u-) dmu(u).
double integrate_path_measure(const PiecewiseJumpPath& integrand, const PathMeasure& measure, double t,
                              const QuadratureOptions& q = {});

}  // namespace enlab
