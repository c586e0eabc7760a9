#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "enlab/errors.hpp"
#include "enlab/tree.hpp"

namespace enlab {

namespace {

constexpr double kZeroBracket = 1e-24;

std::vector<double> column(const TreeSpace& s, int t, auto&& fn) {
  std::vector<double> v(s.size());
  for (std::size_t w = 0; w < s.size(); ++w) v[w] = fn(w);
  (void)t;
  return v;
}

void require_honest(const TreeSpace& s, const char* what) {
  if (!s.is_honest()) throw ModelError(std::string(what) + " needs an honest random time");
}

bool alive_at(const TreeSpace& s, std::size_t w, int t) { return t <= s.tau(w); }

}  // namespace

TreeAzema project_optional(const TreeSpace& s) {
  const int n = s.depth();
  TreeAzema az{s.zeros(), s.zeros(), s.zeros(), s.zeros(), s.zeros()};
  for (int t = 0; t <= n; ++t) {
    const auto z = s.cond_exp(column(s, t, [&](std::size_t w) { return s.tau(w) > t ? 1.0 : 0.0; }), t, Filtration::F);
    const auto zt = s.cond_exp(column(s, t, [&](std::size_t w) { return s.tau(w) >= t ? 1.0 : 0.0; }), t, Filtration::F);
    for (std::size_t w = 0; w < s.size(); ++w) {
      az.Z[t][w] = z[w];
      az.Zt[t][w] = zt[w];
      az.Do[t][w] = (t > 0 ? az.Do[t - 1][w] : 0.0) + (zt[w] - z[w]);
      az.m[t][w] = az.Z[t][w] + az.Do[t][w];
      az.Zm[t][w] = t > 0 ? az.Z[t - 1][w] : 1.0;
    }
  }
  return az;
}

// Max error over Zt = Z_- + dm, Zt = Z + dD, Zt = m - D_-, and E[Zt_t | F_{t-1}] = Z_{t-1}.
double verify_ztilde_identity(const TreeSpace& s, const TreeAzema& az) {
  double err = 0.0;
  for (int t = 0; t <= s.depth(); ++t) {
    for (std::size_t w = 0; w < s.size(); ++w) {
      const double dd = az.Do[t][w] - (t > 0 ? az.Do[t - 1][w] : 0.0);
      const double dprev = t > 0 ? az.Do[t - 1][w] : 0.0;
      const double dm = az.m[t][w] - (t > 0 ? az.m[t - 1][w] : 1.0);
      err = std::max(err, std::abs(az.Zt[t][w] - (az.Zm[t][w] + dm)));
      err = std::max(err, std::abs(az.Zt[t][w] - az.Z[t][w] - dd));
      err = std::max(err, std::abs(az.Zt[t][w] - (az.m[t][w] - dprev)));
    }
    if (t > 0) {
      const auto p = s.cond_exp(az.Zt[t], t - 1, Filtration::F);
      for (std::size_t w = 0; w < s.size(); ++w) err = std::max(err, std::abs(p[w] - az.Zm[t][w]));
    }
  }
  return err;
}

CompensatorCheck verify_g_compensator_stopped(const TreeSpace& s, const TreeAzema& az, const Proc& v) {
  if (!s.is_adapted(v, Filtration::F, 1e-12)) throw FiltrationMismatch("V must be F-adapted");
  const Proc lhs = compensator(s, stopped(s, v), Filtration::G);
  const Proc dv = increments(v);
  Proc rhs = s.zeros();
  CompensatorCheck out;
  for (int t = 1; t <= s.depth(); ++t) {
    const auto e = s.cond_exp(column(s, t, [&](std::size_t w) { return az.Zt[t][w] * dv[t][w]; }), t - 1, Filtration::F);
    for (std::size_t w = 0; w < s.size(); ++w) {
      double inc = 0.0;
      if (alive_at(s, w, t)) {
        if (az.Zm[t][w] > 0.0) {
          inc = e[w] / az.Zm[t][w];
        } else {
          ++out.excluded_cells;
        }
      }
      rhs[t][w] = rhs[t - 1][w] + inc;
    }
  }
  out.max_error = max_abs_diff(s, lhs, rhs);
  return out;
}

CompensatorCheck verify_g_compensator_after(const TreeSpace& s, const TreeAzema& az, const Proc& v) {
  require_honest(s, "the after-tau compensator identity");
  if (!s.is_adapted(v, Filtration::F, 1e-12)) throw FiltrationMismatch("V must be F-adapted");
  const Proc vs = stopped(s, v);
  Proc after = v;
  for (int t = 0; t <= s.depth(); ++t)
    for (std::size_t w = 0; w < s.size(); ++w) after[t][w] -= vs[t][w];
  const Proc lhs = compensator(s, after, Filtration::G);
  const Proc dv = increments(v);
  Proc rhs = s.zeros();
  CompensatorCheck out;
  for (int t = 1; t <= s.depth(); ++t) {
    const auto e =
        s.cond_exp(column(s, t, [&](std::size_t w) { return (1.0 - az.Zt[t][w]) * dv[t][w]; }), t - 1, Filtration::F);
    for (std::size_t w = 0; w < s.size(); ++w) {
      double inc = 0.0;
      if (!alive_at(s, w, t)) {
        if (az.Zm[t][w] < 1.0) {
          inc = e[w] / (1.0 - az.Zm[t][w]);
        } else {
          ++out.excluded_cells;
        }
      }
      rhs[t][w] = rhs[t - 1][w] + inc;
    }
  }
  out.max_error = max_abs_diff(s, lhs, rhs);
  return out;
}

double ProjectionCheck::max() const { return std::max({before_dm, before_inv, after_dv, after_dm}); }

ProjectionCheck verify_predictable_projection_identities(const TreeSpace& s, const TreeAzema& az, const Proc& M,
                                                         bool include_after) {
  if (include_after) require_honest(s, "after-tau projection identities");
  const Proc dM = increments(M);
  ProjectionCheck out;
  out.after_checked = include_after;
  for (int t = 1; t <= s.depth(); ++t) {
    auto g = [&](auto&& fn) { return s.cond_exp(column(s, t, fn), t - 1, Filtration::G); };
    auto f = [&](auto&& fn) { return s.cond_exp(column(s, t, fn), t - 1, Filtration::F); };
    const auto zt = az.Zt[t];
    const auto g_dm = g([&](std::size_t w) { return zt[w] > 0.0 ? dM[t][w] / zt[w] : 0.0; });
    const auto g_inv = g([&](std::size_t w) { return zt[w] > 0.0 ? 1.0 / zt[w] : 0.0; });
    const auto f_dm = f([&](std::size_t w) { return zt[w] > 0.0 ? dM[t][w] : 0.0; });
    const auto f_pos = f([&](std::size_t w) { return zt[w] > 0.0 ? 1.0 : 0.0; });
    for (std::size_t w = 0; w < s.size(); ++w) {
      if (!alive_at(s, w, t)) continue;
      const double zm = az.Zm[t][w];
      out.before_dm = std::max(out.before_dm, std::abs(g_dm[w] - f_dm[w] / zm));
      out.before_inv = std::max(out.before_inv, std::abs(g_inv[w] - f_pos[w] / zm));
    }
    if (!include_after) continue;
    const auto g_dv = g([&](std::size_t w) { return dM[t][w]; });
    const auto f_dv = f([&](std::size_t w) { return (1.0 - zt[w]) * dM[t][w]; });
    const auto g_da = g([&](std::size_t w) { return zt[w] < 1.0 ? dM[t][w] / (1.0 - zt[w]) : 0.0; });
    const auto f_da = f([&](std::size_t w) { return zt[w] < 1.0 ? dM[t][w] : 0.0; });
    for (std::size_t w = 0; w < s.size(); ++w) {
      if (alive_at(s, w, t)) continue;
      const double q = 1.0 - az.Zm[t][w];
      out.after_dv = std::max(out.after_dv, std::abs(g_dv[w] - f_dv[w] / q));
      out.after_dm = std::max(out.after_dm, std::abs(g_da[w] - f_da[w] / q));
    }
  }
  return out;
}

Proc jeulin_hat(const TreeSpace& s, const TreeAzema& az, const Proc& M, TreeSide side) {
  const Proc cov = increments(sharp_bracket(s, M, az.m, Filtration::F));
  const Proc dM = increments(M);
  Proc dx = s.zeros();
  for (int t = 1; t <= s.depth(); ++t) {
    for (std::size_t w = 0; w < s.size(); ++w) {
      const bool alive = alive_at(s, w, t);
      if (side == TreeSide::before && alive) {
        if (!(az.Zm[t][w] > 0.0)) throw SingularityError("Z_- vanishes inside [0, tau]");
        dx[t][w] = dM[t][w] - cov[t][w] / az.Zm[t][w];
      } else if (side == TreeSide::after && !alive) {
        if (!(az.Zm[t][w] < 1.0)) throw SingularityError("1 - Z_- vanishes after tau");
        dx[t][w] = dM[t][w] + cov[t][w] / (1.0 - az.Zm[t][w]);
      }
    }
  }
  if (side == TreeSide::before) dx[0] = M[0];
  return cumulate(dx);
}

Proc optional_integral(const TreeSpace& s, const Proc& H, const Proc& N, Filtration f) {
  const Proc dN = increments(N);
  Proc di = s.zeros();
  for (int t = 1; t <= s.depth(); ++t) {
    const auto hd = column(s, t, [&](std::size_t w) { return H[t][w] * dN[t][w]; });
    const auto p = s.cond_exp(hd, t - 1, f);
    for (std::size_t w = 0; w < s.size(); ++w) di[t][w] = hd[w] - p[w];
  }
  return cumulate(di);
}

double oi_defining_property_error(const TreeSpace& s, const Proc& H, const Proc& N, Filtration f) {
  const Proc I = optional_integral(s, H, N, f);
  const Proc dN = increments(N);
  const int n = s.depth();
  double err = 0.0;
  for (int t = 1; t <= n; ++t) {
    const std::size_t na = s.atom_count(t - 1, f), nb = s.atom_count(t, f);
    std::vector<double> lhs_a(na, 0.0), rhs_a(na, 0.0), lhs_b(nb, 0.0), rhs_b(nb, 0.0);
    std::vector<std::size_t> parent(nb, 0);
    for (std::size_t w = 0; w < s.size(); ++w) {
      const double p = s.outcomes()[w].prob;
      const std::size_t a = s.atom(t - 1, w, f), b = s.atom(t, w, f);
      parent[b] = a;
      const double hd = H[t][w] * dN[t][w];
      lhs_a[a] += p * I[n][w];
      rhs_a[a] += p * hd;
      lhs_b[b] += p * I[n][w];
      rhs_b[b] += p * hd;
    }
    for (std::size_t b = 0; b < nb; ++b) {
      const std::size_t a = parent[b];
      const double pb = s.atom_prob(t, b, f) / s.atom_prob(t - 1, a, f);
      const double lhs = lhs_b[b] - pb * lhs_a[a];
      const double rhs = rhs_b[b] - pb * rhs_a[a];
      err = std::max(err, std::abs(lhs - rhs));
    }
  }
  return err;
}

double verify_oi_covariation(const TreeSpace& s, const Proc& H, const Proc& N, const Proc& K, const Proc& M,
                             Filtration f) {
  const Proc lhs = sharp_bracket(s, optional_integral(s, H, N, f), optional_integral(s, K, M, f), f);
  const Proc dN = increments(N), dM = increments(M);
  Proc rhs = s.zeros();
  for (int t = 1; t <= s.depth(); ++t) {
    const auto hk = s.cond_exp(column(s, t, [&](std::size_t w) { return H[t][w] * K[t][w] * dN[t][w] * dM[t][w]; }),
                               t - 1, f);
    const auto h = s.cond_exp(column(s, t, [&](std::size_t w) { return H[t][w] * dN[t][w]; }), t - 1, f);
    const auto k = s.cond_exp(column(s, t, [&](std::size_t w) { return K[t][w] * dM[t][w]; }), t - 1, f);
    for (std::size_t w = 0; w < s.size(); ++w) rhs[t][w] = rhs[t - 1][w] + hk[w] - h[w] * k[w];
  }
  return max_abs_diff(s, lhs, rhs);
}

namespace {

// smallest n >= 1 with n * v >= 1
int critical_level(double v) {
  int n = std::max(1, static_cast<int>(std::ceil(1.0 / v)));
  while (n * v < 1.0) ++n;
  while (n > 1 && (n - 1) * v >= 1.0) --n;
  return n;
}

// G-GKW coefficient of dI on dX and the orthogonality error of the remainder.
std::pair<Proc, double> gkw_coefficient(const TreeSpace& s, const Proc& I, const Proc& X) {
  const Proc dI = increments(I), dX = increments(X);
  Proc phi = s.zeros();
  double err = 0.0;
  for (int t = 1; t <= s.depth(); ++t) {
    const auto num = s.cond_exp(column(s, t, [&](std::size_t w) { return dI[t][w] * dX[t][w]; }), t - 1, Filtration::G);
    const auto den = s.cond_exp(column(s, t, [&](std::size_t w) { return dX[t][w] * dX[t][w]; }), t - 1, Filtration::G);
    for (std::size_t w = 0; w < s.size(); ++w) phi[t][w] = den[w] > kZeroBracket ? num[w] / den[w] : 0.0;
    const auto orth = s.cond_exp(
        column(s, t, [&](std::size_t w) { return (dI[t][w] - phi[t][w] * dX[t][w]) * dX[t][w]; }), t - 1,
        Filtration::G);
    for (double v : orth) err = std::max(err, std::abs(v));
  }
  return {phi, err};
}

}  // namespace

TruncationResult truncation_densities(const TreeSpace& s, const TreeAzema& az, const Proc& M, TreeSide side) {
  if (side == TreeSide::after) require_honest(s, "after-tau truncation densities");
  const Proc m_hat = jeulin_hat(s, az, az.m, side);
  const Proc M_hat = jeulin_hat(s, az, M, side);
  const bool before = side == TreeSide::before;
  auto level_value = [&](int t, std::size_t w) { return before ? az.Zt[t][w] : 1.0 - az.Zt[t][w]; };

  std::set<int> crit{1};
  for (int t = 1; t <= s.depth(); ++t)
    for (std::size_t w = 0; w < s.size(); ++w) {
      const double v = level_value(t, w);
      if (v > 0.0) crit.insert(critical_level(v));
    }

  TruncationResult out;
  for (int n : crit) {
    Proc H = s.zeros();
    for (int t = 1; t <= s.depth(); ++t)
      for (std::size_t w = 0; w < s.size(); ++w) {
        const double v = level_value(t, w);
        // unweighted by Z_-: with the Z_- factor the drift identity fails on enumeration
        if (v > 0.0 && n * v >= 1.0) H[t][w] = 1.0 / v;
      }
    const Proc I = optional_integral(s, H, m_hat, Filtration::G);
    auto [phi, orth] = gkw_coefficient(s, I, M_hat);
    out.max_orthogonality_error = std::max(out.max_orthogonality_error, orth);
    out.levels.push_back({n, std::move(phi), orth});
  }
  out.n_indicator = out.levels.back().n;
  out.phi_limit = out.levels.back().phi;
  double scale = 1.0;
  for (const auto& row : out.phi_limit)
    for (double v : row) scale = std::max(scale, std::abs(v));
  out.n_star = out.n_indicator;
  for (auto it = out.levels.rbegin(); it != out.levels.rend(); ++it) {
    if (max_abs_diff(s, it->phi, out.phi_limit) > 1e-12 * scale) break;
    out.n_star = it->n;
  }

  const Proc dmm = increments(sharp_bracket(s, az.m, M, Filtration::F));
  const Proc dMM = increments(sharp_bracket(s, M, M, Filtration::F));
  out.beta_m = s.zeros();
  for (int t = 1; t <= s.depth(); ++t)
    for (std::size_t w = 0; w < s.size(); ++w)
      out.beta_m[t][w] = dMM[t][w] > kZeroBracket ? dmm[t][w] / dMM[t][w] : 0.0;
  return out;
}

PhiHatCheck verify_phi_hat_identity(const TreeSpace& s, const TreeAzema& az, const Proc& M, TreeSide side) {
  const bool before = side == TreeSide::before;
  if (!before) require_honest(s, "the after-tau density identity");
  PhiHatCheck out;
  const Proc dM = increments(M);
  std::set<std::pair<int, std::size_t>> bad;
  for (int t = 1; t <= s.depth(); ++t)
    for (std::size_t w = 0; w < s.size(); ++w) {
      const double zt = az.Zt[t][w], zm = az.Zm[t][w];
      const bool thin = before ? (zt == 0.0 && zm > 0.0) : (zt == 1.0 && zm < 1.0);
      if (thin && std::abs(dM[t][w]) > 1e-14) bad.insert({t, s.node(t, w)});
    }
  out.violating_cells = bad.size();
  out.hypothesis_holds = bad.empty();

  const TruncationResult tr = truncation_densities(s, az, M, side);
  const Proc M_hat = jeulin_hat(s, az, M, side);
  const Proc dMhat = increments(sharp_bracket(s, M_hat, M_hat, Filtration::G));
  const Proc dmM = increments(sharp_bracket(s, az.m, M, Filtration::F));
  const Proc dmm = increments(sharp_bracket(s, az.m, az.m, Filtration::F));
  out.phi_hat = s.zeros();
  for (int t = 1; t <= s.depth(); ++t) {
    const auto pos = s.cond_exp(column(s, t, [&](std::size_t w) {
                                  return before ? (az.Zt[t][w] > 0.0 ? 1.0 : 0.0) : (az.Zt[t][w] < 1.0 ? 1.0 : 0.0);
                                }),
                                t - 1, Filtration::F);
    for (std::size_t w = 0; w < s.size(); ++w) {
      if (alive_at(s, w, t) != before) continue;
      const double q = before ? az.Zm[t][w] : 1.0 - az.Zm[t][w];
      if (!(pos[w] > 0.0)) {
        out.surrogate_finite = false;
        continue;
      }
      out.phi_hat[t][w] = tr.phi_limit[t][w] * q * q / (pos[w] * (q * q + dmm[t][w]));
      const double lhs = dmM[t][w] / q;
      const double rhs = out.phi_hat[t][w] * dMhat[t][w];
      out.max_error = std::max(out.max_error, std::abs(lhs - rhs));
    }
  }
  return out;
}

}  // namespace enlab
