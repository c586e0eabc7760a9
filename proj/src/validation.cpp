#include "enlab/validation.hpp"

#include <algorithm>
#include <cmath>

#include "enlab/calculus.hpp"
#include "enlab/errors.hpp"
#include "enlab/rng.hpp"
#include "enlab/ruin.hpp"

namespace enlab {

nlohmann::json StatCheck::to_json() const {
  return {{"name", name}, {"n", n},   {"mean", mean},   {"expected", expected}, {"standard_error", standard_error},
          {"z", z},       {"limit", limit}, {"slack", slack}, {"pass", pass}};
}

StatCheck mean_check(const std::string& name, const std::vector<double>& samples, double expected, double limit) {
  if (samples.size() < 2) throw ParameterError("a mean check needs at least two samples");
  StatCheck c;
  c.name = name;
  c.n = samples.size();
  c.expected = expected;
  c.limit = limit;
  // two-pass moments in index order, so serial and parallel batches agree bitwise
  double sum = 0.0;
  for (double x : samples) sum += x;
  c.mean = sum / static_cast<double>(c.n);
  double ss = 0.0;
  for (double x : samples) ss += (x - c.mean) * (x - c.mean);
  c.standard_error = std::sqrt(ss / static_cast<double>(c.n - 1) / static_cast<double>(c.n));
  const double gap = std::abs(c.mean - expected);
  c.z = c.standard_error > 0.0 ? gap / c.standard_error : (gap == 0.0 ? 0.0 : INFINITY);
  c.pass = gap <= limit * c.standard_error;
  return c;
}

PiecewiseJumpPath truncate_counts(const PiecewiseJumpPath& counts, double t) {
  if (!(t > 0.0) || t > counts.horizon()) throw RangeError("truncation time outside the horizon");
  std::vector<double> ev;
  for (double u : counting_events(counts))
    if (u <= t) ev.push_back(u);
  return counting_path(ev, t);
}

double weighted_tau_cdf(const WeightedJumpTimeModel& model, double t) {
  model.validate();
  if (t <= 0.0) return 0.0;
  // tau = (k1 + k2) T1 + k2 (T2 - T1): two independent exponentials
  const double a = model.lambda / (model.k1 + model.k2);
  const double b = model.lambda / model.k2;
  if (std::abs(a - b) <= 1e-12 * b) return 1.0 - std::exp(-a * t) * (1.0 + a * t);
  return 1.0 - (b * std::exp(-a * t) - a * std::exp(-b * t)) / (b - a);
}

namespace {

double sum_sq_jumps(const PiecewiseJumpPath& X, double lo, double hi) {
  double s = 0.0;
  for (double u : X.event_times())
    if (u > lo && u <= hi) s += X.jump_at(u) * X.jump_at(u);
  return s;
}

struct WeightedSample {
  double M = 0, X = 0, m = 0, Mhat = 0, Mhat_late = 0, z_proj = 0, bracket_f = 0, bracket_g = 0;
  std::vector<double> law;
};

struct LastPassageSample {
  double m = 0, z_proj = 0, Xhat = 0, Xhat_late = 0, bracket_g = 0;
};

}  // namespace

std::vector<StatCheck> weighted_checks(const StatSuiteConfig& cfg) {
  const auto& model = cfg.weighted;
  const auto& market = cfg.weighted_market;
  const double T = cfg.t_weighted;
  const double s_mid = 1.0;  // G-event {tau > s_mid} for the conditional increment test
  auto samples = map_paths<WeightedSample>(
      cfg.paths,
      [&](std::size_t i) {
        const auto counts = simulate_weighted_counts(model, T, 1.0, path_seed(cfg.seed, i));
        const auto az = azema_weighted(counts, model);
        const auto X = stochastic_exponential(counts, market);
        const auto M = compensated_martingale(counts, model.lambda);
        const auto cov = covariation_with_m(pw_constant(0.0, counts.horizon(), 1.0), az);
        const auto Mhat = jeulin_hat_path(M, cov, az, Side::before);
        const auto fb = f_brackets(X, market, az);
        const auto gb = g_bracket_stopped(X, market, az);
        WeightedSample s;
        s.M = M.value(T);
        s.X = X.value(T) - market.initial_price;
        s.m = az.m.value(T) - 1.0;
        s.Mhat = Mhat.value(T) - Mhat.value(0.0);
        s.Mhat_late = az.tau > s_mid ? Mhat.value(T) - Mhat.value(s_mid) : 0.0;
        s.z_proj = az.Z.value(T) - (az.tau > T ? 1.0 : 0.0);
        s.bracket_f = sum_sq_jumps(X, 0.0, T) - fb.xx.cumulative(T);
        s.bracket_g = sum_sq_jumps(X, 0.0, std::min(T, az.tau)) - gb.closed.cumulative(T);
        for (double t : cfg.tau_law_points) s.law.push_back(az.tau <= t ? 1.0 : 0.0);
        return s;
      },
      cfg.batch);
  auto column = [&](auto&& get) {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.push_back(get(s));
    return v;
  };
  std::vector<StatCheck> out;
  const double L = cfg.z_limit;
  out.push_back(mean_check("weighted: M_T martingale", column([](auto& s) { return s.M; }), 0.0, L));
  out.push_back(mean_check("weighted: X_T martingale", column([](auto& s) { return s.X; }), 0.0, L));
  out.push_back(mean_check("weighted: m_T martingale", column([](auto& s) { return s.m; }), 0.0, L));
  out.push_back(mean_check("weighted: M-hat(b) G-martingale", column([](auto& s) { return s.Mhat; }), 0.0, L));
  out.push_back(mean_check("weighted: M-hat(b) increment on {tau > 1}", column([](auto& s) { return s.Mhat_late; }),
                           0.0, L));
  out.push_back(mean_check("weighted: Z_T optional projection", column([](auto& s) { return s.z_proj; }), 0.0, L));
  out.push_back(mean_check("weighted: [X] - <X>^F", column([](auto& s) { return s.bracket_f; }), 0.0, L));
  out.push_back(mean_check("weighted: [X-hat(b)] - <X-hat(b)>^G", column([](auto& s) { return s.bracket_g; }), 0.0, L));
  for (std::size_t k = 0; k < cfg.tau_law_points.size(); ++k) {
    const double t = cfg.tau_law_points[k];
    out.push_back(mean_check("weighted: P(tau <= " + std::to_string(t).substr(0, 4) + ")",
                             column([k](auto& s) { return s.law[k]; }), weighted_tau_cdf(model, t), cfg.law_z_limit));
  }
  return out;
}

std::vector<StatCheck> last_passage_checks(const StatSuiteConfig& cfg) {
  const auto& model = cfg.last_passage;
  const RuinFunction psi = model.ruin();
  const MarketModel market = model.market();
  const double t = cfg.t_last_passage;
  const double s_mid = 0.5 * t;
  auto samples = map_paths<LastPassageSample>(
      cfg.paths,
      [&](std::size_t i) {
        const auto full = simulate_certified_counts(model, psi, t, path_seed(cfg.seed ^ 0x5bd1e995ULL, i));
        const PassageTime pt = tau_last_passage(full, model, psi);
        // F-adapted quantities only need the path up to t; tau comes from the certified path
        const auto counts = truncate_counts(full, t);
        AzemaTriple az = azema_last_passage(counts, model, psi);
        az.tau = pt.tau;
        az.certified = pt.certified;
        const auto X = stochastic_exponential(counts, market);
        LastPassageSample s;
        s.m = az.m.value(t) - 1.0;
        s.z_proj = az.Z.value(t) - (az.tau > t ? 1.0 : 0.0);
        if (az.tau < t) {
          const auto fb = f_brackets(X, market, az);
          const auto Xhat = jeulin_hat_path(X, fb.xm, az, Side::after);
          s.Xhat = Xhat.value(t);
          s.Xhat_late = az.tau < s_mid ? Xhat.value(t) - Xhat.value(s_mid) : 0.0;
          const auto ab = g_bracket_after(X, market, az);
          s.bracket_g = sum_sq_jumps(X, az.tau, t) - ab.general.cumulative(t);
        }
        return s;
      },
      cfg.batch);
  auto column = [&](auto&& get) {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.push_back(get(s));
    return v;
  };
  const double L = cfg.z_limit;
  return {mean_check("last passage: m_t martingale", column([](auto& s) { return s.m; }), 0.0, L),
          mean_check("last passage: Z_t optional projection", column([](auto& s) { return s.z_proj; }), 0.0, L),
          mean_check("last passage: X-hat(a) G-martingale", column([](auto& s) { return s.Xhat; }), 0.0, L),
          mean_check("last passage: X-hat(a) increment on {tau < t/2}", column([](auto& s) { return s.Xhat_late; }),
                     0.0, L),
          mean_check("last passage: [X-hat(a)] - <X-hat(a)>^G", column([](auto& s) { return s.bracket_g; }), 0.0,
                     L)};
}

std::vector<StatCheck> ruin_checks(const StatSuiteConfig& cfg) {
  const auto& model = cfg.last_passage;
  const RuinFunction psi = model.ruin();
  const double x_escape = escape_level_for_bias(model.lambda, model.mu(), 1e-7);
  std::vector<StatCheck> out;
  for (std::size_t k = 0; k < cfg.ruin_points.size(); ++k) {
    const double x = cfg.ruin_points[k];
    const RuinEstimate e =
        ruin_probability_mc(x, model.lambda, model.mu(), cfg.ruin_paths, cfg.seed + 101 * (k + 1), x_escape, cfg.batch);
    StatCheck c;
    c.name = "ruin: Psi(" + std::to_string(x).substr(0, 4) + ") vs Monte Carlo";
    c.n = e.paths;
    c.mean = e.estimate;
    c.expected = psi.value(x);
    c.standard_error = e.standard_error;
    c.limit = cfg.ruin_z_limit;
    c.slack = cfg.ruin_slack + e.bias_bound;
    const double gap = std::abs(c.mean - c.expected);
    c.z = c.standard_error > 0.0 ? gap / c.standard_error : 0.0;
    c.pass = gap <= c.limit * c.standard_error + c.slack;
    out.push_back(c);
  }
  return out;
}

nlohmann::json StatSuiteReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) arr.push_back(c.to_json());
  return {{"checks", arr}, {"pass", pass}};
}

StatSuiteReport run_statistical_suite(const StatSuiteConfig& cfg) {
  StatSuiteReport r;
  for (auto part : {weighted_checks(cfg), last_passage_checks(cfg), ruin_checks(cfg)})
    r.checks.insert(r.checks.end(), part.begin(), part.end());
  r.pass = std::all_of(r.checks.begin(), r.checks.end(), [](const StatCheck& c) { return c.pass; });
  return r;
}

}  // namespace enlab
