#include "enlab/jump_path.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "enlab/errors.hpp"

namespace enlab {

PiecewiseJumpPath::PiecewiseJumpPath(double horizon, std::vector<double> event_times,
                                     std::vector<Segment> segments)
    : horizon_(horizon), events_(std::move(event_times)), segments_(std::move(segments)) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw ParameterError("path horizon must be finite and > 0");
  if (segments_.size() != events_.size() + 1)
    throw ModelError("path needs one more segment than breakpoints");
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (!(events_[i] > 0.0) || events_[i] > horizon_) throw ModelError("breakpoint outside (0, horizon]");
    if (i > 0 && !(events_[i] > events_[i - 1])) throw ModelError("breakpoints must be strictly increasing");
  }
  jumps_.resize(events_.size());
  for (std::size_t i = 0; i < events_.size(); ++i)
    jumps_[i] = segments_[i + 1].value(events_[i]) - segments_[i].value(events_[i]);
}

void PiecewiseJumpPath::check_time(double t) const {
  if (t < 0.0 || t > horizon_) throw RangeError("time " + std::to_string(t) + " outside path horizon");
}

std::size_t PiecewiseJumpPath::segment_index(double t) const {
  check_time(t);
  return static_cast<std::size_t>(std::upper_bound(events_.begin(), events_.end(), t) - events_.begin());
}

double PiecewiseJumpPath::value(double t) const { return segments_[segment_index(t)].value(t); }

double PiecewiseJumpPath::left_limit(double t) const {
  check_time(t);
  const auto idx = static_cast<std::size_t>(std::lower_bound(events_.begin(), events_.end(), t) - events_.begin());
  return segments_[idx].value(t);
}

double PiecewiseJumpPath::jump_at(double t) const {
  auto it = std::lower_bound(events_.begin(), events_.end(), t);
  if (it == events_.end() || *it != t) return 0.0;
  return jumps_[static_cast<std::size_t>(it - events_.begin())];
}

std::vector<double> PiecewiseJumpPath::jump_times(double tol) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < events_.size(); ++i)
    if (std::abs(jumps_[i]) > tol) out.push_back(events_[i]);
  return out;
}

nlohmann::json PiecewiseJumpPath::to_json() const {
  nlohmann::json events = nlohmann::json::array();
  for (std::size_t i = 0; i < events_.size(); ++i) events.push_back({{"t", events_[i]}, {"jump", jumps_[i]}});
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : segments_) {
    if (!s.is_closed()) {
      segs.push_back({{"generic", s.label()}});
      continue;
    }
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& term : s.closed().terms()) terms.push_back({{"coeffs", term.coeffs}, {"rate", term.rate}});
    segs.push_back({{"origin", s.closed().origin()}, {"terms", terms}});
  }
  return {{"horizon", horizon_}, {"events", events}, {"segments", segs}, {"x0", initial_value()}};
}

PiecewiseJumpPath PiecewiseJumpPath::from_json(const nlohmann::json& j) {
  std::vector<double> times;
  std::vector<double> stored_jumps;
  for (const auto& e : j.at("events")) {
    times.push_back(e.at("t").get<double>());
    stored_jumps.push_back(e.at("jump").get<double>());
  }
  std::vector<Segment> segs;
  for (const auto& s : j.at("segments")) {
    if (s.contains("generic")) throw ModelError("generic segments cannot be restored from JSON");
    std::vector<ExpPolyTerm> terms;
    for (const auto& term : s.at("terms"))
      terms.push_back({term.at("coeffs").get<std::vector<double>>(), term.at("rate").get<double>()});
    segs.emplace_back(ExpPoly(s.at("origin").get<double>(), std::move(terms)));
  }
  PiecewiseJumpPath path(j.at("horizon").get<double>(), std::move(times), std::move(segs));
  for (std::size_t i = 0; i < stored_jumps.size(); ++i) {
    const double scale = std::max(1.0, std::abs(stored_jumps[i]));
    if (std::abs(path.jumps()[i] - stored_jumps[i]) > 1e-12 * scale)
      throw ModelError("stored jump inconsistent with segments");
  }
  if (std::abs(path.initial_value() - j.at("x0").get<double>()) > 1e-12 * std::max(1.0, std::abs(path.initial_value())))
    throw ModelError("stored x0 inconsistent with first segment");
  return path;
}

void MarketModel::validate() const {
  if (!(poisson_rate > 0.0)) throw ParameterError("poisson rate must be > 0");
  if (!(jump_multiplier > -1.0)) throw ParameterError("jump multiplier must exceed -1 to keep X positive");
  if (jump_multiplier == 0.0) throw ParameterError("jump multiplier must be nonzero");
  if (!(initial_price > 0.0)) throw ParameterError("initial price must be > 0");
}

PoissonStream::PoissonStream(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
  if (rate < 0.0) throw ParameterError("poisson rate must be >= 0");
}

double PoissonStream::next() {
  clock_ += rng_.exponential(rate_);
  return clock_;
}

PiecewiseJumpPath counting_path(const std::vector<double>& times, double horizon) {
  std::vector<Segment> segs;
  segs.reserve(times.size() + 1);
  for (std::size_t k = 0; k <= times.size(); ++k)
    segs.emplace_back(ExpPoly::constant(static_cast<double>(k), k == 0 ? 0.0 : times[k - 1]));
  return PiecewiseJumpPath(horizon, times, std::move(segs));
}

PiecewiseJumpPath simulate_poisson(double rate, double horizon, std::uint64_t seed) {
  if (rate < 0.0) throw ParameterError("poisson rate must be >= 0");
  if (!(horizon > 0.0)) throw ParameterError("horizon must be > 0");
  PoissonStream stream(rate, seed);
  std::vector<double> times;
  for (double t = stream.next(); t <= horizon; t = stream.next()) times.push_back(t);
  return counting_path(times, horizon);
}

std::vector<double> counting_events(const PiecewiseJumpPath& counts) {
  const auto& jumps = counts.jumps();
  for (std::size_t i = 0; i < jumps.size(); ++i)
    if (jumps[i] != 1.0) throw ModelError("counting path must have unit jumps");
  for (const auto& s : counts.segments())
    if (!s.is_closed() || s.closed().degree() > 0 ||
        (s.closed().terms().size() == 1 && s.closed().terms()[0].rate != 0.0))
      throw ModelError("counting path must be piecewise constant");
  if (counts.initial_value() != 0.0) throw ModelError("counting path must start at 0");
  return counts.event_times();
}

PiecewiseJumpPath compensated_martingale(const PiecewiseJumpPath& counts, double rate) {
  const auto times = counting_events(counts);
  std::vector<Segment> segs;
  for (std::size_t k = 0; k <= times.size(); ++k) {
    const double start = k == 0 ? 0.0 : times[k - 1];
    segs.emplace_back(ExpPoly::linear(static_cast<double>(k) - rate * start, -rate, start));
  }
  return PiecewiseJumpPath(counts.horizon(), times, std::move(segs));
}

PiecewiseJumpPath stochastic_exponential(const PiecewiseJumpPath& counts, const MarketModel& model) {
  if (!(model.jump_multiplier > -1.0)) throw ParameterError("jump multiplier <= -1 breaks positivity");
  model.validate();
  const auto times = counting_events(counts);
  const double lambda = model.poisson_rate;
  const double psi = model.jump_multiplier;
  std::vector<Segment> segs;
  double level = model.initial_price;  // X at the segment start
  for (std::size_t k = 0; k <= times.size(); ++k) {
    const double start = k == 0 ? 0.0 : times[k - 1];
    if (k > 0) {
      const double prev_start = k == 1 ? 0.0 : times[k - 2];
      level = level * std::exp(-lambda * psi * (start - prev_start)) * (1.0 + psi);
    }
    segs.emplace_back(ExpPoly::exponential(level, -lambda * psi, start));
  }
  return PiecewiseJumpPath(counts.horizon(), times, std::move(segs));
}

}  // namespace enlab
