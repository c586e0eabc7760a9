#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "enlab/rng.hpp"
#include "enlab/segment.hpp"

namespace enlab {

// Cadlag path on [0, T]. Breakpoints b_1 < ... < b_k lie in (0, T];
// segment i covers [b_i, b_{i+1}) with b_0 = 0 and the last segment closed at T.
// Jumps are derived as segment_i(b_i) - segment_{i-1}(b_i) and may be zero.
class PiecewiseJumpPath {
 public:
  PiecewiseJumpPath() = default;
  PiecewiseJumpPath(double horizon, std::vector<double> event_times, std::vector<Segment> segments);

  double horizon() const { return horizon_; }
  const std::vector<double>& event_times() const { return events_; }
  const std::vector<double>& jumps() const { return jumps_; }
  const std::vector<Segment>& segments() const { return segments_; }
  double initial_value() const { return segments_.front().value(0.0); }

  // Segment index in effect at t (right-continuous convention).
  std::size_t segment_index(double t) const;
  double value(double t) const;
  double left_limit(double t) const;
  // Jump at t when t is exactly a breakpoint, else 0.
  double jump_at(double t) const;
  // Start of segment i (0 for the first).
  double segment_start(std::size_t i) const { return i == 0 ? 0.0 : events_[i - 1]; }
  double segment_end(std::size_t i) const { return i == events_.size() ? horizon_ : events_[i]; }

  // Breakpoints with a jump of magnitude > tol.
  std::vector<double> jump_times(double tol = 0.0) const;

  nlohmann::json to_json() const;
  static PiecewiseJumpPath from_json(const nlohmann::json& j);

 private:
  void check_time(double t) const;

  double horizon_ = 0.0;
  std::vector<double> events_;
  std::vector<double> jumps_;
  std::vector<Segment> segments_;
};

struct MarketModel {
  double poisson_rate = 1.0;     // lambda
  double jump_multiplier = 0.5;  // psi
  double initial_price = 1.0;    // X_0

  void validate() const;
};

// Sequential Poisson arrivals from one seed; a longer horizon extends the
// same stream, so horizon extension never changes earlier events.
class PoissonStream {
 public:
  PoissonStream(double rate, std::uint64_t seed);
  double next();
  double rate() const { return rate_; }

 private:
  double rate_;
  PathRng rng_;
  double clock_ = 0.0;
};

// Counting path from event times in (0, T].
PiecewiseJumpPath counting_path(const std::vector<double>& times, double horizon);

PiecewiseJumpPath simulate_poisson(double rate, double horizon, std::uint64_t seed);

// Event times of a counting path; throws ModelError unless all jumps are +1
// and segments are constant.
std::vector<double> counting_events(const PiecewiseJumpPath& counts);

// M_t = N_t - lambda t.
PiecewiseJumpPath compensated_martingale(const PiecewiseJumpPath& counts, double rate);

// X_t = X_0 exp(-lambda psi t) (1 + psi)^{N_t}.
PiecewiseJumpPath stochastic_exponential(const PiecewiseJumpPath& counts, const MarketModel& model);

}  // namespace enlab
