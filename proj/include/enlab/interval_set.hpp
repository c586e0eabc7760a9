#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace enlab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;
  bool hi_open = false;

  bool empty() const;
  bool contains(double t) const;
  double length() const { return hi > lo ? hi - lo : 0.0; }
  std::string str() const;
};

// Finite union of disjoint, sorted intervals with explicit endpoint flags.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> parts);
  static IntervalSet single(double lo, double hi, bool lo_open = false, bool hi_open = false);
  static IntervalSet point(double t) { return single(t, t); }

  const std::vector<Interval>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  bool contains(double t) const;
  double length() const;

  IntervalSet unite(const IntervalSet& other) const;
  IntervalSet intersect(const IntervalSet& other) const;
  IntervalSet subtract(const IntervalSet& other) const;
  // True when both describe the same set up to `tol` on endpoints.
  bool approx_equal(const IntervalSet& other, double tol) const;

  nlohmann::json to_json() const;

 private:
  std::vector<Interval> parts_;
};

}  // namespace enlab
