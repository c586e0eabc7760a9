#include "enlab/interval_set.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace enlab {

bool Interval::empty() const {
  if (lo > hi) return true;
  if (lo == hi) return lo_open || hi_open;
  return false;
}

bool Interval::contains(double t) const {
  const bool left = lo_open ? t > lo : t >= lo;
  const bool right = hi_open ? t < hi : t <= hi;
  return left && right;
}

std::string Interval::str() const {
  std::ostringstream os;
  os.precision(17);
  os << (lo_open ? "(" : "[") << lo << ", " << hi << (hi_open ? ")" : "]");
  return os.str();
}

namespace {

// Two intervals overlap or touch so that their union is one interval.
bool joinable(const Interval& a, const Interval& b) {
  if (b.lo < a.hi) return true;
  if (b.lo == a.hi) return !(a.hi_open && b.lo_open);
  return false;
}

}  // namespace

IntervalSet::IntervalSet(std::vector<Interval> parts) {
  parts.erase(std::remove_if(parts.begin(), parts.end(), [](const Interval& i) { return i.empty(); }),
              parts.end());
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) {
    if (a.lo != b.lo) return a.lo < b.lo;
    return !a.lo_open && b.lo_open;
  });
  for (const auto& part : parts) {
    if (!parts_.empty() && joinable(parts_.back(), part)) {
      Interval& last = parts_.back();
      if (part.hi > last.hi) {
        last.hi = part.hi;
        last.hi_open = part.hi_open;
      } else if (part.hi == last.hi) {
        last.hi_open = last.hi_open && part.hi_open;
      }
      if (part.lo == last.lo) last.lo_open = last.lo_open && part.lo_open;
    } else {
      parts_.push_back(part);
    }
  }
}

IntervalSet IntervalSet::single(double lo, double hi, bool lo_open, bool hi_open) {
  return IntervalSet({Interval{lo, hi, lo_open, hi_open}});
}

bool IntervalSet::contains(double t) const {
  return std::any_of(parts_.begin(), parts_.end(), [t](const Interval& i) { return i.contains(t); });
}

double IntervalSet::length() const {
  double acc = 0.0;
  for (const auto& p : parts_) acc += p.length();
  return acc;
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
  std::vector<Interval> all = parts_;
  all.insert(all.end(), other.parts_.begin(), other.parts_.end());
  return IntervalSet(std::move(all));
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  std::vector<Interval> out;
  for (const auto& a : parts_) {
    for (const auto& b : other.parts_) {
      Interval c;
      if (a.lo > b.lo) {
        c.lo = a.lo;
        c.lo_open = a.lo_open;
      } else if (b.lo > a.lo) {
        c.lo = b.lo;
        c.lo_open = b.lo_open;
      } else {
        c.lo = a.lo;
        c.lo_open = a.lo_open || b.lo_open;
      }
      if (a.hi < b.hi) {
        c.hi = a.hi;
        c.hi_open = a.hi_open;
      } else if (b.hi < a.hi) {
        c.hi = b.hi;
        c.hi_open = b.hi_open;
      } else {
        c.hi = a.hi;
        c.hi_open = a.hi_open || b.hi_open;
      }
      if (!c.empty()) out.push_back(c);
    }
  }
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::subtract(const IntervalSet& other) const {
  std::vector<Interval> current = parts_;
  for (const auto& b : other.parts_) {
    std::vector<Interval> next;
    for (const auto& a : current) {
      Interval left{a.lo, std::min(a.hi, b.lo), a.lo_open, false};
      if (b.lo < a.hi || (b.lo == a.hi && !b.lo_open)) {
        left.hi = b.lo;
        left.hi_open = !b.lo_open;
      } else {
        left.hi = a.hi;
        left.hi_open = a.hi_open;
      }
      Interval right{std::max(a.lo, b.hi), a.hi, false, a.hi_open};
      if (b.hi > a.lo || (b.hi == a.lo && !b.hi_open)) {
        right.lo = b.hi;
        right.lo_open = !b.hi_open;
      } else {
        right.lo = a.lo;
        right.lo_open = a.lo_open;
      }
      const bool disjoint = b.hi < a.lo || b.lo > a.hi || (b.hi == a.lo && (b.hi_open || a.lo_open)) ||
                            (b.lo == a.hi && (b.lo_open || a.hi_open));
      if (disjoint) {
        next.push_back(a);
        continue;
      }
      if (!left.empty() && left.lo <= left.hi) next.push_back(left);
      if (!right.empty() && right.lo <= right.hi) next.push_back(right);
    }
    current = std::move(next);
  }
  return IntervalSet(std::move(current));
}

bool IntervalSet::approx_equal(const IntervalSet& other, double tol) const {
  if (parts_.size() != other.parts_.size()) return false;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (std::abs(parts_[i].lo - other.parts_[i].lo) > tol) return false;
    if (std::abs(parts_[i].hi - other.parts_[i].hi) > tol) return false;
  }
  return true;
}

nlohmann::json IntervalSet::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : parts_)
    out.push_back({{"lo", p.lo}, {"hi", p.hi}, {"lo_open", p.lo_open}, {"hi_open", p.hi_open}});
  return out;
}

}  // namespace enlab
