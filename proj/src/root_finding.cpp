#include "ltt/root_finding.hpp"

#include "ltt/errors.hpp"

#include <cmath>
#include <string>

namespace ltt {

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!(lo <= hi)) throw DomainError("Interval: lo must not exceed hi");
}

double bisect_decreasing(const ScalarFn& f, double target, Interval bracket, double tol) {
  if (!(tol > 0.0)) throw DomainError("bisect_decreasing: tol must be positive");
  double lo = bracket.lo, hi = bracket.hi;
  const double flo = f(lo), fhi = f(hi);
  if (!(flo >= target && target >= fhi)) {
    throw NoRootError("bisect_decreasing: bracket [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "] does not straddle the target");
  }
  if (flo == target) return lo;
  if (fhi == target) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::optional<double> first_crossing_below(const ScalarFn& f, double target, Interval bracket,
                                           int grid_points, double tol) {
  if (grid_points < 2) throw DomainError("first_crossing_below: need at least two grid points");
  const double step = bracket.width() / (grid_points - 1);
  double prev = bracket.lo;
  if (f(prev) <= target) return prev;
  for (int i = 1; i < grid_points; ++i) {
    const double t = (i == grid_points - 1) ? bracket.hi : bracket.lo + i * step;
    if (f(t) <= target) {
      double lo = prev, hi = t;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) <= target) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return hi;
    }
    prev = t;
  }
  return std::nullopt;
}

}  // namespace ltt
