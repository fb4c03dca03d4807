#pragma once

#include "ltt/types.hpp"

#include <functional>
#include <optional>

namespace ltt {

using ScalarFn = std::function<double(double)>;

// Bisection for f(t) = target with f non-increasing on the bracket.
// Throws NoRootError unless f(lo) >= target >= f(hi).
double bisect_decreasing(const ScalarFn& f, double target, Interval bracket, double tol);

// Smallest t in the bracket with f(t) <= target, for curves that need not be
// monotone: a uniform scan locates the first grid cell where the condition
// starts to hold, then bisection refines inside that cell. Returns nullopt if
// no grid point satisfies the condition.
std::optional<double> first_crossing_below(const ScalarFn& f, double target, Interval bracket,
                                           int grid_points, double tol);

}  // namespace ltt
