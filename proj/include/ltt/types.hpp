#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <limits>
#include <vector>

namespace ltt {

// Row-major so that a single observation X_j is a contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using IndexSet = std::vector<std::size_t>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double lo_, double hi_);

  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

}  // namespace ltt
