#pragma once

#include <Eigen/Dense>

namespace singdiff {

/// State dimension is small (2..4); fixed-capacity Eigen types keep the Euler
/// loop free of heap allocation.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

/// Axis-aligned box [lo, hi].
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& x) const {
    return ((x.array() >= lo.array()) && (x.array() <= hi.array())).all();
  }
  bool unbounded() const { return !lo.allFinite() || !hi.allFinite(); }
  double diameter() const { return (hi - lo).norm(); }
  double volume() const { return (hi - lo).prod(); }
  Vec center() const { return 0.5 * (lo + hi); }
};

inline Box make_box(int dim, double lo, double hi) {
  return Box{Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
}

}  // namespace singdiff
