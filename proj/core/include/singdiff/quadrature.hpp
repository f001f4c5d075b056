#pragma once

// Double-exponential quadrature on finite and half-infinite intervals.
//
// Both rules sum the integrand over the nodes t = k*h of a transformed
// variable and halve h until two successive estimates agree to the requested
// relative tolerance. Nodes of coarser levels are reused, so every level costs
// only the new odd-k evaluations.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "singdiff/errors.hpp"

namespace singdiff::quad {

struct Options {
  double rel_tol = 1e-10;
  int min_level = 3;
  int max_level = 12;
};

struct Result {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
};

namespace detail {

// Beyond |t| = 3.5 the tanh-sinh nodes lie within 1e-22 (relative) of the
// endpoints. Exp-sinh needs |t| = 4.5 before its nodes sit e^{-70} from the
// offset, so the mass skipped next to a bounded integrand is negligible.
inline constexpr double kTanhSinhTMax = 3.5;
inline constexpr double kExpSinhTMax = 4.5;

// Terms decay double-exponentially in t once past the integrand's bulk, so
// the coarse level tells where the sum can be truncated: one unit beyond the
// last integer node that still contributes above 1e-18 of the total.
template <std::size_t N>
double effective_t_max(const std::array<double, N>& coarse, double total, double cap) {
  int last = 0;
  for (int k = 1; k < static_cast<int>(N); ++k) {
    if (std::fabs(coarse[k]) > 1e-18 * std::fabs(total)) last = k;
  }
  return std::min(cap, last + 1.0);
}

inline bool converged(double previous, double current, double rel_tol) {
  const double diff = std::fabs(current - previous);
  return diff <= rel_tol * std::fabs(current) || std::fabs(current) < 1e-300;
}

}  // namespace detail

/// Integral of f over [a, b] by the tanh-sinh rule. Endpoint singularities of
/// integrable type are tolerated because f is never evaluated at a or b.
template <class F>
Result tanh_sinh(F&& f, double a, double b, const Options& opt = {}) {
  if (!(b > a)) {
    if (a == b) return {};
    throw Error(ErrorCode::InvalidParameter, "tanh_sinh: empty or reversed interval");
  }
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  constexpr double kHalfPi = 0.5 * std::numbers::pi;

  int evals = 0;
  // Contribution of the symmetric node pair at parameter t (t > 0).
  auto pair = [&](double t) {
    const double u = kHalfPi * std::sinh(t);
    const double cu = std::cosh(u);
    const double w = kHalfPi * std::cosh(t) / (cu * cu);
    // distance of the node from the nearest endpoint, computed without
    // cancellation: 1 - tanh(u) = exp(-u) / cosh(u)
    const double gap = half * std::exp(-u) / cu;
    double s = 0.0;
    if (gap > 0.0) {
      s = f(a + gap) + f(b - gap);
      evals += 2;
    }
    return w * s;
  };

  double sum = kHalfPi * f(mid);
  ++evals;
  double h = 1.0;
  std::array<double, 4> coarse{};
  for (int k = 1; k <= 3; ++k) sum += (coarse[k] = pair(k));
  const double t_max = detail::effective_t_max(coarse, sum, detail::kTanhSinhTMax);
  double estimate = h * half * sum;

  for (int level = 1; level <= opt.max_level; ++level) {
    h *= 0.5;
    for (double t = h; t <= t_max; t += 2.0 * h) sum += pair(t);
    const double next = h * half * sum;
    if (!std::isfinite(next)) {
      throw Error(ErrorCode::QuadratureFailure, "tanh_sinh: non-finite estimate");
    }
    if (level >= opt.min_level && detail::converged(estimate, next, opt.rel_tol)) {
      return {next, std::fabs(next - estimate), evals};
    }
    estimate = next;
  }
  throw Error(ErrorCode::QuadratureFailure,
              "tanh_sinh: no convergence to rel_tol " + std::to_string(opt.rel_tol));
}

/// Integral of f over [a, inf) by the exp-sinh rule; `scale` sets the length
/// over which the integrand decays so nodes are spread where the mass is.
template <class F>
Result exp_sinh(F&& f, double a, double scale = 1.0, const Options& opt = {}) {
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "exp_sinh: scale must be positive");
  }
  constexpr double kHalfPi = 0.5 * std::numbers::pi;
  int evals = 0;
  auto node = [&](double t) {
    const double e = std::exp(kHalfPi * std::sinh(t));
    const double w = kHalfPi * std::cosh(t) * e;
    ++evals;
    const double v = f(a + scale * e);
    return v == 0.0 ? 0.0 : w * v;
  };

  double sum = node(0.0);
  double h = 1.0;
  std::array<double, 5> right{}, left{};
  for (int k = 1; k <= 4; ++k) {
    sum += (right[k] = node(k));
    sum += (left[k] = node(-k));
  }
  const double t_hi = detail::effective_t_max(right, sum, detail::kExpSinhTMax);
  const double t_lo = detail::effective_t_max(left, sum, detail::kExpSinhTMax);
  double estimate = h * scale * sum;

  for (int level = 1; level <= opt.max_level; ++level) {
    h *= 0.5;
    for (double t = h; t <= t_hi; t += 2.0 * h) sum += node(t);
    for (double t = h; t <= t_lo; t += 2.0 * h) sum += node(-t);
    const double next = h * scale * sum;
    if (!std::isfinite(next)) {
      throw Error(ErrorCode::QuadratureFailure, "exp_sinh: non-finite estimate");
    }
    if (level >= opt.min_level && detail::converged(estimate, next, opt.rel_tol)) {
      return {next, std::fabs(next - estimate), evals};
    }
    estimate = next;
  }
  throw Error(ErrorCode::QuadratureFailure,
              "exp_sinh: no convergence to rel_tol " + std::to_string(opt.rel_tol));
}

}  // namespace singdiff::quad
