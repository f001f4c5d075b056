#pragma once

// Smooth test functions with closed-form first and second derivatives.
//
// Compactly supported members are built as polynomial x bump products; the
// combinators propagate the full second-order jet by the product and sum
// rules, so derived functions keep exact derivatives.

#include <functional>
#include <memory>

#include "singdiff/types.hpp"

namespace singdiff {

struct Jet {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

class TestFunction {
 public:
  using JetFn = std::function<Jet(const Vec&)>;

  TestFunction(int dim, JetFn jet, Box support) : dim_(dim), jet_(std::move(jet)), support_(std::move(support)) {}

  int dim() const { return dim_; }
  Jet jet(const Vec& x) const { return jet_(x); }
  double value(const Vec& x) const { return jet_(x).value; }
  Vec grad(const Vec& x) const { return jet_(x).grad; }
  Mat hess(const Vec& x) const { return jet_(x).hess; }
  /// The function vanishes identically outside this box (may be unbounded).
  const Box& support() const { return support_; }

 private:
  int dim_;
  JetFn jet_;
  Box support_;
};

TestFunction constant_fn(int dim, double c);

/// x_i (0-based coordinate index).
TestFunction coordinate_fn(int dim, int i);

/// exp(1 - 1/(1 - |x - c|^2 / R^2)) inside the ball, 0 outside; equals 1 at c.
TestFunction bump_fn(const Vec& center, double radius);

TestFunction product(const TestFunction& u, const TestFunction& v);
TestFunction sum(const TestFunction& u, const TestFunction& v);
TestFunction scaled(const TestFunction& u, double alpha);

/// Linear combination alpha*u + beta*v.
TestFunction combine(double alpha, const TestFunction& u, double beta, const TestFunction& v);

/// Centered finite-difference gradient and Hessian of u.value.
Jet finite_difference_jet(const TestFunction& u, const Vec& x, double step);

}  // namespace singdiff
