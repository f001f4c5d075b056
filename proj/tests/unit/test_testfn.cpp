#include <gtest/gtest.h>

#include <cmath>

#include "singdiff/rng.hpp"
#include "singdiff/testfn.hpp"

using namespace singdiff;

namespace {

Vec point(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

void expect_jet_matches_fd(const TestFunction& u, const Vec& x, double tol) {
  const Jet exact = u.jet(x);
  const Jet fd = finite_difference_jet(u, x, 1e-4);
  EXPECT_NEAR(exact.value, fd.value, 1e-15);
  EXPECT_LT((exact.grad - fd.grad).cwiseAbs().maxCoeff(), tol);
  EXPECT_LT((exact.hess - fd.hess).cwiseAbs().maxCoeff(), tol);
}

}  // namespace

TEST(TestFunction, BumpPeakAndSupport) {
  const TestFunction b = bump_fn(point(0.5, -0.5), 2.0);
  EXPECT_DOUBLE_EQ(b.value(point(0.5, -0.5)), 1.0);
  EXPECT_EQ(b.value(point(2.6, -0.5)), 0.0);
  EXPECT_DOUBLE_EQ(b.support().lo[0], -1.5);
  EXPECT_DOUBLE_EQ(b.support().hi[1], 1.5);
}

TEST(TestFunction, DerivativesMatchFiniteDifferences) {
  const TestFunction b = bump_fn(point(0.2, 0.1), 1.5);
  const TestFunction x0 = coordinate_fn(2, 0);
  const TestFunction x1 = coordinate_fn(2, 1);
  const TestFunction poly = product(product(x0, x1), b);
  const TestFunction mixed = combine(2.0, product(x0, b), -0.5, b);
  Stream s(derive_stream(3, "testfn", 0));
  for (int i = 0; i < 50; ++i) {
    const Vec x = point(-1.0 + 2.0 * s.uniform(), -1.0 + 2.0 * s.uniform());
    expect_jet_matches_fd(b, x, 1e-5);
    expect_jet_matches_fd(poly, x, 1e-5);
    expect_jet_matches_fd(mixed, x, 1e-5);
  }
}

TEST(TestFunction, ProductSupportIsIntersection) {
  const TestFunction p = product(bump_fn(point(0, 0), 1.0), bump_fn(point(1, 0), 1.0));
  EXPECT_DOUBLE_EQ(p.support().lo[0], 0.0);
  EXPECT_DOUBLE_EQ(p.support().hi[0], 1.0);
}

TEST(TestFunction, ConstantAndCoordinate) {
  const TestFunction c = constant_fn(3, 2.5);
  Vec x(3);
  x << 1, 2, 3;
  EXPECT_EQ(c.value(x), 2.5);
  EXPECT_EQ(c.grad(x).squaredNorm(), 0.0);
  const TestFunction x2 = coordinate_fn(3, 2);
  EXPECT_EQ(x2.value(x), 3.0);
  EXPECT_EQ(x2.grad(x)[2], 1.0);
  EXPECT_THROW(coordinate_fn(3, 3), std::exception);
}

TEST(TestFunction, ScaledAndSum) {
  const TestFunction b = bump_fn(point(0, 0), 1.0);
  const Vec x = point(0.3, 0.2);
  EXPECT_DOUBLE_EQ(scaled(b, 3.0).value(x), 3.0 * b.value(x));
  EXPECT_DOUBLE_EQ(sum(b, b).value(x), 2.0 * b.value(x));
}
