#include "singdiff/testfn.hpp"

#include <cmath>
#include <limits>

#include "singdiff/errors.hpp"

namespace singdiff {

namespace {

Box whole_space(int dim) {
  const double inf = std::numeric_limits<double>::infinity();
  return make_box(dim, -inf, inf);
}

Jet zero_jet(int dim) {
  return Jet{0.0, Vec::Zero(dim), Mat::Zero(dim, dim)};
}

void require_same_dim(const TestFunction& u, const TestFunction& v) {
  if (u.dim() != v.dim()) throw Error(ErrorCode::InvalidParameter, "test functions differ in dimension");
}

}  // namespace

TestFunction constant_fn(int dim, double c) {
  return TestFunction(
      dim,
      [dim, c](const Vec&) {
        Jet j = zero_jet(dim);
        j.value = c;
        return j;
      },
      whole_space(dim));
}

TestFunction coordinate_fn(int dim, int i) {
  if (i < 0 || i >= dim) throw Error(ErrorCode::IndexOutOfRange, "coordinate index outside [0, dim)");
  return TestFunction(
      dim,
      [dim, i](const Vec& x) {
        Jet j = zero_jet(dim);
        j.value = x[i];
        j.grad[i] = 1.0;
        return j;
      },
      whole_space(dim));
}

TestFunction bump_fn(const Vec& center, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidParameter, "bump radius must be positive");
  const int dim = static_cast<int>(center.size());
  const double r2 = radius * radius;
  Box support{center.array() - radius, center.array() + radius};
  return TestFunction(
      dim,
      [dim, center, r2](const Vec& x) {
        Jet j = zero_jet(dim);
        const Vec d = x - center;
        const double q = d.squaredNorm() / r2;
        if (q >= 1.0) return j;
        const double one_minus_q = 1.0 - q;
        const double phi = std::exp(1.0 - 1.0 / one_minus_q);
        // derivatives of phi with respect to q
        const double dphi = -phi / (one_minus_q * one_minus_q);
        const double d2phi = phi * (2.0 * q - 1.0) / std::pow(one_minus_q, 4);
        const Vec dq = 2.0 * d / r2;
        j.value = phi;
        j.grad = dphi * dq;
        j.hess = d2phi * dq * dq.transpose() + (2.0 * dphi / r2) * Mat::Identity(dim, dim);
        return j;
      },
      std::move(support));
}

TestFunction product(const TestFunction& u, const TestFunction& v) {
  require_same_dim(u, v);
  Box support{u.support().lo.cwiseMax(v.support().lo), u.support().hi.cwiseMin(v.support().hi)};
  return TestFunction(
      u.dim(),
      [u, v](const Vec& x) {
        const Jet a = u.jet(x);
        const Jet b = v.jet(x);
        Jet j;
        j.value = a.value * b.value;
        j.grad = a.value * b.grad + b.value * a.grad;
        j.hess = a.value * b.hess + b.value * a.hess + a.grad * b.grad.transpose() +
                 b.grad * a.grad.transpose();
        return j;
      },
      std::move(support));
}

TestFunction combine(double alpha, const TestFunction& u, double beta, const TestFunction& v) {
  require_same_dim(u, v);
  Box support{u.support().lo.cwiseMin(v.support().lo), u.support().hi.cwiseMax(v.support().hi)};
  return TestFunction(
      u.dim(),
      [alpha, beta, u, v](const Vec& x) {
        const Jet a = u.jet(x);
        const Jet b = v.jet(x);
        return Jet{alpha * a.value + beta * b.value, alpha * a.grad + beta * b.grad,
                   alpha * a.hess + beta * b.hess};
      },
      std::move(support));
}

TestFunction sum(const TestFunction& u, const TestFunction& v) { return combine(1.0, u, 1.0, v); }

TestFunction scaled(const TestFunction& u, double alpha) {
  return TestFunction(
      u.dim(),
      [u, alpha](const Vec& x) {
        const Jet a = u.jet(x);
        return Jet{alpha * a.value, alpha * a.grad, alpha * a.hess};
      },
      u.support());
}

Jet finite_difference_jet(const TestFunction& u, const Vec& x, double step) {
  const int dim = u.dim();
  Jet j = zero_jet(dim);
  j.value = u.value(x);
  for (int i = 0; i < dim; ++i) {
    Vec xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    const double fp = u.value(xp);
    const double fm = u.value(xm);
    j.grad[i] = (fp - fm) / (2.0 * step);
    j.hess(i, i) = (fp - 2.0 * j.value + fm) / (step * step);
    for (int k = 0; k < i; ++k) {
      Vec xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += step; xpp[k] += step;
      xpm[i] += step; xpm[k] -= step;
      xmp[i] -= step; xmp[k] += step;
      xmm[i] -= step; xmm[k] -= step;
      const double h = (u.value(xpp) - u.value(xpm) - u.value(xmp) + u.value(xmm)) / (4.0 * step * step);
      j.hess(i, k) = h;
      j.hess(k, i) = h;
    }
  }
  return j;
}

}  // namespace singdiff
