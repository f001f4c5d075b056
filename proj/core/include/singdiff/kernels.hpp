#pragma once

// Scalar kernels of the massive Gaussian free field in the plane.
//
//   k_m(z)      = 1/2 * int_0^inf exp(-m^2 |z|^2 / (2s) - s/2) ds
//   G^(m)(r)    = int_0^inf exp(-m^2 s/2 - r^2/(2s)) ds/(2s)
//               = int_1^inf k_m(s r) / s ds
//   Cov_k(r)    = int_{c_{k-1}}^{c_k} k_m(s r) / s ds      (layer k)
//
// All values are computed by double-exponential quadrature; Bessel closed
// forms (k_m(z) = m|z| K_1(m|z|), G^(m)(r) = K_0(m r)) are kept out of this
// module so tests can use them as independent oracles.

#include <cstddef>
#include <vector>

namespace singdiff {

struct KernelParams {
  double m = 1.0;
  /// Strictly increasing cut sequence c_1 = 1 < c_2 < ... < c_N.
  std::vector<double> cuts;
  /// Layer count of the regularized field, 1 <= n <= cuts.size().
  int n = 1;
  double gamma = 1.0;
  double quad_tol = 1e-10;

  /// Throws Error{InvalidParameter} naming the first violated constraint.
  void validate() const;

  /// Variance of X_n at any point, ln c_n (the first layer is identically 0).
  double field_variance() const;
};

/// Dyadic cuts c_k = 2^{k-1}, k = 1..count.
std::vector<double> dyadic_cuts(int count);

/// KernelParams with dyadic cuts and N = n layers.
KernelParams make_kernel_params(double m, int n, double gamma, double quad_tol = 1e-10);

/// k_m at a point of the plane given by its norm |z|.
double k_m(const KernelParams& params, double z_norm);

/// Massive Green function as a single integral over s in (0, inf).
/// Throws SingularArgument for r <= 0.
double green_massive(const KernelParams& params, double r);

/// Same function via the layered representation int_1^inf k_m(s r)/s ds
/// (nested quadrature). Slower; used to cross-check the two forms.
double green_massive_layered(const KernelParams& params, double r);

/// Covariance E[Y_k(x) Y_k(y)] at |x - y| = r for layer k (1-based). Layer 1
/// uses c_0 := c_1 and is therefore identically zero.
double layer_covariance(const KernelParams& params, int k, double r);

/// int_a^b k_m(s r)/s ds for arbitrary 0 < a <= b (un-split integral).
double layer_integral(const KernelParams& params, double a, double b, double r);

/// Covariance of X_n at distance r: sum of layer covariances k = 2..n.
double field_covariance(const KernelParams& params, double r);

}  // namespace singdiff
