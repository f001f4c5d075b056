#include "singdiff/kernels.hpp"

#include <cmath>
#include <string>

#include "singdiff/errors.hpp"
#include "singdiff/quadrature.hpp"

namespace singdiff {

void KernelParams::validate() const {
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw Error(ErrorCode::InvalidParameter, "mass m must be positive and finite");
  }
  if (cuts.empty()) throw Error(ErrorCode::InvalidParameter, "cut sequence is empty");
  if (cuts.front() != 1.0) throw Error(ErrorCode::InvalidParameter, "first cut c_1 must equal 1");
  for (std::size_t k = 1; k < cuts.size(); ++k) {
    if (!(cuts[k] > cuts[k - 1]) || !std::isfinite(cuts[k])) {
      throw Error(ErrorCode::InvalidParameter,
                  "cuts must be strictly increasing (index " + std::to_string(k) + ")");
    }
  }
  if (n < 1 || n > static_cast<int>(cuts.size())) {
    throw Error(ErrorCode::InvalidParameter, "layer count n must lie in [1, cuts.size()]");
  }
  if (!(gamma > 0.0 && gamma < 2.0)) {
    throw Error(ErrorCode::InvalidParameter, "gamma must lie in (0, 2)");
  }
  if (!(quad_tol > 0.0 && quad_tol <= 1e-3)) {
    throw Error(ErrorCode::InvalidParameter, "quad_tol must lie in (0, 1e-3]");
  }
}

double KernelParams::field_variance() const {
  return std::log(cuts.at(static_cast<std::size_t>(n) - 1));
}

std::vector<double> dyadic_cuts(int count) {
  std::vector<double> cuts;
  cuts.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) cuts.push_back(std::ldexp(1.0, k));
  return cuts;
}

KernelParams make_kernel_params(double m, int n, double gamma, double quad_tol) {
  KernelParams p;
  p.m = m;
  p.cuts = dyadic_cuts(n);
  p.n = n;
  p.gamma = gamma;
  p.quad_tol = quad_tol;
  return p;
}

namespace {

quad::Options options_for(const KernelParams& params) {
  quad::Options opt;
  opt.rel_tol = params.quad_tol;
  return opt;
}

// k_m without re-validating params; the hot path of nested quadratures.
double k_m_unchecked(double m, double z_norm, const quad::Options& opt) {
  const double a = 0.5 * m * m * z_norm * z_norm;
  auto integrand = [a](double s) { return 0.5 * std::exp(-a / s - 0.5 * s); };
  // exp(-a/s - s/2) peaks at s = sqrt(2a) = m|z|.
  const double peak = m * z_norm;
  double total = 0.0;
  if (peak > 0.0) total += quad::tanh_sinh(integrand, 0.0, peak, opt).value;
  total += quad::exp_sinh(integrand, peak, 2.0, opt).value;
  return total;
}

double layer_integral_unchecked(double m, double a, double b, double r,
                                const quad::Options& opt) {
  if (a == b) return 0.0;
  auto integrand = [&](double s) { return k_m_unchecked(m, s * r, opt) / s; };
  return quad::tanh_sinh(integrand, a, b, opt).value;
}

}  // namespace

double k_m(const KernelParams& params, double z_norm) {
  params.validate();
  if (!(z_norm >= 0.0)) throw Error(ErrorCode::InvalidParameter, "k_m: |z| must be >= 0");
  if (std::isinf(z_norm)) return 0.0;
  return k_m_unchecked(params.m, z_norm, options_for(params));
}

double green_massive(const KernelParams& params, double r) {
  params.validate();
  if (!(r > 0.0)) {
    throw Error(ErrorCode::SingularArgument, "green_massive diverges at r <= 0");
  }
  if (std::isinf(r)) return 0.0;
  const double m2 = params.m * params.m;
  auto integrand = [m2, r](double s) { return std::exp(-0.5 * m2 * s - 0.5 * r * r / s) / (2.0 * s); };
  // log-integrand derivative vanishes where m^2 s^2 + 2 s - r^2 = 0.
  const double peak = (std::sqrt(1.0 + m2 * r * r) - 1.0) / m2;
  const auto opt = options_for(params);
  const double head = quad::tanh_sinh(integrand, 0.0, peak, opt).value;
  const double tail = quad::exp_sinh(integrand, peak, 2.0 / m2, opt).value;
  return head + tail;
}

double green_massive_layered(const KernelParams& params, double r) {
  params.validate();
  if (!(r > 0.0)) {
    throw Error(ErrorCode::SingularArgument, "green_massive diverges at r <= 0");
  }
  const auto opt = options_for(params);
  const double m = params.m;
  auto integrand = [&](double s) { return k_m_unchecked(m, s * r, opt) / s; };
  // k_m(s r) decays like exp(-m s r).
  return quad::exp_sinh(integrand, 1.0, 1.0 / (m * r), opt).value;
}

double layer_integral(const KernelParams& params, double a, double b, double r) {
  params.validate();
  if (!(a > 0.0 && b >= a)) throw Error(ErrorCode::InvalidParameter, "layer_integral: need 0 < a <= b");
  if (!(r >= 0.0)) throw Error(ErrorCode::InvalidParameter, "layer_integral: r must be >= 0");
  return layer_integral_unchecked(params.m, a, b, r, options_for(params));
}

double layer_covariance(const KernelParams& params, int k, double r) {
  params.validate();
  if (k < 1 || k > static_cast<int>(params.cuts.size())) {
    throw Error(ErrorCode::IndexOutOfRange, "layer index " + std::to_string(k) + " outside [1, N]");
  }
  if (!(r >= 0.0)) throw Error(ErrorCode::InvalidParameter, "layer_covariance: r must be >= 0");
  if (k == 1) return 0.0;
  const auto idx = static_cast<std::size_t>(k);
  return layer_integral_unchecked(params.m, params.cuts[idx - 2], params.cuts[idx - 1], r,
                                  options_for(params));
}

double field_covariance(const KernelParams& params, double r) {
  double total = 0.0;
  for (int k = 2; k <= params.n; ++k) total += layer_covariance(params, k, r);
  return total;
}

}  // namespace singdiff
