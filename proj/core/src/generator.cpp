#include "singdiff/generator.hpp"

#include <algorithm>
#include <cmath>

#include "singdiff/errors.hpp"
#include "singdiff/sde.hpp"

namespace singdiff {

namespace {

double second_order_term(const Mat& d, const Mat& hess) { return 0.5 * (d.cwiseProduct(hess)).sum(); }

double lu_from(const LocalCoefficients& lc, const Jet& jet) {
  return second_order_term(lc.second_order, jet.hess) + lc.drift.dot(jet.grad);
}

}  // namespace

double apply_generator(const DiffusionSpec& spec, const TestFunction& u, const Vec& x) {
  return lu_from(local_coefficients(spec, x), u.jet(x));
}

double carre_du_champ(const DiffusionSpec& spec, const TestFunction& u, const TestFunction& v, const Vec& x) {
  const Mat d = second_order_coefficients(spec, x);
  return u.grad(x).dot(d * v.grad(x));
}

GeneratorSample evaluate_generator(const DiffusionSpec& spec, const Jet& jet, const Vec& x) {
  const LocalCoefficients lc = local_coefficients(spec, x);
  return {jet.value, lu_from(lc, jet), jet.grad.dot(lc.second_order * jet.grad)};
}

GeneratorSample evaluate_generator(const DiffusionSpec& spec, const TestFunction& u, const Vec& x) {
  return evaluate_generator(spec, u.jet(x), x);
}

VerificationReport check_gamma_identity(const DiffusionSpec& spec, const TestFunction& u,
                                        const std::vector<Vec>& probes, const GammaCheckOptions& options) {
  const TestFunction u2 = product(u, u);
  const double tol = options.tol > 0.0 ? options.tol : (options.use_fd ? 1e-4 : 1e-8);
  const double step = options.fd_step > 0.0 ? options.fd_step : 1e-4 * spec.domain.diameter();

  VerificationReport report;
  report.name = "gamma_identity";
  report.target = 0.0;
  report.threshold = 1.0;
  report.std_error = tol;
  report.n_samples = static_cast<std::int64_t>(probes.size());

  double worst = 0.0;
  std::size_t worst_index = 0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const Vec& x = probes[p];
    const LocalCoefficients lc = local_coefficients(spec, x);
    const Jet ju = options.use_fd ? finite_difference_jet(u, x, step) : u.jet(x);
    const Jet ju2 = options.use_fd ? finite_difference_jet(u2, x, step) : u2.jet(x);
    const double l_u2 = lu_from(lc, ju2);
    const double two_u_lu = 2.0 * ju.value * lu_from(lc, ju);
    const double gamma = ju.grad.dot(lc.second_order * ju.grad) + options.gamma_perturbation;
    const double scale = std::max(1.0, std::fabs(l_u2) + std::fabs(two_u_lu) + std::fabs(gamma));
    const double err = std::fabs(l_u2 - two_u_lu - gamma) / scale;
    if (!(err <= worst)) {
      worst = err;
      worst_index = p;
    }
  }
  report.estimate = worst;
  report.details["tolerance"] = tol;
  report.details["worst_probe"] = static_cast<double>(worst_index);
  report.details["use_fd"] = options.use_fd ? 1.0 : 0.0;
  report.finalize();
  report.pass = report.pass && worst < tol;
  return report;
}

}  // namespace singdiff
