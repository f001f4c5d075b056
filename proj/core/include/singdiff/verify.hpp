#pragma once

// Monte Carlo verification of the constructed processes and fields. Every
// test returns a VerificationReport whose pass flag is recomputable from
// (estimate, target, std_error, threshold) and the excluded-path fraction.

#include <cstdint>
#include <memory>
#include <vector>

#include "singdiff/coefficients.hpp"
#include "singdiff/field.hpp"
#include "singdiff/report.hpp"
#include "singdiff/testfn.hpp"

namespace singdiff {

struct EnsembleParams {
  int n_paths = 10000;
  double dt = 1e-3;
  /// Starting point; empty means the domain center.
  Vec x0;
  std::uint64_t seed = 0;
  /// Pass threshold in standard-error units.
  double threshold = 4.0;
  /// Worker threads (0 = hardware concurrency). Results do not depend on it.
  int threads = 1;
  /// Nested localization balls passed to the SDE solver.
  std::vector<double> localization_radii;
  /// Largest admissible fraction of paths killed before the last tested time.
  double max_excluded = 0.01;
};

struct MartingaleOptions {
  /// Negative control: report u(X_t) - u(X_0) without the int Lu term.
  bool drop_integral = false;
};

/// E[M_t^u] at each time (target 0), M_t^u = u(X_t) - u(X_0) - int_0^t Lu(X_s) ds
/// with the integral by the trapezoid rule on the Euler grid. The report
/// carries the time with the largest |mean| / SE; per-time values go to
/// details. Times must be multiples of dt.
VerificationReport test_martingale(const DiffusionSpec& spec, const TestFunction& u,
                                   const std::vector<double>& times, const EnsembleParams& ensemble,
                                   const MartingaleOptions& options = {});

/// E[M_t^u M_t^v - int_0^t Gamma(u, v)(X_s) ds], target 0.
VerificationReport test_covariation(const DiffusionSpec& spec, const TestFunction& u, const TestFunction& v,
                                    double t, const EnsembleParams& ensemble);

/// E[(M_t^u)^2 - int_0^t Gamma(u, u)(X_s) ds], target 0.
VerificationReport test_quadratic_variation(const DiffusionSpec& spec, const TestFunction& u, double t,
                                            const EnsembleParams& ensemble);

enum class Construction { TimeChange, Sde };

/// Endpoints X_t of an ensemble, with the count of paths killed before t.
struct EndpointEnsemble {
  std::vector<Vec> points;
  std::size_t killed = 0;
  std::size_t requested = 0;
};

/// Requires an LBM spec for the time-change construction. Throws
/// HorizonExceeded when the additive functional never reaches t.
EndpointEnsemble sample_endpoints(const DiffusionSpec& spec, double t, const EnsembleParams& ensemble,
                                  Construction construction);

/// Mean vector and covariance matrix of X_t from the time-change and the SDE
/// constructions of the same LBM; every component must agree within
/// threshold pooled standard errors. The report carries the worst component.
VerificationReport test_cross_construction(const DiffusionSpec& lbm_spec, double t,
                                           const EnsembleParams& ensemble);

/// Same test for the Liouville LBM of a frozen field realization.
VerificationReport test_cross_construction(std::shared_ptr<const GridField> field, double gamma, double t,
                                           const EnsembleParams& ensemble);

/// Var(X_t^i) against `target` for every coordinate; worst coordinate reported.
VerificationReport test_endpoint_variance(const DiffusionSpec& spec, double t, double target,
                                          const EnsembleParams& ensemble, Construction construction);

struct FieldEnsemble {
  int n_samples = 20000;
  std::uint64_t seed = 0;
  double threshold = 4.0;
  int threads = 1;
};

/// E[int_box rho dz] over field draws (trapezoid rule on the grid nodes)
/// against the box area. The box must be aligned with grid nodes.
VerificationReport test_liouville_mass(const KernelParams& params, const GridSpec& grid, const Box& box,
                                       const FieldEnsemble& ensemble);

/// Empirical E[X_n(z)^2] at every node against ln c_n; worst node reported.
VerificationReport test_field_variance(const KernelParams& params, const GridSpec& grid,
                                       const FieldEnsemble& ensemble);

/// Empirical E[X_n(z) X_n(z')] for node pairs along the first grid row against
/// the quadrature covariance; worst pair reported.
VerificationReport test_field_covariance(const KernelParams& params, const GridSpec& grid,
                                         const FieldEnsemble& ensemble);

/// Fraction of paths killed by the rho floor before `horizon` (target 0,
/// SE 0: passes iff no such kill). Domain exits are reported in details.
VerificationReport test_non_explosion(const DiffusionSpec& spec, double horizon, const EnsembleParams& ensemble);

}  // namespace singdiff
