#pragma once

// Generator L u = (1/2) sum d_ij d_ij u + drift . grad u and carre du champ
// Gamma(u, v) = grad u^T d grad v, with the family's d_ij and drift from sde.

#include <vector>

#include "singdiff/coefficients.hpp"
#include "singdiff/report.hpp"
#include "singdiff/testfn.hpp"

namespace singdiff {

/// Throws RhoFloorViolation when the state weight is at or below the floor.
double apply_generator(const DiffusionSpec& spec, const TestFunction& u, const Vec& x);

double carre_du_champ(const DiffusionSpec& spec, const TestFunction& u, const TestFunction& v, const Vec& x);

/// u(x), Lu(x) and Gamma(u, u)(x) from a single coefficient evaluation.
struct GeneratorSample {
  double value = 0.0;
  double lu = 0.0;
  double gamma = 0.0;
};

GeneratorSample evaluate_generator(const DiffusionSpec& spec, const TestFunction& u, const Vec& x);

/// Same quantities from a precomputed jet, for callers that already hold one.
GeneratorSample evaluate_generator(const DiffusionSpec& spec, const Jet& jet, const Vec& x);

struct GammaCheckOptions {
  /// Derivatives of u and u^2 by centered differences instead of analytically.
  bool use_fd = false;
  /// Step for the finite-difference path; 0 picks 1e-4 times the domain diameter.
  double fd_step = 0.0;
  /// Added to Gamma before comparison (negative control).
  double gamma_perturbation = 0.0;
  /// Pass tolerance on the relative error; 0 picks 1e-8 (analytic) or 1e-4 (FD).
  double tol = 0.0;
};

/// max over probes of |L(u^2) - 2 u Lu - Gamma(u, u)| / scale, with
/// scale = max(1, |L(u^2)| + |2 u Lu| + |Gamma|). Passes iff below tol.
VerificationReport check_gamma_identity(const DiffusionSpec& spec, const TestFunction& u,
                                        const std::vector<Vec>& probes,
                                        const GammaCheckOptions& options = {});

}  // namespace singdiff
