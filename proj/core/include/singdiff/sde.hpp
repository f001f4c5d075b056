#pragma once

// Euler-Maruyama weak solvers for the four SDE families.
//
//   family               drift_i                                         sigma
//   LBM                  0                                               rho^{-1/2} Id
//   DegenerateWeighted   sum_j d_j a_ij / (2 rho) + b_i                  sqrt(A) / sqrt(rho)
//   LocallyElliptic      sum_j d_j a_ij / 2 + (d_j rho / 2 rho) a_ij + b_i   sqrt(A)
//   LebesgueDegenerate   sum_j d_j a_ij / 2 + b_i                        sqrt(A)

#include <cstdint>
#include <functional>
#include <vector>

#include "singdiff/coefficients.hpp"
#include "singdiff/paths.hpp"

namespace singdiff {

/// Symmetric square root of a symmetric nonnegative-definite matrix;
/// eigenvalues in [-psd_tol, 0) are clipped to zero.
Mat sqrt_spd(const Mat& m, double psd_tol = 1e-12);

/// Pointwise SDE coefficients of a spec.
struct LocalCoefficients {
  double weight = 0.0;  // rho (psi for the Lebesgue family)
  Vec drift;
  Mat sigma;
  /// Generator coefficients: (1/2) sum d_ij d_ij u; equals sigma sigma^T.
  Mat second_order;
};

/// Throws RhoFloorViolation when the state weight is at or below rho_floor.
LocalCoefficients local_coefficients(const DiffusionSpec& spec, const Vec& x);

Vec drift(const DiffusionSpec& spec, const Vec& x);
Mat diffusion_matrix(const DiffusionSpec& spec, const Vec& x);
/// The family's d_ij (LBM: Id/rho, DegenerateWeighted: A/rho, others: A).
Mat second_order_coefficients(const DiffusionSpec& spec, const Vec& x);

struct SdeRun {
  DiffusionSpec spec;
  Vec x0;
  double dt = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  /// Radii of the nested balls B_k (centered at the domain center) whose exit
  /// times localize the process; leaving the largest one kills the path.
  std::vector<double> localization_radii;

  void validate() const;
};

/// Observer called once per state, including x0: (step index, time, state).
using StepObserver = std::function<void(std::size_t, double, const Vec&)>;

struct RunSummary {
  Lifetime lifetime;
  std::size_t steps = 0;
  /// First state index outside each localization ball (-1 if never left).
  std::vector<std::ptrdiff_t> localization_exits;
};

/// Streaming Euler-Maruyama; states are handed to the observer rather than
/// stored. The killed state (if any) is reported too, at lifetime.index.
RunSummary simulate_sde(const SdeRun& run, const StepObserver& observer);

/// Stored version: X_{k+1} = X_k + drift dt + sigma sqrt(dt) xi_k.
Path simulate_sde(const SdeRun& run);

}  // namespace singdiff
