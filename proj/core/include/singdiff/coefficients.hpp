#pragma once

// Coefficient bundles (rho with A and B, plus derivatives) for the four model
// families and the preset registry that builds them.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "singdiff/field.hpp"
#include "singdiff/report.hpp"
#include "singdiff/types.hpp"

namespace singdiff {

enum class Family {
  /// A = Id, B = 0: generator (1/2) rho^{-1} Laplacian.
  LBM,
  /// lambda^{-1} rho <= A <= lambda rho, reference measure rho dx.
  DegenerateWeighted,
  /// A locally uniformly elliptic, reference measure rho dx.
  LocallyElliptic,
  /// A >= psi Id, Lebesgue reference measure.
  LebesgueDegenerate,
};

std::string to_string(Family family);
Family family_from_string(const std::string& name);

using ScalarFn = std::function<double(const Vec&)>;
using VectorFn = std::function<Vec(const Vec&)>;
using MatrixFn = std::function<Mat(const Vec&)>;

struct CoefficientSet {
  ScalarFn rho;
  /// Optional analytic gradient of rho; centered differences otherwise.
  VectorFn grad_rho;
  MatrixFn a;
  /// Optional analytic row divergence (sum_j d_j a_ij); differences otherwise.
  VectorFn div_a;
  VectorFn b;
  /// Degeneracy weight of the Lebesgue family (state space {psi > 0}).
  ScalarFn psi;
  double fd_step = 1e-5;

  Vec grad_rho_at(const Vec& x) const;
  Vec div_a_at(const Vec& x) const;
  Vec grad_rho_fd(const Vec& x) const;
  Vec div_a_fd(const Vec& x) const;
};

struct DiffusionSpec {
  Family family = Family::LBM;
  CoefficientSet coeffs;
  int dim = 2;
  Box domain;
  double rho_floor = 1e-8;
  std::string preset_name;
  /// Ellipticity constant lambda of the two-sided bound; meaningful for DegenerateWeighted only.
  double lambda = 1.0;

  /// Weight whose floor defines the state space: rho, or psi for the
  /// Lebesgue family.
  double state_weight(const Vec& x) const;
};

/// Liouville density exp(gamma X_n(z) - gamma^2/2 E[X_n(z)^2]) on the grid box,
/// packaged as the LBM coefficient set (A = Id, B = 0).
CoefficientSet liouville_rho(std::shared_ptr<const GridField> field, double gamma);

/// Inputs to the preset registry.
struct PresetParams {
  int dim = 2;
  /// Numeric knobs, e.g. "rho_value", "rho_amplitude", "beta", "half_width".
  std::map<std::string, double> numbers;
  /// Choices, e.g. "rho" -> constant|smooth|gaussian|liouville, "b" -> zero|rotation,
  /// "a" -> psi|identity.
  std::map<std::string, std::string> options;
  /// Frozen field for Liouville densities.
  std::shared_ptr<const GridField> field;
  double gamma = 1.0;
  std::optional<Box> domain;
  double rho_floor = 1e-8;
};

/// Names accepted by make_preset.
std::vector<std::string> preset_names();

/// Build a registered preset; throws UnknownPreset or InvalidParameter.
DiffusionSpec make_preset(const std::string& name, const PresetParams& params);

/// Probe-point validation of a spec: symmetry of A, family ellipticity
/// bounds, rho above the floor, analytic vs finite-difference derivatives and
/// a Monte Carlo check of the weak divergence condition on B. Failures are
/// reported, never thrown.
VerificationReport validate_spec(const DiffusionSpec& spec, const std::vector<Vec>& probes,
                                 std::uint64_t seed = 0, int mc_samples = 20000);

/// Uniform probe points inside the domain (shrunk by `margin` of each side).
std::vector<Vec> random_probes(const Box& domain, int count, std::uint64_t seed, double margin = 0.05);

/// Smallest and largest eigenvalue of a symmetric matrix.
std::pair<double, double> eigen_range(const Mat& m);

}  // namespace singdiff
