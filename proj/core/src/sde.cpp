#include "singdiff/sde.hpp"

#include <cmath>

#include "singdiff/errors.hpp"
#include "singdiff/rng.hpp"

namespace singdiff {

Mat sqrt_spd(const Mat& m, double psd_tol) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::NotSymmetric, "matrix is not square");
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::NotSymmetric, "sqrt_spd needs a symmetric matrix");
  }
  const auto n = m.rows();
  // Diagonal matrices (rho Id, psi Id, ...) take the exact elementwise root.
  bool diagonal = true;
  for (Eigen::Index i = 0; i < n && diagonal; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && m(i, j) != 0.0) {
        diagonal = false;
        break;
      }
    }
  }
  if (diagonal) {
    Mat root = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (m(i, i) < -psd_tol * scale) throw Error(ErrorCode::IndefiniteMatrix, "negative eigenvalue");
      root(i, i) = std::sqrt(std::max(0.0, m(i, i)));
    }
    return root;
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(m);
  const auto& values = eig.eigenvalues();
  if (values.minCoeff() < -psd_tol * scale) {
    throw Error(ErrorCode::IndefiniteMatrix,
                "eigenvalue " + std::to_string(values.minCoeff()) + " below -psd_tol");
  }
  const Vec root = values.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

LocalCoefficients local_coefficients(const DiffusionSpec& spec, const Vec& x) {
  const CoefficientSet& c = spec.coeffs;
  LocalCoefficients out;
  out.weight = spec.state_weight(x);
  if (!(out.weight > spec.rho_floor)) {
    throw Error(ErrorCode::RhoFloorViolation,
                "state weight " + std::to_string(out.weight) + " at or below the floor");
  }
  const int dim = spec.dim;
  switch (spec.family) {
    case Family::LBM: {
      const double rho = out.weight;
      out.drift = Vec::Zero(dim);
      out.sigma = Mat::Identity(dim, dim) / std::sqrt(rho);
      out.second_order = Mat::Identity(dim, dim) / rho;
      break;
    }
    case Family::DegenerateWeighted: {
      const double rho = out.weight;
      const Mat a = c.a(x);
      out.drift = c.div_a_at(x) / (2.0 * rho) + c.b(x);
      out.sigma = sqrt_spd(a) / std::sqrt(rho);
      out.second_order = a / rho;
      break;
    }
    case Family::LocallyElliptic: {
      const double rho = out.weight;
      const Mat a = c.a(x);
      out.drift = 0.5 * c.div_a_at(x) + a * c.grad_rho_at(x) / (2.0 * rho) + c.b(x);
      out.sigma = sqrt_spd(a);
      out.second_order = a;
      break;
    }
    case Family::LebesgueDegenerate: {
      const Mat a = c.a(x);
      out.drift = 0.5 * c.div_a_at(x) + c.b(x);
      out.sigma = sqrt_spd(a);
      out.second_order = a;
      break;
    }
  }
  return out;
}

Vec drift(const DiffusionSpec& spec, const Vec& x) { return local_coefficients(spec, x).drift; }

Mat diffusion_matrix(const DiffusionSpec& spec, const Vec& x) { return local_coefficients(spec, x).sigma; }

Mat second_order_coefficients(const DiffusionSpec& spec, const Vec& x) {
  return local_coefficients(spec, x).second_order;
}

void SdeRun::validate() const {
  if (!(dt > 0.0) || !(horizon > 0.0) || !std::isfinite(dt) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::InvalidParameter, "dt and horizon must be positive and finite");
  }
  if (dt > horizon) throw Error(ErrorCode::InvalidParameter, "dt exceeds the horizon");
  if (x0.size() != spec.dim || !x0.allFinite()) {
    throw Error(ErrorCode::InvalidParameter, "x0 must be a finite point of dimension dim");
  }
  if (!spec.domain.contains(x0)) throw Error(ErrorCode::InvalidParameter, "x0 outside the domain");
  if (!(spec.state_weight(x0) > spec.rho_floor)) {
    throw Error(ErrorCode::InvalidParameter, "x0 violates the rho floor");
  }
  for (std::size_t k = 0; k < localization_radii.size(); ++k) {
    if (!(localization_radii[k] > 0.0) || (k > 0 && !(localization_radii[k] > localization_radii[k - 1]))) {
      throw Error(ErrorCode::InvalidParameter, "localization radii must be positive and increasing");
    }
  }
}

RunSummary simulate_sde(const SdeRun& run, const StepObserver& observer) {
  run.validate();
  const DiffusionSpec& spec = run.spec;
  const int dim = spec.dim;
  const std::size_t n = step_count(run.dt, run.horizon);
  const double sqrt_dt = std::sqrt(run.dt);
  const Vec center = spec.domain.center();
  Stream stream(derive_stream(run.seed, "sde", 0));

  RunSummary summary;
  summary.localization_exits.assign(run.localization_radii.size(), -1);
  auto check_balls = [&](std::size_t k, const Vec& x) {
    if (run.localization_radii.empty()) return false;
    const double r = (x - center).norm();
    for (std::size_t i = 0; i < run.localization_radii.size(); ++i) {
      if (summary.localization_exits[i] < 0 && r >= run.localization_radii[i]) {
        summary.localization_exits[i] = static_cast<std::ptrdiff_t>(k);
      }
    }
    return r >= run.localization_radii.back();
  };

  Vec x = run.x0;
  Vec xi(dim);
  if (observer) observer(0, 0.0, x);
  if (check_balls(0, x)) {
    summary.lifetime = Lifetime::Killed(0, KillReason::LeftDomain);
    return summary;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const LocalCoefficients lc = local_coefficients(spec, x);
    for (int i = 0; i < dim; ++i) xi[i] = stream.normal();
    x += lc.drift * run.dt + lc.sigma * xi * sqrt_dt;
    const double t = static_cast<double>(k + 1) * run.dt;
    summary.steps = k + 1;
    if (observer) observer(k + 1, t, x);
    const bool left_ball = check_balls(k + 1, x);
    if (left_ball || !spec.domain.contains(x) || !x.allFinite()) {
      summary.lifetime = Lifetime::Killed(k + 1, KillReason::LeftDomain);
      return summary;
    }
    if (!(spec.state_weight(x) > spec.rho_floor)) {
      summary.lifetime = Lifetime::Killed(k + 1, KillReason::RhoFloor);
      return summary;
    }
  }
  summary.lifetime = Lifetime::Alive();
  return summary;
}

Path simulate_sde(const SdeRun& run) {
  Path path;
  const std::size_t n = step_count(run.dt, run.horizon);
  path.times.reserve(n + 1);
  path.states.reserve(n + 1);
  const RunSummary summary = simulate_sde(run, [&](std::size_t, double t, const Vec& x) {
    path.times.push_back(t);
    path.states.push_back(x);
  });
  path.lifetime = summary.lifetime;
  return path;
}

}  // namespace singdiff
