#include "singdiff/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "singdiff/errors.hpp"
#include "singdiff/rng.hpp"
#include "singdiff/testfn.hpp"

namespace singdiff {

std::string to_string(Family family) {
  switch (family) {
    case Family::LBM: return "LBM";
    case Family::DegenerateWeighted: return "DegenerateWeighted";
    case Family::LocallyElliptic: return "LocallyElliptic";
    case Family::LebesgueDegenerate: return "LebesgueDegenerate";
  }
  return "Unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "LBM") return Family::LBM;
  if (name == "DegenerateWeighted") return Family::DegenerateWeighted;
  if (name == "LocallyElliptic") return Family::LocallyElliptic;
  if (name == "LebesgueDegenerate") return Family::LebesgueDegenerate;
  throw Error(ErrorCode::InvalidParameter, "unknown family '" + name + "'");
}

Vec CoefficientSet::grad_rho_fd(const Vec& x) const {
  const auto dim = x.size();
  Vec g(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    Vec xp = x, xm = x;
    xp[i] += fd_step;
    xm[i] -= fd_step;
    g[i] = (rho(xp) - rho(xm)) / (2.0 * fd_step);
  }
  return g;
}

Vec CoefficientSet::div_a_fd(const Vec& x) const {
  const auto dim = x.size();
  Vec d = Vec::Zero(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    Vec xp = x, xm = x;
    xp[j] += fd_step;
    xm[j] -= fd_step;
    const Mat diff = (a(xp) - a(xm)) / (2.0 * fd_step);
    d += diff.col(j);
  }
  return d;
}

Vec CoefficientSet::grad_rho_at(const Vec& x) const {
  return grad_rho ? grad_rho(x) : grad_rho_fd(x);
}

Vec CoefficientSet::div_a_at(const Vec& x) const {
  return div_a ? div_a(x) : div_a_fd(x);
}

double DiffusionSpec::state_weight(const Vec& x) const {
  if (family == Family::LebesgueDegenerate && coeffs.psi) return coeffs.psi(x);
  return coeffs.rho(x);
}

std::pair<double, double> eigen_range(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(m, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

namespace {

struct RhoPair {
  ScalarFn rho;
  VectorFn grad;
};

RhoPair constant_rho(int dim, double c) {
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidParameter, "constant rho must be positive");
  return {[c](const Vec&) { return c; }, [dim](const Vec&) { return Vec(Vec::Zero(dim)); }};
}

// rho = exp(amp sin(k x1) cos(k x2))
RhoPair smooth_rho(double amp, double k) {
  return {[amp, k](const Vec& x) { return std::exp(amp * std::sin(k * x[0]) * std::cos(k * x[1])); },
          [amp, k](const Vec& x) {
            const double s0 = std::sin(k * x[0]), c0 = std::cos(k * x[0]);
            const double s1 = std::sin(k * x[1]), c1 = std::cos(k * x[1]);
            const double r = std::exp(amp * s0 * c1);
            Vec g = Vec::Zero(x.size());
            g[0] = r * amp * k * c0 * c1;
            g[1] = -r * amp * k * s0 * s1;
            return g;
          }};
}

RhoPair gaussian_rho() {
  return {[](const Vec& x) { return std::exp(-x.squaredNorm()); },
          [](const Vec& x) { return Vec(-2.0 * std::exp(-x.squaredNorm()) * x); }};
}

RhoPair liouville_pair(std::shared_ptr<const GridField> field, double gamma) {
  const double shift = 0.5 * gamma * gamma * field->variance;
  return {[field, gamma, shift](const Vec& x) {
            return std::exp(gamma * evaluate_field(*field, Point2{x[0], x[1]}) - shift);
          },
          [field, gamma, shift](const Vec& x) {
            Point2 g;
            const double v = evaluate_field(*field, Point2{x[0], x[1]}, g);
            const double r = std::exp(gamma * v - shift);
            Vec out(2);
            out << gamma * r * g[0], gamma * r * g[1];
            return out;
          }};
}

VectorFn zero_vector(int dim) {
  return [dim](const Vec&) { return Vec(Vec::Zero(dim)); };
}

// beta exp(-|x|^2/2) (-x2, x1, 0, ...) / rho(x): div(rho B) = 0 for any rho.
VectorFn rotation_field(int dim, double beta, ScalarFn rho) {
  return [dim, beta, rho](const Vec& x) {
    Vec v = Vec::Zero(dim);
    const double s = beta * std::exp(-0.5 * x.squaredNorm()) / rho(x);
    v[0] = -s * x[1];
    v[1] = s * x[0];
    return v;
  };
}

double number(const PresetParams& p, const std::string& key, double fallback) {
  const auto it = p.numbers.find(key);
  return it == p.numbers.end() ? fallback : it->second;
}

std::string option(const PresetParams& p, const std::string& key, const std::string& fallback) {
  const auto it = p.options.find(key);
  return it == p.options.end() ? fallback : it->second;
}

Box grid_box(const GridSpec& g) {
  Vec lo(2), hi(2);
  lo << g.origin[0], g.origin[1];
  hi << g.origin[0] + g.extent[0], g.origin[1] + g.extent[1];
  return Box{lo, hi};
}

RhoPair make_rho(const PresetParams& p, const std::string& fallback_kind) {
  const std::string kind = option(p, "rho", fallback_kind);
  if (kind == "constant") return constant_rho(p.dim, number(p, "rho_value", 1.0));
  if (kind == "smooth") return smooth_rho(number(p, "rho_amplitude", 0.5), number(p, "rho_wavenumber", 1.0));
  if (kind == "gaussian") return gaussian_rho();
  if (kind == "liouville") {
    if (!p.field) throw Error(ErrorCode::InvalidParameter, "Liouville rho needs a sampled field");
    if (p.dim != 2) throw Error(ErrorCode::InvalidParameter, "Liouville rho is defined in d = 2");
    if (!(p.gamma > 0.0 && p.gamma < 2.0)) throw Error(ErrorCode::InvalidParameter, "gamma must lie in (0, 2)");
    return liouville_pair(p.field, p.gamma);
  }
  throw Error(ErrorCode::InvalidParameter, "unknown rho kind '" + kind + "'");
}

VectorFn make_b(const PresetParams& p, const std::string& fallback, const ScalarFn& rho) {
  const std::string kind = option(p, "b", fallback);
  if (kind == "zero") return zero_vector(p.dim);
  if (kind == "rotation") return rotation_field(p.dim, number(p, "beta", 0.5), rho);
  throw Error(ErrorCode::InvalidParameter, "unknown b kind '" + kind + "'");
}

// Settings shared by every preset: the domain box and the floor.
void finish_spec(DiffusionSpec& spec, const PresetParams& p, bool uses_field) {
  spec.dim = p.dim;
  spec.rho_floor = p.rho_floor;
  if (!(spec.rho_floor > 0.0)) throw Error(ErrorCode::InvalidParameter, "rho_floor must be positive");
  if (uses_field) {
    const Box gbox = grid_box(p.field->grid);
    spec.domain = p.domain.value_or(gbox);
    if (spec.domain.dim() != 2 || (spec.domain.lo.array() < gbox.lo.array()).any() ||
        (spec.domain.hi.array() > gbox.hi.array()).any()) {
      throw Error(ErrorCode::InvalidParameter, "domain must lie inside the field's grid box");
    }
    // rho is only piecewise smooth (cells of the grid); keep difference
    // stencils well inside a cell.
    spec.coeffs.fd_step = 1e-5 * std::min(p.field->grid.hx(), p.field->grid.hy());
  } else {
    const double hw = number(p, "half_width", 5.0);
    spec.domain = p.domain.value_or(make_box(p.dim, -hw, hw));
    spec.coeffs.fd_step = 1e-5 * spec.domain.diameter();
  }
  if (spec.domain.dim() != p.dim || !((spec.domain.hi.array() > spec.domain.lo.array()).all())) {
    throw Error(ErrorCode::InvalidParameter, "domain box must be non-empty and match dim");
  }
}

}  // namespace

CoefficientSet liouville_rho(std::shared_ptr<const GridField> field, double gamma) {
  if (!(gamma > 0.0 && gamma < 2.0)) throw Error(ErrorCode::InvalidParameter, "gamma must lie in (0, 2)");
  if (!field) throw Error(ErrorCode::InvalidParameter, "null field");
  auto pair = liouville_pair(field, gamma);
  CoefficientSet c;
  c.rho = std::move(pair.rho);
  c.grad_rho = std::move(pair.grad);
  c.a = [](const Vec&) { return Mat(Mat::Identity(2, 2)); };
  c.div_a = zero_vector(2);
  c.b = zero_vector(2);
  c.fd_step = 1e-5 * std::min(field->grid.hx(), field->grid.hy());
  return c;
}

std::vector<std::string> preset_names() {
  return {"bm", "lbm", "distorted-bm", "aniso-degenerate", "locally-elliptic", "lebesgue-degenerate"};
}

DiffusionSpec make_preset(const std::string& name, const PresetParams& p) {
  if (p.dim < 2 || p.dim > kMaxDim) {
    throw Error(ErrorCode::InvalidParameter, "dim must lie in [2, " + std::to_string(kMaxDim) + "]");
  }
  const int dim = p.dim;
  DiffusionSpec spec;
  spec.preset_name = name;
  CoefficientSet& c = spec.coeffs;

  if (name == "bm" || name == "lbm") {
    const std::string fallback = name == "bm" ? "constant" : (p.field ? "liouville" : "constant");
    auto rho = make_rho(p, fallback);
    spec.family = Family::LBM;
    c.rho = rho.rho;
    c.grad_rho = rho.grad;
    c.a = [dim](const Vec&) { return Mat(Mat::Identity(dim, dim)); };
    c.div_a = zero_vector(dim);
    c.b = zero_vector(dim);
    finish_spec(spec, p, option(p, "rho", fallback) == "liouville");
    return spec;
  }

  if (name == "distorted-bm" || name == "aniso-degenerate") {
    auto rho = make_rho(p, "smooth");
    spec.family = Family::DegenerateWeighted;
    Mat m = Mat::Identity(dim, dim);
    if (name == "aniso-degenerate") {
      m(0, 0) = number(p, "m11", 2.0);
      m(0, 1) = m(1, 0) = number(p, "m12", 0.5);
      m(1, 1) = number(p, "m22", 1.0);
      const auto block = eigen_range(m.topLeftCorner(2, 2));
      if (!(block.first > 0.0)) throw Error(ErrorCode::InvalidParameter, "M must be positive definite");
      // normalize so the block eigenvalues straddle 1 symmetrically
      m.topLeftCorner(2, 2) /= std::sqrt(block.first * block.second);
      const auto range = eigen_range(m);
      spec.lambda = range.second / range.first;
    } else {
      spec.lambda = 1.0;
    }
    const ScalarFn rho_fn = rho.rho;
    const VectorFn grad_fn = rho.grad;
    c.rho = rho_fn;
    c.grad_rho = grad_fn;
    c.a = [rho_fn, m](const Vec& x) { return Mat(rho_fn(x) * m); };
    c.div_a = [grad_fn, m](const Vec& x) { return Vec(m * grad_fn(x)); };
    c.b = make_b(p, "zero", rho_fn);
    finish_spec(spec, p, option(p, "rho", "smooth") == "liouville");
    return spec;
  }

  if (name == "locally-elliptic") {
    auto rho = make_rho(p, "gaussian");
    spec.family = Family::LocallyElliptic;
    c.rho = rho.rho;
    c.grad_rho = rho.grad;
    // a = s(x) Id + c(x) (e1 e2^T + e2 e1^T), s = 1 + 0.5 sin x1 sin x2, c = 0.3 cos x1
    c.a = [dim](const Vec& x) {
      Mat a = (1.0 + 0.5 * std::sin(x[0]) * std::sin(x[1])) * Mat::Identity(dim, dim);
      a(0, 1) = a(1, 0) = 0.3 * std::cos(x[0]);
      return a;
    };
    c.div_a = [dim](const Vec& x) {
      Vec d = Vec::Zero(dim);
      d[0] = 0.5 * std::cos(x[0]) * std::sin(x[1]);
      d[1] = 0.5 * std::sin(x[0]) * std::cos(x[1]) - 0.3 * std::sin(x[0]);
      for (int i = 2; i < dim; ++i) d[i] = 0.0;
      return d;
    };
    c.b = make_b(p, "rotation", c.rho);
    finish_spec(spec, p, option(p, "rho", "gaussian") == "liouville");
    return spec;
  }

  if (name == "lebesgue-degenerate") {
    spec.family = Family::LebesgueDegenerate;
    auto rho = constant_rho(dim, 1.0);
    c.rho = rho.rho;
    c.grad_rho = rho.grad;
    const std::string a_kind = option(p, "a", "psi");
    if (a_kind == "psi") {
      // psi = x1^2 / (1 + x1^2): vanishes on {x1 = 0}, saturates at 1
      c.psi = [](const Vec& x) { return x[0] * x[0] / (1.0 + x[0] * x[0]); };
      c.a = [dim](const Vec& x) {
        return Mat(x[0] * x[0] / (1.0 + x[0] * x[0]) * Mat::Identity(dim, dim));
      };
      c.div_a = [dim](const Vec& x) {
        Vec d = Vec::Zero(dim);
        const double q = 1.0 + x[0] * x[0];
        d[0] = 2.0 * x[0] / (q * q);
        return d;
      };
    } else if (a_kind == "identity") {
      c.psi = [](const Vec&) { return 1.0; };
      c.a = [dim](const Vec&) { return Mat(Mat::Identity(dim, dim)); };
      c.div_a = zero_vector(dim);
    } else {
      throw Error(ErrorCode::InvalidParameter, "unknown a kind '" + a_kind + "'");
    }
    c.b = make_b(p, "rotation", c.rho);
    finish_spec(spec, p, false);
    return spec;
  }

  throw Error(ErrorCode::UnknownPreset, "no preset named '" + name + "'");
}

std::vector<Vec> random_probes(const Box& domain, int count, std::uint64_t seed, double margin) {
  Stream stream(derive_stream(seed, "probes", 0));
  const Vec width = domain.hi - domain.lo;
  const Vec lo = domain.lo + margin * width;
  const Vec span = (1.0 - 2.0 * margin) * width;
  std::vector<Vec> probes;
  probes.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Vec x(domain.dim());
    for (int i = 0; i < domain.dim(); ++i) x[i] = lo[i] + span[i] * stream.uniform();
    probes.push_back(x);
  }
  return probes;
}

VerificationReport validate_spec(const DiffusionSpec& spec, const std::vector<Vec>& probes,
                                 std::uint64_t seed, int mc_samples) {
  VerificationReport report;
  report.name = "validate_spec[" + spec.preset_name + "]";
  report.threshold = 0.0;
  report.n_samples = static_cast<std::int64_t>(probes.size());
  const CoefficientSet& c = spec.coeffs;
  const double derivative_tol = std::max(1e-6, 10.0 * c.fd_step * c.fd_step);
  constexpr double kSlack = 1e-10;

  double asym = 0.0, ellip_violation = 0.0, rho_min = std::numeric_limits<double>::infinity();
  double grad_err = 0.0, div_err = 0.0;
  int failures = 0;

  for (const Vec& x : probes) {
    const Mat a = c.a(x);
    asym = std::max(asym, (a - a.transpose()).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff()));
    const Mat sym = 0.5 * (a + a.transpose());
    const auto [lo, hi] = eigen_range(sym);
    const double rho = c.rho(x);
    rho_min = std::min(rho_min, spec.state_weight(x));
    double violation = 0.0;
    switch (spec.family) {
      case Family::LBM:
        violation = std::max(std::fabs(lo - 1.0), std::fabs(hi - 1.0));
        break;
      case Family::DegenerateWeighted:
        violation = std::max({0.0, rho / spec.lambda - lo, hi - spec.lambda * rho}) / rho;
        break;
      case Family::LocallyElliptic:
        violation = lo > 0.0 ? 0.0 : -lo + 1.0;
        break;
      case Family::LebesgueDegenerate: {
        const double psi = c.psi ? c.psi(x) : 0.0;
        violation = std::max(0.0, psi - lo) / std::max(1.0, psi);
        break;
      }
    }
    ellip_violation = std::max(ellip_violation, violation);

    if (c.grad_rho) {
      const Vec g = c.grad_rho(x);
      const double scale = std::max(g.cwiseAbs().maxCoeff(), rho);
      grad_err = std::max(grad_err, (g - c.grad_rho_fd(x)).cwiseAbs().maxCoeff() / scale);
    }
    if (c.div_a) {
      const Vec d = c.div_a(x);
      const double scale = std::max(d.cwiseAbs().maxCoeff(), a.cwiseAbs().maxCoeff());
      div_err = std::max(div_err, (d - c.div_a_fd(x)).cwiseAbs().maxCoeff() / scale);
    }
  }

  report.details["symmetry_max_rel"] = asym;
  report.details["ellipticity_violation"] = ellip_violation;
  report.details["state_weight_min"] = rho_min;
  report.details["grad_rho_rel_err"] = grad_err;
  report.details["div_a_rel_err"] = div_err;
  report.details["derivative_tol"] = derivative_tol;
  const bool sym_ok = asym <= kSlack;
  const bool ellip_ok = ellip_violation <= kSlack;
  const bool floor_ok = probes.empty() || rho_min > spec.rho_floor;
  const bool deriv_ok = grad_err < derivative_tol && div_err < derivative_tol;
  report.details["symmetry_pass"] = sym_ok;
  report.details["ellipticity_pass"] = ellip_ok;
  report.details["floor_pass"] = floor_ok;
  report.details["derivative_pass"] = deriv_ok;
  failures += !sym_ok + !ellip_ok + !floor_ok + !deriv_ok;

  // Weak divergence condition: int <B, grad f> w dx = 0 for compactly
  // supported f, with w = rho (weighted families) or 1 (Lebesgue family).
  bool div_ok = true;
  if (!spec.domain.unbounded() && mc_samples > 1) {
    const Box& box = spec.domain;
    const Vec mid = box.center();
    const double radius = 0.45 * (box.hi - box.lo).minCoeff();
    const int dim = spec.dim;
    const TestFunction bump = bump_fn(mid, radius);
    const TestFunction dx0 = combine(1.0, coordinate_fn(dim, 0), -mid[0], constant_fn(dim, 1.0));
    const TestFunction dx1 = combine(1.0, coordinate_fn(dim, 1), -mid[1], constant_fn(dim, 1.0));
    const std::vector<TestFunction> fs = {bump, product(dx0, bump), product(dx1, bump),
                                          product(product(dx0, dx1), bump)};
    const bool lebesgue = spec.family == Family::LebesgueDegenerate;
    const double volume = box.volume();
    double worst_z = 0.0;
    for (std::size_t k = 0; k < fs.size(); ++k) {
      Stream stream(derive_stream(seed, "divergence", k));
      double s1 = 0.0, s2 = 0.0;
      for (int i = 0; i < mc_samples; ++i) {
        Vec x(dim);
        for (int d = 0; d < dim; ++d) x[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * stream.uniform();
        const Jet j = fs[k].jet(x);
        double g = 0.0;
        if (j.grad.squaredNorm() > 0.0) {
          g = c.b(x).dot(j.grad);
          if (!lebesgue) g *= c.rho(x);
        }
        s1 += g;
        s2 += g * g;
      }
      const double n = static_cast<double>(mc_samples);
      const double mean = s1 / n;
      const double var = std::max(0.0, (s2 / n - mean * mean) * n / (n - 1.0));
      const double est = volume * mean;
      const double se = volume * std::sqrt(var / n);
      const double z = se > 0.0 ? std::fabs(est) / se : (est == 0.0 ? 0.0 : 1e300);
      worst_z = std::max(worst_z, z);
      report.details["divergence_estimate_" + std::to_string(k)] = est;
      report.details["divergence_se_" + std::to_string(k)] = se;
    }
    report.details["divergence_worst_z"] = worst_z;
    div_ok = worst_z <= 4.0;
  }
  report.details["divergence_pass"] = div_ok;
  failures += !div_ok;

  report.estimate = failures;
  report.target = 0.0;
  report.std_error = 0.0;
  report.finalize();
  return report;
}

}  // namespace singdiff
