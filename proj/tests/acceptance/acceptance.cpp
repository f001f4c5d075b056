// Acceptance harness: one PASS/FAIL line per criterion, exit status 0 iff all
// pass. Every criterion is run twice (one and two worker threads) and the
// serialized reports must match byte for byte.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "singdiff/experiment.hpp"
#include "singdiff/generator.hpp"
#include "singdiff/kernels.hpp"
#include "singdiff/sde.hpp"
#include "singdiff/verify.hpp"

using namespace singdiff;

namespace {

constexpr std::uint64_t kSeed = 12345;

struct Criterion {
  int id;
  std::string title;
  std::function<std::vector<VerificationReport>(int threads)> run;
  /// Reports that are negative controls; they must fail.
  std::vector<std::string> controls;
};

bool is_control(const Criterion& c, const VerificationReport& r) {
  return std::find(c.controls.begin(), c.controls.end(), r.name) != c.controls.end();
}

bool criterion_pass(const Criterion& c, const std::vector<VerificationReport>& reports) {
  if (reports.empty()) return false;
  for (const auto& r : reports) {
    if (r.pass == is_control(c, r)) return false;
  }
  return true;
}

VerificationReport deterministic(const std::string& name, double value, double tol, std::int64_t n) {
  VerificationReport r;
  r.name = name;
  r.estimate = value;
  r.std_error = tol;
  r.threshold = 1.0;
  r.n_samples = n;
  r.pass = std::isfinite(value) && value < tol;
  return r;
}

VerificationReport renamed(VerificationReport r, const std::string& name) {
  r.name = name;
  return r;
}

std::vector<double> radii() {
  std::vector<double> r;
  for (int i = 0; i < 20; ++i) r.push_back(0.1 + (5.0 - 0.1) * i / 19.0);
  return r;
}

ExperimentConfig bm_config() {
  ExperimentConfig c;
  c.model.preset = "bm";
  c.run.dt = 1e-3;
  c.run.horizon = 1.0;
  c.run.paths = 10000;
  c.run.sample_times = {0.25, 0.5, 1.0};
  return c;
}

ExperimentConfig liouville_config() {
  ExperimentConfig c = bm_config();
  c.model.preset = "lbm";
  c.model.options["rho"] = "liouville";
  FieldConfig f;
  f.m = 1.0;
  f.n = 3;
  f.gamma = 1.0;
  c.field = f;  // default grid: 49 x 49 nodes over [-6, 6]^2
  return c;
}

std::vector<VerificationReport> suite(const std::string& name, const ExperimentConfig& c, int threads,
                                      const std::string& prefix) {
  auto reports = run_suite(name, c, kSeed, threads).results;
  for (auto& r : reports) r.name = prefix + r.name;
  return reports;
}

std::vector<VerificationReport> kernel_criterion(bool green) {
  double err = 0.0, forms = 0.0;
  int n = 0;
  for (double m : {0.5, 1.0, 2.0}) {
    const KernelParams p = make_kernel_params(m, 1, 1.0);
    for (double r : radii()) {
      if (!green) {
        const double oracle = m * r * std::cyl_bessel_k(1.0, m * r);
        err = std::max(err, std::fabs(k_m(p, r) - oracle) / oracle);
      } else {
        const double oracle = std::cyl_bessel_k(0.0, m * r);
        const double g = green_massive(p, r);
        err = std::max(err, std::fabs(g - oracle) / oracle);
        forms = std::max(forms, std::fabs(green_massive_layered(p, r) - g) / std::fabs(g));
      }
      ++n;
    }
  }
  if (!green) return {deterministic("k_m_vs_bessel_k1", err, 1e-8, n)};
  return {deterministic("green_vs_bessel_k0", err, 1e-6, n), deterministic("green_integral_forms", forms, 1e-6, n)};
}

std::vector<VerificationReport> field_variance_criterion(int threads) {
  GridSpec g;
  g.origin = {-2.0, -2.0};
  g.extent = {4.0, 4.0};
  g.nx = g.ny = 8;
  FieldEnsemble e;
  e.n_samples = 20000;
  e.seed = kSeed;
  e.threads = threads;
  return {test_field_variance(make_kernel_params(1.0, 4, 1.0), g, e)};
}

std::vector<VerificationReport> mass_criterion(int threads) {
  GridSpec g;
  g.origin = {-2.0, -2.0};
  g.extent = {4.0, 4.0};
  g.nx = g.ny = 17;
  Vec lo(2), hi(2);
  lo << -0.5, -0.5;
  hi << 0.5, 0.5;
  FieldEnsemble e;
  e.n_samples = 20000;
  e.seed = kSeed;
  e.threads = threads;
  return {test_liouville_mass(make_kernel_params(1.0, 3, 1.0), g, Box{lo, hi}, e)};
}

std::vector<VerificationReport> gamma_criterion() {
  std::vector<VerificationReport> out;
  const ExperimentConfig liouville = liouville_config();
  const auto field = build_field(liouville, kSeed);
  const char* labels[] = {"bump", "x1_bump", "x1x2_bump"};
  for (const auto& name : preset_names()) {
    ExperimentConfig c = name == "lbm" ? liouville : bm_config();
    c.model.preset = name;
    const DiffusionSpec spec = build_spec(c, field);
    const auto fns = default_test_functions(spec, start_point(c, spec));
    const auto probes = generator_probes(spec, 100, kSeed);
    for (std::size_t i = 0; i < fns.size(); ++i) {
      out.push_back(renamed(check_gamma_identity(spec, fns[i], probes), name + "/" + labels[i]));
    }
    if (name == "bm") {
      GammaCheckOptions perturbed;
      perturbed.gamma_perturbation = 1e-3;
      out.push_back(renamed(check_gamma_identity(spec, fns[0], probes, perturbed), "control/perturbed_gamma"));
    }
  }
  return out;
}

std::vector<VerificationReport> martingale_criterion(int threads) {
  auto out = suite("martingale", bm_config(), threads, "bm/");
  for (auto& r : suite("martingale", liouville_config(), threads, "liouville/")) out.push_back(r);
  return out;
}

std::vector<VerificationReport> qv_criterion(int threads) {
  auto out = suite("quadratic-variation", bm_config(), threads, "bm/");
  for (auto& r : suite("quadratic-variation", liouville_config(), threads, "liouville/")) out.push_back(r);
  return out;
}

std::vector<VerificationReport> cross_criterion(int threads) {
  ExperimentConfig c = liouville_config();
  c.run.horizon = 0.5;
  c.run.sample_times = {0.5};
  return suite("cross-construction", c, threads, "liouville/");
}

// The control floor is fixed from the frozen field before any path is run:
// half of rho at the start point, which lies between min rho and rho(x0).
std::vector<VerificationReport> non_explosion_criterion(int threads) {
  ExperimentConfig c = liouville_config();
  auto out = suite("non-explosion", c, threads, "liouville/");

  const auto field = build_field(c, kSeed);
  const DiffusionSpec spec = build_spec(c, field);
  const Vec x0 = start_point(c, spec);
  const double rho0 = spec.coeffs.rho(x0);
  double rho_min = rho0;
  for (int iy = 0; iy < field->grid.ny; ++iy) {
    for (int ix = 0; ix < field->grid.nx; ++ix) {
      const Point2 p = field->grid.node(ix, iy);
      Vec z(2);
      z << p[0], p[1];
      rho_min = std::min(rho_min, spec.coeffs.rho(z));
    }
  }
  c.model.rho_floor = 0.5 * rho0;
  c.run.paths = 1000;
  auto control = suite("non-explosion", c, threads, "control/raised_floor/");
  control[0].details["rho_x0"] = rho0;
  control[0].details["rho_min"] = rho_min;
  control[0].details["floor"] = c.model.rho_floor;
  out.push_back(control[0]);
  const bool placed = rho_min < c.model.rho_floor && c.model.rho_floor < rho0;
  VerificationReport placement = deterministic("control/floor_between_min_and_start", placed ? 0.0 : 1.0, 0.5, 1);
  out.push_back(placement);
  return out;
}

std::vector<VerificationReport> scaling_criterion(int threads) {
  ExperimentConfig c = bm_config();
  c.model.preset = "lbm";
  c.model.params["rho_value"] = 4.0;
  c.run.sample_times = {1.0};
  auto out = suite("scaling", c, threads, "rho4/");

  // A = rho Id in the weighted family: the diffusion matrix must be Id exactly.
  ExperimentConfig d = bm_config();
  d.model.preset = "distorted-bm";
  const DiffusionSpec spec = build_spec(d, nullptr);
  const auto probes = generator_probes(spec, 100, kSeed);
  double worst = 0.0;
  for (const Vec& x : probes) {
    worst = std::max(worst, (diffusion_matrix(spec, x) - Mat::Identity(2, 2)).cwiseAbs().maxCoeff());
  }
  VerificationReport exact = deterministic("distorted_bm/sigma_minus_identity", worst, 0.0, 100);
  exact.pass = worst == 0.0;
  out.push_back(exact);
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void print_reports(const Criterion& c, const std::vector<VerificationReport>& reports) {
  for (const auto& r : reports) {
    std::printf("      %-38s est=%-12s target=%-8s se=%-10s excl=%-8s %s%s\n", r.name.c_str(),
                fmt("%.4g", r.estimate).c_str(), fmt("%.4g", r.target).c_str(), fmt("%.3g", r.std_error).c_str(),
                fmt("%.4f", r.excluded_fraction).c_str(), r.pass ? "pass" : "fail",
                is_control(c, r) ? " (control, must fail)" : "");
  }
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "kernel k_m vs m r K1(m r), rel err < 1e-8", [](int) { return kernel_criterion(false); }, {}},
      {2, "Green function vs K0 and integral forms, rel err < 1e-6", [](int) { return kernel_criterion(true); }, {}},
      {3, "field variance ln c_4 on 8x8 grid, 20000 samples, 4 SE", field_variance_criterion, {}},
      {4, "Liouville unit mass on a unit box, 20000 draws, 4 SE", mass_criterion, {}},
      {5, "carre du champ identity, presets x 3 functions x 100 probes", [](int) { return gamma_criterion(); },
       {"control/perturbed_gamma"}},
      {6, "martingale problem, BM and Liouville LBM, N = 10000", martingale_criterion, {}},
      {7, "quadratic variation at t = 1, BM and Liouville LBM", qv_criterion, {}},
      {8, "time change vs SDE at t = 0.5, Liouville LBM, N = 10000", cross_criterion, {}},
      {9, "non-explosion of Liouville LBM, raised-floor control", non_explosion_criterion,
       {"control/raised_floor/non_explosion"}},
      {10, "constant density 4: Var B_1 = 0.25, sigma = Id for A = rho Id", scaling_criterion, {}},
  };

  bool all_ok = true;
  std::vector<std::string> first_pass;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<VerificationReport> reports;
    std::string error;
    try {
      reports = c.run(1);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = error.empty() && criterion_pass(c, reports);
    all_ok = all_ok && ok;
    std::printf("%s [%d] %s (%.1f s)\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(), secs);
    if (!error.empty()) std::printf("      error: %s\n", error.c_str());
    print_reports(c, reports);
    std::fflush(stdout);
    first_pass.push_back(report_json(SuiteResult{"criterion-" + std::to_string(c.id), kSeed, reports}));
  }

  // Determinism: rerun every criterion with two worker threads.
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<int> mismatched;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string again;
    try {
      again = report_json(SuiteResult{"criterion-" + std::to_string(criteria[i].id), kSeed, criteria[i].run(2)});
    } catch (const std::exception&) {
      again = "<error>";
    }
    if (again != first_pass[i]) mismatched.push_back(criteria[i].id);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool det_ok = mismatched.empty();
  all_ok = all_ok && det_ok;
  std::printf("%s [11] byte-identical reports on rerun with 2 threads, criteria 1-10 (%.1f s)\n",
              det_ok ? "PASS" : "FAIL", secs);
  for (int id : mismatched) std::printf("      criterion %d differs\n", id);

  std::printf("%s\n", all_ok ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return all_ok ? 0 : 1;
}
