#include "singdiff/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "singdiff/errors.hpp"
#include "singdiff/generator.hpp"
#include "singdiff/kernels.hpp"
#include "singdiff/parallel.hpp"
#include "singdiff/paths.hpp"
#include "singdiff/rng.hpp"
#include "singdiff/sde.hpp"

namespace singdiff {

using nlohmann::json;

std::vector<std::string> suite_names() {
  return {"smoke",      "negative-control",   "kernels",      "field",   "mass",          "generator",
          "martingale", "quadratic-variation", "cross-construction", "scaling", "non-explosion", "all"};
}

std::string report_json(const SuiteResult& result) {
  json root;
  root["suite"] = result.suite;
  root["seed"] = result.seed;
  json& list = root["results"];
  list = json::array();
  for (const auto& r : result.results) {
    json details = json::object();
    for (const auto& [k, v] : r.details) details[k] = v;
    list.push_back({{"name", r.name},
                    {"estimate", r.estimate},
                    {"target", r.target},
                    {"std_error", r.std_error},
                    {"threshold", r.threshold},
                    {"n_samples", r.n_samples},
                    {"excluded_fraction", r.excluded_fraction},
                    {"max_excluded", r.max_excluded},
                    {"pass", r.pass},
                    {"details", details},
                    {"note", r.note}});
  }
  return root.dump(2) + "\n";
}

std::uint64_t field_seed(const ExperimentConfig& config, std::uint64_t master_seed) {
  if (config.field && config.field->seed) return *config.field->seed;
  return derive_stream(master_seed, "field-realization", 0);
}

namespace {

GridSpec grid_spec(const FieldConfig& f) {
  GridSpec g;
  g.origin = {f.grid.origin[0], f.grid.origin[1]};
  g.extent = {f.grid.extent[0], f.grid.extent[1]};
  g.nx = f.grid.nx;
  g.ny = f.grid.ny;
  return g;
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

bool uses_field(const ExperimentConfig& config) {
  const auto it = config.model.options.find("rho");
  if (it != config.model.options.end()) return it->second == "liouville";
  return config.model.preset == "lbm" && config.field.has_value();
}

// Deterministic checks reuse the report fields as: estimate = error,
// std_error = tolerance, threshold = 1.
VerificationReport tolerance_report(std::string name, double error, double tol, std::int64_t n) {
  VerificationReport r;
  r.name = std::move(name);
  r.estimate = error;
  r.target = 0.0;
  r.std_error = tol;
  r.threshold = 1.0;
  r.n_samples = n;
  r.finalize();
  return r;
}

std::vector<double> test_times(const ExperimentConfig& config) {
  if (!config.run.sample_times.empty()) return config.run.sample_times;
  return {config.run.horizon};
}

void add_kernel_reports(const ExperimentConfig& config, std::vector<VerificationReport>& out) {
  const double tol = config.field ? config.field->quad_tol : 1e-10;
  double err_k = 0.0, err_g = 0.0, err_layers = 0.0;
  int count = 0;
  for (double m : {0.5, 1.0, 2.0}) {
    KernelParams p = make_kernel_params(m, 1, 1.0, tol);
    for (int i = 0; i < 20; ++i) {
      const double r = 0.1 + (5.0 - 0.1) * i / 19.0;
      const double k1 = m * r * std::cyl_bessel_k(1.0, m * r);
      const double k0 = std::cyl_bessel_k(0.0, m * r);
      const double g = green_massive(p, r);
      err_k = std::max(err_k, std::fabs(k_m(p, r) - k1) / k1);
      err_g = std::max(err_g, std::fabs(g - k0) / k0);
      err_layers = std::max(err_layers, std::fabs(green_massive_layered(p, r) - g) / std::fabs(g));
      ++count;
    }
  }
  out.push_back(tolerance_report("kernel_vs_bessel_k1", err_k, 1e-8, count));
  out.push_back(tolerance_report("green_vs_bessel_k0", err_g, 1e-6, count));
  out.push_back(tolerance_report("green_integral_forms", err_layers, 1e-6, count));
}

Box default_mass_box(const GridSpec& g) {
  const int kx = std::clamp(static_cast<int>(std::lround(1.0 / g.hx())), 1, g.nx - 1);
  const int ky = std::clamp(static_cast<int>(std::lround(1.0 / g.hy())), 1, g.ny - 1);
  const int ix0 = (g.nx - 1 - kx) / 2;
  const int iy0 = (g.ny - 1 - ky) / 2;
  const Point2 lo = g.node(ix0, iy0);
  const Point2 hi = g.node(ix0 + kx, iy0 + ky);
  Vec l(2), h(2);
  l << lo[0], lo[1];
  h << hi[0], hi[1];
  return Box{l, h};
}

FieldEnsemble field_ensemble(const ExperimentConfig& config, std::uint64_t seed, int threads) {
  FieldEnsemble e;
  e.n_samples = config.verify.fields;
  e.seed = derive_stream(seed, "field-ensemble", 0);
  e.threshold = config.verify.threshold;
  e.threads = threads;
  return e;
}

const FieldConfig& require_field(const ExperimentConfig& config, const std::string& suite) {
  if (!config.field) throw ParseError("field", "suite '" + suite + "' needs a field section");
  return *config.field;
}

}  // namespace

std::shared_ptr<const GridField> build_field(const ExperimentConfig& config, std::uint64_t master_seed) {
  if (!config.field) return nullptr;
  const FieldConfig& f = *config.field;
  return std::make_shared<const GridField>(sample_field(f.kernel_params(), grid_spec(f), field_seed(config, master_seed)));
}

PresetParams preset_params(const ExperimentConfig& config, std::shared_ptr<const GridField> field) {
  PresetParams p;
  p.dim = config.model.dim;
  p.numbers = config.model.params;
  p.options = config.model.options;
  p.field = std::move(field);
  p.gamma = config.field ? config.field->gamma : 1.0;
  p.rho_floor = config.model.rho_floor;
  if (config.model.domain) p.domain = Box{to_vec(config.model.domain->lo), to_vec(config.model.domain->hi)};
  return p;
}

DiffusionSpec build_spec(const ExperimentConfig& config, std::shared_ptr<const GridField> field) {
  if (uses_field(config) && !field) throw ParseError("field", "model needs a field realization");
  try {
    return make_preset(config.model.preset, preset_params(config, uses_field(config) ? field : nullptr));
  } catch (const Error& e) {
    // bad option values or incompatible choices are configuration problems
    if (e.code() == ErrorCode::InvalidParameter || e.code() == ErrorCode::UnknownPreset) {
      throw ParseError("model", e.what());
    }
    throw;
  }
}

Vec start_point(const ExperimentConfig& config, const DiffusionSpec& spec) {
  if (!config.model.x0.empty()) return to_vec(config.model.x0);
  Vec x = spec.domain.center();
  if (!(spec.state_weight(x) > spec.rho_floor)) {
    x[0] += 0.25 * (spec.domain.hi[0] - spec.domain.lo[0]) / 2.0;
  }
  return x;
}

std::vector<TestFunction> default_test_functions(const DiffusionSpec& spec, const Vec& center) {
  const int dim = spec.dim;
  const Vec dist_lo = center - spec.domain.lo;
  const Vec dist_hi = spec.domain.hi - center;
  const double room = std::min(dist_lo.minCoeff(), dist_hi.minCoeff());
  const double radius = std::min(3.0, 0.9 * room);
  const TestFunction bump = bump_fn(center, radius);
  const TestFunction one = constant_fn(dim, 1.0);
  const TestFunction s0 = combine(1.0, coordinate_fn(dim, 0), -center[0], one);
  const TestFunction s1 = combine(1.0, coordinate_fn(dim, 1), -center[1], one);
  return {bump, product(s0, bump), product(product(s0, s1), bump)};
}

std::vector<Vec> generator_probes(const DiffusionSpec& spec, int count, std::uint64_t seed) {
  std::vector<Vec> probes;
  std::uint64_t round = 0;
  while (static_cast<int>(probes.size()) < count && round < 16) {
    for (const Vec& x : random_probes(spec.domain, count, derive_stream(seed, "generator-probes", round), 0.05)) {
      if (static_cast<int>(probes.size()) < count && spec.state_weight(x) > 1e3 * spec.rho_floor) probes.push_back(x);
    }
    ++round;
  }
  return probes;
}

EnsembleParams ensemble_params(const ExperimentConfig& config, const DiffusionSpec& spec, std::uint64_t seed,
                               int threads) {
  EnsembleParams e;
  e.n_paths = config.run.paths;
  e.dt = config.run.dt;
  e.x0 = start_point(config, spec);
  e.seed = seed;
  e.threshold = config.verify.threshold;
  e.threads = threads;
  e.localization_radii = config.model.localization_radii;
  return e;
}

SuiteResult run_suite(const std::string& suite, const ExperimentConfig& config, std::uint64_t seed, int threads) {
  const auto names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    throw Error(ErrorCode::UnknownPreset, "no suite named '" + suite + "'");
  }
  SuiteResult result;
  result.suite = suite;
  result.seed = seed;
  auto& out = result.results;
  const bool all = suite == "all";

  if (suite == "kernels" || all) add_kernel_reports(config, out);

  if (suite == "field" || all) {
    const FieldConfig& f = require_field(config, suite);
    const FieldEnsemble fe = field_ensemble(config, seed, threads);
    out.push_back(test_field_variance(f.kernel_params(), grid_spec(f), fe));
    out.push_back(test_field_covariance(f.kernel_params(), grid_spec(f), fe));
  }
  if (suite == "mass" || all) {
    const FieldConfig& f = require_field(config, suite);
    const GridSpec g = grid_spec(f);
    out.push_back(test_liouville_mass(f.kernel_params(), g, default_mass_box(g), field_ensemble(config, seed, threads)));
  }

  const bool needs_spec = suite != "kernels" && suite != "field" && suite != "mass";
  if (!needs_spec) return result;

  const auto field = build_field(config, seed);
  const DiffusionSpec spec = build_spec(config, field);
  const EnsembleParams ens = ensemble_params(config, spec, seed, threads);
  const auto fns = default_test_functions(spec, ens.x0);
  const std::vector<double> times = test_times(config);

  if (suite == "smoke" || all) {
    VerificationReport v = validate_spec(spec, generator_probes(spec, 20, seed), seed);
    out.push_back(v);
    out.push_back(check_gamma_identity(spec, fns[0], generator_probes(spec, 20, seed)));
    VerificationReport m = test_martingale(spec, constant_fn(spec.dim, 1.0), times, ens);
    m.name = "martingale_constant";
    out.push_back(m);
  }
  if (suite == "negative-control") {
    GammaCheckOptions perturbed;
    perturbed.gamma_perturbation = 1e-3;
    VerificationReport g = check_gamma_identity(spec, fns[0], generator_probes(spec, 100, seed), perturbed);
    g.name = "gamma_identity_perturbed";
    g.note = "negative control: expected to fail";
    out.push_back(g);
    MartingaleOptions drop;
    drop.drop_integral = true;
    VerificationReport m = test_martingale(spec, fns[0], times, ens, drop);
    m.note = "negative control: expected to fail";
    out.push_back(m);
  }
  if (suite == "generator" || all) {
    const auto probes = generator_probes(spec, 100, seed);
    const char* labels[] = {"bump", "x1_bump", "x1x2_bump"};
    for (std::size_t i = 0; i < fns.size(); ++i) {
      VerificationReport g = check_gamma_identity(spec, fns[i], probes);
      g.name = std::string("gamma_identity_") + labels[i];
      out.push_back(g);
      GammaCheckOptions fd;
      fd.use_fd = true;
      VerificationReport gf = check_gamma_identity(spec, fns[i], probes, fd);
      gf.name = std::string("gamma_identity_fd_") + labels[i];
      out.push_back(gf);
    }
  }
  if (suite == "martingale" || all) out.push_back(test_martingale(spec, fns[0], times, ens));
  if (suite == "quadratic-variation" || all) out.push_back(test_quadratic_variation(spec, fns[1], times.back(), ens));
  if (suite == "cross-construction" || (all && spec.family == Family::LBM)) {
    out.push_back(test_cross_construction(spec, times.back(), ens));
  }
  if (suite == "scaling" || (all && config.model.preset == "bm")) {
    if (spec.family != Family::LBM || uses_field(config)) {
      throw ParseError("model.preset", "the scaling suite needs a constant-density LBM model");
    }
    const auto it = config.model.params.find("rho_value");
    const double c = it == config.model.params.end() ? 1.0 : it->second;
    const double t = times.back();
    out.push_back(test_endpoint_variance(spec, t, t / c, ens, Construction::TimeChange));
    out.push_back(test_endpoint_variance(spec, t, t / c, ens, Construction::Sde));
  }
  if (suite == "non-explosion" || all) out.push_back(test_non_explosion(spec, config.run.horizon, ens));
  return result;
}

std::size_t run_simulation(const ExperimentConfig& config, std::uint64_t seed, int threads,
                           const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto field = build_field(config, seed);
  if (field) {
    const bool binary = config.io.format == "binary";
    const fs::path file = fs::path(out_dir) / (binary ? "field.bin" : "field.csv");
    std::ofstream f(file, binary ? std::ios::binary : std::ios::out);
    if (binary) {
      write_field_binary(*field, f);
    } else {
      write_field_csv(*field, f);
    }
  }
  const DiffusionSpec spec = build_spec(config, field);
  const EnsembleParams ens = ensemble_params(config, spec, seed, threads);
  const std::vector<double> times = test_times(config);
  const std::size_t n = static_cast<std::size_t>(config.run.paths);

  std::vector<Path> paths(n);
  parallel_for(n, threads, [&](std::size_t i) {
    SdeRun run;
    run.spec = spec;
    run.x0 = ens.x0;
    run.dt = config.run.dt;
    run.horizon = config.run.horizon;
    run.seed = derive_stream(seed, "simulate", i);
    run.localization_radii = config.model.localization_radii;
    paths[i] = simulate_sde(run);
  });

  char name[32];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(name, sizeof name, "path_%05zu.csv", i);
    std::ofstream f(fs::path(out_dir) / name);
    write_path_csv(paths[i], f);
  }

  // Ensemble moments at the sample times over paths alive there.
  json moments = json::array();
  const int dim = spec.dim;
  for (double t : times) {
    const std::size_t k = static_cast<std::size_t>(std::llround(t / config.run.dt));
    std::vector<Vec> pts;
    for (const Path& p : paths) {
      if (k < p.states.size() && p.lifetime.alive_at(k)) pts.push_back(p.states[k]);
    }
    Vec mean = Vec::Zero(dim);
    for (const Vec& x : pts) mean += x;
    if (!pts.empty()) mean /= static_cast<double>(pts.size());
    Mat cov = Mat::Zero(dim, dim);
    for (const Vec& x : pts) cov += (x - mean) * (x - mean).transpose();
    if (pts.size() > 1) cov /= static_cast<double>(pts.size() - 1);
    json jm = json::array(), jc = json::array();
    for (int i = 0; i < dim; ++i) {
      jm.push_back(mean[i]);
      json row = json::array();
      for (int j = 0; j < dim; ++j) row.push_back(cov(i, j));
      jc.push_back(row);
    }
    moments.push_back({{"t", t},
                       {"mean", jm},
                       {"cov", jc},
                       {"killed_fraction", 1.0 - static_cast<double>(pts.size()) / static_cast<double>(n)}});
  }
  std::ofstream mf(fs::path(out_dir) / "moments.json");
  mf << moments.dump(2) << "\n";
  return n;
}

}  // namespace singdiff
