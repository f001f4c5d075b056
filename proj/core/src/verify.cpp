#include "singdiff/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "singdiff/errors.hpp"
#include "singdiff/generator.hpp"
#include "singdiff/parallel.hpp"
#include "singdiff/paths.hpp"
#include "singdiff/rng.hpp"
#include "singdiff/sde.hpp"

namespace singdiff {

namespace {

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

// Two-pass mean and standard error of the mean, summed in index order.
Moments moments(const std::vector<double>& xs) {
  Moments m;
  m.n = xs.size();
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return m;
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return m;
}

double z_score(double diff, double se) {
  if (diff == 0.0) return 0.0;
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  return std::fabs(diff) / se;
}

std::string key(const char* name, double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s[t=%g]", name, t);
  return buf;
}

std::string key(const char* name, int i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s[%d]", name, i);
  return buf;
}

std::string key(const char* name, int i, int j) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s[%d,%d]", name, i, j);
  return buf;
}

void check_ensemble(const EnsembleParams& e) {
  if (e.n_paths < 2) throw Error(ErrorCode::InvalidParameter, "ensemble needs at least 2 paths");
  if (!(e.dt > 0.0) || !std::isfinite(e.dt)) throw Error(ErrorCode::InvalidParameter, "dt must be positive");
  if (!(e.threshold > 0.0)) throw Error(ErrorCode::InvalidParameter, "threshold must be positive");
}

Vec start_point(const DiffusionSpec& spec, const EnsembleParams& e) {
  return e.x0.size() == 0 ? spec.domain.center() : e.x0;
}

// Step index of time t on the Euler grid; t must be a multiple of dt.
std::size_t time_index(double t, double dt) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidParameter, "test times must be positive");
  const double k = std::round(t / dt);
  if (std::fabs(k * dt - t) > 1e-9 * std::max(1.0, t)) {
    throw Error(ErrorCode::InvalidParameter, "test time " + std::to_string(t) + " is not a multiple of dt");
  }
  return static_cast<std::size_t>(k);
}

SdeRun make_run(const DiffusionSpec& spec, const EnsembleParams& e, double horizon, std::uint64_t path_seed) {
  SdeRun run;
  run.spec = spec;
  run.x0 = start_point(spec, e);
  run.dt = e.dt;
  run.horizon = horizon;
  run.seed = path_seed;
  run.localization_radii = e.localization_radii;
  return run;
}

// Per-path martingale functionals at the record steps. `m_u` and `m_v` hold
// M^u and M^v; `bracket` holds int Gamma(u, v); `alive` flags the record
// steps reached before the kill.
struct PathFunctionals {
  std::vector<double> m_u;
  std::vector<double> m_v;
  std::vector<double> bracket;
  std::vector<char> alive;
};

PathFunctionals run_functionals(const SdeRun& run, const TestFunction& u, const TestFunction* v,
                                const std::vector<std::size_t>& record, bool drop_integral) {
  const DiffusionSpec& spec = run.spec;
  const std::size_t n_rec = record.size();
  PathFunctionals out;
  out.m_u.assign(n_rec, 0.0);
  out.m_v.assign(n_rec, 0.0);
  out.bracket.assign(n_rec, 0.0);
  out.alive.assign(n_rec, 0);

  const double outer = run.localization_radii.empty() ? std::numeric_limits<double>::infinity()
                                                      : run.localization_radii.back();
  const Vec center = spec.domain.center();
  const double half_dt = 0.5 * run.dt;
  double u0 = 0.0, v0 = 0.0;
  double int_lu = 0.0, int_lv = 0.0, int_gamma = 0.0;
  double prev_lu = 0.0, prev_lv = 0.0, prev_gamma = 0.0;
  bool dead = false;
  std::size_t next = 0;

  simulate_sde(run, [&](std::size_t k, double, const Vec& x) {
    if (dead) return;
    if (!spec.domain.contains(x) || !x.allFinite() || (x - center).norm() >= outer ||
        !(spec.state_weight(x) > spec.rho_floor)) {
      dead = true;
      return;
    }
    const LocalCoefficients lc = local_coefficients(spec, x);
    const Jet ju = u.jet(x);
    const double lu = 0.5 * lc.second_order.cwiseProduct(ju.hess).sum() + lc.drift.dot(ju.grad);
    double lv = lu, vv = ju.value, gamma;
    if (v != nullptr) {
      const Jet jv = v->jet(x);
      lv = 0.5 * lc.second_order.cwiseProduct(jv.hess).sum() + lc.drift.dot(jv.grad);
      vv = jv.value;
      gamma = ju.grad.dot(lc.second_order * jv.grad);
    } else {
      gamma = ju.grad.dot(lc.second_order * ju.grad);
    }
    if (k == 0) {
      u0 = ju.value;
      v0 = vv;
    } else {
      int_lu += half_dt * (prev_lu + lu);
      int_lv += half_dt * (prev_lv + lv);
      int_gamma += half_dt * (prev_gamma + gamma);
    }
    prev_lu = lu;
    prev_lv = lv;
    prev_gamma = gamma;
    while (next < n_rec && record[next] == k) {
      out.m_u[next] = ju.value - u0 - (drop_integral ? 0.0 : int_lu);
      out.m_v[next] = vv - v0 - (drop_integral ? 0.0 : int_lv);
      out.bracket[next] = int_gamma;
      out.alive[next] = 1;
      ++next;
    }
  });
  return out;
}

std::vector<PathFunctionals> run_ensemble(const DiffusionSpec& spec, const TestFunction& u, const TestFunction* v,
                                          const std::vector<std::size_t>& record, const EnsembleParams& e,
                                          const char* tag, bool drop_integral) {
  const double horizon = static_cast<double>(record.back()) * e.dt;
  std::vector<PathFunctionals> results(static_cast<std::size_t>(e.n_paths));
  parallel_for(results.size(), e.threads, [&](std::size_t i) {
    const SdeRun run = make_run(spec, e, horizon, derive_stream(e.seed, tag, i));
    results[i] = run_functionals(run, u, v, record, drop_integral);
  });
  return results;
}

}  // namespace

VerificationReport test_martingale(const DiffusionSpec& spec, const TestFunction& u,
                                   const std::vector<double>& times, const EnsembleParams& ensemble,
                                   const MartingaleOptions& options) {
  check_ensemble(ensemble);
  if (times.empty() || !std::is_sorted(times.begin(), times.end())) {
    throw Error(ErrorCode::InvalidParameter, "martingale test needs increasing times");
  }
  std::vector<std::size_t> record;
  for (double t : times) record.push_back(time_index(t, ensemble.dt));
  const auto paths = run_ensemble(spec, u, nullptr, record, ensemble, "martingale", options.drop_integral);

  VerificationReport report;
  report.name = options.drop_integral ? "martingale_without_integral" : "martingale";
  report.target = 0.0;
  report.threshold = ensemble.threshold;
  report.max_excluded = ensemble.max_excluded;
  double worst_z = -1.0;
  std::size_t killed = 0;
  for (const auto& p : paths) killed += p.alive.back() ? 0 : 1;
  for (std::size_t j = 0; j < record.size(); ++j) {
    std::vector<double> xs;
    xs.reserve(paths.size());
    for (const auto& p : paths) {
      if (p.alive[j]) xs.push_back(p.m_u[j]);
    }
    const Moments m = moments(xs);
    const double z = z_score(m.mean, m.std_error);
    report.details[key("mean", times[j])] = m.mean;
    report.details[key("se", times[j])] = m.std_error;
    report.details[key("n", times[j])] = static_cast<double>(m.n);
    if (z > worst_z) {
      worst_z = z;
      report.estimate = m.mean;
      report.std_error = m.std_error;
      report.n_samples = static_cast<std::int64_t>(m.n);
      report.details["worst_time"] = times[j];
    }
  }
  report.excluded_fraction = static_cast<double>(killed) / static_cast<double>(paths.size());
  report.finalize();
  return report;
}

VerificationReport test_covariation(const DiffusionSpec& spec, const TestFunction& u, const TestFunction& v,
                                    double t, const EnsembleParams& ensemble) {
  check_ensemble(ensemble);
  const std::vector<std::size_t> record{time_index(t, ensemble.dt)};
  const auto paths = run_ensemble(spec, u, &v, record, ensemble, "covariation", false);

  std::vector<double> xs;
  std::vector<double> lhs, rhs;
  std::size_t killed = 0;
  for (const auto& p : paths) {
    if (!p.alive[0]) {
      ++killed;
      continue;
    }
    xs.push_back(p.m_u[0] * p.m_v[0] - p.bracket[0]);
    lhs.push_back(p.m_u[0] * p.m_v[0]);
    rhs.push_back(p.bracket[0]);
  }
  const Moments m = moments(xs);
  VerificationReport report;
  report.name = "covariation";
  report.estimate = m.mean;
  report.target = 0.0;
  report.std_error = m.std_error;
  report.threshold = ensemble.threshold;
  report.n_samples = static_cast<std::int64_t>(m.n);
  report.max_excluded = ensemble.max_excluded;
  report.excluded_fraction = static_cast<double>(killed) / static_cast<double>(paths.size());
  report.details["t"] = t;
  report.details["mean_MuMv"] = moments(lhs).mean;
  report.details["mean_bracket"] = moments(rhs).mean;
  report.finalize();
  return report;
}

VerificationReport test_quadratic_variation(const DiffusionSpec& spec, const TestFunction& u, double t,
                                            const EnsembleParams& ensemble) {
  VerificationReport report = test_covariation(spec, u, u, t, ensemble);
  report.name = "quadratic_variation";
  return report;
}

EndpointEnsemble sample_endpoints(const DiffusionSpec& spec, double t, const EnsembleParams& ensemble,
                                  Construction construction) {
  check_ensemble(ensemble);
  const std::size_t n_steps = time_index(t, ensemble.dt);
  const std::size_t n = static_cast<std::size_t>(ensemble.n_paths);
  std::vector<Vec> points(n);
  std::vector<char> alive(n, 0);

  if (construction == Construction::TimeChange) {
    if (spec.family != Family::LBM) {
      throw Error(ErrorCode::InvalidParameter, "the time-change construction needs an LBM spec");
    }
    TimeChangeOptions opts;
    opts.dt = ensemble.dt;
    opts.domain = spec.domain;
    const Vec x0 = start_point(spec, ensemble);
    const std::vector<double> sample_times{t};
    parallel_for(n, ensemble.threads, [&](std::size_t i) {
      const Path p = lbm_by_time_change(spec.coeffs.rho, x0, sample_times,
                                        derive_stream(ensemble.seed, "time-change", i), opts);
      if (!p.lifetime.alive) {
        if (p.lifetime.reason == KillReason::HorizonExceeded) {
          throw Error(ErrorCode::HorizonExceeded, "additive functional did not reach t on path " +
                                                      std::to_string(i));
        }
        return;
      }
      points[i] = p.states.back();
      alive[i] = 1;
    });
  } else {
    const double horizon = static_cast<double>(n_steps) * ensemble.dt;
    parallel_for(n, ensemble.threads, [&](std::size_t i) {
      const SdeRun run = make_run(spec, ensemble, horizon, derive_stream(ensemble.seed, "sde-endpoint", i));
      Vec last;
      const RunSummary s = simulate_sde(run, [&](std::size_t, double, const Vec& x) { last = x; });
      if (!s.lifetime.alive) return;
      points[i] = last;
      alive[i] = 1;
    });
  }

  EndpointEnsemble out;
  out.requested = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (alive[i]) {
      out.points.push_back(points[i]);
    } else {
      ++out.killed;
    }
  }
  return out;
}

namespace {

struct ComponentStats {
  std::vector<double> value;
  std::vector<double> se;
  std::vector<std::string> names;
};

// Means, then upper-triangle covariances, each with its standard error.
ComponentStats endpoint_components(const std::vector<Vec>& pts, int dim) {
  ComponentStats c;
  std::vector<double> mean(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    std::vector<double> xs;
    xs.reserve(pts.size());
    for (const auto& p : pts) xs.push_back(p[i]);
    const Moments m = moments(xs);
    mean[static_cast<std::size_t>(i)] = m.mean;
    c.value.push_back(m.mean);
    c.se.push_back(m.std_error);
    c.names.push_back(key("mean", i));
  }
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      std::vector<double> xs;
      xs.reserve(pts.size());
      for (const auto& p : pts) {
        xs.push_back((p[i] - mean[static_cast<std::size_t>(i)]) * (p[j] - mean[static_cast<std::size_t>(j)]));
      }
      const Moments m = moments(xs);
      c.value.push_back(m.mean);
      c.se.push_back(m.std_error);
      c.names.push_back(key("cov", i, j));
    }
  }
  return c;
}

}  // namespace

VerificationReport test_cross_construction(const DiffusionSpec& lbm_spec, double t, const EnsembleParams& ensemble) {
  const EndpointEnsemble tc = sample_endpoints(lbm_spec, t, ensemble, Construction::TimeChange);
  const EndpointEnsemble sde = sample_endpoints(lbm_spec, t, ensemble, Construction::Sde);
  if (tc.points.size() < 2 || sde.points.size() < 2) {
    throw Error(ErrorCode::InvalidParameter, "too few surviving paths for the cross-construction test");
  }
  const ComponentStats a = endpoint_components(tc.points, lbm_spec.dim);
  const ComponentStats b = endpoint_components(sde.points, lbm_spec.dim);

  VerificationReport report;
  report.name = "cross_construction";
  report.target = 0.0;
  report.threshold = ensemble.threshold;
  report.max_excluded = ensemble.max_excluded;
  report.n_samples = static_cast<std::int64_t>(tc.points.size() + sde.points.size());
  report.excluded_fraction =
      static_cast<double>(tc.killed + sde.killed) / static_cast<double>(tc.requested + sde.requested);
  report.details["t"] = t;
  double worst_z = -1.0;
  for (std::size_t c = 0; c < a.value.size(); ++c) {
    const double diff = a.value[c] - b.value[c];
    const double se = std::hypot(a.se[c], b.se[c]);
    report.details["time_change." + a.names[c]] = a.value[c];
    report.details["sde." + a.names[c]] = b.value[c];
    report.details["pooled_se." + a.names[c]] = se;
    const double z = z_score(diff, se);
    if (z > worst_z) {
      worst_z = z;
      report.estimate = diff;
      report.std_error = se;
      report.details["worst_component"] = static_cast<double>(c);
    }
  }
  report.finalize();
  return report;
}

VerificationReport test_cross_construction(std::shared_ptr<const GridField> field, double gamma, double t,
                                           const EnsembleParams& ensemble) {
  PresetParams params;
  params.dim = 2;
  params.field = std::move(field);
  params.gamma = gamma;
  params.options["rho"] = "liouville";
  return test_cross_construction(make_preset("lbm", params), t, ensemble);
}

VerificationReport test_endpoint_variance(const DiffusionSpec& spec, double t, double target,
                                          const EnsembleParams& ensemble, Construction construction) {
  const EndpointEnsemble e = sample_endpoints(spec, t, ensemble, construction);
  if (e.points.size() < 2) throw Error(ErrorCode::InvalidParameter, "too few surviving paths");
  const ComponentStats c = endpoint_components(e.points, spec.dim);

  VerificationReport report;
  report.name = construction == Construction::TimeChange ? "variance_time_change" : "variance_sde";
  report.target = target;
  report.threshold = ensemble.threshold;
  report.max_excluded = ensemble.max_excluded;
  report.n_samples = static_cast<std::int64_t>(e.points.size());
  report.excluded_fraction = static_cast<double>(e.killed) / static_cast<double>(e.requested);
  report.details["t"] = t;
  double worst_z = -1.0;
  // Diagonal covariance entries follow the d means: (0,0), then (1,1) after d - 1 more, ...
  std::size_t idx = static_cast<std::size_t>(spec.dim);
  for (int i = 0; i < spec.dim; ++i) {
    const double v = c.value[idx];
    const double se = c.se[idx];
    report.details[key("var", i)] = v;
    report.details[key("se", i)] = se;
    const double z = z_score(v - target, se);
    if (z > worst_z) {
      worst_z = z;
      report.estimate = v;
      report.std_error = se;
      report.details["worst_coordinate"] = i;
    }
    idx += static_cast<std::size_t>(spec.dim - i);
  }
  report.finalize();
  return report;
}

namespace {

void check_field_ensemble(const FieldEnsemble& e) {
  if (e.n_samples < 2) throw Error(ErrorCode::InvalidParameter, "field ensemble needs at least 2 samples");
  if (!(e.threshold > 0.0)) throw Error(ErrorCode::InvalidParameter, "threshold must be positive");
}

// Draws are produced in blocks; each block is filled in parallel and consumed
// in index order, so the statistics do not depend on the thread count.
template <class Consume>
void for_each_field(const FieldSampler& sampler, const FieldEnsemble& e, Consume&& consume) {
  constexpr std::size_t kBlock = 512;
  const std::size_t n = static_cast<std::size_t>(e.n_samples);
  std::vector<GridField> block;
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t count = std::min(kBlock, n - start);
    block.assign(count, GridField{});
    parallel_for(count, e.threads, [&](std::size_t i) { block[i] = sampler.sample(e.seed, start + i); });
    for (std::size_t i = 0; i < count; ++i) consume(start + i, block[i]);
  }
}

int aligned_index(double coordinate, double origin, double h, int n, const char* what) {
  const double s = (coordinate - origin) / h;
  const double r = std::round(s);
  if (std::fabs(s - r) > 1e-9 * std::max(1.0, std::fabs(s)) || r < 0 || r > n - 1) {
    throw Error(ErrorCode::InvalidParameter, std::string("mass box ") + what + " edge is not on a grid line");
  }
  return static_cast<int>(r);
}

}  // namespace

VerificationReport test_liouville_mass(const KernelParams& params, const GridSpec& grid, const Box& box,
                                       const FieldEnsemble& ensemble) {
  check_field_ensemble(ensemble);
  params.validate();
  grid.validate();
  if (box.dim() != 2) throw Error(ErrorCode::InvalidParameter, "mass box must be two-dimensional");
  const int ix0 = aligned_index(box.lo[0], grid.origin[0], grid.hx(), grid.nx, "x");
  const int ix1 = aligned_index(box.hi[0], grid.origin[0], grid.hx(), grid.nx, "x");
  const int iy0 = aligned_index(box.lo[1], grid.origin[1], grid.hy(), grid.ny, "y");
  const int iy1 = aligned_index(box.hi[1], grid.origin[1], grid.hy(), grid.ny, "y");
  if (ix1 <= ix0 || iy1 <= iy0) throw Error(ErrorCode::InvalidParameter, "mass box is empty");

  // Tensor trapezoid weights over the nodes of the box.
  struct Node {
    std::size_t index;
    double weight;
  };
  std::vector<Node> nodes;
  double weight_sum = 0.0;
  for (int iy = iy0; iy <= iy1; ++iy) {
    const double wy = (iy == iy0 || iy == iy1) ? 0.5 * grid.hy() : grid.hy();
    for (int ix = ix0; ix <= ix1; ++ix) {
      const double wx = (ix == ix0 || ix == ix1) ? 0.5 * grid.hx() : grid.hx();
      nodes.push_back({grid.index(ix, iy), wx * wy});
      weight_sum += wx * wy;
    }
  }

  const FieldSampler sampler(params, grid);
  const double gamma = params.gamma;
  const double shift = 0.5 * gamma * gamma * params.field_variance();
  std::vector<double> masses(static_cast<std::size_t>(ensemble.n_samples));
  for_each_field(sampler, ensemble, [&](std::size_t i, const GridField& f) {
    double mass = 0.0;
    for (const Node& node : nodes) mass += node.weight * std::exp(gamma * f.values[node.index] - shift);
    masses[i] = mass;
  });

  const Moments m = moments(masses);
  VerificationReport report;
  report.name = "liouville_mass";
  report.estimate = m.mean;
  // The trapezoid weights sum to the box area; using that sum keeps the
  // zero-field case exact.
  report.target = weight_sum;
  report.std_error = m.std_error;
  report.threshold = ensemble.threshold;
  report.n_samples = static_cast<std::int64_t>(m.n);
  report.details["area"] = box.volume();
  report.details["gamma"] = gamma;
  report.details["n"] = params.n;
  report.finalize();
  return report;
}

VerificationReport test_field_variance(const KernelParams& params, const GridSpec& grid,
                                       const FieldEnsemble& ensemble) {
  check_field_ensemble(ensemble);
  const FieldSampler sampler(params, grid);
  const std::size_t nodes = grid.size();
  const std::size_t n = static_cast<std::size_t>(ensemble.n_samples);
  std::vector<double> sum(nodes, 0.0), sum_sq(nodes, 0.0);
  for_each_field(sampler, ensemble, [&](std::size_t, const GridField& f) {
    for (std::size_t j = 0; j < nodes; ++j) {
      const double x2 = f.values[j] * f.values[j];
      sum[j] += x2;
      sum_sq[j] += x2 * x2;
    }
  });

  const double target = params.field_variance();
  VerificationReport report;
  report.name = "field_variance";
  report.target = target;
  report.threshold = ensemble.threshold;
  report.n_samples = static_cast<std::int64_t>(n);
  double worst_z = -1.0;
  double max_abs_z = 0.0;
  const double dn = static_cast<double>(n);
  for (std::size_t j = 0; j < nodes; ++j) {
    const double mean = sum[j] / dn;
    const double var = std::max(0.0, (sum_sq[j] - dn * mean * mean) / (dn - 1.0));
    const double se = std::sqrt(var / dn);
    const double z = z_score(mean - target, se);
    max_abs_z = std::max(max_abs_z, z);
    if (z > worst_z) {
      worst_z = z;
      report.estimate = mean;
      report.std_error = se;
      report.details["worst_node"] = static_cast<double>(j);
    }
  }
  report.details["max_abs_z"] = max_abs_z;
  report.details["nodes"] = static_cast<double>(nodes);
  report.finalize();
  return report;
}

VerificationReport test_field_covariance(const KernelParams& params, const GridSpec& grid,
                                         const FieldEnsemble& ensemble) {
  check_field_ensemble(ensemble);
  const FieldSampler sampler(params, grid);
  const std::size_t pairs = static_cast<std::size_t>(grid.nx - 1);
  const std::size_t n = static_cast<std::size_t>(ensemble.n_samples);
  std::vector<double> sum(pairs, 0.0), sum_sq(pairs, 0.0);
  for_each_field(sampler, ensemble, [&](std::size_t, const GridField& f) {
    for (std::size_t j = 0; j < pairs; ++j) {
      const double p = f.values[0] * f.values[j + 1];
      sum[j] += p;
      sum_sq[j] += p * p;
    }
  });

  VerificationReport report;
  report.name = "field_covariance";
  report.threshold = ensemble.threshold;
  report.n_samples = static_cast<std::int64_t>(n);
  double worst_z = -1.0;
  const double dn = static_cast<double>(n);
  for (std::size_t j = 0; j < pairs; ++j) {
    const double r = static_cast<double>(j + 1) * grid.hx();
    const double target = field_covariance(params, r);
    const double mean = sum[j] / dn;
    const double var = std::max(0.0, (sum_sq[j] - dn * mean * mean) / (dn - 1.0));
    const double se = std::sqrt(var / dn);
    report.details[key("target", static_cast<int>(j + 1))] = target;
    report.details[key("estimate", static_cast<int>(j + 1))] = mean;
    const double z = z_score(mean - target, se);
    if (z > worst_z) {
      worst_z = z;
      report.estimate = mean;
      report.target = target;
      report.std_error = se;
      report.details["worst_distance"] = r;
    }
  }
  report.finalize();
  return report;
}

VerificationReport test_non_explosion(const DiffusionSpec& spec, double horizon, const EnsembleParams& ensemble) {
  check_ensemble(ensemble);
  const std::size_t n = static_cast<std::size_t>(ensemble.n_paths);
  std::vector<char> reason(n, 0);  // 0 alive, 1 rho floor, 2 domain
  parallel_for(n, ensemble.threads, [&](std::size_t i) {
    const SdeRun run = make_run(spec, ensemble, horizon, derive_stream(ensemble.seed, "non-explosion", i));
    const RunSummary s = simulate_sde(run, nullptr);
    if (!s.lifetime.alive) reason[i] = s.lifetime.reason == KillReason::RhoFloor ? 1 : 2;
  });
  std::size_t floor_kills = 0, exits = 0;
  for (char r : reason) {
    floor_kills += r == 1;
    exits += r == 2;
  }
  VerificationReport report;
  report.name = "non_explosion";
  report.estimate = static_cast<double>(floor_kills) / static_cast<double>(n);
  report.target = 0.0;
  report.std_error = 0.0;
  report.threshold = ensemble.threshold;
  report.n_samples = static_cast<std::int64_t>(n);
  report.details["rho_floor_kills"] = static_cast<double>(floor_kills);
  report.details["domain_exits"] = static_cast<double>(exits);
  report.details["domain_exit_fraction"] = static_cast<double>(exits) / static_cast<double>(n);
  report.details["rho_floor"] = spec.rho_floor;
  report.details["horizon"] = horizon;
  report.finalize();
  return report;
}

}  // namespace singdiff
