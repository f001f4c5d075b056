#include "singdiff/paths.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "singdiff/errors.hpp"

namespace singdiff {

std::string to_string(KillReason reason) {
  switch (reason) {
    case KillReason::RhoFloor: return "RhoFloor";
    case KillReason::LeftDomain: return "LeftDomain";
    case KillReason::HorizonExceeded: return "HorizonExceeded";
  }
  return "Unknown";
}

BrownianStepper::BrownianStepper(int dim, Vec x0, double dt, std::uint64_t seed)
    : dim_(dim), x_(std::move(x0)), dt_(dt), sqrt_dt_(std::sqrt(dt)), stream_(derive_stream(seed, "bm", 0)) {}

const Vec& BrownianStepper::step() {
  for (int i = 0; i < dim_; ++i) x_[i] += sqrt_dt_ * stream_.normal();
  ++steps_;
  return x_;
}

std::size_t step_count(double dt, double horizon) {
  return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

namespace {

void check_run(int dim, const Vec& x0, double dt, double horizon) {
  if (!(dt > 0.0) || !(horizon > 0.0) || !std::isfinite(dt) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::InvalidParameter, "dt and horizon must be positive and finite");
  }
  if (dim < 1 || dim > kMaxDim || x0.size() != dim || !x0.allFinite()) {
    throw Error(ErrorCode::InvalidParameter, "x0 must be a finite point of dimension dim");
  }
}

// Number of leading states at which the path is alive.
std::size_t alive_count(const Path& path) {
  return path.lifetime.alive ? path.states.size() : std::min(path.lifetime.index, path.states.size());
}

}  // namespace

Path simulate_bm(int dim, const Vec& x0, double dt, double horizon, std::uint64_t seed) {
  check_run(dim, x0, dt, horizon);
  const std::size_t n = step_count(dt, horizon);
  Path path;
  path.times.reserve(n + 1);
  path.states.reserve(n + 1);
  BrownianStepper bm(dim, x0, dt, seed);
  path.times.push_back(0.0);
  path.states.push_back(x0);
  for (std::size_t k = 0; k < n; ++k) {
    path.states.push_back(bm.step());
    path.times.push_back(bm.time());
  }
  return path;
}

AdditiveFunctional pcaf(const Path& path, const std::function<double(const Vec&)>& rho) {
  const std::size_t n = alive_count(path);
  AdditiveFunctional F;
  F.times.assign(path.times.begin(), path.times.begin() + static_cast<std::ptrdiff_t>(n));
  F.values.resize(n);
  if (n == 0) return F;
  F.values[0] = 0.0;
  double previous = rho(path.states[0]);
  for (std::size_t k = 1; k < n; ++k) {
    const double current = rho(path.states[k]);
    F.values[k] = F.values[k - 1] + 0.5 * (F.times[k] - F.times[k - 1]) * (previous + current);
    previous = current;
  }
  return F;
}

InverseLocation locate_inverse(const AdditiveFunctional& F, double t) {
  if (F.values.empty() || !(t >= 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "inverse_time_change needs t >= 0 and a non-empty F");
  }
  if (t > F.values.back()) {
    throw Error(ErrorCode::HorizonExceeded, "t = " + std::to_string(t) + " exceeds F(T) = " +
                                                std::to_string(F.values.back()));
  }
  if (F.values.size() == 1) return {0, 0.0, F.times[0]};
  // first index with F >= t, then step back to the segment [k, k+1]
  const auto it = std::lower_bound(F.values.begin(), F.values.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - F.values.begin());
  if (hi == 0) return {0, 0.0, F.times[0]};
  const std::size_t k = hi - 1;
  const double f0 = F.values[k], f1 = F.values[hi];
  const double theta = f1 > f0 ? (t - f0) / (f1 - f0) : 1.0;
  const double s = F.times[k] + theta * (F.times[hi] - F.times[k]);
  return {k, theta, s};
}

double inverse_time_change(const AdditiveFunctional& F, double t) { return locate_inverse(F, t).s; }

namespace {

Path sample_time_change(const Path& bm, const AdditiveFunctional& F,
                        const std::vector<double>& sample_times) {
  Path out;
  const int dim = bm.states.empty() ? 0 : static_cast<int>(bm.states[0].size());
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    const double t = sample_times[i];
    if (F.values.empty() || t > F.values.back()) {
      // driving time ran out: if the BM itself was killed, that is the reason
      const KillReason reason = bm.lifetime.alive ? KillReason::HorizonExceeded : bm.lifetime.reason;
      out.times.push_back(t);
      out.states.push_back(Vec::Constant(dim, std::numeric_limits<double>::quiet_NaN()));
      out.lifetime = Lifetime::Killed(i, reason);
      return out;
    }
    const InverseLocation loc = locate_inverse(F, t);
    Vec x = bm.states[loc.k];
    if (loc.theta > 0.0) x = (1.0 - loc.theta) * bm.states[loc.k] + loc.theta * bm.states[loc.k + 1];
    out.times.push_back(t);
    out.states.push_back(x);
  }
  return out;
}

}  // namespace

Path time_changed_path(const Path& bm, const std::function<double(const Vec&)>& rho,
                       const std::vector<double>& sample_times) {
  if (!std::is_sorted(sample_times.begin(), sample_times.end()) ||
      (!sample_times.empty() && sample_times.front() < 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "sample times must be nondecreasing and >= 0");
  }
  return sample_time_change(bm, pcaf(bm, rho), sample_times);
}

Path lbm_by_time_change(const std::function<double(const Vec&)>& rho, const Vec& x0,
                        const std::vector<double>& sample_times, std::uint64_t seed,
                        const TimeChangeOptions& options) {
  if (sample_times.empty()) throw Error(ErrorCode::InvalidParameter, "no sample times");
  if (!std::is_sorted(sample_times.begin(), sample_times.end()) || sample_times.front() < 0.0) {
    throw Error(ErrorCode::InvalidParameter, "sample times must be nondecreasing and >= 0");
  }
  const double target = sample_times.back();
  check_run(static_cast<int>(x0.size()), x0, options.dt, std::max(target, options.dt));
  if (options.domain && !options.domain->contains(x0)) {
    throw Error(ErrorCode::InvalidParameter, "x0 outside the domain");
  }

  Path bm;
  AdditiveFunctional F;
  BrownianStepper stepper(static_cast<int>(x0.size()), x0, options.dt, seed);
  bm.times.push_back(0.0);
  bm.states.push_back(x0);
  F.times.push_back(0.0);
  F.values.push_back(0.0);
  double rho_prev = rho(x0);

  std::size_t budget = step_count(options.dt, std::max(target, options.dt));
  int doublings = 0;
  while (F.values.back() < target) {
    if (stepper.steps() >= budget) {
      if (doublings == options.max_doublings) {
        bm.lifetime = Lifetime::Killed(bm.states.size(), KillReason::HorizonExceeded);
        break;
      }
      budget *= 2;
      ++doublings;
    }
    const Vec& x = stepper.step();
    if (options.domain && !options.domain->contains(x)) {
      bm.times.push_back(stepper.time());
      bm.states.push_back(x);
      bm.lifetime = Lifetime::Killed(bm.states.size() - 1, KillReason::LeftDomain);
      break;
    }
    const double rho_now = rho(x);
    const double t = stepper.time();
    F.values.push_back(F.values.back() + 0.5 * (t - bm.times.back()) * (rho_prev + rho_now));
    F.times.push_back(t);
    bm.times.push_back(t);
    bm.states.push_back(x);
    rho_prev = rho_now;
  }
  return sample_time_change(bm, F, sample_times);
}

void write_path_csv(const Path& path, std::ostream& out) {
  const std::size_t dim = path.states.empty() ? 0 : static_cast<std::size_t>(path.states[0].size());
  out << 't';
  for (std::size_t i = 1; i <= dim; ++i) out << ",x" << i;
  out << ",status\n";
  char buf[64];
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", path.times[k]);
    out << buf;
    for (std::size_t i = 0; i < dim; ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", path.states[k][static_cast<Eigen::Index>(i)]);
      out << buf;
    }
    if (!path.lifetime.alive && k == path.lifetime.index) {
      out << ",killed:" << to_string(path.lifetime.reason) << '\n';
    } else {
      out << ",alive\n";
    }
  }
}

}  // namespace singdiff
