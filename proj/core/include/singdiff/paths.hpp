#pragma once

// Brownian paths, the additive functional F_t = int_0^t rho(W_s) ds, its
// inverse, and the time-changed process B_t = W_{F^{-1}(t)}.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "singdiff/rng.hpp"
#include "singdiff/types.hpp"

namespace singdiff {

enum class KillReason { RhoFloor, LeftDomain, HorizonExceeded };

std::string to_string(KillReason reason);

struct Lifetime {
  bool alive = true;
  /// Index of the first state at which the kill was detected.
  std::size_t index = 0;
  KillReason reason = KillReason::HorizonExceeded;

  static Lifetime Alive() { return {}; }
  static Lifetime Killed(std::size_t index, KillReason reason) { return {false, index, reason}; }
  /// True if the path is still alive at state index k.
  bool alive_at(std::size_t k) const { return alive || k < index; }
};

struct Path {
  std::vector<double> times;
  std::vector<Vec> states;
  Lifetime lifetime;
};

struct AdditiveFunctional {
  std::vector<double> times;
  std::vector<double> values;
};

/// Resumable Brownian motion: the k-th increment depends only on the stream
/// key and k, so extending a path never changes its prefix.
class BrownianStepper {
 public:
  BrownianStepper(int dim, Vec x0, double dt, std::uint64_t seed);

  const Vec& state() const { return x_; }
  double time() const { return static_cast<double>(steps_) * dt_; }
  std::size_t steps() const { return steps_; }
  const Vec& step();

 private:
  int dim_;
  Vec x_;
  double dt_;
  double sqrt_dt_;
  std::size_t steps_ = 0;
  Stream stream_;
};

/// Number of uniform steps of size dt needed to reach the horizon.
std::size_t step_count(double dt, double horizon);

/// states[k+1] = states[k] + sqrt(dt) xi_k. Throws InvalidParameter.
Path simulate_bm(int dim, const Vec& x0, double dt, double horizon, std::uint64_t seed);

/// Trapezoidal F along the path (up to its kill index). ScalarFn evaluation
/// errors (OutOfDomain for field-backed rho) propagate.
AdditiveFunctional pcaf(const Path& path, const std::function<double(const Vec&)>& rho);

/// Position of F^{-1}(t) on the time grid: F(times[k]) <= t <= F(times[k+1])
/// and s = times[k] + theta * (times[k+1] - times[k]).
struct InverseLocation {
  std::size_t k = 0;
  double theta = 0.0;
  double s = 0.0;
};

/// Piecewise-linear inverse of F. Throws HorizonExceeded if t > F(T).
InverseLocation locate_inverse(const AdditiveFunctional& F, double t);
double inverse_time_change(const AdditiveFunctional& F, double t);

/// B(t) = W(F^{-1}(t)) at each sample time, with W interpolated linearly.
/// The returned path stops at the first sample time that F does not cover:
/// killed with HorizonExceeded, or with the driving path's own kill reason.
Path time_changed_path(const Path& bm, const std::function<double(const Vec&)>& rho,
                       const std::vector<double>& sample_times);

struct TimeChangeOptions {
  double dt = 1e-3;
  /// The driving horizon starts at the largest sample time and is doubled
  /// at most this many times before giving up with HorizonExceeded.
  int max_doublings = 8;
  /// Driving BM is killed with LeftDomain on leaving this box (if set).
  std::optional<Box> domain;
};

/// Time-change construction of the process with generator (1/2) rho^{-1}
/// Laplacian: runs BM until F covers every sample time, doubling the driving
/// horizon as needed, then evaluates B at the sample times.
Path lbm_by_time_change(const std::function<double(const Vec&)>& rho, const Vec& x0,
                        const std::vector<double>& sample_times, std::uint64_t seed,
                        const TimeChangeOptions& options);

/// CSV dump: header `t,x1,...,xd,status`; status is `alive`, or
/// `killed:<reason>` on the kill row.
void write_path_csv(const Path& path, std::ostream& out);

}  // namespace singdiff
