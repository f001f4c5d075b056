#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace singdiff {

/// Outcome of one statistical or algebraic check.
///
/// `pass` is always recomputable: the estimate must lie within
/// threshold * std_error of target, and, for ensemble tests, the fraction of
/// paths excluded because they were killed must stay below max_excluded.
struct VerificationReport {
  std::string name;
  double estimate = 0.0;
  double target = 0.0;
  double std_error = 0.0;
  double threshold = 4.0;
  std::int64_t n_samples = 0;
  double excluded_fraction = 0.0;
  double max_excluded = 1.0;
  bool pass = false;
  std::map<std::string, double> details;
  std::string note;

  bool recompute_pass() const {
    const bool within = std::fabs(estimate - target) <= threshold * std_error;
    return within && excluded_fraction < max_excluded && std::isfinite(estimate);
  }
  void finalize() { pass = recompute_pass(); }
};

/// Pass only if every report passes.
inline bool all_pass(const std::vector<VerificationReport>& reports) {
  for (const auto& r : reports) {
    if (!r.pass) return false;
  }
  return true;
}

}  // namespace singdiff
