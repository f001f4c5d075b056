#pragma once

// Orchestration shared by the CLI and the acceptance harness. A config is
// turned into a field and a spec, which then feed the named suites or the
// simulation writer.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "singdiff/coefficients.hpp"
#include "singdiff/config.hpp"
#include "singdiff/field.hpp"
#include "singdiff/report.hpp"
#include "singdiff/testfn.hpp"
#include "singdiff/verify.hpp"

namespace singdiff {

/// Process exit statuses of run_experiment and the CLI.
enum ExitStatus : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitConfigError = 2,
  kExitRuntimeError = 3,
};

/// Names accepted by run_suite (and by verify.suite in configs).
std::vector<std::string> suite_names();

struct SuiteResult {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<VerificationReport> results;
};

/// `{suite, seed, results: [...]}` with keys in a fixed order and no
/// timestamp, so equal inputs give byte-identical text.
std::string report_json(const SuiteResult& result);

/// Seed of the frozen field realization: pinned by field.seed, otherwise
/// derived from the master seed.
std::uint64_t field_seed(const ExperimentConfig& config, std::uint64_t master_seed);

/// Field realization for configs with a field section; null otherwise.
std::shared_ptr<const GridField> build_field(const ExperimentConfig& config, std::uint64_t master_seed);

PresetParams preset_params(const ExperimentConfig& config, std::shared_ptr<const GridField> field);

DiffusionSpec build_spec(const ExperimentConfig& config, std::shared_ptr<const GridField> field);

/// Configured x0, else the domain center, moved off the degenerate set when
/// the state weight vanishes there.
Vec start_point(const ExperimentConfig& config, const DiffusionSpec& spec);

/// Standard test functions (a bump times low-order monomials) centered at `center`.
std::vector<TestFunction> default_test_functions(const DiffusionSpec& spec, const Vec& center);

/// Probe points inside the domain where the state weight clears the floor.
std::vector<Vec> generator_probes(const DiffusionSpec& spec, int count, std::uint64_t seed);

EnsembleParams ensemble_params(const ExperimentConfig& config, const DiffusionSpec& spec, std::uint64_t seed,
                               int threads);

/// Runs a named suite. Throws UnknownPreset for unknown suite names and
/// propagates module errors.
SuiteResult run_suite(const std::string& suite, const ExperimentConfig& config, std::uint64_t seed, int threads);

/// Writes the field dump (if any), one CSV per path and moments.json under
/// out_dir. Returns the number of paths written.
std::size_t run_simulation(const ExperimentConfig& config, std::uint64_t seed, int threads,
                           const std::string& out_dir);

}  // namespace singdiff
