#pragma once

// Experiment configuration: a JSON document with five sections.
//
//   {
//     "model":  {"preset": "lbm", "dim": 2, "params": {...}, "options": {...},
//                "rho_floor": 1e-8, "domain": {"lo": [...], "hi": [...]},
//                "x0": [...], "localization_radii": [...]},
//     "field":  {"m": 1, "n": 3, "cuts": [...], "gamma": 1, "quad_tol": 1e-10,
//                "grid": {"origin": [x, y], "extent": [w, h], "nx": 49, "ny": 49},
//                "seed": 7},
//     "run":    {"dt": 1e-3, "horizon": 1, "paths": 100, "sample_times": [...]},
//     "verify": {"suite": "smoke", "threshold": 4, "fields": 20000},
//     "io":     {"out_dir": "out", "format": "csv"}
//   }
//
// Every section and key is optional; omitted values take the defaults below.
// Unknown keys are rejected so typos surface as ParseError at their path.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "singdiff/kernels.hpp"

namespace singdiff {

struct DomainConfig {
  std::vector<double> lo;
  std::vector<double> hi;
  bool operator==(const DomainConfig&) const = default;
};

struct ModelConfig {
  std::string preset = "bm";
  int dim = 2;
  std::map<std::string, double> params;
  std::map<std::string, std::string> options;
  double rho_floor = 1e-8;
  std::optional<DomainConfig> domain;
  /// Empty means the domain center.
  std::vector<double> x0;
  std::vector<double> localization_radii;
  bool operator==(const ModelConfig&) const = default;
};

struct GridConfig {
  std::vector<double> origin{-6.0, -6.0};
  std::vector<double> extent{12.0, 12.0};
  int nx = 49;
  int ny = 49;
  bool operator==(const GridConfig&) const = default;
};

struct FieldConfig {
  double m = 1.0;
  int n = 3;
  /// Empty means dyadic cuts 1, 2, 4, ... (n of them).
  std::vector<double> cuts;
  double gamma = 1.0;
  double quad_tol = 1e-10;
  GridConfig grid;
  /// Pins the field realization; otherwise derived from the master seed.
  std::optional<std::uint64_t> seed;
  bool operator==(const FieldConfig&) const = default;

  KernelParams kernel_params() const;
};

struct RunConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  int paths = 100;
  /// Empty means a single sample at the horizon.
  std::vector<double> sample_times;
  bool operator==(const RunConfig&) const = default;
};

struct VerifyConfig {
  std::string suite = "smoke";
  double threshold = 4.0;
  /// Field draws for the field-ensemble suites.
  int fields = 20000;
  bool operator==(const VerifyConfig&) const = default;
};

struct IoConfig {
  std::string out_dir = "out";
  /// Field dump format: csv or binary.
  std::string format = "csv";
  bool operator==(const IoConfig&) const = default;
};

struct ExperimentConfig {
  ModelConfig model;
  /// Present when the model needs a Gaussian field (Liouville densities).
  std::optional<FieldConfig> field;
  RunConfig run;
  VerifyConfig verify;
  IoConfig io;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Parse and validate; throws ParseError naming the offending key path.
ExperimentConfig parse_config(const std::string& text);

/// Canonical JSON with every default filled in; parse_config inverts it.
std::string serialize_config(const ExperimentConfig& config);

/// Reads a file and parses it; a missing file is a ParseError at the root.
ExperimentConfig load_config(const std::string& path);

}  // namespace singdiff
