// singdiff command-line front end.
//
//   singdiff green-table --m 1 --rmin 0.1 --rmax 5 --steps 50
//   singdiff sample-field --config cfg.json --seed 7 --out field.bin
//   singdiff simulate --config cfg.json --paths 100 --out runs/
//   singdiff check-generator --config cfg.json
//   singdiff verify --suite smoke --config cfg.json --seed 1 --out report.json
//
// Exit status: 0 success, 1 verification failed, 2 configuration error,
// 3 runtime error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "singdiff/config.hpp"
#include "singdiff/errors.hpp"
#include "singdiff/experiment.hpp"
#include "singdiff/field.hpp"
#include "singdiff/generator.hpp"
#include "singdiff/kernels.hpp"

namespace {

using namespace singdiff;

struct GlobalOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string config_path;
  std::string out;
};

ExperimentConfig load_or_default(const GlobalOptions& g) {
  if (g.config_path.empty()) return parse_config("{}");
  return load_config(g.config_path);
}

// Writes to the --out file, or stdout when none was given.
void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidParameter, "cannot write '" + out_path + "'");
  f << text;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void print_summary(const SuiteResult& result) {
  for (const auto& r : result.results) {
    std::fprintf(stderr, "%s %-32s estimate=%.6g target=%.6g se=%.3g\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                 r.estimate, r.target, r.std_error);
  }
}

int green_table(const GlobalOptions& g, double m, double rmin, double rmax, int steps, double tol) {
  if (!(rmin > 0.0) || !(rmax >= rmin) || steps < 1) {
    throw ParseError("green-table", "need 0 < rmin <= rmax and steps >= 1");
  }
  const KernelParams p = make_kernel_params(m, 1, 1.0, tol);
  std::ostringstream out;
  out << "r,G,K0_oracle,rel_err\n";
  char line[160];
  for (int i = 0; i < steps; ++i) {
    const double r = steps == 1 ? rmin : rmin + (rmax - rmin) * i / (steps - 1);
    const double value = green_massive(p, r);
    const double oracle = std::cyl_bessel_k(0.0, m * r);
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.3e\n", r, value, oracle,
                  std::fabs(value - oracle) / oracle);
    out << line;
  }
  emit(g.out, out.str());
  return kExitOk;
}

int sample_field_cmd(const GlobalOptions& g, const std::string& format) {
  ExperimentConfig config = load_or_default(g);
  if (!config.field) config.field = FieldConfig{};
  const auto field = build_field(config, g.seed);
  const bool binary = format == "binary" || (format.empty() && (ends_with(g.out, ".bin") || config.io.format == "binary") &&
                                             !ends_with(g.out, ".csv"));
  std::ostringstream out(binary ? std::ios::out | std::ios::binary : std::ios::out);
  if (binary) {
    if (g.out.empty()) throw ParseError("--out", "binary field dumps need an output file");
    write_field_binary(*field, out);
  } else {
    write_field_csv(*field, out);
  }
  emit(g.out, out.str());
  return kExitOk;
}

int simulate_cmd(const GlobalOptions& g, std::optional<int> paths, std::optional<double> dt,
                 std::optional<double> horizon) {
  ExperimentConfig config = load_or_default(g);
  if (paths) config.run.paths = *paths;
  if (dt) config.run.dt = *dt;
  if (horizon) {
    // a shorter horizon drops the sample times it no longer reaches
    config.run.horizon = *horizon;
    std::erase_if(config.run.sample_times, [&](double t) { return t > *horizon; });
  }
  // re-validate the overridden values through the parser
  config = parse_config(serialize_config(config));
  const std::string dir = g.out.empty() ? config.io.out_dir : g.out;
  const std::size_t n = run_simulation(config, g.seed, g.threads, dir);
  std::fprintf(stderr, "wrote %zu paths to %s\n", n, dir.c_str());
  return kExitOk;
}

int check_generator_cmd(const GlobalOptions& g, int probes, bool use_fd) {
  const ExperimentConfig config = load_or_default(g);
  const auto field = build_field(config, g.seed);
  const DiffusionSpec spec = build_spec(config, field);
  const auto points = generator_probes(spec, probes, g.seed);
  const auto fns = default_test_functions(spec, start_point(config, spec));
  SuiteResult result;
  result.suite = "check-generator";
  result.seed = g.seed;
  const char* labels[] = {"bump", "x1_bump", "x1x2_bump"};
  GammaCheckOptions options;
  options.use_fd = use_fd;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    VerificationReport r = check_gamma_identity(spec, fns[i], points, options);
    r.name = std::string("gamma_identity_") + labels[i];
    result.results.push_back(r);
  }
  emit(g.out, report_json(result));
  print_summary(result);
  return all_pass(result.results) ? kExitOk : kExitVerificationFailed;
}

int verify_cmd(const GlobalOptions& g, const std::string& suite_flag) {
  const ExperimentConfig config = load_or_default(g);
  const std::string suite = suite_flag.empty() ? config.verify.suite : suite_flag;
  const auto names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    throw ParseError("--suite", "unknown suite '" + suite + "'");
  }
  const SuiteResult result = run_suite(suite, config, g.seed, g.threads);
  emit(g.out, report_json(result));
  print_summary(result);
  return all_pass(result.results) ? kExitOk : kExitVerificationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Singular diffusions: massive GFF kernels, Liouville densities and degenerate SDEs"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Master seed for every random stream");
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
  app.add_option("--config", g.config_path, "Experiment config (JSON)");
  app.add_option("--out", g.out, "Output file or directory");

  auto* green = app.add_subcommand("green-table", "Tabulate G^(m)(r) next to the Bessel K0 oracle (CSV)");
  double m = 1.0, rmin = 0.1, rmax = 5.0, tol = 1e-10;
  int steps = 50;
  green->add_option("--m", m, "Mass parameter")->check(CLI::PositiveNumber);
  green->add_option("--rmin", rmin, "Smallest radius");
  green->add_option("--rmax", rmax, "Largest radius");
  green->add_option("--steps", steps, "Number of radii");
  green->add_option("--tol", tol, "Quadrature relative tolerance");

  auto* sample = app.add_subcommand("sample-field", "Draw one field realization (CSV or binary dump)");
  std::string format;
  sample->add_option("--format", format, "csv or binary (default: from --out extension or io.format)")
      ->check(CLI::IsMember({"csv", "binary"}));

  auto* simulate = app.add_subcommand("simulate", "Simulate SDE paths and write CSVs plus moments.json");
  std::optional<int> paths;
  std::optional<double> dt, horizon;
  simulate->add_option("--paths", paths, "Number of paths");
  simulate->add_option("--dt", dt, "Euler step");
  simulate->add_option("--horizon", horizon, "Final time");

  auto* check = app.add_subcommand("check-generator", "Check L(u^2) - 2uLu = Gamma(u,u) at probe points");
  int probes = 100;
  bool use_fd = false;
  check->add_option("--probes", probes, "Number of probe points")->check(CLI::PositiveNumber);
  check->add_flag("--fd", use_fd, "Use finite-difference derivatives");

  auto* verify = app.add_subcommand("verify", "Run a verification suite and write a JSON report");
  std::string suite;
  verify->add_option("--suite", suite, "Suite name (default: verify.suite from the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*green) return green_table(g, m, rmin, rmax, steps, tol);
    if (*sample) return sample_field_cmd(g, format);
    if (*simulate) return simulate_cmd(g, paths, dt, horizon);
    if (*check) return check_generator_cmd(g, probes, use_fd);
    if (*verify) return verify_cmd(g, suite);
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitRuntimeError;
}
