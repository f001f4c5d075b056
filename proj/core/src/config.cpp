#include "singdiff/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "singdiff/coefficients.hpp"
#include "singdiff/errors.hpp"
#include "singdiff/experiment.hpp"
#include "singdiff/types.hpp"

namespace singdiff {

using nlohmann::json;

KernelParams FieldConfig::kernel_params() const {
  KernelParams p;
  p.m = m;
  p.n = n;
  p.cuts = cuts.empty() ? dyadic_cuts(n) : cuts;
  p.gamma = gamma;
  p.quad_tol = quad_tol;
  return p;
}

namespace {

std::string join(const std::string& base, const std::string& k) { return base.empty() ? k : base + "." + k; }

std::string join(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

// Reader over one JSON object that tracks which keys were consumed.
class Section {
 public:
  Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ != nullptr && !node_->is_object()) throw ParseError(path_, "expected an object");
  }

  const std::string& path() const { return path_; }

  const json* find(const std::string& k) {
    if (node_ == nullptr) return nullptr;
    const auto it = node_->find(k);
    if (it == node_->end()) return nullptr;
    used_.insert(k);
    return &*it;
  }

  double number(const std::string& k, double fallback) {
    const json* v = find(k);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw ParseError(join(path_, k), "expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) throw ParseError(join(path_, k), "expected a finite number");
    return d;
  }

  int integer(const std::string& k, int fallback) {
    const json* v = find(k);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) throw ParseError(join(path_, k), "expected an integer");
    const auto i = v->get<std::int64_t>();
    if (i < -(1LL << 31) || i > (1LL << 31) - 1) throw ParseError(join(path_, k), "integer out of range");
    return static_cast<int>(i);
  }

  std::string string(const std::string& k, const std::string& fallback) {
    const json* v = find(k);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ParseError(join(path_, k), "expected a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& k, const std::vector<double>& fallback) {
    const json* v = find(k);
    if (v == nullptr) return fallback;
    const std::string p = join(path_, k);
    if (!v->is_array()) throw ParseError(p, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      if (!e.is_number() || !std::isfinite(e.get<double>())) throw ParseError(join(p, i), "expected a finite number");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void reject_unknown() const {
    if (node_ == nullptr) return;
    for (const auto& item : node_->items()) {
      if (!used_.count(item.key())) throw ParseError(join(path_, item.key()), "unknown key");
    }
  }

 private:
  const json* node_;
  std::string path_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ParseError(path, message);
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

ModelConfig parse_model(Section s) {
  ModelConfig m;
  m.preset = s.string("preset", m.preset);
  const auto names = preset_names();
  require(std::find(names.begin(), names.end(), m.preset) != names.end(), "model.preset",
          "unknown preset '" + m.preset + "'");
  m.dim = s.integer("dim", m.dim);
  require(m.dim >= 2 && m.dim <= kMaxDim, "model.dim", "must lie in [2, " + std::to_string(kMaxDim) + "]");

  if (const json* p = s.find("params")) {
    require(p->is_object(), "model.params", "expected an object of numbers");
    for (const auto& item : p->items()) {
      const std::string path = "model.params." + item.key();
      require(item.value().is_number() && std::isfinite(item.value().get<double>()), path, "expected a finite number");
      m.params[item.key()] = item.value().get<double>();
    }
  }
  if (const json* o = s.find("options")) {
    require(o->is_object(), "model.options", "expected an object of strings");
    for (const auto& item : o->items()) {
      require(item.value().is_string(), "model.options." + item.key(), "expected a string");
      m.options[item.key()] = item.value().get<std::string>();
    }
  }
  m.rho_floor = s.number("rho_floor", m.rho_floor);
  require(m.rho_floor > 0.0, "model.rho_floor", "must be positive");

  if (const json* d = s.find("domain")) {
    Section ds(d, "model.domain");
    DomainConfig dc;
    dc.lo = ds.numbers("lo", {});
    dc.hi = ds.numbers("hi", {});
    ds.reject_unknown();
    require(dc.lo.size() == static_cast<std::size_t>(m.dim), "model.domain.lo", "length must equal model.dim");
    require(dc.hi.size() == static_cast<std::size_t>(m.dim), "model.domain.hi", "length must equal model.dim");
    for (std::size_t i = 0; i < dc.lo.size(); ++i) {
      require(dc.hi[i] > dc.lo[i], join("model.domain.hi", i), "must exceed the matching lo");
    }
    m.domain = dc;
  }
  m.x0 = s.numbers("x0", {});
  require(m.x0.empty() || m.x0.size() == static_cast<std::size_t>(m.dim), "model.x0", "length must equal model.dim");
  m.localization_radii = s.numbers("localization_radii", {});
  for (std::size_t i = 0; i < m.localization_radii.size(); ++i) {
    require(m.localization_radii[i] > 0.0, join("model.localization_radii", i), "must be positive");
  }
  require(strictly_increasing(m.localization_radii), "model.localization_radii", "must be strictly increasing");
  s.reject_unknown();
  return m;
}

FieldConfig parse_field(Section s) {
  FieldConfig f;
  f.m = s.number("m", f.m);
  require(f.m > 0.0, "field.m", "mass must be positive");
  f.n = s.integer("n", f.n);
  require(f.n >= 1, "field.n", "must be at least 1");
  f.cuts = s.numbers("cuts", {});
  if (!f.cuts.empty()) {
    require(f.cuts.front() == 1.0, "field.cuts", "first cut must equal 1");
    require(strictly_increasing(f.cuts), "field.cuts", "cuts must be strictly increasing");
    require(static_cast<int>(f.cuts.size()) >= f.n, "field.n", "exceeds the number of cuts");
  }
  f.gamma = s.number("gamma", f.gamma);
  require(f.gamma > 0.0 && f.gamma < 2.0, "field.gamma", "must lie in the open interval (0, 2)");
  f.quad_tol = s.number("quad_tol", f.quad_tol);
  require(f.quad_tol > 0.0 && f.quad_tol <= 1e-3, "field.quad_tol", "must lie in (0, 1e-3]");

  if (const json* g = s.find("grid")) {
    Section gs(g, "field.grid");
    f.grid.origin = gs.numbers("origin", f.grid.origin);
    f.grid.extent = gs.numbers("extent", f.grid.extent);
    f.grid.nx = gs.integer("nx", f.grid.nx);
    f.grid.ny = gs.integer("ny", f.grid.ny);
    gs.reject_unknown();
  }
  require(f.grid.origin.size() == 2, "field.grid.origin", "expected two coordinates");
  require(f.grid.extent.size() == 2, "field.grid.extent", "expected two lengths");
  require(f.grid.extent[0] > 0.0 && f.grid.extent[1] > 0.0, "field.grid.extent", "lengths must be positive");
  require(f.grid.nx >= 2, "field.grid.nx", "must be at least 2");
  require(f.grid.ny >= 2, "field.grid.ny", "must be at least 2");
  require(static_cast<std::size_t>(f.grid.nx) * static_cast<std::size_t>(f.grid.ny) <= kDefaultMaxGridNodes,
          "field.grid", "more than " + std::to_string(kDefaultMaxGridNodes) + " nodes");

  if (const json* seed = s.find("seed")) {
    require(seed->is_number_unsigned() || (seed->is_number_integer() && seed->get<std::int64_t>() >= 0),
            "field.seed", "expected a nonnegative integer");
    f.seed = seed->get<std::uint64_t>();
  }
  s.reject_unknown();
  return f;
}

RunConfig parse_run(Section s) {
  RunConfig r;
  r.dt = s.number("dt", r.dt);
  require(r.dt > 0.0, "run.dt", "must be positive");
  r.horizon = s.number("horizon", r.horizon);
  require(r.horizon > 0.0, "run.horizon", "must be positive");
  require(r.dt <= r.horizon, "run.dt", "must not exceed run.horizon");
  r.paths = s.integer("paths", r.paths);
  require(r.paths >= 1, "run.paths", "must be at least 1");
  r.sample_times = s.numbers("sample_times", {});
  for (std::size_t i = 0; i < r.sample_times.size(); ++i) {
    require(r.sample_times[i] > 0.0 && r.sample_times[i] <= r.horizon, join("run.sample_times", i),
            "must lie in (0, run.horizon]");
  }
  require(strictly_increasing(r.sample_times), "run.sample_times", "must be strictly increasing");
  s.reject_unknown();
  return r;
}

VerifyConfig parse_verify(Section s) {
  VerifyConfig v;
  v.suite = s.string("suite", v.suite);
  const auto suites = suite_names();
  require(std::find(suites.begin(), suites.end(), v.suite) != suites.end(), "verify.suite",
          "unknown suite '" + v.suite + "'");
  v.threshold = s.number("threshold", v.threshold);
  require(v.threshold > 0.0, "verify.threshold", "must be positive");
  v.fields = s.integer("fields", v.fields);
  require(v.fields >= 2, "verify.fields", "must be at least 2");
  s.reject_unknown();
  return v;
}

IoConfig parse_io(Section s) {
  IoConfig io;
  io.out_dir = s.string("out_dir", io.out_dir);
  require(!io.out_dir.empty(), "io.out_dir", "must not be empty");
  io.format = s.string("format", io.format);
  require(io.format == "csv" || io.format == "binary", "io.format", "must be 'csv' or 'binary'");
  s.reject_unknown();
  return io;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("invalid JSON: ") + e.what());
  }
  Section top(&root, "");
  ExperimentConfig c;
  c.model = parse_model(Section(top.find("model"), "model"));
  if (const json* f = top.find("field")) c.field = parse_field(Section(f, "field"));
  c.run = parse_run(Section(top.find("run"), "run"));
  c.verify = parse_verify(Section(top.find("verify"), "verify"));
  c.io = parse_io(Section(top.find("io"), "io"));
  top.reject_unknown();

  const auto rho = c.model.options.find("rho");
  if (rho != c.model.options.end() && rho->second == "liouville") {
    require(c.field.has_value(), "field", "a Liouville density needs a field section");
    require(c.model.dim == 2, "model.dim", "a Liouville density is defined in dimension 2");
  }
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  json root;
  json& model = root["model"];
  model["preset"] = c.model.preset;
  model["dim"] = c.model.dim;
  model["params"] = json::object();
  for (const auto& [k, v] : c.model.params) model["params"][k] = v;
  model["options"] = json::object();
  for (const auto& [k, v] : c.model.options) model["options"][k] = v;
  model["rho_floor"] = c.model.rho_floor;
  if (c.model.domain) model["domain"] = {{"lo", c.model.domain->lo}, {"hi", c.model.domain->hi}};
  model["x0"] = c.model.x0;
  model["localization_radii"] = c.model.localization_radii;
  if (c.field) {
    const FieldConfig& f = *c.field;
    json& field = root["field"];
    field["m"] = f.m;
    field["n"] = f.n;
    field["cuts"] = f.cuts;
    field["gamma"] = f.gamma;
    field["quad_tol"] = f.quad_tol;
    field["grid"] = {{"origin", f.grid.origin}, {"extent", f.grid.extent}, {"nx", f.grid.nx}, {"ny", f.grid.ny}};
    if (f.seed) field["seed"] = *f.seed;
  }
  root["run"] = {{"dt", c.run.dt},
                 {"horizon", c.run.horizon},
                 {"paths", c.run.paths},
                 {"sample_times", c.run.sample_times}};
  root["verify"] = {{"suite", c.verify.suite}, {"threshold", c.verify.threshold}, {"fields", c.verify.fields}};
  root["io"] = {{"out_dir", c.io.out_dir}, {"format", c.io.format}};
  return root.dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("", "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace singdiff
