#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "singdiff/coefficients.hpp"
#include "singdiff/errors.hpp"

using namespace singdiff;

namespace {

std::shared_ptr<const GridField> small_field(std::uint64_t seed = 5) {
  GridSpec g;
  g.origin = {-2.0, -2.0};
  g.extent = {4.0, 4.0};
  g.nx = 9;
  g.ny = 9;
  return std::make_shared<const GridField>(sample_field(make_kernel_params(1.0, 3, 1.0), g, seed));
}

PresetParams params_for(const std::string& name) {
  PresetParams p;
  if (name == "lbm") {
    p.field = small_field();
    p.options["rho"] = "liouville";
  }
  return p;
}

// Centered-difference divergence of rho * B (or B for the Lebesgue family).
double weighted_divergence(const DiffusionSpec& spec, const Vec& x, double h) {
  double div = 0.0;
  const bool lebesgue = spec.family == Family::LebesgueDegenerate;
  for (int i = 0; i < spec.dim; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double wp = lebesgue ? 1.0 : spec.coeffs.rho(xp);
    const double wm = lebesgue ? 1.0 : spec.coeffs.rho(xm);
    div += (wp * spec.coeffs.b(xp)[i] - wm * spec.coeffs.b(xm)[i]) / (2.0 * h);
  }
  return div;
}

}  // namespace

TEST(Family, StringRoundTrip) {
  for (Family f : {Family::LBM, Family::DegenerateWeighted, Family::LocallyElliptic, Family::LebesgueDegenerate}) {
    EXPECT_EQ(family_from_string(to_string(f)), f);
  }
  EXPECT_THROW(family_from_string("nope"), Error);
}

TEST(Presets, EveryPresetValidates) {
  for (const auto& name : preset_names()) {
    const DiffusionSpec spec = make_preset(name, params_for(name));
    EXPECT_EQ(spec.preset_name, name);
    const auto probes = random_probes(spec.domain, 50, 1);
    std::vector<Vec> usable;
    for (const auto& x : probes) {
      if (spec.state_weight(x) > 1e-6) usable.push_back(x);
    }
    const VerificationReport r = validate_spec(spec, usable, 2, 4000);
    EXPECT_TRUE(r.pass) << name << ": " << r.estimate << " failed checks";
  }
}

TEST(Presets, UnknownNameThrows) {
  try {
    make_preset("nope", PresetParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownPreset);
  }
}

TEST(Presets, LiouvilleNeedsField) {
  PresetParams p;
  p.options["rho"] = "liouville";
  EXPECT_THROW(make_preset("lbm", p), Error);
}

TEST(Presets, DomainMustLieInsideGrid) {
  PresetParams p = params_for("lbm");
  p.domain = make_box(2, -3.0, 3.0);
  EXPECT_THROW(make_preset("lbm", p), Error);
}

TEST(Presets, RotationDriftIsWeightedDivergenceFree) {
  for (const std::string name : {"locally-elliptic", "lebesgue-degenerate"}) {
    const DiffusionSpec spec = make_preset(name, PresetParams{});
    for (const Vec& x : random_probes(make_box(2, -2.0, 2.0), 20, 3)) {
      EXPECT_NEAR(weighted_divergence(spec, x, 1e-5), 0.0, 1e-8) << name;
    }
  }
}

TEST(Presets, AnisotropicEllipticityConstant) {
  const DiffusionSpec spec = make_preset("aniso-degenerate", PresetParams{});
  EXPECT_GT(spec.lambda, 1.0);
  for (const Vec& x : random_probes(spec.domain, 20, 4)) {
    const double rho = spec.coeffs.rho(x);
    const auto [lo, hi] = eigen_range(spec.coeffs.a(x));
    EXPECT_GE(lo, rho / spec.lambda * (1.0 - 1e-12));
    EXPECT_LE(hi, rho * spec.lambda * (1.0 + 1e-12));
  }
}

TEST(Presets, LebesgueStateWeightIsPsi) {
  const DiffusionSpec spec = make_preset("lebesgue-degenerate", PresetParams{});
  Vec x(2);
  x << 0.0, 1.0;
  EXPECT_EQ(spec.state_weight(x), 0.0);
  x << 2.0, 0.0;
  EXPECT_DOUBLE_EQ(spec.state_weight(x), 0.8);
  EXPECT_EQ(spec.coeffs.rho(x), 1.0);
}

TEST(Liouville, DensityIsExponentialOfField) {
  const auto field = small_field(11);
  const CoefficientSet c = liouville_rho(field, 0.8);
  const Point2 node = field->grid.node(3, 5);
  Vec x(2);
  x << node[0], node[1];
  const double expected = std::exp(0.8 * field->values[field->grid.index(3, 5)] - 0.32 * field->variance);
  EXPECT_DOUBLE_EQ(c.rho(x), expected);
  EXPECT_THROW(liouville_rho(field, 2.0), Error);
}

TEST(Liouville, AnalyticGradientMatchesDifferences) {
  const auto field = small_field(12);
  const CoefficientSet c = liouville_rho(field, 1.0);
  for (const Vec& x : random_probes(make_box(2, -1.9, 1.9), 20, 6)) {
    const Vec g = c.grad_rho(x);
    const Vec fd = c.grad_rho_fd(x);
    EXPECT_LT((g - fd).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, g.cwiseAbs().maxCoeff()));
  }
}

TEST(Validate, DetectsBrokenDerivative) {
  DiffusionSpec spec = make_preset("distorted-bm", PresetParams{});
  spec.coeffs.grad_rho = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
  const VerificationReport r = validate_spec(spec, random_probes(spec.domain, 20, 1), 0, 0);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.details.at("derivative_pass"), 0.0);
}

TEST(Validate, DetectsNonDivergenceFreeDrift) {
  DiffusionSpec spec = make_preset("locally-elliptic", PresetParams{});
  spec.coeffs.b = [](const Vec& x) { return Vec(x); };
  const VerificationReport r = validate_spec(spec, random_probes(spec.domain, 10, 1), 0, 20000);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.details.at("divergence_pass"), 0.0);
}

TEST(Validate, DetectsFloorViolation) {
  PresetParams p;
  p.numbers["rho_value"] = 1e-9;
  const DiffusionSpec spec = make_preset("bm", p);
  const VerificationReport r = validate_spec(spec, random_probes(spec.domain, 5, 1), 0, 0);
  EXPECT_FALSE(r.pass);
}

TEST(EigenRange, DiagonalMatrix) {
  Mat m = Mat::Zero(3, 3);
  m.diagonal() << 3.0, 0.5, 2.0;
  const auto [lo, hi] = eigen_range(m);
  EXPECT_DOUBLE_EQ(lo, 0.5);
  EXPECT_DOUBLE_EQ(hi, 3.0);
}
