#include <gtest/gtest.h>

#include <cmath>

#include "singdiff/generator.hpp"
#include "singdiff/sde.hpp"

using namespace singdiff;

namespace {

Vec point(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

// L u by centered differences of u, using only the family's coefficients.
double generator_fd(const DiffusionSpec& spec, const TestFunction& u, const Vec& x, double h) {
  const Jet fd = finite_difference_jet(u, x, h);
  const LocalCoefficients c = local_coefficients(spec, x);
  return 0.5 * (c.second_order.cwiseProduct(fd.hess)).sum() + c.drift.dot(fd.grad);
}

}  // namespace

TEST(Generator, LbmOnSquareIsInverseDensity) {
  PresetParams p;
  p.options["rho"] = "smooth";
  const DiffusionSpec spec = make_preset("lbm", p);
  const TestFunction x0 = coordinate_fn(2, 0);
  const TestFunction sq = product(x0, x0);
  for (const Vec& x : random_probes(spec.domain, 10, 1)) {
    EXPECT_NEAR(apply_generator(spec, sq, x), 1.0 / spec.coeffs.rho(x), 1e-12);
    EXPECT_NEAR(carre_du_champ(spec, x0, x0, x), 1.0 / spec.coeffs.rho(x), 1e-12);
  }
}

TEST(Generator, GammaIdentityHoldsForEveryPreset) {
  const TestFunction u = product(coordinate_fn(2, 0), coordinate_fn(2, 1));
  for (const auto& name : preset_names()) {
    if (name == "lbm") continue;
    const DiffusionSpec spec = make_preset(name, PresetParams{});
    std::vector<Vec> probes;
    for (const Vec& x : random_probes(spec.domain, 40, 2)) {
      if (spec.state_weight(x) > 1e-3) probes.push_back(x);
    }
    const VerificationReport r = check_gamma_identity(spec, u, probes);
    EXPECT_TRUE(r.pass) << name << " worst " << r.estimate;
  }
}

TEST(Generator, LinearityAndBilinearity) {
  const DiffusionSpec spec = make_preset("locally-elliptic", PresetParams{});
  const TestFunction u = bump_fn(point(0.2, 0.1), 2.0);
  const TestFunction v = product(coordinate_fn(2, 0), bump_fn(point(0.0, 0.0), 3.0));
  const Vec x = point(0.5, -0.4);
  EXPECT_NEAR(apply_generator(spec, combine(2.0, u, -3.0, v), x),
              2.0 * apply_generator(spec, u, x) - 3.0 * apply_generator(spec, v, x), 1e-12);
  EXPECT_NEAR(carre_du_champ(spec, u, v, x), carre_du_champ(spec, v, u, x), 1e-14);
  EXPECT_NEAR(carre_du_champ(spec, sum(u, v), u, x),
              carre_du_champ(spec, u, u, x) + carre_du_champ(spec, v, u, x), 1e-12);
  EXPECT_GE(carre_du_champ(spec, v, v, x), 0.0);
}

TEST(Generator, AnalyticMatchesFiniteDifferences) {
  PresetParams p;
  p.options["b"] = "rotation";
  const DiffusionSpec spec = make_preset("aniso-degenerate", p);
  const TestFunction u = product(coordinate_fn(2, 0), bump_fn(point(0.3, 0.0), 2.5));
  for (const Vec& x : random_probes(make_box(2, -1.5, 1.5), 20, 3)) {
    EXPECT_NEAR(apply_generator(spec, u, x), generator_fd(spec, u, x, 1e-4), 1e-5);
  }
}

TEST(Generator, FiniteDifferencePathPasses) {
  const DiffusionSpec spec = make_preset("distorted-bm", PresetParams{});
  GammaCheckOptions opts;
  opts.use_fd = true;
  const VerificationReport r =
      check_gamma_identity(spec, bump_fn(point(0.0, 0.0), 2.0), random_probes(make_box(2, -1.5, 1.5), 30, 4), opts);
  EXPECT_TRUE(r.pass) << r.estimate;
}

TEST(Generator, PerturbedGammaFails) {
  const DiffusionSpec spec = make_preset("bm", PresetParams{});
  GammaCheckOptions opts;
  opts.gamma_perturbation = 1e-3;
  const VerificationReport r =
      check_gamma_identity(spec, bump_fn(point(0.0, 0.0), 2.0), random_probes(spec.domain, 20, 5), opts);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.recompute_pass(), r.pass);
}

// A = rho Id in the weighted family gives L = (1/2) Laplacian + grad(rho)/(2 rho) . grad.
TEST(Generator, DistortedBmReduction) {
  const DiffusionSpec spec = make_preset("distorted-bm", PresetParams{});
  const TestFunction u = bump_fn(point(0.1, 0.2), 2.0);
  for (const Vec& x : random_probes(make_box(2, -1.0, 1.0), 10, 6)) {
    const Jet j = u.jet(x);
    const double expected =
        0.5 * j.hess.trace() + spec.coeffs.grad_rho_at(x).dot(j.grad) / (2.0 * spec.coeffs.rho(x));
    EXPECT_NEAR(apply_generator(spec, u, x), expected, 1e-12);
  }
}

TEST(Generator, SampleBundlesValueLuAndGamma) {
  const DiffusionSpec spec = make_preset("locally-elliptic", PresetParams{});
  const TestFunction u = bump_fn(point(0.0, 0.0), 2.0);
  const Vec x = point(0.3, 0.4);
  const GeneratorSample s = evaluate_generator(spec, u, x);
  EXPECT_EQ(s.value, u.value(x));
  EXPECT_DOUBLE_EQ(s.lu, apply_generator(spec, u, x));
  EXPECT_DOUBLE_EQ(s.gamma, carre_du_champ(spec, u, u, x));
}
