#include <gtest/gtest.h>

#include <cmath>

#include "singdiff/errors.hpp"
#include "singdiff/verify.hpp"

using namespace singdiff;

namespace {

EnsembleParams small_ensemble(std::uint64_t seed, int n = 2000) {
  EnsembleParams e;
  e.n_paths = n;
  e.dt = 1e-2;
  e.seed = seed;
  return e;
}

Vec origin2() { return Vec::Zero(2); }

GridSpec grid_9() {
  GridSpec g;
  g.origin = {-2.0, -2.0};
  g.extent = {4.0, 4.0};
  g.nx = 9;
  g.ny = 9;
  return g;
}

}  // namespace

TEST(Martingale, BrownianBumpPasses) {
  const DiffusionSpec spec = make_preset("bm", PresetParams{});
  const VerificationReport r =
      test_martingale(spec, bump_fn(origin2(), 2.0), {0.25, 0.5, 1.0}, small_ensemble(1));
  EXPECT_TRUE(r.pass) << r.estimate << " +- " << r.std_error;
  EXPECT_EQ(r.recompute_pass(), r.pass);
  EXPECT_EQ(r.n_samples, 2000);
  EXPECT_TRUE(r.details.count("mean[t=0.5]"));
}

TEST(Martingale, ConstantFunctionIsExactlyZero) {
  const DiffusionSpec spec = make_preset("locally-elliptic", PresetParams{});
  const VerificationReport r = test_martingale(spec, constant_fn(2, 3.0), {0.5}, small_ensemble(2, 200));
  EXPECT_EQ(r.estimate, 0.0);
}

TEST(Martingale, DroppingTheIntegralFails) {
  const DiffusionSpec spec = make_preset("bm", PresetParams{});
  MartingaleOptions opts;
  opts.drop_integral = true;
  const TestFunction x0 = coordinate_fn(2, 0);
  const VerificationReport r =
      test_martingale(spec, product(x0, x0), {1.0}, small_ensemble(3), opts);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.estimate, 1.0, 5.0 * r.std_error);
}

TEST(Martingale, TimesMustBeOnTheGrid) {
  const DiffusionSpec spec = make_preset("bm", PresetParams{});
  EXPECT_THROW(test_martingale(spec, bump_fn(origin2(), 1.0), {0.255}, small_ensemble(1, 10)), Error);
}

TEST(QuadraticVariation, BrownianCoordinate) {
  const DiffusionSpec spec = make_preset("bm", PresetParams{});
  const VerificationReport r =
      test_quadratic_variation(spec, product(coordinate_fn(2, 0), bump_fn(origin2(), 3.0)), 1.0, small_ensemble(4));
  EXPECT_TRUE(r.pass) << r.estimate << " +- " << r.std_error;
}

TEST(Covariation, IndependentCoordinates) {
  const DiffusionSpec spec = make_preset("bm", PresetParams{});
  const VerificationReport r =
      test_covariation(spec, coordinate_fn(2, 0), coordinate_fn(2, 1), 0.5, small_ensemble(5));
  EXPECT_TRUE(r.pass) << r.estimate << " +- " << r.std_error;
}

TEST(Endpoints, ConstantDensityVarianceBothConstructions) {
  PresetParams p;
  p.numbers["rho_value"] = 4.0;
  const DiffusionSpec spec = make_preset("lbm", p);
  for (Construction c : {Construction::TimeChange, Construction::Sde}) {
    const VerificationReport r = test_endpoint_variance(spec, 1.0, 0.25, small_ensemble(6), c);
    EXPECT_TRUE(r.pass) << r.estimate << " +- " << r.std_error;
  }
}

TEST(Endpoints, TimeChangeNeedsLbm) {
  const DiffusionSpec spec = make_preset("distorted-bm", PresetParams{});
  EXPECT_THROW(sample_endpoints(spec, 0.5, small_ensemble(1, 10), Construction::TimeChange), Error);
}

TEST(CrossConstruction, SmoothDensityAgrees) {
  PresetParams p;
  p.options["rho"] = "smooth";
  const DiffusionSpec spec = make_preset("lbm", p);
  const VerificationReport r = test_cross_construction(spec, 0.5, small_ensemble(7));
  EXPECT_TRUE(r.pass) << r.estimate << " +- " << r.std_error;
}

TEST(FieldEnsembles, SingleLayerMassIsExact) {
  FieldEnsemble e;
  e.n_samples = 50;
  Vec lo(2), hi(2);
  lo << -1.0, -1.0;
  hi << 1.0, 0.5;
  const VerificationReport r = test_liouville_mass(make_kernel_params(1.0, 1, 1.0), grid_9(), Box{lo, hi}, e);
  EXPECT_TRUE(r.pass);
  EXPECT_DOUBLE_EQ(r.estimate, r.target);
  EXPECT_DOUBLE_EQ(r.details.at("area"), 3.0);
}

TEST(FieldEnsembles, MisalignedBoxIsRejected) {
  FieldEnsemble e;
  e.n_samples = 10;
  Vec lo(2), hi(2);
  lo << -0.3, -1.0;
  hi << 1.0, 1.0;
  EXPECT_THROW(test_liouville_mass(make_kernel_params(1.0, 2, 1.0), grid_9(), Box{lo, hi}, e), Error);
}

TEST(FieldEnsembles, VarianceAndCovariance) {
  FieldEnsemble e;
  e.n_samples = 4000;
  e.seed = 9;
  const KernelParams p = make_kernel_params(1.0, 3, 1.0);
  GridSpec g = grid_9();
  g.nx = g.ny = 5;
  EXPECT_TRUE(test_field_variance(p, g, e).pass);
  EXPECT_TRUE(test_field_covariance(p, g, e).pass);
}

TEST(NonExplosion, BrownianNeverHitsTheFloor) {
  const DiffusionSpec spec = make_preset("bm", PresetParams{});
  const VerificationReport r = test_non_explosion(spec, 1.0, small_ensemble(8, 200));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.estimate, 0.0);
}

TEST(NonExplosion, RaisedFloorIsDetected) {
  PresetParams p;
  p.rho_floor = 0.05;
  const DiffusionSpec spec = make_preset("lebesgue-degenerate", p);
  EnsembleParams e = small_ensemble(9, 200);
  Vec x0(2);
  x0 << 0.5, 0.0;
  e.x0 = x0;
  const VerificationReport r = test_non_explosion(spec, 10.0, e);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.details.at("rho_floor_kills"), 0.0);
}

TEST(Determinism, ThreadCountDoesNotChangeResults) {
  const DiffusionSpec spec = make_preset("locally-elliptic", PresetParams{});
  EnsembleParams e = small_ensemble(10, 300);
  const VerificationReport a = test_martingale(spec, bump_fn(origin2(), 2.0), {0.5}, e);
  e.threads = 3;
  const VerificationReport b = test_martingale(spec, bump_fn(origin2(), 2.0), {0.5}, e);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.details, b.details);
}
