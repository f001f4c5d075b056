#include <gtest/gtest.h>

#include <string>

#include "singdiff/config.hpp"
#include "singdiff/errors.hpp"
#include "singdiff/experiment.hpp"

using namespace singdiff;

namespace {

std::string error_path(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ParseError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST(Config, EmptyDocumentTakesDefaults) {
  const ExperimentConfig c = parse_config("{}");
  EXPECT_EQ(c, ExperimentConfig{});
  EXPECT_EQ(c.model.preset, "bm");
  EXPECT_FALSE(c.field.has_value());
  EXPECT_EQ(c.verify.suite, "smoke");
}

TEST(Config, ErrorsNameTheKeyPath) {
  EXPECT_EQ(error_path(R"({"field": {"gamma": 2.5}})"), "field.gamma");
  EXPECT_EQ(error_path(R"({"field": {"n": 3, "cuts": [1, 4, 2]}})"), "field.cuts");
  EXPECT_EQ(error_path(R"({"run": {"dt": -1}})"), "run.dt");
  EXPECT_EQ(error_path(R"({"model": {"presett": "bm"}})"), "model.presett");
  EXPECT_EQ(error_path(R"({"model": {"preset": "nope"}})"), "model.preset");
  EXPECT_EQ(error_path("{not json"), "");
}

TEST(Config, LiouvilleNeedsField) {
  EXPECT_THROW(parse_config(R"({"model": {"preset": "lbm", "options": {"rho": "liouville"}}})"), ParseError);
}

TEST(Config, RoundTrip) {
  const std::string text = R"({
    "model": {"preset": "lbm", "options": {"rho": "liouville"}, "x0": [0.5, 0.5]},
    "field": {"n": 4, "gamma": 0.8, "seed": 3, "grid": {"origin": [-2, -2], "extent": [4, 4], "nx": 9, "ny": 9}},
    "run": {"dt": 0.01, "sample_times": [0.5, 1.0]},
    "verify": {"suite": "martingale", "threshold": 5},
    "io": {"format": "binary"}
  })";
  const ExperimentConfig c = parse_config(text);
  EXPECT_EQ(c.field->seed, std::optional<std::uint64_t>(3));
  const std::string canonical = serialize_config(c);
  EXPECT_EQ(parse_config(canonical), c);
  EXPECT_EQ(serialize_config(parse_config(canonical)), canonical);
}

TEST(Config, MissingFileIsParseError) {
  try {
    load_config("/nonexistent/config.json");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.path(), "");
  }
}

TEST(Suites, SmokePassesAndIsReproducible) {
  ExperimentConfig c;
  c.run.paths = 500;
  c.run.dt = 1e-2;
  const SuiteResult a = run_suite("smoke", c, 1, 1);
  EXPECT_TRUE(all_pass(a.results));
  EXPECT_EQ(report_json(a), report_json(run_suite("smoke", c, 1, 2)));
}

TEST(Suites, NegativeControlFails) {
  ExperimentConfig c;
  c.run.paths = 2000;
  c.run.dt = 1e-2;
  const SuiteResult r = run_suite("negative-control", c, 1, 1);
  ASSERT_FALSE(r.results.empty());
  for (const auto& rep : r.results) EXPECT_FALSE(rep.pass) << rep.name;
}

TEST(Suites, UnknownSuiteThrows) { EXPECT_THROW(run_suite("nope", ExperimentConfig{}, 1, 1), Error); }
