#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "singdiff/rng.hpp"

using namespace singdiff;

// Published known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswerZero) {
  const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  const auto out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(DeriveStream, DistinctAcrossTagsAndIndices) {
  std::set<std::uint64_t> keys;
  for (const char* tag : {"field", "bm", "sde"}) {
    for (std::uint64_t i = 0; i < 100; ++i) keys.insert(derive_stream(42, tag, i));
  }
  EXPECT_EQ(keys.size(), 300u);
  EXPECT_NE(derive_stream(1, "bm", 0), derive_stream(2, "bm", 0));
  EXPECT_EQ(derive_stream(7, "bm", 3), derive_stream(7, "bm", 3));
}

TEST(Stream, ReplayIsIdentical) {
  Stream a(derive_stream(5, "x", 0)), b(derive_stream(5, "x", 0));
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.uniform(), b.uniform());
    ASSERT_EQ(a.normal(), b.normal());
  }
}

TEST(Stream, UniformStaysInOpenInterval) {
  Stream s(derive_stream(9, "u", 0));
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

// Monte Carlo against the standard normal moments (mean 0, variance 1,
// fourth moment 3) at 5 standard errors.
TEST(Stream, NormalMomentsMatchStandardNormal) {
  Stream s(derive_stream(11, "n", 0));
  const int n = 400000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  EXPECT_LT(std::fabs(m1), 5.0 / std::sqrt(n));
  EXPECT_LT(std::fabs(m2 - 1.0), 5.0 * std::sqrt(2.0 / n));
  EXPECT_LT(std::fabs(m4 - 3.0), 5.0 * std::sqrt(96.0 / n));
}
