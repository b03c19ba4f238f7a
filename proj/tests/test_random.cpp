#include <gtest/gtest.h>

#include <array>
#include <boost/math/distributions/chi_squared.hpp>
#include <set>

#include "rlnc/random.hpp"

using rlnc::philox4x32;

TEST(Philox, KnownAnswerVectors) {
  using block = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32::bijection({0, 0, 0, 0}, {0, 0}), (block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32::bijection({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32::bijection({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, SameKeyAndStreamReproduce) {
  philox4x32 a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
  EXPECT_EQ(a.consumed(), 100u);
}

TEST(Philox, StreamsAndTrialsDiffer) {
  philox4x32 a(42, 0), b(42, 1), c(43, 0);
  const auto x = a(), y = b(), z = c();
  EXPECT_NE(x, y);
  EXPECT_NE(x, z);
  std::set<std::uint64_t> seeds;
  for (std::uint64_t t = 0; t < 1000; ++t) seeds.insert(rlnc::derive_trial_seed(7, t));
  EXPECT_EQ(seeds.size(), 1000u);
  EXPECT_EQ(rlnc::derive_trial_seed(7, 5), rlnc::derive_trial_seed(7, 5));
}

TEST(Philox, UniformBelowIsUniform) {
  philox4x32 rng(1, 0);
  constexpr std::uint64_t bound = 7;
  constexpr int draws = 70000;
  std::array<int, bound> counts{};
  for (int i = 0; i < draws; ++i) {
    const auto v = rlnc::uniform_below(rng, bound);
    ASSERT_LT(v, bound);
    ++counts[v];
  }
  double chi2 = 0;
  const double expected = double(draws) / bound;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  const boost::math::chi_squared dist(bound - 1);
  EXPECT_LT(chi2, boost::math::quantile(dist, 0.9999));
}

TEST(Philox, Uniform01Range) {
  philox4x32 rng(9, 2);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rlnc::uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}
