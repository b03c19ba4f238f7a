#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "rlnc/flooding.hpp"

using namespace rlnc;

namespace {

adversary_factory static_of(const topology& g) {
  auto p = std::make_shared<const topology>(g);
  return [p](std::uint64_t) -> adversary_ptr { return std::make_unique<static_adversary>(p); };
}

flood_options with_prob(double f) {
  flood_options o;
  o.forward_prob = f;
  return o;
}

}  // namespace

TEST(Flooding, ForwardProbability) {
  EXPECT_DOUBLE_EQ(forward_probability(2), 0.5);
  EXPECT_DOUBLE_EQ(forward_probability(4), 0.75);
  EXPECT_DOUBLE_EQ(forward_probability(0), 1.0);
}

TEST(Flooding, K2BroadcastCertainForwarding) {
  static_adversary adv(families::complete(2));
  auto rng = make_stream(1, stream_purpose::protocol);
  const auto r = faulty_flood(comm_model::sync_broadcast, adv, {0}, 2, with_prob(forward_probability(0)), rng, 10);
  ASSERT_TRUE(r.cover_time);
  EXPECT_EQ(*r.cover_time, 1u);
}

TEST(Flooding, PathDiameter) {
  static_adversary adv(families::line(3));
  auto rng = make_stream(1, stream_purpose::protocol);
  const auto r = faulty_flood(comm_model::sync_broadcast, adv, {0}, 3, with_prob(1.0), rng, 10);
  EXPECT_EQ(r.cover_time, std::optional<std::size_t>(2));
  EXPECT_EQ(r.informed_counts, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(Flooding, Errors) {
  static_adversary adv(families::line(3));
  auto rng = make_stream(1, stream_purpose::protocol);
  EXPECT_THROW(faulty_flood(comm_model::sync_broadcast, adv, {}, 3, with_prob(1.0), rng, 10), error);
  EXPECT_THROW(faulty_flood(comm_model::sync_broadcast, adv, {7}, 3, with_prob(1.0), rng, 10), error);
  EXPECT_THROW(estimate_tail(comm_model::sync_push, static_of(families::line(3)), {0}, 3, {}, 0, 1, 10), error);
}

TEST(Flooding, DidNotConverge) {
  static_adversary adv(families::explicit_edges(3, {{0, 1, false}}));
  auto rng = make_stream(1, stream_purpose::protocol);
  const auto r = faulty_flood(comm_model::sync_broadcast, adv, {0}, 3, with_prob(1.0), rng, 12);
  EXPECT_FALSE(r.cover_time);
  EXPECT_EQ(r.rounds_executed, 12u);
}

TEST(Flooding, CertainForwardingIsAStep) {
  const auto cdf = estimate_tail(comm_model::sync_broadcast, static_of(families::hypercube(4)), {0}, 16, with_prob(1.0), 50, 3, 100);
  EXPECT_EQ(cdf.survival(3), 1.0);
  EXPECT_EQ(cdf.survival(4), 0.0);
  EXPECT_EQ(cdf.quantile(0.5), 4u);
}

TEST(Flooding, K8PushMatchesChain) {
  const auto cdf = estimate_tail(comm_model::sync_push, static_of(families::complete(8)), {0}, 8, with_prob(0.5), 10000, 7, 1000);
  ASSERT_EQ(cdf.censored(), 0u);
  double var = 0;
  const double mean = cdf.mean();
  for (auto x : cdf.samples()) var += (static_cast<double>(x) - mean) * (static_cast<double>(x) - mean);
  const double se = std::sqrt(var / (cdf.trials() - 1.0) / static_cast<double>(cdf.trials()));
  EXPECT_NEAR(mean, oracle::complete_push_cover_mean(8, 0.5), 4 * se);
}

TEST(Flooding, K8PushChainSanity) {
  // with certain forwarding from a full set the chain is trivially 0 rounds away
  EXPECT_NEAR(oracle::complete_push_cover_mean(2, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(oracle::complete_push_cover_mean(2, 0.5), 2.0, 1e-12);
}

TEST(Flooding, K2GeometricSurvival) {
  const std::size_t trials = 40000;
  const auto cdf = estimate_tail(comm_model::sync_broadcast, static_of(families::complete(2)), {0}, 2, with_prob(0.5), trials, 11, 200);
  for (std::size_t t = 0; t <= 8; ++t) {
    const double p = std::pow(0.5, static_cast<double>(t));
    EXPECT_NEAR(cdf.survival(t), p, 4 * std::sqrt(p * (1 - p) / trials) + 1e-12) << t;
  }
}

TEST(Flooding, K2TailExtrapolation) {
  const auto cdf = estimate_tail(comm_model::sync_broadcast, static_of(families::complete(2)), {0}, 2, with_prob(0.5), 40000, 12, 200);
  const auto e = cdf.extrapolate_tail(1e-6);
  EXPECT_TRUE(e.extrapolated);
  EXPECT_NEAR(e.slope, std::log(0.5), 0.15);
  EXPECT_NEAR(e.t, std::log2(1e6), 3.0);
  EXPECT_GE(e.fit_to, e.fit_from);
}

TEST(Flooding, RingMedianMatchesFrontDp) {
  const std::size_t n = 16;
  const auto exact = oracle::ring_broadcast_cover_cdf(n, 0.5, 200);
  const auto cdf = estimate_tail(comm_model::sync_broadcast, static_of(families::ring(n)), {0}, n, with_prob(0.5), 5000, 13, 1000);
  const auto median = cdf.quantile(0.5);
  // the empirical median must fall where the exact CDF crosses 1/2 within sampling error
  const double band = 4 * std::sqrt(0.25 / 5000);
  EXPECT_GE(exact[median], 0.5 - band);
  EXPECT_LE(median == 0 ? 0.0 : exact[median - 1], 0.5 + band);
  EXPECT_LE(std::abs(static_cast<double>(median) - static_cast<double>(oracle::median_from_cdf(exact))), 1.0);
  double exact_mean = 0;
  for (std::size_t t = 0; t + 1 < exact.size(); ++t) exact_mean += 1 - exact[t];
  double var = 0;
  for (auto x : cdf.samples()) var += (static_cast<double>(x) - cdf.mean()) * (static_cast<double>(x) - cdf.mean());
  EXPECT_NEAR(cdf.mean(), exact_mean, 4 * std::sqrt(var / 4999.0 / 5000.0));
}

TEST(Flooding, MonotoneCoupling) {
  // identical seeds: higher forwarding probability never informs fewer nodes
  auto gen = make_stream(14, stream_purpose::oracle);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 4 + uniform_below(gen, 12);
    const auto g = families::random_gnp(n, 0.4, gen);
    const double lo = 0.2 + 0.5 * uniform01(gen), hi = lo + 0.3 * uniform01(gen);
    for (auto model : {comm_model::sync_push, comm_model::sync_pull, comm_model::sync_exchange, comm_model::sync_broadcast}) {
      for (auto coin : {flood_coin::per_slot, flood_coin::per_receiver}) {
        static_adversary a1(g), a2(g);
        auto r1 = make_stream(trial, stream_purpose::protocol), r2 = r1;
        auto o1 = with_prob(lo), o2 = with_prob(hi);
        o1.coin = o2.coin = coin;
        const auto low = faulty_flood(model, a1, {0}, n, o1, r1, 40);
        const auto high = faulty_flood(model, a2, {0}, n, o2, r2, 40);
        for (std::size_t t = 0; t < low.informed_counts.size(); ++t) {
          const auto h = t < high.informed_counts.size() ? high.informed_counts[t] : n;
          ASSERT_GE(h, low.informed_counts[t]);
        }
      }
    }
  }
}

TEST(EmpiricalCdf, QuantilesNearestRank) {
  empirical_cdf c({5, 1, 3, 2, 4, 6, 8, 7, 9, 10}, 0);
  EXPECT_EQ(c.quantile(0.5), 5u);
  EXPECT_EQ(c.quantile(0.9), 9u);
  EXPECT_EQ(c.quantile(0.05), 1u);
  EXPECT_DOUBLE_EQ(c.mean(), 5.5);
  EXPECT_DOUBLE_EQ(c.survival(7), 0.3);
  try {
    c.quantile(1.0);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::insufficient_trials);
  }
}

TEST(EmpiricalCdf, CensoredRuns) {
  empirical_cdf c({1, 2}, 2);
  EXPECT_EQ(c.trials(), 4u);
  EXPECT_DOUBLE_EQ(c.survival(100), 0.5);
  EXPECT_EQ(c.quantile(0.5), 2u);
  EXPECT_THROW(c.quantile(0.75), error);
  EXPECT_THROW(c.mean(), error);
}

TEST(EmpiricalCdf, CsvExport) {
  empirical_cdf c({0, 1, 1, 2}, 0);
  EXPECT_EQ(c.to_csv(), "t,survival_probability\n0,0.75\n1,0.25\n2,0\n");
}

TEST(Flooding, EstimateTailDeterministic) {
  auto run = [] {
    return estimate_tail(comm_model::sync_pull, static_of(families::ring(12)), {0}, 12, with_prob(0.5), 200, 99, 1000).samples();
  };
  EXPECT_EQ(run(), run());
}
