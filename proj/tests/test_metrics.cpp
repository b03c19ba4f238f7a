#include <gtest/gtest.h>

#include "rlnc/metrics.hpp"

using rlnc::errc;
using rlnc::rational;
using rlnc::topology;
using rlnc::transfer_model;
namespace fam = rlnc::families;

namespace {

errc code_of(auto&& f) {
  try {
    f();
  } catch (const rlnc::error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return errc::unsupported;
}

// Direct evaluation of the defining minimum with exact rationals, one subset
// at a time.
struct naive {
  static rational cut(const topology& g, std::uint32_t s) {
    rational c = 0;
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
      const auto& e = g.edges()[i];
      const bool u_in = (s >> e.u) & 1, v_in = (s >> e.v) & 1;
      if ((u_in && !v_in) || (!e.directed && v_in && !u_in)) c += g.weight(i);
    }
    return c;
  }
  static rational gamma(const topology& g) {
    std::optional<rational> best;
    for (std::uint32_t s = 1; s + 1 < (1u << g.n()); ++s) {
      const auto c = cut(g, s);
      if (!best || c < *best) best = c;
    }
    return *best;
  }
  static rational lambda(const topology& g) {
    std::optional<rational> best;
    const auto n = static_cast<int>(g.n());
    for (std::uint32_t s = 1; s + 1 < (1u << n); ++s) {
      const int size = std::popcount(s);
      const rational c = cut(g, s) / std::min(size, n - size);
      if (!best || c < *best) best = c;
    }
    return *best;
  }
  static rational h(const topology& g) {
    std::optional<rational> best;
    const auto n = static_cast<int>(g.n());
    for (std::uint32_t s = 1; s + 1 < (1u << n); ++s) {
      int boundary = 0;
      for (int v = 0; v < n; ++v) {
        if ((s >> v) & 1) continue;
        bool hit = false;
        for (auto u : g.in(static_cast<rlnc::node_id>(v))) hit = hit || ((s >> u) & 1);
        boundary += hit;
      }
      const int size = std::popcount(s);
      const rational r(boundary, std::min(size, n - size));
      if (!best || r < *best) best = r;
    }
    return *best;
  }
};

std::vector<topology> catalog(std::size_t max_n) {
  std::vector<topology> out;
  for (std::size_t n = 2; n <= max_n; ++n) {
    out.push_back(fam::complete(n));
    out.push_back(fam::line(n));
    out.push_back(fam::star(n));
    if (n >= 3) out.push_back(fam::ring(n));
    if (n % 2 == 0) out.push_back(fam::barbell(n / 2));
    for (std::size_t a = 1; a < n; ++a) out.push_back(fam::two_cliques_bridged(n, a));
  }
  for (std::size_t d = 1; (std::size_t{1} << d) <= max_n; ++d) out.push_back(fam::hypercube(d));
  return out;
}

std::vector<rlnc::edge> path30() {
  std::vector<rlnc::edge> es;
  for (rlnc::node_id u = 0; u + 1 < 30; ++u) es.push_back({u, u + 1});
  return es;
}

}  // namespace

TEST(Gamma, Examples) {
  const auto k4 = rlnc::induce_weighted(fam::complete(4), transfer_model::push);
  EXPECT_EQ(rlnc::min_cut_gamma_brute_force(k4), rational(1, 4));
  EXPECT_EQ(rlnc::min_cut_gamma_max_flow(k4), rational(1, 4));
  EXPECT_EQ(naive::gamma(k4), rational(1, 4));
  const auto star = rlnc::induce_weighted(fam::star(4), transfer_model::push);
  EXPECT_EQ(rlnc::min_cut_gamma_brute_force(star), rational(1, 12));
  EXPECT_EQ(rlnc::min_cut_gamma_max_flow(star), rational(1, 12));
  const topology single(2, {{0, 1, true}}, std::vector<rational>{rational(3, 10)});
  EXPECT_EQ(rlnc::min_cut_gamma_brute_force(single), 0);
  EXPECT_EQ(rlnc::min_cut_gamma_max_flow(single), 0);
  EXPECT_DOUBLE_EQ(rlnc::min_cut_gamma(k4), 0.25);
  EXPECT_EQ(code_of([] { rlnc::min_cut_gamma(topology(1, {}, std::vector<rational>{})); }), errc::empty_graph);
  EXPECT_EQ(code_of([] { rlnc::min_cut_gamma(fam::complete(3)); }), errc::invalid_topology);
}

TEST(Gamma, InducedPushOnCompleteIsOneOverN) {
  for (std::size_t n = 2; n <= 12; ++n) {
    const auto g = rlnc::induce_weighted(fam::complete(n), transfer_model::push);
    EXPECT_EQ(rlnc::min_cut_gamma_brute_force(g), rational(1, static_cast<long long>(n)));
    EXPECT_EQ(rlnc::min_cut_gamma_max_flow(g), rational(1, static_cast<long long>(n)));
  }
}

TEST(Gamma, BruteForceAndMaxFlowAgreeOnRandomDigraphs) {
  rlnc::philox4x32 rng(13, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rlnc::uniform_below(rng, 11);
    std::vector<rlnc::edge> es;
    std::vector<rational> ws;
    for (rlnc::node_id u = 0; u < n; ++u)
      for (rlnc::node_id v = 0; v < n; ++v) {
        if (u == v || !rlnc::bernoulli(rng, 0.35)) continue;
        const bool directed = rlnc::bernoulli(rng, 0.7);
        if (!directed && u > v) continue;
        es.push_back({u, v, directed});
        ws.push_back(rational(1 + static_cast<long long>(rlnc::uniform_below(rng, 50)), 1000));
      }
    rational total = 0;
    for (const auto& w : ws) total += w;
    if (total > 1)
      for (auto& w : ws) w /= total;
    const topology g(n, es, ws);
    const auto brute = rlnc::min_cut_gamma_brute_force(g);
    EXPECT_EQ(brute, rlnc::min_cut_gamma_max_flow(g));
    EXPECT_NEAR(brute.convert_to<double>(), rlnc::min_cut_gamma_max_flow(g).convert_to<double>(), 1e-9);
    if (n <= 9) EXPECT_EQ(brute, naive::gamma(g));
  }
}

TEST(IsoperimetricH, Examples) {
  EXPECT_EQ(rlnc::isoperimetric_h_brute_force(fam::complete(8)), 1);
  EXPECT_EQ(rlnc::isoperimetric_h_brute_force(fam::ring(8)), rational(1, 2));
  const auto triangles = fam::explicit_edges(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  EXPECT_EQ(rlnc::isoperimetric_h(triangles), 0);
  EXPECT_EQ(code_of([] { rlnc::isoperimetric_h(fam::explicit_edges(30, path30())); }), errc::too_large_for_exact);
}

TEST(IsoperimetricH, CompleteGraphIsOneForAllN) {
  // |Gamma(S)| = n - |S| >= min(|S|, n - |S|) with equality at |S| = ceil(n/2).
  for (std::size_t n = 2; n <= 14; ++n) EXPECT_EQ(rlnc::isoperimetric_h_brute_force(fam::complete(n)), 1) << n;
  EXPECT_EQ(rlnc::isoperimetric_h(fam::complete(1000)), 1);
}

TEST(IsoperimetricH, ClosedFormsMatchBruteForce) {
  for (const auto& g : catalog(16)) {
    const auto closed = rlnc::isoperimetric_h_closed_form(g);
    ASSERT_TRUE(closed.has_value());
    const auto brute = rlnc::isoperimetric_h_brute_force(g);
    EXPECT_EQ(*closed, brute) << "family " << int(g.family()->family) << " n=" << g.n();
    if (g.n() <= 10) EXPECT_EQ(brute, naive::h(g));
  }
}

TEST(IsoperimetricH, LargeCatalogInstances) {
  EXPECT_EQ(rlnc::isoperimetric_h(fam::ring(64)), rational(1, 16));
  EXPECT_EQ(rlnc::isoperimetric_h(fam::line(64)), rational(1, 32));
  EXPECT_EQ(rlnc::isoperimetric_h(fam::barbell(32)), rational(1, 32));
  EXPECT_EQ(rlnc::isoperimetric_h(fam::two_cliques_bridged(64, 32)), rational(1, 32));
  EXPECT_GT(rlnc::isoperimetric_h(fam::hypercube(6)), 0);
}

TEST(IsoperimetricH, DirectedUsesOutNeighborhoods) {
  // directed cycle: S = {0..k-1} reaches only node k
  std::vector<rlnc::edge> es;
  for (rlnc::node_id u = 0; u < 6; ++u) es.push_back({u, (u + 1) % 6, true});
  const topology g(6, es);
  EXPECT_EQ(rlnc::isoperimetric_h_exact(g), rational(1, 3));
  EXPECT_EQ(naive::h(g), rational(1, 3));
}

TEST(Lambda, Examples) {
  const auto k4 = rlnc::induce_weighted(fam::complete(4), transfer_model::exchange);
  EXPECT_EQ(rlnc::conductance_lambda_brute_force(k4), rational(1, 3));
  EXPECT_EQ(rlnc::conductance_lambda(k4), 1.0 / 3.0);
  const topology disconnected(4, {{0, 1}, {2, 3}}, std::vector<rational>{rational(1, 2), rational(1, 2)});
  EXPECT_EQ(rlnc::conductance_lambda_exact(disconnected), 0);
  const topology edge(2, {{0, 1}}, std::vector<rational>{rational(1)});
  EXPECT_EQ(rlnc::conductance_lambda_exact(edge), 1);
}

TEST(Lambda, StructuralMatchesBruteForceOnCatalog) {
  for (const auto& base : catalog(16)) {
    for (auto m : {transfer_model::push, transfer_model::pull, transfer_model::exchange}) {
      const auto g = rlnc::induce_weighted(base, m);
      const auto structural = rlnc::conductance_lambda_structural(g);
      const auto brute = rlnc::conductance_lambda_brute_force(g);
      ASSERT_TRUE(structural.has_value()) << int(base.family()->family) << " n=" << base.n();
      EXPECT_EQ(*structural, brute) << "family " << int(base.family()->family) << " n=" << base.n();
      if (g.n() <= 9) EXPECT_EQ(brute, naive::lambda(g));
    }
  }
}

TEST(Lambda, LargeInstancesUseStructure) {
  const auto k = rlnc::induce_weighted(fam::complete(64), transfer_model::exchange);
  // singleton-free optimum at |S| = n/2: (n/2)^2 edges of weight 2/(n(n-1))
  EXPECT_EQ(rlnc::conductance_lambda_exact(k), rational(2 * 32 * 32, 64 * 63 * 32));
  EXPECT_NO_THROW(rlnc::conductance_lambda(rlnc::induce_weighted(fam::ring(64), transfer_model::push)));
  EXPECT_NO_THROW(rlnc::conductance_lambda(rlnc::induce_weighted(fam::hypercube(6), transfer_model::exchange)));
  EXPECT_NO_THROW(rlnc::conductance_lambda(rlnc::induce_weighted(fam::star(64), transfer_model::pull)));
}
