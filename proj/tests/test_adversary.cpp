#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <queue>
#include <set>

#include "rlnc/adversary.hpp"
#include "rlnc/comm.hpp"
#include "rlnc/flooding.hpp"

using namespace rlnc;

namespace {

std::size_t diameter(const topology& g) {
  std::size_t best = 0;
  for (node_id s = 0; s < g.n(); ++s) {
    std::vector<std::size_t> dist(g.n(), SIZE_MAX);
    std::queue<node_id> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (auto v : g.out(u))
        if (dist[v] == SIZE_MAX) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
    }
    for (auto d : dist) best = std::max(best, d);
  }
  return best;
}

adversary_view view_at(std::size_t round, std::size_t n) {
  adversary_view v;
  v.round = round;
  v.n = n;
  return v;
}

}  // namespace

TEST(Adversary, StaticReturnsSameGraph) {
  static_adversary adv(families::complete(8));
  const auto g1 = adv.next(view_at(1, 8));
  const auto g2 = adv.next(view_at(77, 8));
  EXPECT_EQ(g1, g2);
  EXPECT_EQ(*g1, families::complete(8));
  EXPECT_FALSE(adv.adaptive());
}

TEST(Adversary, PeriodicCycles) {
  periodic_adversary adv({families::ring(5), families::star(5), families::line(5)});
  EXPECT_EQ(*adv.next(view_at(1, 5)), families::ring(5));
  EXPECT_EQ(*adv.next(view_at(2, 5)), families::star(5));
  EXPECT_EQ(*adv.next(view_at(3, 5)), families::line(5));
  EXPECT_EQ(*adv.next(view_at(4, 5)), families::ring(5));
  EXPECT_THROW(periodic_adversary({}), error);
}

TEST(Adversary, TwoCliqueSplitOneKnower) {
  std::vector<char> knows(8, 0);
  knows[5] = 1;
  const auto g = two_clique_split(knows);
  // K_1 + K_7 + one bridge
  EXPECT_EQ(g.edges().size(), 21u + 1u);
  EXPECT_EQ(g.degree(5), 1u);
  EXPECT_EQ(diameter(g), 2u);
  EXPECT_TRUE(g.connected_undirected_view());
  // bridge joins the lowest-indexed node of each side
  EXPECT_EQ(g.out(5), std::vector<node_id>{0});
}

TEST(Adversary, TwoCliqueSplitDegenerate) {
  const auto all = two_clique_split(std::vector<char>(6, 1));
  EXPECT_EQ(all, families::complete(6));
  const auto none = two_clique_split(std::vector<char>(6, 0));
  EXPECT_EQ(none, families::complete(6));
}

TEST(Adversary, TwoCliqueSplitDiameterProperty) {
  auto rng = make_stream(1, stream_purpose::oracle);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + uniform_below(rng, 14);
    std::vector<char> knows(n);
    for (auto& k : knows) k = static_cast<char>(uniform_below(rng, 2));
    const auto knowers = std::count(knows.begin(), knows.end(), 1);
    const bool both = knowers > 0 && knowers < static_cast<long>(n);
    const auto g = two_clique_split(knows);
    const auto thin = two_clique_split(knows, two_clique_bridge::single_edge);
    EXPECT_TRUE(g.connected_undirected_view());
    EXPECT_TRUE(thin.connected_undirected_view());
    if (!both) continue;
    EXPECT_LE(diameter(g), 2u);
    EXPECT_LE(diameter(thin), 3u);
    // exactly one non-knower borders the knowers
    std::set<node_id> border;
    for (node_id u = 0; u < n; ++u)
      if (knows[u])
        for (auto v : g.out(u))
          if (!knows[v]) border.insert(v);
    EXPECT_EQ(border.size(), 1u);
  }
}

TEST(Adversary, TwoCliqueSingleEdgeBridge) {
  std::vector<char> knows{0, 1, 0, 1, 0, 0};
  const auto g = two_clique_split(knows, two_clique_bridge::single_edge);
  EXPECT_EQ(g.edges().size(), 1u + 6u + 1u);
  EXPECT_EQ(diameter(g), 3u);
  const auto hub = two_clique_split(knows);
  EXPECT_EQ(hub.edges().size(), 1u + 6u + 2u);
  EXPECT_EQ(diameter(hub), 2u);
}

TEST(Adversary, TwoCliqueNeedsTrackedDual) {
  two_clique_knowledge_split adv(0);
  EXPECT_TRUE(adv.adaptive());
  EXPECT_THROW(adv.next(view_at(1, 4)), error);
}

TEST(Adversary, TwoCliqueAgainstFloodingTakesOneNodePerRound) {
  for (std::size_t n : {8u, 16u, 64u}) {
    two_clique_knowledge_split adv(0);
    flood_options opt;
    opt.forward_prob = 1.0;
    auto rng = make_stream(n, stream_purpose::protocol);
    const auto r = faulty_flood(comm_model::sync_broadcast, adv, {0}, n, opt, rng, 10 * n);
    ASSERT_TRUE(r.cover_time);
    EXPECT_EQ(*r.cover_time, n - 1);
    for (std::size_t t = 0; t < r.informed_counts.size(); ++t) EXPECT_EQ(r.informed_counts[t], t + 1);
  }
}

TEST(Adversary, RandomGnpGolden) {
  random_gnp_adversary adv(8, 0.5, make_stream(derive_trial_seed(2024, 0), stream_purpose::adversary));
  const auto g = adv.next(view_at(1, 8));
  // frozen from a seeded run
  EXPECT_EQ(write_edge_list(*g),
            "n 8 undirected\n0 1\n0 2\n0 3\n0 4\n0 5\n0 7\n1 2\n1 3\n1 4\n1 5\n2 5\n3 4\n3 6\n3 7\n4 5\n4 7\n");
  EXPECT_EQ(adv.draws(), 28u);
}

TEST(Adversary, RandomMatchingIsMatching) {
  random_matching_adversary adv(9, make_stream(3, stream_purpose::adversary));
  for (std::size_t t = 1; t <= 20; ++t) {
    const auto g = adv.next(view_at(t, 9));
    EXPECT_EQ(g->edges().size(), 4u);
    for (node_id v = 0; v < 9; ++v) EXPECT_LE(g->degree(v), 1u);
  }
}

TEST(Adversary, AdaptivityBoundary) {
  // forking the protocol stream after G(t) is chosen cannot change G(t)
  gf2_arith a;
  std::vector<node_state<gf2_arith>> st;
  for (node_id v = 0; v < 10; ++v) {
    std::vector<std::size_t> mine;
    if (v == 0) mine = {0, 1, 2};
    st.push_back(init_node(a, v, 3, mine));
  }
  std::vector<storage_t<gf2_arith>> tracked{{1}};
  auto rng = make_stream(5, stream_purpose::protocol);
  two_clique_knowledge_split adv(0);
  for (std::size_t t = 1; t <= 15; ++t) {
    const auto view = make_view(t, st, tracked, true, 5, rng.consumed(), 0);
    const auto g = adv.next(view);
    auto fork = rng;
    auto other = make_stream(999 + t, stream_purpose::protocol);
    auto st_copy = st;
    step(comm_model::sync_broadcast, *g, st_copy, {}, other, t);
    EXPECT_EQ(*adv.next(view), *g);
    step(comm_model::sync_broadcast, *g, st, {}, fork, t);
    rng = fork;
  }
}

TEST(Adversary, ViewContents) {
  gf2_arith a;
  std::vector<node_state<gf2_arith>> st;
  for (node_id v = 0; v < 4; ++v) {
    std::vector<std::size_t> mine;
    if (v == 2) mine = {1};
    st.push_back(init_node(a, v, 2, mine));
  }
  std::vector<storage_t<gf2_arith>> tracked{{2}, {1}};
  const auto passive = make_view(3, st, tracked, false, 9, 10, 11);
  EXPECT_EQ(passive.ranks, (std::vector<std::size_t>{0, 0, 1, 0}));
  EXPECT_TRUE(passive.knowledge.empty());
  EXPECT_FALSE(passive.basis);
  const auto full = make_view(3, st, tracked, true, 9, 10, 11);
  ASSERT_EQ(full.knowledge.size(), 2u);
  EXPECT_EQ(full.knowledge[0], (std::vector<char>{0, 0, 1, 0}));
  EXPECT_EQ(full.knowledge[1], (std::vector<char>{0, 0, 0, 0}));
  EXPECT_EQ(full.basis(2), (std::vector<std::vector<element_t>>{{0, 1}}));
  EXPECT_EQ(full.protocol_draws, 10u);
  EXPECT_EQ(full.adversary_draws, 11u);
}

TEST(Adversary, DirectoryScript) {
  const auto dir = std::filesystem::temp_directory_path() / "rlnc_adv_dir_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "round_1.edges") << "n 3 undirected\n0 1\n";
  std::ofstream(dir / "round_3.edges") << "n 3 undirected\n1 2\n";
  std::ofstream(dir / "notes.txt") << "ignored\n";
  directory_adversary adv(dir);
  EXPECT_EQ(adv.rounds_scripted(), 3u);
  const auto g1 = adv.next(view_at(1, 3));
  EXPECT_EQ(g1->edges().size(), 1u);
  EXPECT_EQ(g1->edges()[0].v, 1u);
  EXPECT_EQ(adv.next(view_at(2, 3)), g1);
  const auto g3 = adv.next(view_at(3, 3));
  EXPECT_EQ(g3->edges()[0].u, 1u);
  EXPECT_EQ(adv.next(view_at(50, 3)), g3);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(directory_adversary{dir}, error);
}

TEST(Adversary, InducedWeightsCached) {
  auto inner = std::make_unique<static_adversary>(families::ring(6));
  induced_weights_adversary adv(std::move(inner), transfer_model::exchange);
  const auto g1 = adv.next(view_at(1, 6));
  EXPECT_TRUE(g1->weighted());
  EXPECT_EQ(adv.next(view_at(2, 6)), g1);
  EXPECT_EQ(*g1, induce_weighted(families::ring(6), transfer_model::exchange));
}

TEST(Adversary, ConnectedContract) {
  connected_contract ok(std::make_unique<static_adversary>(families::ring(5)));
  EXPECT_NO_THROW(ok.next(view_at(1, 5)));
  connected_contract bad(std::make_unique<static_adversary>(families::explicit_edges(5, {{0, 1, false}})));
  try {
    bad.next(view_at(4, 5));
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::invalid_topology);
  }
}

TEST(Adversary, ScriptedSeesView) {
  scripted_adversary adv([](const adversary_view& v) { return v.round % 2 ? families::ring(4) : families::star(4); });
  EXPECT_EQ(*adv.next(view_at(1, 4)), families::ring(4));
  EXPECT_EQ(*adv.next(view_at(2, 4)), families::star(4));
}
