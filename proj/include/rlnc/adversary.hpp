#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <regex>
#include <string>
#include <vector>

#include "rlnc/coding.hpp"
#include "rlnc/error.hpp"
#include "rlnc/network.hpp"
#include "rlnc/random.hpp"

namespace rlnc {

/// Read-only snapshot an adversary sees before choosing G(t). It reflects
/// the state after round t-1; round t's protocol randomness is not drawn yet.
struct adversary_view {
  std::size_t round = 0;
  std::size_t n = 0;
  std::vector<std::size_t> ranks;
  /// knowledge[d][v]: node v knows tracked dual d.
  std::vector<std::vector<char>> knowledge;
  /// Basis rows of a node's coefficient subspace (full state access).
  std::function<std::vector<std::vector<element_t>>(node_id)> basis;
  /// Randomness transcript: the trial key and how many 64-bit words each
  /// stream has produced so far (streams are counter-based, so this pins
  /// every earlier draw).
  std::uint64_t trial_seed = 0;
  std::uint64_t protocol_draws = 0;
  std::uint64_t adversary_draws = 0;
};

class adversary {
 public:
  virtual ~adversary() = default;
  virtual topology_ptr next(const adversary_view& view) = 0;
  /// True if next() reads knowledge bitmaps or node states.
  virtual bool adaptive() const { return false; }
  /// Draws consumed from the adversary's own stream.
  virtual std::uint64_t draws() const { return 0; }
};

using adversary_ptr = std::unique_ptr<adversary>;

class static_adversary final : public adversary {
 public:
  explicit static_adversary(topology g) : g_(std::make_shared<const topology>(std::move(g))) {}
  explicit static_adversary(topology_ptr g) : g_(std::move(g)) {}
  topology_ptr next(const adversary_view&) override { return g_; }

 private:
  topology_ptr g_;
};

/// Cycles through a fixed list; round t uses entry (t-1) mod size.
class periodic_adversary final : public adversary {
 public:
  explicit periodic_adversary(std::vector<topology> gs) {
    if (gs.empty()) throw error(errc::config_error, "periodic adversary needs at least one graph");
    for (auto& g : gs) gs_.push_back(std::make_shared<const topology>(std::move(g)));
  }
  topology_ptr next(const adversary_view& view) override {
    return gs_[(view.round == 0 ? 0 : view.round - 1) % gs_.size()];
  }

 private:
  std::vector<topology_ptr> gs_;
};

/// Fresh G(n, p) each round from the adversary stream.
class random_gnp_adversary final : public adversary {
 public:
  random_gnp_adversary(std::size_t n, double p, philox4x32 rng) : n_(n), p_(p), rng_(rng) {}
  topology_ptr next(const adversary_view&) override {
    return std::make_shared<const topology>(families::random_gnp(n_, p_, rng_));
  }
  std::uint64_t draws() const override { return rng_.consumed(); }

 private:
  std::size_t n_;
  double p_;
  philox4x32 rng_;
};

class random_matching_adversary final : public adversary {
 public:
  random_matching_adversary(std::size_t n, philox4x32 rng) : n_(n), rng_(rng) {}
  topology_ptr next(const adversary_view&) override {
    return std::make_shared<const topology>(families::random_matching(n_, rng_));
  }
  std::uint64_t draws() const override { return rng_.consumed(); }

 private:
  std::size_t n_;
  philox4x32 rng_;
};

/// How the two cliques of two_clique_split are joined. `hub` links the
/// lowest-indexed non-knower to every knower, so the graph has diameter at
/// most 2 while only that one node can learn per round. `single_edge` links
/// the lowest-indexed node of each side (diameter 3 once both sides have two
/// or more nodes).
enum class two_clique_bridge { hub, single_edge };

/// Cliques on the nodes that know a tracked dual and on those that do not,
/// joined through the lowest-indexed non-knower.
inline topology two_clique_split(const std::vector<char>& knows, two_clique_bridge bridge = two_clique_bridge::hub) {
  const std::size_t n = knows.size();
  std::vector<node_id> a, b;
  for (node_id v = 0; v < n; ++v) (knows[v] ? a : b).push_back(v);
  std::vector<edge> es;
  for (const auto* side : {&a, &b})
    for (std::size_t i = 0; i < side->size(); ++i)
      for (std::size_t j = i + 1; j < side->size(); ++j) es.push_back({(*side)[i], (*side)[j], false});
  if (!a.empty() && !b.empty()) {
    if (bridge == two_clique_bridge::hub)
      for (auto u : a) es.push_back({std::min(u, b.front()), std::max(u, b.front()), false});
    else
      es.push_back({a.front(), b.front(), false});
  }
  return families::explicit_edges(n, std::move(es));
}

class two_clique_knowledge_split final : public adversary {
 public:
  explicit two_clique_knowledge_split(std::size_t dual_index = 0, two_clique_bridge bridge = two_clique_bridge::hub)
      : dual_(dual_index), bridge_(bridge) {}
  topology_ptr next(const adversary_view& view) override {
    if (dual_ >= view.knowledge.size())
      throw error(errc::config_error, "two-clique adversary needs tracked dual #" + std::to_string(dual_));
    return std::make_shared<const topology>(two_clique_split(view.knowledge[dual_], bridge_));
  }
  bool adaptive() const override { return true; }

 private:
  std::size_t dual_;
  two_clique_bridge bridge_;
};

/// User-supplied topology rule with full view access.
class scripted_adversary final : public adversary {
 public:
  using script = std::function<topology(const adversary_view&)>;
  explicit scripted_adversary(script f, bool adaptive = true) : f_(std::move(f)), adaptive_(adaptive) {}
  topology_ptr next(const adversary_view& view) override { return std::make_shared<const topology>(f_(view)); }
  bool adaptive() const override { return adaptive_; }

 private:
  script f_;
  bool adaptive_;
};

/// Graphs loaded from `round_<t>.edges` files. Rounds after the last file
/// keep the last graph; gaps keep the previous round's graph.
class directory_adversary final : public adversary {
 public:
  explicit directory_adversary(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw error(errc::config_error, "not a directory: " + dir.string());
    const std::regex name(R"(round_(\d+)\.edges)");
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      std::smatch m;
      const std::string file = entry.path().filename().string();
      if (!std::regex_match(file, m, name)) continue;
      graphs_[std::stoul(m[1].str())] = std::make_shared<const topology>(load_edge_list(entry.path().string()));
    }
    if (graphs_.empty()) throw error(errc::config_error, "no round_<t>.edges files in " + dir.string());
  }
  topology_ptr next(const adversary_view& view) override {
    auto it = graphs_.upper_bound(view.round);
    if (it == graphs_.begin()) return it->second;
    return std::prev(it)->second;
  }
  std::size_t rounds_scripted() const { return graphs_.rbegin()->first; }

 private:
  std::map<std::size_t, topology_ptr> graphs_;
};

/// Replaces each chosen graph by its probability-weighted version, reusing
/// the result while the adversary keeps returning the same graph.
class induced_weights_adversary final : public adversary {
 public:
  induced_weights_adversary(adversary_ptr inner, transfer_model model) : inner_(std::move(inner)), model_(model) {}
  topology_ptr next(const adversary_view& view) override {
    topology_ptr g = inner_->next(view);
    if (g != last_base_) {
      last_base_ = g;
      last_ = std::make_shared<const topology>(induce_weighted(*g, model_));
    }
    return last_;
  }
  bool adaptive() const override { return inner_->adaptive(); }
  std::uint64_t draws() const override { return inner_->draws(); }

 private:
  adversary_ptr inner_;
  transfer_model model_;
  topology_ptr last_base_;
  topology_ptr last_;
};

/// Asserts a connectivity contract on every output.
class connected_contract final : public adversary {
 public:
  explicit connected_contract(adversary_ptr inner) : inner_(std::move(inner)) {}
  topology_ptr next(const adversary_view& view) override {
    topology_ptr g = inner_->next(view);
    if (!g->connected_undirected_view())
      throw error(errc::invalid_topology, "adversary produced a disconnected graph in round " + std::to_string(view.round));
    return g;
  }
  bool adaptive() const override { return inner_->adaptive(); }
  std::uint64_t draws() const override { return inner_->draws(); }

 private:
  adversary_ptr inner_;
};

/// Builds the view from RLNC node states. Knowledge bitmaps and basis access
/// are filled only when the adversary is adaptive.
template <class Arith>
adversary_view make_view(std::size_t round, const std::vector<node_state<Arith>>& states,
                         const std::vector<storage_t<Arith>>& tracked, bool adaptive, std::uint64_t trial_seed,
                         std::uint64_t protocol_draws, std::uint64_t adversary_draws) {
  adversary_view v;
  v.round = round;
  v.n = states.size();
  v.trial_seed = trial_seed;
  v.protocol_draws = protocol_draws;
  v.adversary_draws = adversary_draws;
  v.ranks.reserve(states.size());
  for (const auto& s : states) v.ranks.push_back(s.rank());
  if (adaptive) {
    for (const auto& mu : tracked) {
      std::vector<char> k(states.size());
      for (std::size_t i = 0; i < states.size(); ++i) k[i] = states[i].y.knows(mu) ? 1 : 0;
      v.knowledge.push_back(std::move(k));
    }
    v.basis = [&states](node_id u) { return states.at(u).y.basis(); };
  }
  return v;
}

}  // namespace rlnc
