#pragma once

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "rlnc/coding.hpp"
#include "rlnc/error.hpp"
#include "rlnc/random.hpp"

namespace rlnc {

/// Exact edge probability mass.
using rational = boost::multiprecision::cpp_rational;

struct edge {
  node_id u = 0;
  node_id v = 0;
  bool directed = false;

  friend bool operator==(const edge&, const edge&) = default;
  friend auto operator<=>(const edge& a, const edge& b) {
    return std::tie(a.directed, a.u, a.v) <=> std::tie(b.directed, b.u, b.v);
  }
};

enum class graph_family {
  complete,
  ring,
  line,
  star,
  hypercube,
  barbell,
  two_cliques_bridged,
  explicit_edges,
  random_gnp,
  random_matching,
};

/// Catalog membership of a generated topology. `param` is the clique size for
/// barbell, the first clique's size for two_cliques_bridged and the dimension
/// for hypercube.
struct family_tag {
  graph_family family = graph_family::explicit_edges;
  std::size_t param = 0;
};

/// One round's communication graph: directed and undirected links on n
/// nodes, optionally carrying activation probabilities p_e.
class topology {
 public:
  struct unchecked_mass_t {};
  static constexpr unchecked_mass_t unchecked_mass{};

  topology() = default;

  topology(std::size_t n, std::vector<edge> edges, std::optional<std::vector<rational>> weights = std::nullopt,
           std::optional<family_tag> family = std::nullopt)
      : topology(unchecked_mass, n, std::move(edges), std::move(weights), family) {
    if (weights_ && total_weight_ > 1) throw error(errc::invalid_topology, "edge probabilities sum to more than 1");
  }

  /// As above, but total mass above 1 is tolerated (union of weighted rounds).
  topology(unchecked_mass_t, std::size_t n, std::vector<edge> edges, std::optional<std::vector<rational>> weights,
           std::optional<family_tag> family)
      : n_(n), family_(family) {
    if (weights && weights->size() != edges.size()) throw error(errc::size_mismatch, "one weight per edge required");
    std::vector<std::pair<edge, rational>> items;
    items.reserve(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
      edge e = edges[i];
      if (e.u >= n || e.v >= n) throw error(errc::invalid_topology, "edge endpoint out of range");
      if (e.u == e.v) throw error(errc::invalid_topology, "self-loop at node " + std::to_string(e.u));
      if (!e.directed && e.u > e.v) std::swap(e.u, e.v);
      rational w = weights ? (*weights)[i] : rational(0);
      if (weights && w <= 0) throw error(errc::invalid_topology, "edge probabilities must be positive");
      items.emplace_back(e, w);
    }
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [e, w] : items) {
      if (!edges_.empty() && edges_.back() == e) {
        if (weights) weights_->back() += w;
        continue;
      }
      edges_.push_back(e);
      if (weights) {
        if (!weights_) weights_.emplace();
        weights_->push_back(w);
      }
    }
    if (weights && !weights_) weights_.emplace();
    build_adjacency();
  }

  std::size_t n() const noexcept { return n_; }
  const std::vector<edge>& edges() const noexcept { return edges_; }
  bool weighted() const noexcept { return weights_.has_value(); }
  const rational& weight(std::size_t i) const { return (*weights_)[i]; }
  const std::vector<rational>& weights() const { return *weights_; }
  const rational& total_weight() const noexcept { return total_weight_; }
  const std::optional<family_tag>& family() const noexcept { return family_; }

  bool has_directed() const noexcept {
    return std::any_of(edges_.begin(), edges_.end(), [](const edge& e) { return e.directed; });
  }
  bool has_undirected() const noexcept {
    return std::any_of(edges_.begin(), edges_.end(), [](const edge& e) { return !e.directed; });
  }

  /// Nodes reachable over one link (undirected links count both ways).
  const std::vector<node_id>& out(node_id u) const { return out_[u]; }
  const std::vector<node_id>& in(node_id v) const { return in_[v]; }

  /// Prefix sums of the edge probabilities as doubles, for sampling.
  const std::vector<double>& cumulative_weights() const noexcept { return cumulative_; }

  std::size_t degree(node_id u) const { return out_[u].size(); }

  bool connected_undirected_view() const {
    if (n_ == 0) return true;
    std::vector<char> seen(n_, 0);
    std::vector<node_id> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      const node_id u = stack.back();
      stack.pop_back();
      for (const auto* adj : {&out_[u], &in_[u]}) {
        for (node_id v : *adj) {
          if (!seen[v]) {
            seen[v] = 1;
            ++count;
            stack.push_back(v);
          }
        }
      }
    }
    return count == n_;
  }

  friend bool operator==(const topology& a, const topology& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_ && a.weights_ == b.weights_;
  }

 private:
  void build_adjacency() {
    out_.assign(n_, {});
    in_.assign(n_, {});
    for (const auto& e : edges_) {
      out_[e.u].push_back(e.v);
      in_[e.v].push_back(e.u);
      if (!e.directed) {
        out_[e.v].push_back(e.u);
        in_[e.u].push_back(e.v);
      }
    }
    for (auto* lists : {&out_, &in_}) {
      for (auto& l : *lists) {
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
      }
    }
    total_weight_ = 0;
    cumulative_.clear();
    if (weights_) {
      double acc = 0;
      for (const auto& w : *weights_) {
        total_weight_ += w;
        acc += w.convert_to<double>();
        cumulative_.push_back(acc);
      }
    }
  }

  std::size_t n_ = 0;
  std::vector<edge> edges_;
  std::optional<std::vector<rational>> weights_;
  std::optional<family_tag> family_;
  std::vector<std::vector<node_id>> out_;
  std::vector<std::vector<node_id>> in_;
  rational total_weight_ = 0;
  std::vector<double> cumulative_;
};

using topology_ptr = std::shared_ptr<const topology>;

// ---------------------------------------------------------------------------
// Catalog

namespace families {

inline topology complete(std::size_t n) {
  std::vector<edge> es;
  for (node_id u = 0; u < n; ++u)
    for (node_id v = u + 1; v < n; ++v) es.push_back({u, v, false});
  return topology(n, std::move(es), std::nullopt, family_tag{graph_family::complete, 0});
}

inline topology ring(std::size_t n) {
  if (n < 3) throw error(errc::invalid_topology, "ring needs at least 3 nodes");
  std::vector<edge> es;
  for (node_id u = 0; u < n; ++u) es.push_back({u, static_cast<node_id>((u + 1) % n), false});
  return topology(n, std::move(es), std::nullopt, family_tag{graph_family::ring, 0});
}

inline topology line(std::size_t n) {
  if (n < 2) throw error(errc::invalid_topology, "line needs at least 2 nodes");
  std::vector<edge> es;
  for (node_id u = 0; u + 1 < n; ++u) es.push_back({u, u + 1, false});
  return topology(n, std::move(es), std::nullopt, family_tag{graph_family::line, 0});
}

/// Node 0 is the center.
inline topology star(std::size_t n) {
  if (n < 2) throw error(errc::invalid_topology, "star needs at least 2 nodes");
  std::vector<edge> es;
  for (node_id v = 1; v < n; ++v) es.push_back({0, v, false});
  return topology(n, std::move(es), std::nullopt, family_tag{graph_family::star, 0});
}

inline topology hypercube(std::size_t dimension) {
  if (dimension < 1 || dimension > 20) throw error(errc::invalid_topology, "hypercube dimension must be in [1, 20]");
  const std::size_t n = std::size_t{1} << dimension;
  std::vector<edge> es;
  for (node_id u = 0; u < n; ++u)
    for (std::size_t b = 0; b < dimension; ++b) {
      const node_id v = u ^ static_cast<node_id>(std::size_t{1} << b);
      if (u < v) es.push_back({u, v, false});
    }
  return topology(n, std::move(es), std::nullopt, family_tag{graph_family::hypercube, dimension});
}

/// Cliques [0, first) and [first, n) joined by the single edge {0, first}.
inline topology two_cliques_bridged(std::size_t n, std::size_t first) {
  if (n < 1 || first > n) throw error(errc::invalid_topology, "invalid clique split");
  std::vector<edge> es;
  for (node_id u = 0; u < first; ++u)
    for (node_id v = u + 1; v < first; ++v) es.push_back({u, v, false});
  for (node_id u = static_cast<node_id>(first); u < n; ++u)
    for (node_id v = u + 1; v < n; ++v) es.push_back({u, v, false});
  if (first > 0 && first < n) es.push_back({0, static_cast<node_id>(first), false});
  return topology(n, std::move(es), std::nullopt, family_tag{graph_family::two_cliques_bridged, first});
}

/// Two K_c joined by the edge {c-1, c}.
inline topology barbell(std::size_t clique_size) {
  if (clique_size < 1) throw error(errc::invalid_topology, "barbell clique size must be positive");
  const std::size_t n = 2 * clique_size;
  std::vector<edge> es;
  for (std::size_t side = 0; side < 2; ++side) {
    const auto base = static_cast<node_id>(side * clique_size);
    for (node_id u = 0; u < clique_size; ++u)
      for (node_id v = u + 1; v < clique_size; ++v) es.push_back({base + u, base + v, false});
  }
  es.push_back({static_cast<node_id>(clique_size - 1), static_cast<node_id>(clique_size), false});
  return topology(n, std::move(es), std::nullopt, family_tag{graph_family::barbell, clique_size});
}

inline topology explicit_edges(std::size_t n, std::vector<edge> es) {
  return topology(n, std::move(es), std::nullopt, family_tag{graph_family::explicit_edges, 0});
}

template <class Rng>
topology random_gnp(std::size_t n, double p, Rng& rng) {
  std::vector<edge> es;
  for (node_id u = 0; u < n; ++u)
    for (node_id v = u + 1; v < n; ++v)
      if (bernoulli(rng, p)) es.push_back({u, v, false});
  return topology(n, std::move(es), std::nullopt, family_tag{graph_family::random_gnp, 0});
}

/// Uniform random (near-)perfect matching; with odd n one node stays alone.
template <class Rng>
topology random_matching(std::size_t n, Rng& rng) {
  std::vector<node_id> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_below(rng, i)]);
  std::vector<edge> es;
  for (std::size_t i = 0; i + 1 < n; i += 2) es.push_back({perm[i], perm[i + 1], false});
  return topology(n, std::move(es), std::nullopt, family_tag{graph_family::random_matching, 0});
}

}  // namespace families

// ---------------------------------------------------------------------------
// Weighted views and unions

enum class transfer_model { push, pull, exchange };

/// Probability-weighted graph of the asynchronous single-transfer model for
/// a node that activates uniformly (1/n) and picks a uniform neighbor.
inline topology induce_weighted(const topology& base, transfer_model model) {
  if (base.has_directed()) throw error(errc::invalid_topology, "induce_weighted needs an undirected base graph");
  const std::size_t n = base.n();
  for (node_id u = 0; u < n; ++u)
    if (base.degree(u) == 0) throw error(errc::isolated_vertex, "node " + std::to_string(u) + " has no neighbor");
  auto share = [&](node_id u) { return rational(1, static_cast<long long>(n * base.degree(u))); };
  std::vector<edge> es;
  std::vector<rational> ws;
  for (const auto& e : base.edges()) {
    switch (model) {
      case transfer_model::push:
        es.push_back({e.u, e.v, true});
        ws.push_back(share(e.u));
        es.push_back({e.v, e.u, true});
        ws.push_back(share(e.v));
        break;
      case transfer_model::pull:
        es.push_back({e.v, e.u, true});
        ws.push_back(share(e.u));
        es.push_back({e.u, e.v, true});
        ws.push_back(share(e.v));
        break;
      case transfer_model::exchange:
        es.push_back({e.u, e.v, false});
        ws.push_back(share(e.u) + share(e.v));
        break;
    }
  }
  return topology(n, std::move(es), std::move(ws), base.family());
}

struct union_result {
  topology graph;
  /// Set when the summed weights exceed total mass 1.
  bool mass_exceeds_one = false;
};

/// Edge union of same-size graphs. Weighted inputs have their weights summed
/// per edge without renormalization.
inline union_result union_graph(const std::vector<topology>& gs) {
  if (gs.empty()) throw error(errc::size_mismatch, "union of no graphs");
  const std::size_t n = gs.front().n();
  const bool weighted = gs.front().weighted();
  std::vector<edge> es;
  std::vector<rational> ws;
  for (const auto& g : gs) {
    if (g.n() != n) throw error(errc::size_mismatch, "union of graphs with different node counts");
    if (g.weighted() != weighted) throw error(errc::size_mismatch, "cannot mix weighted and unweighted graphs");
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
      es.push_back(g.edges()[i]);
      if (weighted) ws.push_back(g.weight(i));
    }
  }
  union_result r{topology(topology::unchecked_mass, n, std::move(es),
                          weighted ? std::optional<std::vector<rational>>(std::move(ws)) : std::nullopt,
                          family_tag{graph_family::explicit_edges, 0}),
                 false};
  r.mass_exceeds_one = weighted && r.graph.total_weight() > 1;
  return r;
}

// ---------------------------------------------------------------------------
// Edge-list text format:
//   n <count> directed|undirected
//   u v [p]        p as decimal ("0.25") or fraction ("1/4")
// Blank lines and '#' comments are ignored.

inline rational parse_probability(const std::string& text) {
  // cpp_int reads a leading 0 as an octal prefix
  auto integer = [&](std::string digits) {
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw error(errc::parse_error, "bad number '" + text + "'");
    const auto first = digits.find_first_not_of('0');
    return boost::multiprecision::cpp_int(first == std::string::npos ? std::string("0") : digits.substr(first));
  };
  try {
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
      const auto num = integer(text.substr(0, slash));
      const auto den = integer(text.substr(slash + 1));
      if (den == 0) throw error(errc::parse_error, "zero denominator in '" + text + "'");
      return rational(num, den);
    }
    const auto dot = text.find('.');
    if (dot == std::string::npos) return rational(integer(text));
    const std::string whole = text.substr(0, dot);
    const std::string frac = text.substr(dot + 1);
    boost::multiprecision::cpp_int den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const auto num = integer((whole.empty() ? std::string("0") : whole) + frac);
    return rational(num, den);
  } catch (const error&) {
    throw;
  } catch (const std::exception&) {
    throw error(errc::parse_error, "bad probability '" + text + "'");
  }
}

inline topology parse_edge_list(std::istream& in) {
  std::string line;
  std::optional<std::size_t> n;
  bool directed = false;
  std::vector<edge> es;
  std::vector<rational> ws;
  bool any_weight = false, any_unweighted = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (!n) {
      if (tok.size() != 3 || tok[0] != "n" || (tok[2] != "directed" && tok[2] != "undirected"))
        throw error(errc::parse_error, where + ": expected header 'n <count> directed|undirected'");
      try {
        n = std::stoul(tok[1]);
      } catch (const std::exception&) {
        throw error(errc::parse_error, where + ": bad node count");
      }
      directed = tok[2] == "directed";
      continue;
    }
    if (tok.size() != 2 && tok.size() != 3) throw error(errc::parse_error, where + ": expected 'u v [p]'");
    node_id u = 0, v = 0;
    try {
      u = static_cast<node_id>(std::stoul(tok[0]));
      v = static_cast<node_id>(std::stoul(tok[1]));
    } catch (const std::exception&) {
      throw error(errc::parse_error, where + ": bad node id");
    }
    es.push_back({u, v, directed});
    if (tok.size() == 3) {
      ws.push_back(parse_probability(tok[2]));
      any_weight = true;
    } else {
      any_unweighted = true;
    }
  }
  if (!n) throw error(errc::parse_error, "missing header");
  if (any_weight && any_unweighted) throw error(errc::parse_error, "either all edges carry p_e or none does");
  return topology(*n, std::move(es), any_weight ? std::optional<std::vector<rational>>(std::move(ws)) : std::nullopt,
                  family_tag{graph_family::explicit_edges, 0});
}

inline topology load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::parse_error, "cannot open " + path);
  return parse_edge_list(in);
}

inline std::string write_edge_list(const topology& g) {
  if (g.has_directed() && g.has_undirected())
    throw error(errc::unsupported, "edge-list format cannot mix directed and undirected edges");
  std::ostringstream out;
  out << "n " << g.n() << (g.has_directed() ? " directed" : " undirected") << '\n';
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    out << g.edges()[i].u << ' ' << g.edges()[i].v;
    if (g.weighted()) out << ' ' << g.weight(i);
    out << '\n';
  }
  return out.str();
}

}  // namespace rlnc
