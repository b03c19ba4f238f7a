#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/push_relabel_max_flow.hpp>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "rlnc/error.hpp"
#include "rlnc/network.hpp"

namespace rlnc {

enum class metric_method {
  automatic,
  brute_force,
  /// Max-flow for gamma; catalog closed forms or class/path reductions for h
  /// and lambda.
  structural,
};

inline constexpr std::size_t max_exact_subset_nodes = 20;

namespace detail {

using bigint = boost::multiprecision::cpp_int;

struct arc {
  node_id from;
  node_id to;
  std::int64_t w;
};

/// Arc list with weights scaled to integers over a common denominator.
/// Undirected edges contribute one arc per direction.
struct scaled_arcs {
  std::size_t n = 0;
  std::vector<arc> arcs;
  bigint denominator = 1;
};

inline scaled_arcs scale_weights(const topology& g) {
  if (!g.weighted()) throw error(errc::invalid_topology, "metric needs a weighted topology");
  scaled_arcs s;
  s.n = g.n();
  bigint l = 1;
  for (const auto& w : g.weights()) {
    const bigint d = boost::multiprecision::denominator(w);
    l = l / boost::multiprecision::gcd(l, d) * d;
  }
  s.denominator = l;
  bigint total = 0;
  const bigint limit = bigint(1) << 61;
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    const auto& w = g.weight(i);
    const bigint scaled = boost::multiprecision::numerator(w) * (l / boost::multiprecision::denominator(w));
    total += scaled * (g.edges()[i].directed ? 1 : 2);
    if (scaled > limit || total > limit) throw error(errc::unsupported, "edge weights too fine for exact integer scaling");
    const auto v = scaled.convert_to<std::int64_t>();
    const auto& e = g.edges()[i];
    s.arcs.push_back({e.u, e.v, v});
    if (!e.directed) s.arcs.push_back({e.v, e.u, v});
  }
  return s;
}

/// Unweighted arcs (each undirected edge as two anti-parallel arcs).
inline scaled_arcs unit_arcs(const topology& g) {
  scaled_arcs s;
  s.n = g.n();
  for (const auto& e : g.edges()) {
    s.arcs.push_back({e.u, e.v, 1});
    if (!e.directed) s.arcs.push_back({e.v, e.u, 1});
  }
  return s;
}

inline void require_nodes(const topology& g) {
  if (g.n() < 2) throw error(errc::empty_graph, "metric needs at least 2 nodes");
}

inline void require_subset_size(std::size_t n) {
  if (n > max_exact_subset_nodes)
    throw error(errc::too_large_for_exact, "subset enumeration limited to n <= " + std::to_string(max_exact_subset_nodes));
}

/// Minimum over nonempty proper S of cut(S) / divisor(|S|), with the cut
/// maintained incrementally along a Gray code. divisor 1 gives gamma,
/// min(|S|, n-|S|) gives lambda. Returns (cut, divisor) of the minimizer.
inline std::pair<std::int64_t, std::int64_t> brute_cut_ratio(const scaled_arcs& s, bool by_size) {
  const std::size_t n = s.n;
  std::vector<std::vector<std::pair<node_id, std::int64_t>>> out(n), in(n);
  for (const auto& a : s.arcs) {
    out[a.from].push_back({a.to, a.w});
    in[a.to].push_back({a.from, a.w});
  }
  std::vector<char> in_s(n, 0);
  std::int64_t cut = 0;
  std::size_t size = 0;
  std::int64_t best_num = -1, best_den = 1;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t i = 1; i < total; ++i) {
    const auto x = static_cast<node_id>(std::countr_zero(i));
    std::int64_t leaving = 0, entering = 0;
    for (auto [y, w] : out[x])
      if (!in_s[y]) leaving += w;
    for (auto [y, w] : in[x])
      if (in_s[y]) entering += w;
    if (!in_s[x]) {
      in_s[x] = 1;
      ++size;
      cut += leaving - entering;
    } else {
      in_s[x] = 0;
      --size;
      cut += entering - leaving;
    }
    if (size == 0 || size == n) continue;
    const auto den = by_size ? static_cast<std::int64_t>(std::min(size, n - size)) : std::int64_t{1};
    if (best_num < 0 || static_cast<__int128>(cut) * best_den < static_cast<__int128>(best_num) * den) {
      best_num = cut;
      best_den = den;
    }
  }
  return {best_num, best_den};
}

inline rational to_rational(std::int64_t num, std::int64_t den, const bigint& scale) {
  return rational(bigint(num), bigint(den) * scale);
}

// Twin-class reduction: nodes u, v are twins when swapping them preserves
// the arc matrix. Subsets are then enumerated by per-class counts.
struct twin_reduction {
  std::vector<std::size_t> sizes;
  std::vector<std::vector<std::int64_t>> w;  // class-to-class arc weight
};

/// Gives up when the enumeration would exceed max_work class-pair updates.
inline std::optional<twin_reduction> reduce_twins(const scaled_arcs& s, std::uint64_t max_work) {
  const std::size_t n = s.n;
  if (n > 2048) return std::nullopt;
  std::vector<std::int64_t> m(n * n, 0);
  for (const auto& a : s.arcs) m[a.from * n + a.to] += a.w;
  auto twins = [&](std::size_t u, std::size_t v) {
    if (m[u * n + v] != m[v * n + u]) return false;
    for (std::size_t x = 0; x < n; ++x) {
      if (x == u || x == v) continue;
      if (m[u * n + x] != m[v * n + x] || m[x * n + u] != m[x * n + v]) return false;
    }
    return true;
  };
  std::vector<std::size_t> reps;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t u = 0; u < n; ++u) {
    bool placed = false;
    for (std::size_t c = 0; c < reps.size() && !placed; ++c) {
      if (twins(reps[c], u)) {
        members[c].push_back(u);
        placed = true;
      }
    }
    if (!placed) {
      reps.push_back(u);
      members.push_back({u});
    }
    if (reps.size() > 64) return std::nullopt;
  }
  twin_reduction r;
  std::uint64_t states = 1;
  for (const auto& mem : members) {
    r.sizes.push_back(mem.size());
    states *= mem.size() + 1;
    if (states * members.size() * members.size() > max_work) return std::nullopt;
  }
  const std::size_t c = reps.size();
  r.w.assign(c, std::vector<std::int64_t>(c, 0));
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      if (i != j)
        r.w[i][j] = m[reps[i] * n + reps[j]];
      else if (members[i].size() > 1)
        r.w[i][i] = m[members[i][0] * n + members[i][1]];
    }
  return r;
}

/// Calls f(counts) for every count vector with 0 <= counts[i] <= sizes[i].
template <class F>
void for_each_count_vector(const std::vector<std::size_t>& sizes, F&& f) {
  std::vector<std::size_t> c(sizes.size(), 0);
  while (true) {
    f(c);
    std::size_t i = 0;
    while (i < c.size() && c[i] == sizes[i]) c[i++] = 0;
    if (i == c.size()) return;
    ++c[i];
  }
}

/// lambda (by_size) or gamma over class count vectors.
inline std::pair<std::int64_t, std::int64_t> twin_cut_ratio(const twin_reduction& r, std::size_t n, bool by_size) {
  std::int64_t best_num = -1, best_den = 1;
  const std::size_t m = r.sizes.size();
  for_each_count_vector(r.sizes, [&](const std::vector<std::size_t>& c) {
    const std::size_t size = std::accumulate(c.begin(), c.end(), std::size_t{0});
    if (size == 0 || size == n) return;
    std::int64_t cut = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (c[i] == 0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        const auto outside = static_cast<std::int64_t>(r.sizes[j] - c[j]);
        cut += static_cast<std::int64_t>(c[i]) * outside * r.w[i][j];
      }
    }
    const auto den = by_size ? static_cast<std::int64_t>(std::min(size, n - size)) : std::int64_t{1};
    if (best_num < 0 || static_cast<__int128>(cut) * best_den < static_cast<__int128>(best_num) * den) {
      best_num = cut;
      best_den = den;
    }
  });
  return {best_num, best_den};
}

inline std::pair<std::int64_t, std::int64_t> twin_boundary_ratio(const twin_reduction& r, std::size_t n) {
  std::int64_t best_num = -1, best_den = 1;
  const std::size_t m = r.sizes.size();
  for_each_count_vector(r.sizes, [&](const std::vector<std::size_t>& c) {
    const std::size_t size = std::accumulate(c.begin(), c.end(), std::size_t{0});
    if (size == 0 || size == n) return;
    std::int64_t boundary = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (c[j] == r.sizes[j]) continue;
      bool reached = false;
      for (std::size_t i = 0; i < m && !reached; ++i) reached = c[i] > 0 && r.w[i][j] != 0;
      if (reached) boundary += static_cast<std::int64_t>(r.sizes[j] - c[j]);
    }
    const auto den = static_cast<std::int64_t>(std::min(size, n - size));
    if (best_num < 0 || boundary * best_den < best_num * den) {
      best_num = boundary;
      best_den = den;
    }
  });
  return {best_num, best_den};
}

/// Minimum vertex boundary per subset size for the d-cube, from initial
/// segments of the simplicial order (Harper's vertex-isoperimetric theorem).
inline std::vector<std::int64_t> hypercube_vertex_boundaries(std::size_t d) {
  const std::size_t n = std::size_t{1} << d;
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [](std::uint32_t x, std::uint32_t y) {
    const int px = std::popcount(x), py = std::popcount(y);
    if (px != py) return px < py;
    if (x == y) return false;
    const std::uint32_t diff = x ^ y;
    return (x & diff & (~diff + 1)) != 0;
  });
  std::vector<char> in_s(n, 0);
  std::vector<std::uint32_t> hits(n, 0);
  std::vector<std::int64_t> best(n + 1, 0);
  std::int64_t boundary = 0;
  for (std::size_t m = 1; m <= n; ++m) {
    const std::uint32_t x = order[m - 1];
    if (hits[x] > 0) --boundary;
    in_s[x] = 1;
    for (std::size_t b = 0; b < d; ++b) {
      const std::uint32_t y = x ^ (1u << b);
      if (!in_s[y] && hits[y]++ == 0) ++boundary;
    }
    best[m] = boundary;
  }
  return best;
}

/// Minimum edge boundary per subset size for the d-cube: the first m
/// vertices in binary order are optimal (edge-isoperimetric theorem).
inline std::vector<std::int64_t> hypercube_edge_boundaries(std::size_t d) {
  const std::size_t n = std::size_t{1} << d;
  std::vector<std::int64_t> best(n + 1, 0);
  std::int64_t cut = 0;
  for (std::size_t m = 1; m <= n; ++m) {
    const auto inside = static_cast<std::int64_t>(std::popcount(m - 1));
    cut += static_cast<std::int64_t>(d) - 2 * inside;
    best[m] = cut;
  }
  return best;
}

/// Exact lambda for graphs whose arcs all join consecutive nodes of the
/// sequence 0..n-1 (optionally closing the cycle), by DP over the sequence.
inline std::optional<std::pair<std::int64_t, std::int64_t>> path_cut_ratio(const scaled_arcs& s, bool cyclic) {
  const std::size_t n = s.n;
  std::vector<std::int64_t> fwd(n, 0), bwd(n, 0);  // arc i -> i+1 and i+1 -> i (indices mod n)
  for (const auto& a : s.arcs) {
    if ((a.from + 1) % n == a.to && (cyclic || a.to != 0))
      fwd[a.from] += a.w;
    else if ((a.to + 1) % n == a.from && (cyclic || a.from != 0))
      bwd[a.to] += a.w;
    else
      return std::nullopt;
  }
  constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
  // min_cut[size] over assignments; DP state: (size, last bit), per first bit.
  std::vector<std::int64_t> min_cut(n + 1, inf);
  for (int first = 0; first < 2; ++first) {
    std::vector<std::array<std::int64_t, 2>> dp(n + 1, {inf, inf});
    dp[first][first] = 0;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<std::array<std::int64_t, 2>> next(n + 1, {inf, inf});
      for (std::size_t sz = 0; sz <= i; ++sz)
        for (int prev = 0; prev < 2; ++prev) {
          if (dp[sz][prev] >= inf) continue;
          for (int b = 0; b < 2; ++b) {
            std::int64_t c = dp[sz][prev];
            if (prev == 1 && b == 0) c += fwd[i - 1];
            if (prev == 0 && b == 1) c += bwd[i - 1];
            auto& slot = next[sz + b][b];
            slot = std::min(slot, c);
          }
        }
      dp.swap(next);
    }
    for (std::size_t sz = 0; sz <= n; ++sz)
      for (int last = 0; last < 2; ++last) {
        if (dp[sz][last] >= inf) continue;
        std::int64_t c = dp[sz][last];
        if (cyclic) {
          if (last == 1 && first == 0) c += fwd[n - 1];
          if (last == 0 && first == 1) c += bwd[n - 1];
        }
        min_cut[sz] = std::min(min_cut[sz], c);
      }
  }
  std::int64_t best_num = -1, best_den = 1;
  for (std::size_t sz = 1; sz < n; ++sz) {
    const auto den = static_cast<std::int64_t>(std::min(sz, n - sz));
    if (best_num < 0 || static_cast<__int128>(min_cut[sz]) * best_den < static_cast<__int128>(best_num) * den) {
      best_num = min_cut[sz];
      best_den = den;
    }
  }
  return std::make_pair(best_num, best_den);
}

inline bool family_matches(const topology& g, graph_family f) {
  return g.family() && g.family()->family == f;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// gamma

inline rational min_cut_gamma_brute_force(const topology& g) {
  detail::require_nodes(g);
  detail::require_subset_size(g.n());
  const auto s = detail::scale_weights(g);
  const auto [num, den] = detail::brute_cut_ratio(s, false);
  return detail::to_rational(num, den, s.denominator);
}

/// Global directed min cut: node 0 lies on one side of any cut, so the
/// minimum is attained by some 0->t or t->0 minimum s-t cut.
inline rational min_cut_gamma_max_flow(const topology& g) {
  detail::require_nodes(g);
  const auto s = detail::scale_weights(g);
  using traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
  using graph_t = boost::adjacency_list<
      boost::vecS, boost::vecS, boost::directedS, boost::no_property,
      boost::property<boost::edge_capacity_t, std::int64_t,
                      boost::property<boost::edge_residual_capacity_t, std::int64_t,
                                      boost::property<boost::edge_reverse_t, traits::edge_descriptor>>>>;
  graph_t fg(s.n);
  auto cap = boost::get(boost::edge_capacity, fg);
  auto rev = boost::get(boost::edge_reverse, fg);
  for (const auto& a : s.arcs) {
    const auto e = boost::add_edge(a.from, a.to, fg).first;
    const auto r = boost::add_edge(a.to, a.from, fg).first;
    cap[e] = a.w;
    cap[r] = 0;
    rev[e] = r;
    rev[r] = e;
  }
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::size_t t = 1; t < s.n; ++t) {
    best = std::min<std::int64_t>(best, boost::push_relabel_max_flow(fg, 0, t));
    best = std::min<std::int64_t>(best, boost::push_relabel_max_flow(fg, t, 0));
  }
  return detail::to_rational(best, 1, s.denominator);
}

inline rational min_cut_gamma_exact(const topology& g, metric_method m = metric_method::automatic) {
  if (m == metric_method::brute_force) return min_cut_gamma_brute_force(g);
  return min_cut_gamma_max_flow(g);
}

inline double min_cut_gamma(const topology& g, metric_method m = metric_method::automatic) {
  return min_cut_gamma_exact(g, m).convert_to<double>();
}

// ---------------------------------------------------------------------------
// h

inline rational isoperimetric_h_brute_force(const topology& g) {
  detail::require_nodes(g);
  detail::require_subset_size(g.n());
  const std::size_t n = g.n();
  std::vector<std::uint32_t> out_mask(n, 0);
  for (node_id u = 0; u < n; ++u)
    for (node_id v : g.out(u)) out_mask[u] |= 1u << v;
  const std::uint32_t full = static_cast<std::uint32_t>((std::uint64_t{1} << n) - 1);
  std::vector<std::uint32_t> reach(std::size_t{1} << n, 0);
  std::int64_t best_num = -1, best_den = 1;
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    reach[mask] = reach[mask & (mask - 1)] | out_mask[std::countr_zero(mask)];
    const auto boundary = static_cast<std::int64_t>(std::popcount(reach[mask] & ~mask & full));
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    const auto den = static_cast<std::int64_t>(std::min(size, n - size));
    if (best_num < 0 || boundary * best_den < best_num * den) {
      best_num = boundary;
      best_den = den;
    }
  }
  return rational(best_num, best_den);
}

/// Exact h without subset enumeration when the topology is a catalog family.
inline std::optional<rational> isoperimetric_h_closed_form(const topology& g) {
  if (!g.family() || g.n() < 2) return std::nullopt;
  const std::size_t n = g.n();
  const auto half = static_cast<long long>(n / 2);
  switch (g.family()->family) {
    case graph_family::complete:
      return rational(1);
    case graph_family::ring:
      return half <= 2 ? rational(1) : rational(2, half);
    case graph_family::line:
    case graph_family::star:
      return rational(1, half);
    case graph_family::barbell:
      return rational(1, static_cast<long long>(g.family()->param));
    case graph_family::two_cliques_bridged: {
      auto r = detail::reduce_twins(detail::unit_arcs(g), std::uint64_t{1} << 28);
      if (!r) return std::nullopt;
      const auto [num, den] = detail::twin_boundary_ratio(*r, n);
      return rational(num, den);
    }
    case graph_family::hypercube: {
      const auto b = detail::hypercube_vertex_boundaries(g.family()->param);
      std::int64_t best_num = -1, best_den = 1;
      for (std::size_t m = 1; m < n; ++m) {
        const auto den = static_cast<std::int64_t>(std::min(m, n - m));
        if (best_num < 0 || b[m] * best_den < best_num * den) {
          best_num = b[m];
          best_den = den;
        }
      }
      return rational(best_num, best_den);
    }
    default:
      return std::nullopt;
  }
}

inline rational isoperimetric_h_exact(const topology& g, metric_method m = metric_method::automatic) {
  detail::require_nodes(g);
  if (m == metric_method::brute_force) return isoperimetric_h_brute_force(g);
  if (auto c = isoperimetric_h_closed_form(g)) return *c;
  if (m == metric_method::automatic && g.n() <= max_exact_subset_nodes) return isoperimetric_h_brute_force(g);
  if (auto r = detail::reduce_twins(detail::unit_arcs(g), std::uint64_t{1} << 28)) {
    const auto [num, den] = detail::twin_boundary_ratio(*r, g.n());
    return rational(num, den);
  }
  throw error(errc::too_large_for_exact, "no exact method for h on this topology");
}

inline double isoperimetric_h(const topology& g, metric_method m = metric_method::automatic) {
  return isoperimetric_h_exact(g, m).convert_to<double>();
}

// ---------------------------------------------------------------------------
// lambda

inline rational conductance_lambda_brute_force(const topology& g) {
  detail::require_nodes(g);
  detail::require_subset_size(g.n());
  const auto s = detail::scale_weights(g);
  const auto [num, den] = detail::brute_cut_ratio(s, true);
  return detail::to_rational(num, den, s.denominator);
}

/// Exact lambda by structure: twin-class reduction, path/cycle DP for lines
/// and rings, or the edge-isoperimetric profile for uniformly weighted cubes.
inline std::optional<rational> conductance_lambda_structural(const topology& g) {
  if (g.n() < 2) return std::nullopt;
  const auto s = detail::scale_weights(g);
  const std::size_t n = g.n();
  if (detail::family_matches(g, graph_family::ring) || detail::family_matches(g, graph_family::line)) {
    if (auto r = detail::path_cut_ratio(s, detail::family_matches(g, graph_family::ring)))
      return detail::to_rational(r->first, r->second, s.denominator);
  }
  if (detail::family_matches(g, graph_family::hypercube)) {
    const std::size_t d = g.family()->param;
    const bool uniform = std::all_of(s.arcs.begin(), s.arcs.end(), [&](const detail::arc& a) {
      return a.w == s.arcs.front().w && std::popcount(a.from ^ a.to) == 1;
    });
    if (uniform && n == (std::size_t{1} << d) && s.arcs.size() == n * d) {
      const auto b = detail::hypercube_edge_boundaries(d);
      std::int64_t best_num = -1, best_den = 1;
      for (std::size_t m = 1; m < n; ++m) {
        const auto den = static_cast<std::int64_t>(std::min(m, n - m));
        if (best_num < 0 || b[m] * best_den < best_num * den) {
          best_num = b[m];
          best_den = den;
        }
      }
      return detail::to_rational(best_num * s.arcs.front().w, best_den, s.denominator);
    }
  }
  if (auto r = detail::reduce_twins(s, std::uint64_t{1} << 28)) {
    const auto [num, den] = detail::twin_cut_ratio(*r, n, true);
    return detail::to_rational(num, den, s.denominator);
  }
  return std::nullopt;
}

inline rational conductance_lambda_exact(const topology& g, metric_method m = metric_method::automatic) {
  detail::require_nodes(g);
  if (m == metric_method::brute_force) return conductance_lambda_brute_force(g);
  if (m == metric_method::automatic && g.n() <= max_exact_subset_nodes && !g.family())
    return conductance_lambda_brute_force(g);
  if (auto r = conductance_lambda_structural(g)) return *r;
  if (m == metric_method::automatic && g.n() <= max_exact_subset_nodes) return conductance_lambda_brute_force(g);
  throw error(errc::too_large_for_exact, "no exact method for lambda on this topology");
}

inline double conductance_lambda(const topology& g, metric_method m = metric_method::automatic) {
  return conductance_lambda_exact(g, m).convert_to<double>();
}

}  // namespace rlnc
