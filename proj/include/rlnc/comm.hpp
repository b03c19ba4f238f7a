#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rlnc/coding.hpp"
#include "rlnc/error.hpp"
#include "rlnc/network.hpp"
#include "rlnc/random.hpp"

namespace rlnc {

enum class comm_model {
  sync_push,
  sync_pull,
  sync_exchange,
  sync_broadcast,
  async_single_transfer,
  async_broadcast,
};

constexpr std::string_view to_string(comm_model m) noexcept {
  switch (m) {
    case comm_model::sync_push: return "SyncPush";
    case comm_model::sync_pull: return "SyncPull";
    case comm_model::sync_exchange: return "SyncExchange";
    case comm_model::sync_broadcast: return "SyncBroadcast";
    case comm_model::async_single_transfer: return "AsyncSingleTransfer";
    case comm_model::async_broadcast: return "AsyncBroadcast";
  }
  return "Unknown";
}

inline comm_model parse_comm_model(std::string_view s) {
  for (auto m : {comm_model::sync_push, comm_model::sync_pull, comm_model::sync_exchange, comm_model::sync_broadcast,
                 comm_model::async_single_transfer, comm_model::async_broadcast})
    if (s == to_string(m)) return m;
  throw error(errc::config_error, "unknown communication model '" + std::string(s) + "'");
}

/// Whether several pullers of one sender in a round share a single packet.
enum class pull_sampling { independent, shared };

/// Node selection in AsyncBroadcast: independent Bernoulli(1/n) per node, or
/// exactly one uniform node per round.
enum class async_broadcast_selection { bernoulli, single_node };

struct comm_options {
  pull_sampling pull = pull_sampling::independent;
  async_broadcast_selection async_broadcast = async_broadcast_selection::bernoulli;
};

struct transmission {
  node_id sender = 0;
  node_id receiver = 0;
  /// Index of the packet (slot) carried; several sends may share a slot.
  std::uint32_t slot = 0;
};

/// Who transmits to whom in one round, independent of node contents. Each
/// slot is one packet sampled from its sender's start-of-round state.
struct round_schedule {
  std::vector<node_id> slot_sender;
  std::vector<transmission> sends;
};

inline bool model_needs_weights(comm_model m) noexcept { return m == comm_model::async_single_transfer; }

inline void check_model_topology(comm_model m, const topology& g) {
  if (model_needs_weights(m) && !g.weighted())
    throw error(errc::model_topology_mismatch, std::string(to_string(m)) + " needs a weighted topology");
  if (!model_needs_weights(m) && g.weighted())
    throw error(errc::model_topology_mismatch, std::string(to_string(m)) + " needs an unweighted topology");
}

/// Draws the round's links and packet slots. Consumes protocol randomness.
template <class Rng>
round_schedule schedule_round(comm_model model, const topology& g, const comm_options& opt, Rng& rng) {
  check_model_topology(model, g);
  const std::size_t n = g.n();
  round_schedule s;
  std::vector<std::int64_t> slot_of(n, -1);
  auto shared_slot = [&](node_id u) {
    if (slot_of[u] < 0) {
      slot_of[u] = static_cast<std::int64_t>(s.slot_sender.size());
      s.slot_sender.push_back(u);
    }
    return static_cast<std::uint32_t>(slot_of[u]);
  };
  auto fresh_slot = [&](node_id u) {
    s.slot_sender.push_back(u);
    return static_cast<std::uint32_t>(s.slot_sender.size() - 1);
  };
  auto broadcast = [&](node_id u) {
    if (g.out(u).empty()) return;
    const auto slot = fresh_slot(u);
    for (node_id v : g.out(u)) s.sends.push_back({u, v, slot});
  };

  switch (model) {
    case comm_model::sync_push:
      for (node_id u = 0; u < n; ++u) {
        const auto& out = g.out(u);
        if (out.empty()) continue;
        const node_id v = out[uniform_below(rng, out.size())];
        s.sends.push_back({u, v, fresh_slot(u)});
      }
      break;
    case comm_model::sync_pull:
      for (node_id v = 0; v < n; ++v) {
        const auto& in = g.in(v);
        if (in.empty()) continue;
        const node_id u = in[uniform_below(rng, in.size())];
        const auto slot = opt.pull == pull_sampling::shared ? shared_slot(u) : fresh_slot(u);
        s.sends.push_back({u, v, slot});
      }
      break;
    case comm_model::sync_exchange:
      for (node_id u = 0; u < n; ++u) {
        const auto& out = g.out(u);
        if (out.empty()) continue;
        const node_id v = out[uniform_below(rng, out.size())];
        s.sends.push_back({u, v, shared_slot(u)});
        s.sends.push_back({v, u, shared_slot(v)});
      }
      break;
    case comm_model::sync_broadcast:
      for (node_id u = 0; u < n; ++u) broadcast(u);
      break;
    case comm_model::async_single_transfer: {
      const auto& cum = g.cumulative_weights();
      if (cum.empty()) break;
      const double x = uniform01(rng);
      const auto it = std::upper_bound(cum.begin(), cum.end(), x);
      if (it == cum.end()) break;  // no edge fires (probability 1 - sum p_e)
      const auto& e = g.edges()[static_cast<std::size_t>(it - cum.begin())];
      s.sends.push_back({e.u, e.v, fresh_slot(e.u)});
      if (!e.directed) s.sends.push_back({e.v, e.u, fresh_slot(e.v)});
      break;
    }
    case comm_model::async_broadcast:
      if (opt.async_broadcast == async_broadcast_selection::single_node) {
        if (n > 0) broadcast(static_cast<node_id>(uniform_below(rng, n)));
      } else {
        const double p = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
        for (node_id u = 0; u < n; ++u)
          if (bernoulli(rng, p)) broadcast(u);
      }
      break;
  }
  return s;
}

/// Everything that happened in one round of the RLNC engine.
template <class Arith>
struct round_log {
  std::size_t round = 0;
  round_schedule schedule;
  std::vector<packet<Arith>> packets;  // one per slot
  std::vector<char> innovative;        // one per send
};

/// Draws a uniform element of the sender's span. Full-rank senders in
/// coefficients-only mode draw directly from F_q^k (same distribution).
template <class Arith, class Rng>
packet<Arith> sample_for_send(const node_state<Arith>& s, Rng& rng) {
  if (s.y.full() && !s.payload_mode()) {
    const std::size_t k = s.y.dimension();
    packet<Arith> p{storage_t<Arith>(s.y.storage_words(), 0), {}};
    if constexpr (Arith::packed) {
      for (auto& w : p.mu) w = rng();
      if (k % 64 != 0) p.mu.back() &= (std::uint64_t{1} << (k % 64)) - 1;
    } else {
      for (std::size_t i = 0; i < k; ++i) p.mu[i] = s.y.arith().random(rng);
    }
    return p;
  }
  return sample_packet(s, rng);
}

/// One round: schedule, sample every slot from start-of-round states, then
/// deliver all sends. Decode rounds are stamped with `round`.
template <class Arith, class Rng>
round_log<Arith> step(comm_model model, const topology& g, std::vector<node_state<Arith>>& states,
                      const comm_options& opt, Rng& rng, std::size_t round) {
  if (states.size() != g.n()) throw error(errc::size_mismatch, "one node state per topology node required");
  round_log<Arith> log;
  log.round = round;
  log.schedule = schedule_round(model, g, opt, rng);
  log.packets.reserve(log.schedule.slot_sender.size());
  for (node_id u : log.schedule.slot_sender) log.packets.push_back(sample_for_send(states[u], rng));
  log.innovative.reserve(log.schedule.sends.size());
  for (const auto& t : log.schedule.sends)
    log.innovative.push_back(receive(states[t.receiver], log.packets[t.slot], round) ? 1 : 0);
  return log;
}

struct run_record {
  /// First round after which the stop predicate held; empty = did not
  /// converge within max_rounds.
  std::optional<std::size_t> stopping_round;
  std::size_t rounds_executed = 0;
  std::vector<std::optional<std::size_t>> decode_rounds;
  std::vector<std::size_t> innovative_counts;
  std::size_t transmissions = 0;

  bool converged() const noexcept { return stopping_round.has_value(); }
  std::size_t innovative_total() const noexcept {
    std::size_t t = 0;
    for (auto c : innovative_counts) t += c;
    return t;
  }
};

template <class Arith>
bool all_decode(const std::vector<node_state<Arith>>& states) {
  return std::all_of(states.begin(), states.end(), [](const auto& s) { return s.can_decode(); });
}

/// Supplies G(t) for round t (1-based), typically an adversary.
using topology_source = std::function<topology_ptr(std::size_t round)>;

template <class Arith>
struct run_hooks {
  std::function<bool(const std::vector<node_state<Arith>>&)> stop;  // default: all decode
  std::function<void(const round_log<Arith>&, const std::vector<node_state<Arith>>&)> observer;
};

template <class Arith, class Rng>
run_record run_until(comm_model model, const topology_source& topologies, std::vector<node_state<Arith>>& states,
                     std::size_t max_rounds, const comm_options& opt, Rng& rng, const run_hooks<Arith>& hooks = {}) {
  if (max_rounds == 0) throw error(errc::config_error, "max_rounds must be positive");
  auto done = [&] { return hooks.stop ? hooks.stop(states) : all_decode(states); };
  run_record rec;
  if (done()) {
    rec.stopping_round = 0;
  } else {
    for (std::size_t t = 1; t <= max_rounds; ++t) {
      const topology_ptr g = topologies(t);
      const auto log = step(model, *g, states, opt, rng, t);
      rec.transmissions += log.schedule.sends.size();
      rec.rounds_executed = t;
      if (hooks.observer) hooks.observer(log, states);
      if (done()) {
        rec.stopping_round = t;
        break;
      }
    }
  }
  rec.decode_rounds.reserve(states.size());
  rec.innovative_counts.reserve(states.size());
  for (const auto& s : states) {
    rec.decode_rounds.push_back(s.decode_round);
    rec.innovative_counts.push_back(s.innovative_count);
  }
  return rec;
}

}  // namespace rlnc
