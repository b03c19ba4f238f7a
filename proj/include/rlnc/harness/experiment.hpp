#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include "rlnc/adversary.hpp"
#include "rlnc/analysis.hpp"
#include "rlnc/comm.hpp"
#include "rlnc/flooding.hpp"
#include "rlnc/harness/config.hpp"
#include "rlnc/tracker.hpp"

namespace rlnc {

/// Calls fn(i) for i in [0, count) on `threads` workers. The first
/// exception thrown by any call is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Runs f with the arithmetic backend for field size q.
template <class F>
decltype(auto) with_arith(std::uint64_t q, F&& f) {
  if (q == 2) return f(gf2_arith{});
  return f(fq_arith(make_field(q)));
}

inline topology build_base_graph(const scenario_config& c, philox4x32& rng) {
  const std::size_t n = c.n;
  if (c.graph == "complete") return families::complete(n);
  if (c.graph == "ring") return families::ring(n);
  if (c.graph == "line") return families::line(n);
  if (c.graph == "star") return families::star(n);
  if (c.graph == "hypercube") return families::hypercube(static_cast<std::size_t>(std::countr_zero(n)));
  if (c.graph == "barbell") return families::barbell(n / 2);
  if (c.graph == "two_cliques_bridged")
    return families::two_cliques_bridged(n, c.graph_param > 0 ? static_cast<std::size_t>(c.graph_param) : n / 2);
  if (c.graph == "random_gnp") return families::random_gnp(n, c.graph_param, rng);
  if (c.graph == "random_matching") return families::random_matching(n, rng);
  if (c.graph == "file") {
    auto g = load_edge_list(c.graph_file);
    if (g.n() != n)
      throw error(errc::config_error, "graph_file: has " + std::to_string(g.n()) + " nodes but n = " + std::to_string(n));
    return g;
  }
  throw error(errc::config_error, "graph: unknown family '" + c.graph + "'");
}

/// The trial's topology controller, with induced weights for
/// AsyncSingleTransfer and the connectivity contract if requested.
inline adversary_ptr make_scenario_adversary(const scenario_config& c, std::uint64_t trial_seed) {
  auto rng = make_stream(trial_seed, stream_purpose::adversary);
  adversary_ptr adv;
  if (c.adversary == "static") {
    auto g = build_base_graph(c, rng);
    if (model_needs_weights(c.model) && !g.weighted()) g = induce_weighted(g, c.transfer);
    return c.require_connected ? std::make_unique<connected_contract>(std::make_unique<static_adversary>(std::move(g)))
                               : adversary_ptr(std::make_unique<static_adversary>(std::move(g)));
  }
  if (c.adversary == "random_gnp") adv = std::make_unique<random_gnp_adversary>(c.n, c.adversary_p, rng);
  else if (c.adversary == "random_matching") adv = std::make_unique<random_matching_adversary>(c.n, rng);
  else if (c.adversary == "two_clique_split") adv = std::make_unique<two_clique_knowledge_split>(0);
  else if (c.adversary == "directory") adv = std::make_unique<directory_adversary>(c.adversary_dir);
  else throw error(errc::config_error, "adversary: unknown adversary '" + c.adversary + "'");
  if (model_needs_weights(c.model)) adv = std::make_unique<induced_weights_adversary>(std::move(adv), c.transfer);
  if (c.require_connected) adv = std::make_unique<connected_contract>(std::move(adv));
  return adv;
}

/// Message indices each node starts with.
inline std::vector<std::vector<std::size_t>> initial_holdings(const scenario_config& c) {
  std::vector<std::vector<std::size_t>> held(c.n);
  switch (c.init) {
    case init_mode::single_source:
      for (std::size_t i = 0; i < c.k; ++i) held[c.init_source].push_back(i);
      break;
    case init_mode::one_per_node:
      for (std::size_t i = 0; i < c.k; ++i) held[i].push_back(i);
      break;
    case init_mode::spread:
      for (std::size_t j = 0; j < c.k; ++j)
        for (std::size_t r = 0; r < c.init_spread; ++r) held[(j * c.init_spread + r) % c.n].push_back(j);
      for (auto& h : held) {
        std::sort(h.begin(), h.end());
        h.erase(std::unique(h.begin(), h.end()), h.end());
      }
      break;
    case init_mode::explicit_map:
      for (const auto& [node, msgs] : parse_init_map(c.init_map)) held[node] = msgs;
      break;
  }
  return held;
}

inline std::vector<node_id> holders_of(const std::vector<std::vector<std::size_t>>& held, std::size_t message) {
  std::vector<node_id> out;
  for (node_id v = 0; v < held.size(); ++v)
    if (std::find(held[v].begin(), held[v].end(), message) != held[v].end()) out.push_back(v);
  return out;
}

inline comm_options comm_options_of(const scenario_config& c) {
  comm_options o;
  o.pull = c.pull;
  o.async_broadcast = c.async_broadcast;
  return o;
}

struct trial_record {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  run_record run;
  double wall_seconds = 0;
  /// Latest cover round over the tracked duals (tracked_duals = auto).
  std::optional<std::size_t> max_cover_round;
  /// Every decoded payload matched the ground truth (payload mode).
  bool payload_ok = true;
};

template <class Arith>
trial_record run_trial(const Arith& arith, const scenario_config& c, std::size_t trial, std::size_t max_rounds) {
  trial_record rec;
  rec.trial = trial;
  rec.seed = derive_trial_seed(c.seed, trial);
  const auto start = std::chrono::steady_clock::now();

  auto protocol = make_stream(rec.seed, stream_purpose::protocol);
  auto init_rng = make_stream(rec.seed, stream_purpose::initialization);
  auto adv = make_scenario_adversary(c, rec.seed);

  message_set messages;
  if (c.l > 0) {
    messages.assign(c.k, std::vector<element_t>(c.l));
    for (auto& m : messages)
      for (auto& x : m) x = arith.random(init_rng);
  }
  const auto held = initial_holdings(c);
  std::vector<node_state<Arith>> states;
  states.reserve(c.n);
  for (node_id v = 0; v < c.n; ++v)
    states.push_back(init_node(arith, v, c.k, held[v], c.l > 0 ? &messages : nullptr));

  std::vector<storage_t<Arith>> adversary_duals;
  if (adv->adaptive()) {
    storage_t<Arith> mu(Arith::storage_size(c.k), 0);
    Arith::set(mu, c.adversary_dual, 1);
    adversary_duals.push_back(std::move(mu));
  }

  std::optional<knowledge_tracker<Arith>> tracker;
  if (c.tracked_duals == "auto") {
    dual_selection sel;
    sel.seed = rec.seed;
    typename knowledge_tracker<Arith>::options opt;
    opt.record_events = !c.trace_dir.empty();
    tracker.emplace(arith, select_duals(arith, c.k, sel), states, opt);
  }

  const topology_source source = [&](std::size_t round) {
    const auto view = make_view(round, states, adversary_duals, adv->adaptive(), rec.seed, protocol.consumed(), adv->draws());
    auto g = adv->next(view);
    if (g->n() != c.n) throw error(errc::size_mismatch, "adversary graph has " + std::to_string(g->n()) + " nodes");
    return g;
  };
  run_hooks<Arith> hooks;
  if (tracker) hooks.observer = [&](const round_log<Arith>& log, const auto& s) { tracker->observe(log, s); };
  rec.run = run_until(c.model, source, states, max_rounds, comm_options_of(c), protocol, hooks);

  if (c.l > 0)
    for (const auto& s : states)
      if (s.can_decode() && (!payload_consistent(s, messages) || decode(s) != messages)) rec.payload_ok = false;
  if (tracker) {
    rec.max_cover_round = tracker->max_cover_round();
    if (!c.trace_dir.empty()) {
      std::filesystem::create_directories(c.trace_dir);
      const auto stem = std::filesystem::path(c.trace_dir) / (c.scenario_id + "_trial" + std::to_string(trial));
      std::ofstream(stem.string() + "_knowers.csv") << tracker->trace_csv();
      std::ofstream(stem.string() + "_events.csv") << tracker->events_csv();
    }
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

struct stopping_stats {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();
  double p90 = std::numeric_limits<double>::quiet_NaN();
  double p99 = std::numeric_limits<double>::quiet_NaN();
  double min = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  double stderr_mean = std::numeric_limits<double>::quiet_NaN();
  std::size_t trials = 0;
  std::size_t converged = 0;
  double convergence_rate = 0;

  stopping_stats scaled(double factor) const {
    stopping_stats s = *this;
    for (double* x : {&s.mean, &s.median, &s.p90, &s.p99, &s.min, &s.max, &s.stderr_mean}) *x *= factor;
    return s;
  }
};

/// Smallest sample x with at least a fraction p of the sample <= x.
inline double nearest_rank(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size()) - 1e-9));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

/// Statistics over converged trials; non-converged ones only lower the
/// convergence rate.
inline stopping_stats summarize(const std::vector<trial_record>& records) {
  stopping_stats s;
  s.trials = records.size();
  std::vector<double> xs;
  for (const auto& r : records)
    if (r.run.converged()) xs.push_back(static_cast<double>(*r.run.stopping_round));
  s.converged = xs.size();
  s.convergence_rate = s.trials ? static_cast<double>(s.converged) / static_cast<double>(s.trials) : 0.0;
  if (xs.empty()) return s;
  std::sort(xs.begin(), xs.end());
  compensated_sum sum;
  for (double x : xs) sum.add(x);
  s.mean = static_cast<double>(sum.value()) / static_cast<double>(xs.size());
  s.median = nearest_rank(xs, 0.5);
  s.p90 = nearest_rank(xs, 0.9);
  s.p99 = nearest_rank(xs, 0.99);
  s.min = xs.front();
  s.max = xs.back();
  if (xs.size() > 1) {
    compensated_sum sq;
    for (double x : xs) sq.add((x - s.mean) * (x - s.mean));
    s.stderr_mean = std::sqrt(static_cast<double>(sq.value()) / static_cast<double>(xs.size() - 1) /
                              static_cast<double>(xs.size()));
  } else {
    s.stderr_mean = 0;
  }
  return s;
}

struct budget_estimate {
  std::size_t max_rounds = 0;
  /// Cover-time estimate T from flooding (0.99 quantile).
  double flood_cover = 0;
  std::size_t flood_trials = 0;
  std::size_t flood_censored = 0;
};

/// Round budget pipelining_rounds(k, T, 1/q, q, ceil(log2(1/delta))), with T
/// the 0.99 cover-time quantile of faulty flooding from message 0's holders.
inline budget_estimate auto_budget(const scenario_config& c, std::size_t flood_trials = 200,
                                   std::size_t flood_cap = 100000) {
  budget_estimate b;
  b.flood_trials = flood_trials;
  flood_options fo;
  fo.forward_prob = forward_probability(c.q);
  fo.comm = comm_options_of(c);
  const auto sources = holders_of(initial_holdings(c), 0);
  const adversary_factory factory = [&c](std::uint64_t ts) { return make_scenario_adversary(c, ts); };
  // a trial index no simulation uses
  const std::uint64_t seed = derive_trial_seed(c.seed, std::numeric_limits<std::uint64_t>::max());
  const auto cdf = estimate_tail(c.model, factory, sources, c.n, fo, flood_trials, seed, flood_cap);
  b.flood_censored = cdf.censored();
  try {
    b.flood_cover = static_cast<double>(cdf.quantile(0.99));
  } catch (const error&) {
    b.flood_cover = static_cast<double>(flood_cap);
  }
  const double q = static_cast<double>(c.q);
  const double d = std::ceil(std::log2(1.0 / c.delta));
  b.max_rounds = static_cast<std::size_t>(
      std::ceil(pipelining_rounds(static_cast<double>(c.k), b.flood_cover, 1.0 / q, q, d)));
  b.max_rounds = std::max<std::size_t>(b.max_rounds, 1);
  return b;
}

struct experiment_result {
  scenario_config config;
  std::size_t max_rounds = 0;
  std::optional<budget_estimate> budget;
  std::vector<trial_record> records;
  stopping_stats stats;
};

/// Runs all trials of a scenario. Trial i always uses
/// derive_trial_seed(seed, i), so results do not depend on the thread count.
inline experiment_result run_experiment(const scenario_config& c) {
  validate_config(c);
  experiment_result res;
  res.config = c;
  if (c.max_rounds > 0) {
    res.max_rounds = c.max_rounds;
  } else {
    res.budget = auto_budget(c);
    res.max_rounds = res.budget->max_rounds;
  }
  res.records.resize(c.trials);
  with_arith(c.q, [&](const auto& arith) {
    parallel_for(c.trials, c.threads, [&](std::size_t i) { res.records[i] = run_trial(arith, c, i, res.max_rounds); });
  });
  res.stats = summarize(res.records);
  return res;
}

/// One experiment per axis value; axis is n, k, q or graph_param.
inline std::vector<experiment_result> sweep(const scenario_config& base, const std::string& axis,
                                            const std::vector<std::string>& values) {
  if (axis != "n" && axis != "k" && axis != "q" && axis != "graph_param")
    throw error(errc::config_error, "axis: expected n, k, q or graph_param, got '" + axis + "'");
  std::vector<experiment_result> rows;
  for (const auto& v : values) {
    scenario_config c = base;
    set_config_value(c, axis, v);
    c.scenario_id = base.scenario_id + ":" + axis + "=" + v;
    rows.push_back(run_experiment(c));
  }
  return rows;
}

}  // namespace rlnc
