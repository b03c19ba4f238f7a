#pragma once

#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlnc/analysis.hpp"
#include "rlnc/harness/experiment.hpp"
#include "rlnc/tracker.hpp"

namespace rlnc {

struct check_result {
  std::string name;
  double estimate = 0;
  /// Confidence interval of the estimate (equal to it for exact checks).
  double lower = 0;
  double upper = 0;
  /// Value the estimate is compared against.
  double reference = 0;
  bool pass = false;
  std::string detail;
};

struct validation_report {
  std::string suite;
  std::vector<check_result> checks;

  bool pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"suite", suite}, {"pass", pass()}, {"rng", "philox4x32-10"}};
    auto& arr = j["checks"] = nlohmann::json::array();
    for (const auto& c : checks)
      arr.push_back({{"name", c.name},
                     {"estimate", c.estimate},
                     {"lower", c.lower},
                     {"upper", c.upper},
                     {"reference", c.reference},
                     {"pass", c.pass},
                     {"detail", c.detail}});
    return j;
  }
};

struct validate_options {
  std::uint64_t seed = 1;
  /// Multiplies every default trial or event count.
  double scale = 1.0;
  std::size_t threads = 1;
};

inline const std::vector<std::string>& validation_suites() {
  static const std::vector<std::string> suites{"lemma1", "theorem1_dominance", "lemma9", "lemma7", "decode_equivalence"};
  return suites;
}

namespace detail {

inline std::size_t scaled(std::size_t base, double scale) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(base) * scale)));
}

inline std::vector<node_state<fq_arith>> single_source_states(const fq_arith& a, std::size_t n, std::size_t k) {
  std::vector<std::size_t> all(k);
  std::iota(all.begin(), all.end(), 0);
  std::vector<node_state<fq_arith>> st;
  for (node_id v = 0; v < n; ++v)
    st.push_back(init_node(a, v, k, v == 0 ? std::span<const std::size_t>(all) : std::span<const std::size_t>{}));
  return st;
}

inline std::string fmt(double x) {
  std::ostringstream o;
  o << std::setprecision(6) << x;
  return o.str();
}

}  // namespace detail

/// Transfer success rates on K8 SyncExchange with k = 4 for q in {2, 3, 4}.
/// Only events of the first tracked dual count: one packet scored against
/// many duals would give correlated events.
inline validation_report validate_lemma1(const validate_options& opt = {}) {
  validation_report rep{"lemma1", {}};
  const std::size_t min_events = detail::scaled(100000, opt.scale);
  const auto g = std::make_shared<const topology>(families::complete(8));
  for (std::uint64_t q : {2u, 3u, 4u}) {
    fq_arith a(make_field(q));
    dual_selection sel;
    sel.random_count = 16;
    const auto duals = select_duals(a, 4, sel);
    std::size_t events = 0, ok = 0, full = 0, full_ok = 0;
    for (std::size_t trial = 0; events < min_events; ++trial) {
      const std::uint64_t ts = derive_trial_seed(opt.seed + q, trial);
      auto st = detail::single_source_states(a, 8, 4);
      knowledge_tracker<fq_arith> tr(a, duals, st);
      run_hooks<fq_arith> hooks;
      hooks.observer = [&](const auto& log, const auto& s) { tr.observe(log, s); };
      auto rng = make_stream(ts, stream_purpose::protocol);
      run_until(comm_model::sync_exchange, [&](std::size_t) { return g; }, st, 100000, {}, rng, hooks);
      std::set<std::pair<std::size_t, node_id>> packets;
      for (const auto& e : tr.events()) {
        if (e.mu_id != 0) continue;
        ++events;
        ok += e.success();
        // a sender's packet may reach several receivers; score it once
        if (e.sender_full_rank && packets.insert({e.round, e.sender}).second) {
          ++full;
          full_ok += e.packet_carries;
        }
      }
    }
    const double p = 1.0 - 1.0 / static_cast<double>(q);
    const auto all = wilson(ok, events);
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(events));
    rep.checks.push_back({"q=" + std::to_string(q) + " transfer success rate", all.rate, all.lower, all.upper, p,
                          all.rate >= p - 3 * sigma,
                          std::to_string(events) + " transmissions; pass if rate >= 1-1/q - 3 sigma"});
    const auto exact = wilson(full_ok, full);
    rep.checks.push_back({"q=" + std::to_string(q) + " full-rank sender exact rate", exact.rate, exact.lower, exact.upper,
                          p, full > 0 && exact.lower <= p && p <= exact.upper,
                          std::to_string(full) + " packets; pass if the 3-sigma Wilson interval contains 1-1/q"});
  }
  return rep;
}

/// Mean cover time of mu = e_1 under RLNC against faulty flooding with
/// forwarding probability 1 - 1/q, same model and graph.
inline validation_report validate_theorem1_dominance(const validate_options& opt = {}) {
  validation_report rep{"theorem1_dominance", {}};
  const std::size_t trials = detail::scaled(10000, opt.scale);
  struct scenario {
    std::string name;
    comm_model model;
    topology g;
  };
  const std::vector<scenario> cases{{"K16 SyncPush", comm_model::sync_push, families::complete(16)},
                                    {"ring16 SyncBroadcast", comm_model::sync_broadcast, families::ring(16)}};
  gf2_arith a;
  const std::size_t k = 4;
  for (const auto& sc : cases) {
    const auto g = std::make_shared<const topology>(sc.g);
    std::vector<double> rlnc_t(trials), flood_t(trials);
    parallel_for(trials, opt.threads, [&](std::size_t i) {
      const std::uint64_t ts = derive_trial_seed(opt.seed, i);
      std::vector<std::size_t> all(k);
      std::iota(all.begin(), all.end(), 0);
      std::vector<node_state<gf2_arith>> st;
      for (node_id v = 0; v < g->n(); ++v)
        st.push_back(init_node(a, v, k, v == 0 ? std::span<const std::size_t>(all) : std::span<const std::size_t>{}));
      const storage_t<gf2_arith> mu{1};
      run_hooks<gf2_arith> hooks;
      hooks.stop = [&](const auto& s) {
        return std::all_of(s.begin(), s.end(), [&](const auto& x) { return x.y.knows(mu); });
      };
      auto rng = make_stream(ts, stream_purpose::protocol);
      const auto rec = run_until(sc.model, [&](std::size_t) { return g; }, st, 100000, {}, rng, hooks);
      rlnc_t[i] = static_cast<double>(rec.stopping_round.value_or(100000));
      static_adversary adv(g);
      flood_options fo;
      fo.forward_prob = forward_probability(2);
      auto frng = make_stream(ts, stream_purpose::oracle);
      const auto fr = faulty_flood(sc.model, adv, {0}, g->n(), fo, frng, 100000, ts);
      flood_t[i] = static_cast<double>(fr.cover_time.value_or(100000));
    });
    auto mean_se = [](const std::vector<double>& xs) {
      const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
      double v = 0;
      for (double x : xs) v += (x - m) * (x - m);
      return std::pair{m, std::sqrt(v / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()))};
    };
    const auto [mr, ser] = mean_se(rlnc_t);
    const auto [mf, sef] = mean_se(flood_t);
    // independent samples: the difference has standard error sqrt(ser^2 + sef^2)
    const double se = std::sqrt(ser * ser + sef * sef);
    rep.checks.push_back({sc.name + " mu-cover mean vs flooding", mr, mr - 2 * ser, mr + 2 * ser, mf + 2 * se,
                          mr <= mf + 2 * se,
                          std::to_string(trials) + " trials each; flooding mean " + detail::fmt(mf) +
                              ", pass if RLNC mean <= flooding mean + 2 SE"});
  }
  return rep;
}

/// Weighted Bernoulli bound on random weight vectors.
inline validation_report validate_lemma9(const validate_options& opt = {}) {
  validation_report rep{"lemma9", {}};
  const std::size_t vectors = detail::scaled(1000, opt.scale);
  auto rng = make_stream(opt.seed, stream_purpose::oracle);
  const double ps[] = {0.1, 0.25, 0.5};
  for (double p : ps) {
    std::size_t failures = 0, count = 0;
    double worst = -1;
    for (std::size_t i = 0; i < vectors; ++i) {
      if (ps[i % 3] != p) continue;
      std::vector<double> w(1 + uniform_below(rng, 64));
      // weights spread over three orders of magnitude
      for (auto& x : w) x = std::exp(7 * uniform01(rng));
      const auto r = weighted_bernoulli_bound_check(w, p, 4000, rng);
      ++count;
      failures += !r.pass;
      worst = std::max(worst, (r.empirical - p) / r.sigma);
    }
    rep.checks.push_back({"p=" + detail::fmt(p) + " random weight vectors", static_cast<double>(failures), 0, 0, 0,
                          failures == 0,
                          std::to_string(count) + " vectors, 4000 trials each; largest (estimate - p)/sigma = " +
                              detail::fmt(worst)});
  }
  return rep;
}

/// Exact negative-binomial tail against p^k on the grid.
inline validation_report validate_lemma7(const validate_options& = {}) {
  validation_report rep{"lemma7", {}};
  std::vector<std::uint64_t> ks, Ts;
  for (std::uint64_t k = 4; k <= 64; k *= 2) ks.push_back(k);
  for (std::uint64_t T = 1; T <= 32; T *= 2) Ts.push_back(T);
  const std::vector<double> ps{std::ldexp(1.0, -8), std::ldexp(1.0, -12), std::ldexp(1.0, -16), std::ldexp(1.0, -24),
                               std::ldexp(1.0, -32)};
  const auto grid = lemma7_grid(ks, Ts, ps);
  std::size_t in_regime = 0, failures = 0;
  long double worst = -std::numeric_limits<long double>::infinity();
  for (const auto& pt : grid) {
    if (!pt.in_regime) continue;
    ++in_regime;
    failures += !pt.pass;
    worst = std::max(worst, pt.log_tail - pt.log_bound);
  }
  rep.checks.push_back({"exact tail <= p^k where -ln p >= ln t", static_cast<double>(failures), 0, 0, 0,
                        in_regime > 0 && failures == 0,
                        std::to_string(in_regime) + " of " + std::to_string(grid.size()) +
                            " grid points in regime; largest ln(tail / p^k) = " + detail::fmt(static_cast<double>(worst))});
  return rep;
}

/// Decoding equals knowing every nonzero dual, on reachable states, and the
/// stopping round equals the latest dual cover round.
inline validation_report validate_decode_equivalence(const validate_options& opt = {}) {
  validation_report rep{"decode_equivalence", {}};
  gf2_arith a;
  auto rng = make_stream(opt.seed, stream_purpose::oracle);
  const std::size_t states_wanted = detail::scaled(100, opt.scale);
  std::size_t checked = 0, mismatches = 0, decoders = 0;
  const auto g = families::complete(8);
  for (std::size_t s = 0; s < states_wanted; ++s) {
    const std::size_t k = 1 + s % 10;
    std::vector<std::size_t> all(k);
    std::iota(all.begin(), all.end(), 0);
    std::vector<node_state<gf2_arith>> st;
    for (node_id v = 0; v < 8; ++v)
      st.push_back(init_node(a, v, k, v == 0 ? std::span<const std::size_t>(all) : std::span<const std::size_t>{}));
    auto proto = make_stream(derive_trial_seed(opt.seed, s), stream_purpose::protocol);
    const std::size_t rounds = uniform_below(rng, 3 * k + 12);
    for (std::size_t r = 1; r <= rounds; ++r) step(comm_model::sync_pull, g, st, {}, proto, r);
    const auto& node = st[1 + uniform_below(rng, 7)];
    const auto duals = select_duals(a, k);
    bool all_known = true;
    for (const auto& mu : duals) all_known = all_known && node.y.knows(mu);
    ++checked;
    decoders += node.can_decode();
    mismatches += all_known != node.can_decode();
  }
  rep.checks.push_back({"can_decode iff all nonzero duals known", static_cast<double>(mismatches), 0, 0, 0,
                        mismatches == 0,
                        std::to_string(checked) + " reachable states, " + std::to_string(decoders) + " decoding"});

  std::size_t runs = detail::scaled(50, opt.scale), equal = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    const std::size_t k = 1 + i % 10;
    std::vector<std::size_t> all(k);
    std::iota(all.begin(), all.end(), 0);
    std::vector<node_state<gf2_arith>> st;
    for (node_id v = 0; v < 8; ++v)
      st.push_back(init_node(a, v, k, v == 0 ? std::span<const std::size_t>(all) : std::span<const std::size_t>{}));
    knowledge_tracker<gf2_arith> tr(a, select_duals(a, k), st, {false, false});
    run_hooks<gf2_arith> hooks;
    hooks.observer = [&](const auto& log, const auto& s) { tr.observe(log, s); };
    auto proto = make_stream(derive_trial_seed(opt.seed + 1, i), stream_purpose::protocol);
    const auto gp = std::make_shared<const topology>(families::ring(8));
    const auto rec = run_until(comm_model::sync_push, [&](std::size_t) { return gp; }, st, 100000, {}, proto, hooks);
    equal += rec.converged() && tr.max_cover_round() == rec.stopping_round && tr.monotonicity_violations() == 0;
  }
  rep.checks.push_back({"stopping round = latest dual cover round", static_cast<double>(equal), 0, 0,
                        static_cast<double>(runs), equal == runs,
                        std::to_string(runs) + " ring-8 SyncPush runs with k <= 10, all duals tracked"});
  return rep;
}

inline validation_report run_validation(const std::string& suite, const validate_options& opt = {}) {
  if (suite == "lemma1") return validate_lemma1(opt);
  if (suite == "theorem1_dominance") return validate_theorem1_dominance(opt);
  if (suite == "lemma9") return validate_lemma9(opt);
  if (suite == "lemma7") return validate_lemma7(opt);
  if (suite == "decode_equivalence") return validate_decode_equivalence(opt);
  throw error(errc::config_error, "unknown validation suite '" + suite + "'");
}

}  // namespace rlnc
