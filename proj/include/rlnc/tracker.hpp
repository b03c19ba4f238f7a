#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rlnc/coding.hpp"
#include "rlnc/comm.hpp"
#include "rlnc/error.hpp"
#include "rlnc/random.hpp"

namespace rlnc {

/// One transmission from a sender that knew the tracked dual when the
/// round started.
struct transfer_event {
  std::size_t round = 0;
  node_id sender = 0;
  node_id receiver = 0;
  std::uint32_t mu_id = 0;
  bool sender_full_rank = false;
  bool receiver_knew_before = false;
  /// The packet itself has nonzero dot product with mu.
  bool packet_carries = false;
  bool receiver_knew_after = false;

  /// After this packet the receiver knows mu.
  bool success() const noexcept { return receiver_knew_before || packet_carries; }
};

struct dual_selection {
  /// Track all q^k - 1 nonzero duals when q = 2 and k <= this bound.
  std::size_t exhaustive_max_k = 12;
  std::size_t random_count = 64;
  /// Weight-2 duals (up to scaling) beyond this count are subsampled.
  std::size_t max_weight_two = 4096;
  std::uint64_t seed = 0;
};

/// Dual vectors to follow: every nonzero vector for small binary instances;
/// otherwise all weight-1 and weight-2 duals up to scalar multiples (which
/// are known by exactly the same nodes) plus uniformly random nonzero ones.
template <class Arith>
std::vector<storage_t<Arith>> select_duals(const Arith& arith, std::size_t k, const dual_selection& sel = {}) {
  std::vector<storage_t<Arith>> out;
  const std::uint64_t q = arith.order();
  const std::size_t words = Arith::storage_size(k);
  auto unit = [&](std::size_t i) {
    storage_t<Arith> v(words, 0);
    Arith::set(v, i, 1);
    return v;
  };
  if (q == 2 && k <= sel.exhaustive_max_k) {
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << k); ++m) {
      storage_t<Arith> v(words, 0);
      for (std::size_t i = 0; i < k; ++i)
        if ((m >> i) & 1) Arith::set(v, i, 1);
      out.push_back(std::move(v));
    }
    return out;
  }
  std::set<storage_t<Arith>> seen;
  auto add = [&](storage_t<Arith> v) {
    if (seen.insert(v).second) out.push_back(std::move(v));
  };
  for (std::size_t i = 0; i < k; ++i) add(unit(i));
  philox4x32 rng(sel.seed, static_cast<std::uint64_t>(stream_purpose::oracle));
  const std::uint64_t pairs = static_cast<std::uint64_t>(k) * (k - 1) / 2 * (q - 1);
  auto weight_two = [&](std::size_t i, std::size_t j, element_t a) {
    auto v = unit(i);
    Arith::set(v, j, a);
    return v;
  };
  if (pairs <= sel.max_weight_two) {
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        for (element_t a = 1; a < q; ++a) add(weight_two(i, j, a));
  } else if (k >= 2) {
    for (std::size_t c = 0; c < sel.max_weight_two; ++c) {
      const auto i = uniform_below(rng, k);
      auto j = uniform_below(rng, k - 1);
      if (j >= i) ++j;
      const auto a = static_cast<element_t>(1 + uniform_below(rng, q - 1));
      add(weight_two(std::min(i, j), std::max(i, j), a));
    }
  }
  for (std::size_t c = 0; c < sel.random_count; ++c) {
    storage_t<Arith> v(words, 0);
    do {
      for (std::size_t i = 0; i < k; ++i) Arith::set(v, i, static_cast<element_t>(uniform_below(rng, q)));
    } while (Arith::is_zero(v));
    add(std::move(v));
  }
  return out;
}

/// Per-dual knowledge sets over the course of one run.
template <class Arith>
class knowledge_tracker {
 public:
  struct options {
    bool record_events = true;
    bool keep_sets = false;
  };

  knowledge_tracker(const Arith& arith, std::vector<storage_t<Arith>> mus, const std::vector<node_state<Arith>>& states,
                    options opt)
      : arith_(arith), mus_(std::move(mus)), opt_(opt) {
    for (const auto& mu : mus_)
      if (Arith::is_zero(mu)) throw error(errc::zero_vector_tracked, "tracked dual vectors must be nonzero");
    knows_.assign(mus_.size(), std::vector<char>(states.size(), 0));
    counts_.assign(mus_.size(), {});
    cover_.assign(mus_.size(), std::nullopt);
    if (opt_.keep_sets) sets_.assign(mus_.size(), {});
    refresh(0, states);
  }

  knowledge_tracker(const Arith& arith, std::vector<storage_t<Arith>> mus, const std::vector<node_state<Arith>>& states)
      : knowledge_tracker(arith, std::move(mus), states, options{}) {}

  /// Call after each round with that round's log and the resulting states.
  void observe(const round_log<Arith>& log, const std::vector<node_state<Arith>>& states) {
    if (opt_.record_events) {
      const std::size_t first = events_.size();
      for (std::size_t d = 0; d < mus_.size(); ++d) {
        const auto& before = knows_[d];
        for (std::size_t i = 0; i < log.schedule.sends.size(); ++i) {
          const auto& t = log.schedule.sends[i];
          if (!before[t.sender]) continue;
          transfer_event e;
          e.round = log.round;
          e.sender = t.sender;
          e.receiver = t.receiver;
          e.mu_id = static_cast<std::uint32_t>(d);
          e.sender_full_rank = sender_full_[t.sender] != 0;
          e.receiver_knew_before = before[t.receiver] != 0;
          e.packet_carries = arith_.dot(log.packets[t.slot].mu, mus_[d]) != 0;
          events_.push_back(e);
        }
      }
      refresh(log.round, states);
      for (std::size_t i = first; i < events_.size(); ++i)
        events_[i].receiver_knew_after = knows_[events_[i].mu_id][events_[i].receiver] != 0;
    } else {
      refresh(log.round, states);
    }
  }

  std::size_t dual_count() const noexcept { return mus_.size(); }
  const storage_t<Arith>& dual(std::size_t d) const { return mus_[d]; }
  const std::vector<char>& knowers(std::size_t d) const { return knows_[d]; }
  /// knower counts after rounds 0, 1, 2, ...
  const std::vector<std::size_t>& knower_counts(std::size_t d) const { return counts_[d]; }
  /// Knowing-node sets per round (only with keep_sets).
  const std::vector<std::vector<char>>& knower_sets(std::size_t d) const { return sets_.at(d); }
  /// First round after which every node knows dual d.
  std::optional<std::size_t> cover_round(std::size_t d) const { return cover_[d]; }
  const std::vector<transfer_event>& events() const noexcept { return events_; }
  /// Number of (round, dual, node) cases where knowledge was lost.
  std::size_t monotonicity_violations() const noexcept { return violations_; }

  /// Latest cover round over all tracked duals, if all are covered.
  std::optional<std::size_t> max_cover_round() const {
    std::size_t m = 0;
    for (const auto& c : cover_) {
      if (!c) return std::nullopt;
      m = std::max(m, *c);
    }
    return m;
  }

  std::string trace_csv() const {
    std::ostringstream out;
    out << "round,mu_id,knower_count\n";
    for (std::size_t d = 0; d < mus_.size(); ++d)
      for (std::size_t r = 0; r < counts_[d].size(); ++r) out << r << ',' << d << ',' << counts_[d][r] << '\n';
    return out.str();
  }

  std::string events_csv() const {
    std::ostringstream out;
    out << "round,sender,receiver,success\n";
    for (const auto& e : events_) out << e.round << ',' << e.sender << ',' << e.receiver << ',' << (e.success() ? 1 : 0) << '\n';
    return out.str();
  }

 private:
  void refresh(std::size_t round, const std::vector<node_state<Arith>>& states) {
    sender_full_.resize(states.size());
    for (std::size_t v = 0; v < states.size(); ++v) sender_full_[v] = states[v].can_decode() ? 1 : 0;
    for (std::size_t d = 0; d < mus_.size(); ++d) {
      std::size_t count = 0;
      for (std::size_t v = 0; v < states.size(); ++v) {
        const bool now = states[v].y.knows(mus_[d]);
        if (!now && knows_[d][v]) ++violations_;
        knows_[d][v] = now ? 1 : 0;
        count += now;
      }
      counts_[d].push_back(count);
      if (!cover_[d] && count == states.size()) cover_[d] = round;
      if (opt_.keep_sets) sets_[d].push_back(knows_[d]);
    }
  }

  Arith arith_;
  std::vector<storage_t<Arith>> mus_;
  options opt_;
  std::vector<std::vector<char>> knows_;
  std::vector<char> sender_full_;
  std::vector<std::vector<std::size_t>> counts_;
  std::vector<std::optional<std::size_t>> cover_;
  std::vector<std::vector<std::vector<char>>> sets_;
  std::vector<transfer_event> events_;
  std::size_t violations_ = 0;
};

/// Wilson score interval for a binomial proportion.
struct proportion_estimate {
  std::size_t events = 0;
  std::size_t successes = 0;
  double rate = 0;
  double lower = 0;
  double upper = 0;
  /// Binomial standard deviation of the rate under p = rate.
  double sigma = 0;
};

inline proportion_estimate wilson(std::size_t successes, std::size_t events, double z = 3.0) {
  proportion_estimate e;
  e.events = events;
  e.successes = successes;
  if (events == 0) return e;
  const double n = static_cast<double>(events);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  e.rate = p;
  e.lower = centre - half;
  e.upper = centre + half;
  e.sigma = std::sqrt(p * (1 - p) / n);
  return e;
}

struct lemma1_report {
  std::uint64_t q = 0;
  double expected = 0;  // 1 - 1/q
  proportion_estimate all;
  /// Full-rank senders, receivers not yet knowing: exact-rate check.
  proportion_estimate full_rank;
  /// The Wilson interval lies entirely below 1 - 1/q.
  bool violation = false;
};

inline lemma1_report lemma1_frequency(const std::vector<transfer_event>& events, std::uint64_t q,
                                      std::size_t min_events = 1000) {
  if (events.size() < min_events)
    throw error(errc::insufficient_events,
                std::to_string(events.size()) + " qualifying events, need " + std::to_string(min_events));
  std::size_t ok = 0, full = 0, full_ok = 0;
  for (const auto& e : events) {
    ok += e.success();
    if (e.sender_full_rank && !e.receiver_knew_before) {
      ++full;
      full_ok += e.packet_carries;
    }
  }
  lemma1_report r;
  r.q = q;
  r.expected = 1.0 - 1.0 / static_cast<double>(q);
  r.all = wilson(ok, events.size());
  r.full_rank = wilson(full_ok, full);
  r.violation = r.all.upper < r.expected;
  return r;
}

}  // namespace rlnc
