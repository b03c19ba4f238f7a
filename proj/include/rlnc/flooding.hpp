#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rlnc/adversary.hpp"
#include "rlnc/comm.hpp"
#include "rlnc/error.hpp"
#include "rlnc/random.hpp"

namespace rlnc {

/// Probability that a scheduled transmission from an informed node informs
/// its receiver, for field size q; q = 0 stands for the q -> infinity limit.
inline double forward_probability(std::uint64_t q) { return q == 0 ? 1.0 : 1.0 - 1.0 / static_cast<double>(q); }

enum class flood_coin {
  /// One coin per packet slot: a broadcasting node reaches all its
  /// receivers or none of them.
  per_slot,
  per_receiver,
};

struct flood_options {
  double forward_prob = 0.5;
  flood_coin coin = flood_coin::per_slot;
  comm_options comm;
};

struct flood_result {
  std::optional<std::size_t> cover_time;
  std::size_t rounds_executed = 0;
  std::vector<char> informed;
  /// informed count after each round, starting with round 0
  std::vector<std::size_t> informed_counts;
};

/// Single-message flooding under the same scheduling as the RLNC engine.
/// Coins are drawn for every slot (or send) whether or not its sender is
/// informed, so runs with different forwarding probabilities share their
/// randomness round by round.
template <class Rng>
flood_result faulty_flood(comm_model model, adversary& adv, const std::vector<node_id>& sources, std::size_t n,
                          const flood_options& opt, Rng& rng, std::size_t max_rounds, std::uint64_t trial_seed = 0) {
  if (sources.empty()) throw error(errc::config_error, "flooding needs at least one source");
  if (max_rounds == 0) throw error(errc::config_error, "max_rounds must be positive");
  flood_result r;
  r.informed.assign(n, 0);
  for (auto s : sources) {
    if (s >= n) throw error(errc::index_out_of_range, "source outside the node range");
    r.informed[s] = 1;
  }
  std::size_t count = static_cast<std::size_t>(std::count(r.informed.begin(), r.informed.end(), 1));
  r.informed_counts.push_back(count);
  if (count == n) {
    r.cover_time = 0;
    return r;
  }
  std::vector<char> next;
  for (std::size_t t = 1; t <= max_rounds; ++t) {
    adversary_view view;
    view.round = t;
    view.n = n;
    view.trial_seed = trial_seed;
    view.protocol_draws = rng.consumed();
    view.adversary_draws = adv.draws();
    view.ranks.assign(r.informed.begin(), r.informed.end());
    view.knowledge.push_back(r.informed);
    const topology_ptr g = adv.next(view);
    if (g->n() != n) throw error(errc::size_mismatch, "adversary graph has the wrong node count");
    const auto sched = schedule_round(model, *g, opt.comm, rng);
    std::vector<char> slot_fires(sched.slot_sender.size(), 0);
    if (opt.coin == flood_coin::per_slot)
      for (auto& f : slot_fires) f = uniform01(rng) < opt.forward_prob;
    next = r.informed;
    for (const auto& s : sched.sends) {
      const bool fires = opt.coin == flood_coin::per_slot ? slot_fires[s.slot] != 0 : uniform01(rng) < opt.forward_prob;
      if (fires && r.informed[s.sender] && !next[s.receiver]) {
        next[s.receiver] = 1;
        ++count;
      }
    }
    r.informed.swap(next);
    r.informed_counts.push_back(count);
    r.rounds_executed = t;
    if (count == n) {
      r.cover_time = t;
      break;
    }
  }
  return r;
}

/// Empirical cover-time distribution with quantiles and a labeled
/// log-linear tail extrapolation.
class empirical_cdf {
 public:
  empirical_cdf(std::vector<std::size_t> samples, std::size_t censored)
      : samples_(std::move(samples)), censored_(censored) {
    std::sort(samples_.begin(), samples_.end());
  }

  std::size_t trials() const noexcept { return samples_.size() + censored_; }
  std::size_t censored() const noexcept { return censored_; }
  const std::vector<std::size_t>& samples() const noexcept { return samples_; }

  /// P[cover > t]; censored runs count as exceeding every t.
  double survival(std::size_t t) const {
    const auto above = samples_.end() - std::upper_bound(samples_.begin(), samples_.end(), t);
    return static_cast<double>(static_cast<std::size_t>(above) + censored_) / static_cast<double>(trials());
  }

  double mean() const {
    if (censored_ > 0) throw error(errc::insufficient_trials, "mean undefined with censored runs");
    double s = 0;
    for (auto x : samples_) s += static_cast<double>(x);
    return s / static_cast<double>(samples_.size());
  }

  /// Smallest observed t with P[cover <= t] >= p (nearest rank). Levels
  /// with 1 - p < 1/trials are not resolved by the sample.
  std::size_t quantile(double p) const {
    const std::size_t n = trials();
    if (n == 0 || p <= 0 || p > 1) throw error(errc::domain_error, "quantile level must be in (0, 1]");
    if (1.0 - p < 1.0 / static_cast<double>(n) - 1e-12)
      throw error(errc::insufficient_trials, "quantile beyond 1/trials needs extrapolation");
    const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-9));
    if (rank > samples_.size()) throw error(errc::insufficient_trials, "quantile falls among censored runs");
    return samples_[std::max<std::size_t>(rank, 1) - 1];
  }

  struct extrapolation {
    double t = 0;             // round where the fitted survival reaches the target
    double slope = 0;         // of log survival per round
    double intercept = 0;
    std::size_t fit_from = 0;  // fit range (rounds)
    std::size_t fit_to = 0;
    bool extrapolated = true;
  };

  /// Least-squares fit of log P[cover > t] over the observed upper decile,
  /// solved for P[cover > t] = target.
  extrapolation extrapolate_tail(double target) const {
    if (target <= 0 || target >= 1) throw error(errc::domain_error, "target must be in (0, 1)");
    if (samples_.empty()) throw error(errc::insufficient_trials, "no converged runs");
    const std::size_t lo = samples_[static_cast<std::size_t>(0.9 * static_cast<double>(samples_.size() - 1))];
    const std::size_t hi = samples_.back();
    std::vector<double> xs, ys;
    for (std::size_t t = lo; t <= hi; ++t) {
      const double s = survival(t);
      if (s <= 0) break;
      xs.push_back(static_cast<double>(t));
      ys.push_back(std::log(s));
    }
    if (xs.size() < 2) throw error(errc::insufficient_trials, "upper decile too narrow to fit a tail");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    extrapolation e;
    e.slope = sxy / sxx;
    e.intercept = my - e.slope * mx;
    if (!(e.slope < 0)) throw error(errc::insufficient_trials, "tail fit is not decaying");
    e.t = (std::log(target) - e.intercept) / e.slope;
    e.fit_from = lo;
    e.fit_to = static_cast<std::size_t>(xs.back());
    return e;
  }

  /// CSV with columns t,survival_probability for t = 0..max observed.
  std::string to_csv() const {
    std::ostringstream out;
    out << "t,survival_probability\n";
    const std::size_t hi = samples_.empty() ? 0 : samples_.back();
    for (std::size_t t = 0; t <= hi; ++t) out << t << ',' << survival(t) << '\n';
    return out.str();
  }

 private:
  std::vector<std::size_t> samples_;
  std::size_t censored_;
};

using adversary_factory = std::function<adversary_ptr(std::uint64_t trial_seed)>;

/// Runs `trials` independent floods; trial i uses derive_trial_seed(seed, i).
inline empirical_cdf estimate_tail(comm_model model, const adversary_factory& make_adversary,
                                   const std::vector<node_id>& sources, std::size_t n, const flood_options& opt,
                                   std::size_t trials, std::uint64_t seed, std::size_t max_rounds) {
  if (trials == 0) throw error(errc::insufficient_trials, "at least one trial required");
  std::vector<std::size_t> samples;
  std::size_t censored = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const std::uint64_t ts = derive_trial_seed(seed, i);
    auto adv = make_adversary(ts);
    auto rng = make_stream(ts, stream_purpose::protocol);
    const auto r = faulty_flood(model, *adv, sources, n, opt, rng, max_rounds, ts);
    if (r.cover_time)
      samples.push_back(*r.cover_time);
    else
      ++censored;
  }
  return empirical_cdf(std::move(samples), censored);
}

}  // namespace rlnc
