#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "rlnc/error.hpp"
#include "rlnc/random.hpp"

namespace rlnc {

/// Neumaier-compensated running sum.
class compensated_sum {
 public:
  void add(long double x) noexcept {
    const long double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      c_ += (sum_ - t) + x;
    else
      c_ += (x - t) + sum_;
    sum_ = t;
  }
  long double value() const noexcept { return sum_ + c_; }

 private:
  long double sum_ = 0;
  long double c_ = 0;
};

struct tail_probability {
  long double value = 0;
  /// Natural log of value; finite even when value underflows.
  long double log_value = 0;
  /// Bound on the relative error of value.
  double relative_error = 0;
};

/// P[at least t - T failures among t independent trials], failure
/// probability p each: sum over i >= t - T of C(t, i) p^i (1-p)^(t-i).
inline tail_probability negbin_tail_exact(std::uint64_t t, std::uint64_t T, double p) {
  if (T > t) throw error(errc::domain_error, "need T <= t");
  if (!(p > 0 && p < 1)) throw error(errc::domain_error, "need 0 < p < 1");
  const long double lp = std::log(static_cast<long double>(p));
  const long double lq = std::log1p(-static_cast<long double>(p));
  const auto lgt = std::lgamma(static_cast<long double>(t) + 1);
  std::vector<long double> logs;
  long double top = -std::numeric_limits<long double>::infinity();
  for (std::uint64_t i = t - T; i <= t; ++i) {
    const auto li = static_cast<long double>(i);
    const long double l = lgt - std::lgamma(li + 1) - std::lgamma(static_cast<long double>(t - i) + 1) + li * lp +
                          static_cast<long double>(t - i) * lq;
    logs.push_back(l);
    top = std::max(top, l);
  }
  compensated_sum s;
  for (auto l : logs) s.add(std::exp(l - top));
  tail_probability r;
  r.log_value = top + std::log(s.value());
  r.value = std::exp(r.log_value);
  // lgamma and exp each contribute a few ulps per term
  r.relative_error = static_cast<double>(64 * std::numeric_limits<long double>::epsilon() *
                                         (1 + std::fabs(static_cast<long double>(r.log_value))));
  if (r.value >= 1) {
    r.value = 1;
    r.log_value = 0;
  }
  return r;
}

/// Round budget (ln q / ln(1/p)) k + C T + d. The coefficient is 1 at
/// p = 1/q and grows as the per-round failure probability p rises.
inline double pipelining_rounds(double k, double T, double p, double q, double d, double C = 8.0) {
  if (!(p > 0) || p >= 1) throw error(errc::domain_error, "need 0 < p < 1");
  if (q < 2) throw error(errc::domain_error, "need q >= 2");
  if (k < 0 || T < 0 || d < 0) throw error(errc::domain_error, "k, T and d must be non-negative");
  const double coefficient = std::log(q) / -std::log(p);
  return coefficient * k + C * T + d;
}

struct pull_constants {
  double lower = 0;
  double upper = 0;
};

/// Leading constants (time / k) for PULL when every message starts at i
/// nodes: the information-theoretic lower bound and the proof's upper bound.
inline pull_constants worst_case_pull_constants(double i, double q = 2) {
  if (i < 1) throw error(errc::domain_error, "need i >= 1");
  if (q < 2) throw error(errc::domain_error, "need q >= 2");
  const double miss = std::exp(-i);
  pull_constants c;
  c.lower = 1.0 / (1.0 - miss);
  c.upper = std::log(q) / -std::log(miss + (1.0 - miss) / q);
  return c;
}

struct bernoulli_bound_result {
  double empirical = 0;
  double bound = 0;
  double sigma = 0;
  std::size_t trials = 0;
  bool pass = false;
};

/// Monte Carlo estimate of P[sum w_j X_j <= (1 - p)/4 * sum w_j] with
/// independent X_j, P[X_j = 0] = p; passes if the estimate is at most
/// p + 3 sigma.
template <class Rng>
bernoulli_bound_result weighted_bernoulli_bound_check(const std::vector<double>& weights, double p, std::size_t trials,
                                                      Rng& rng) {
  if (weights.empty()) throw error(errc::empty_weights, "no weights");
  for (double w : weights)
    if (!(w > 0)) throw error(errc::domain_error, "weights must be positive");
  if (!(p > 0) || p > 0.5) throw error(errc::domain_error, "need 0 < p <= 1/2");
  if (trials == 0) throw error(errc::insufficient_trials, "need at least one trial");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double threshold = 0.25 * (1 - p) * total;
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    double s = 0;
    for (double w : weights)
      if (!bernoulli(rng, p)) s += w;
    hits += s <= threshold;
  }
  bernoulli_bound_result r;
  r.trials = trials;
  r.empirical = static_cast<double>(hits) / static_cast<double>(trials);
  r.bound = p;
  r.sigma = std::sqrt(p * (1 - p) / static_cast<double>(trials));
  r.pass = r.empirical <= p + 3 * r.sigma;
  return r;
}

struct lemma7_point {
  std::uint64_t k = 0;
  std::uint64_t T = 0;
  double p = 0;
  std::uint64_t t = 0;
  long double log_tail = 0;
  long double log_bound = 0;  // k ln p
  /// -ln p >= ln t holds at this point.
  bool in_regime = false;
  bool pass = false;
};

/// t from the fixed point t = k + T + (T + 1) ln t / ln(1/p), rounded up.
inline std::uint64_t lemma7_trials(std::uint64_t k, std::uint64_t T, double p) {
  if (!(p > 0 && p < 1)) throw error(errc::domain_error, "need 0 < p < 1");
  const double a = static_cast<double>(k + T);
  const double b = static_cast<double>(T + 1) / -std::log(p);
  double t = std::max(a, 1.0);
  for (int it = 0; it < 200; ++it) {
    const double next = a + b * std::log(t);
    if (std::fabs(next - t) < 1e-12) break;
    t = next;
  }
  return static_cast<std::uint64_t>(std::ceil(t - 1e-9));
}

/// Exact tail versus p^k at the proof's t, for every grid point.
inline std::vector<lemma7_point> lemma7_grid(const std::vector<std::uint64_t>& ks, const std::vector<std::uint64_t>& Ts,
                                             const std::vector<double>& ps) {
  std::vector<lemma7_point> out;
  for (auto k : ks)
    for (auto T : Ts)
      for (double p : ps) {
        lemma7_point pt;
        pt.k = k;
        pt.T = T;
        pt.p = p;
        pt.t = lemma7_trials(k, T, p);
        pt.in_regime = -std::log(p) >= std::log(static_cast<double>(pt.t));
        const auto tail = negbin_tail_exact(pt.t, T, p);
        pt.log_tail = tail.log_value;
        pt.log_bound = static_cast<long double>(k) * std::log(static_cast<long double>(p));
        pt.pass = pt.log_tail <= pt.log_bound + std::log1p(static_cast<long double>(tail.relative_error));
        out.push_back(pt);
      }
  return out;
}

}  // namespace rlnc
