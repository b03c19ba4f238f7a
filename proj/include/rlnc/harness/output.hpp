#pragma once

#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlnc/harness/experiment.hpp"
#include "rlnc/random.hpp"

namespace rlnc {

inline constexpr const char* rng_algorithm = "philox4x32-10";
inline constexpr const char* raw_csv_header = "scenario_id,trial,seed,stopping_round,converged,innovative_total";
inline constexpr const char* aggregate_csv_header =
    "scenario_id,n,k,q,model,mean,median,p90,p99,stderr,trials,convergence_rate";

/// Shortest round-trippable text; empty for NaN.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "";
  std::ostringstream out;
  out << std::setprecision(17) << x;
  double back = 0;
  for (int digits = 6; digits <= 17; ++digits) {
    std::ostringstream o;
    o << std::setprecision(digits) << x;
    std::istringstream(o.str()) >> back;
    if (back == x) return o.str();
  }
  return out.str();
}

/// One line per trial; stopping_round is empty when the run did not converge.
inline std::string raw_csv(const std::vector<experiment_result>& results) {
  std::ostringstream out;
  out << raw_csv_header << '\n';
  for (const auto& r : results)
    for (const auto& t : r.records) {
      out << r.config.scenario_id << ',' << t.trial << ',' << t.seed << ',';
      if (t.run.converged()) out << *t.run.stopping_round;
      out << ',' << (t.run.converged() ? 1 : 0) << ',' << t.run.innovative_total() << '\n';
    }
  return out.str();
}

inline std::string aggregate_row(const experiment_result& r) {
  const auto& c = r.config;
  const auto& s = r.stats;
  std::ostringstream out;
  out << c.scenario_id << ',' << c.n << ',' << c.k << ',' << c.q << ',' << to_string(c.model) << ','
      << format_number(s.mean) << ',' << format_number(s.median) << ',' << format_number(s.p90) << ','
      << format_number(s.p99) << ',' << format_number(s.stderr_mean) << ',' << s.trials << ','
      << format_number(s.convergence_rate);
  return out.str();
}

inline std::string aggregate_csv(const std::vector<experiment_result>& results) {
  std::ostringstream out;
  out << aggregate_csv_header << '\n';
  for (const auto& r : results) out << aggregate_row(r) << '\n';
  return out.str();
}

namespace detail {

inline nlohmann::json number_or_null(double x) { return std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x); }

inline nlohmann::json stats_json(const stopping_stats& s) {
  return {{"mean", number_or_null(s.mean)},     {"median", number_or_null(s.median)},
          {"p90", number_or_null(s.p90)},       {"p99", number_or_null(s.p99)},
          {"min", number_or_null(s.min)},       {"max", number_or_null(s.max)},
          {"stderr", number_or_null(s.stderr_mean)}, {"trials", s.trials},
          {"converged", s.converged},           {"convergence_rate", s.convergence_rate}};
}

}  // namespace detail

inline nlohmann::json config_json(const scenario_config& c) {
  static const char* inits[] = {"single_source", "one_per_node", "spread", "explicit"};
  static const char* transfers[] = {"push", "pull", "exchange"};
  return {{"scenario_id", c.scenario_id},
          {"n", c.n},
          {"k", c.k},
          {"q", c.q},
          {"l", c.l},
          {"comm_model", std::string(to_string(c.model))},
          {"graph", c.graph},
          {"graph_param", c.graph_param},
          {"graph_file", c.graph_file},
          {"transfer", transfers[static_cast<int>(c.transfer)]},
          {"adversary", c.adversary},
          {"adversary_p", c.adversary_p},
          {"adversary_dir", c.adversary_dir},
          {"adversary_dual", c.adversary_dual},
          {"require_connected", c.require_connected},
          {"init", inits[static_cast<int>(c.init)]},
          {"init_source", c.init_source},
          {"init_spread", c.init_spread},
          {"init_map", c.init_map},
          {"trials", c.trials},
          {"seed", c.seed},
          {"max_rounds", c.max_rounds},
          {"delta", c.delta},
          {"pull_sampling", c.pull == pull_sampling::shared ? "shared" : "independent"},
          {"async_broadcast", c.async_broadcast == async_broadcast_selection::single_node ? "single_node" : "bernoulli"},
          {"time_scale", c.time_scale},
          {"tracked_duals", c.tracked_duals}};
}

/// Full result including per-trial records and time-scaled statistics.
inline nlohmann::json result_json(const experiment_result& r) {
  nlohmann::json j;
  j["rng"] = rng_algorithm;
  j["config"] = config_json(r.config);
  j["max_rounds"] = r.max_rounds;
  if (r.budget) {
    j["budget"] = {{"flood_cover_p99", r.budget->flood_cover},
                   {"flood_trials", r.budget->flood_trials},
                   {"flood_censored", r.budget->flood_censored}};
  }
  j["stats"] = detail::stats_json(r.stats);
  j["scaled_stats"] = detail::stats_json(r.stats.scaled(r.config.time_scale));
  auto& trials = j["trials"] = nlohmann::json::array();
  for (const auto& t : r.records) {
    nlohmann::json row{{"trial", t.trial},
                       {"seed", t.seed},
                       {"converged", t.run.converged()},
                       {"rounds_executed", t.run.rounds_executed},
                       {"innovative_total", t.run.innovative_total()},
                       {"transmissions", t.run.transmissions},
                       {"wall_seconds", t.wall_seconds}};
    row["stopping_round"] = t.run.converged() ? nlohmann::json(*t.run.stopping_round) : nlohmann::json(nullptr);
    auto& decode = row["decode_rounds"] = nlohmann::json::array();
    for (const auto& d : t.run.decode_rounds) decode.push_back(d ? nlohmann::json(*d) : nlohmann::json(nullptr));
    row["innovative_counts"] = t.run.innovative_counts;
    if (t.max_cover_round) row["max_cover_round"] = *t.max_cover_round;
    if (r.config.l > 0) row["payload_ok"] = t.payload_ok;
    trials.push_back(std::move(row));
  }
  return j;
}

}  // namespace rlnc
