#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rlnc/comm.hpp"
#include "rlnc/error.hpp"
#include "rlnc/field.hpp"
#include "rlnc/network.hpp"

namespace rlnc {

enum class init_mode { single_source, one_per_node, spread, explicit_map };

struct scenario_config {
  std::string scenario_id = "scenario";
  std::size_t n = 8;
  std::size_t k = 1;
  std::uint64_t q = 2;
  /// payload length; 0 = coefficients only
  std::size_t l = 0;
  comm_model model = comm_model::sync_push;

  /// complete|ring|line|star|hypercube|barbell|two_cliques_bridged|random_gnp|random_matching|file
  std::string graph = "complete";
  /// clique size (barbell), first clique size (two_cliques_bridged; 0 = n/2), edge probability (random_gnp)
  double graph_param = 0;
  std::string graph_file;
  /// push|pull|exchange: how AsyncSingleTransfer weights an unweighted graph
  transfer_model transfer = transfer_model::exchange;

  /// static|random_gnp|random_matching|two_clique_split|directory
  std::string adversary = "static";
  double adversary_p = 0.5;
  std::string adversary_dir;
  /// dual vector watched by two_clique_split: message index i means e_i
  std::size_t adversary_dual = 0;
  bool require_connected = false;

  init_mode init = init_mode::single_source;
  std::size_t init_source = 0;
  /// copies per message for spread init
  std::size_t init_spread = 1;
  /// explicit init: "node:msg,msg;node:msg"
  std::string init_map;

  std::size_t trials = 100;
  std::uint64_t seed = 1;
  /// 0 = derived from the pipelining budget
  std::size_t max_rounds = 0;
  double delta = 0.01;

  pull_sampling pull = pull_sampling::independent;
  async_broadcast_selection async_broadcast = async_broadcast_selection::bernoulli;
  /// multiplier applied to rounds when reporting scaled times
  double time_scale = 1.0;
  std::size_t threads = 1;

  /// none|auto: follow dual vectors during simulate runs
  std::string tracked_duals = "none";
  /// where per-trial knowledge traces go (needs tracked_duals = auto)
  std::string trace_dir;
};

namespace detail {

inline std::string trim_copy(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw error(errc::config_error, key + ": expected a non-negative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw error(errc::config_error, key + ": integer out of range '" + v + "'");
  }
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw error(errc::config_error, key + ": expected a number, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw error(errc::config_error, key + ": expected true or false, got '" + v + "'");
}

inline comm_model parse_model_name(const std::string& v) {
  static const std::map<std::string, comm_model> snake{
      {"sync_push", comm_model::sync_push},
      {"sync_pull", comm_model::sync_pull},
      {"sync_exchange", comm_model::sync_exchange},
      {"sync_broadcast", comm_model::sync_broadcast},
      {"async_single_transfer", comm_model::async_single_transfer},
      {"async_broadcast", comm_model::async_broadcast},
  };
  if (auto it = snake.find(v); it != snake.end()) return it->second;
  try {
    return parse_comm_model(v);
  } catch (const error&) {
    throw error(errc::config_error, "comm_model: unknown model '" + v + "'");
  }
}

}  // namespace detail

/// Applies one `key = value` setting.
inline void set_config_value(scenario_config& c, const std::string& key, const std::string& value) {
  using namespace detail;
  const std::string v = trim_copy(value);
  if (key == "scenario_id") c.scenario_id = v;
  else if (key == "n") c.n = parse_uint(key, v);
  else if (key == "k") c.k = parse_uint(key, v);
  else if (key == "q") c.q = parse_uint(key, v);
  else if (key == "l") c.l = parse_uint(key, v);
  else if (key == "comm_model") c.model = parse_model_name(v);
  else if (key == "graph") c.graph = v;
  else if (key == "graph_param") c.graph_param = parse_double(key, v);
  else if (key == "graph_file") c.graph_file = v;
  else if (key == "transfer") {
    if (v == "push") c.transfer = transfer_model::push;
    else if (v == "pull") c.transfer = transfer_model::pull;
    else if (v == "exchange") c.transfer = transfer_model::exchange;
    else throw error(errc::config_error, "transfer: expected push, pull or exchange, got '" + v + "'");
  } else if (key == "adversary") c.adversary = v;
  else if (key == "adversary_p") c.adversary_p = parse_double(key, v);
  else if (key == "adversary_dir") c.adversary_dir = v;
  else if (key == "adversary_dual") c.adversary_dual = parse_uint(key, v);
  else if (key == "require_connected") c.require_connected = parse_bool(key, v);
  else if (key == "init") {
    if (v == "single_source") c.init = init_mode::single_source;
    else if (v == "one_per_node") c.init = init_mode::one_per_node;
    else if (v == "spread") c.init = init_mode::spread;
    else if (v == "explicit") c.init = init_mode::explicit_map;
    else throw error(errc::config_error, "init: expected single_source, one_per_node, spread or explicit, got '" + v + "'");
  } else if (key == "init_source") c.init_source = parse_uint(key, v);
  else if (key == "init_spread") c.init_spread = parse_uint(key, v);
  else if (key == "init_map") c.init_map = v;
  else if (key == "trials") c.trials = parse_uint(key, v);
  else if (key == "seed") c.seed = parse_uint(key, v);
  else if (key == "max_rounds") c.max_rounds = parse_uint(key, v);
  else if (key == "delta") c.delta = parse_double(key, v);
  else if (key == "pull_sampling") {
    if (v == "independent") c.pull = pull_sampling::independent;
    else if (v == "shared") c.pull = pull_sampling::shared;
    else throw error(errc::config_error, "pull_sampling: expected independent or shared, got '" + v + "'");
  } else if (key == "async_broadcast") {
    if (v == "bernoulli") c.async_broadcast = async_broadcast_selection::bernoulli;
    else if (v == "single_node") c.async_broadcast = async_broadcast_selection::single_node;
    else throw error(errc::config_error, "async_broadcast: expected bernoulli or single_node, got '" + v + "'");
  } else if (key == "time_scale") c.time_scale = parse_double(key, v);
  else if (key == "threads") c.threads = parse_uint(key, v);
  else if (key == "tracked_duals") c.tracked_duals = v;
  else if (key == "trace_dir") c.trace_dir = v;
  else throw error(errc::config_error, "unknown key '" + key + "'");
}

/// Parses `key = value` lines; '#' starts a comment.
inline void apply_config_text(scenario_config& c, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim_copy(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw error(errc::config_error, "line " + std::to_string(line_no) + ": expected key = value");
    try {
      set_config_value(c, detail::trim_copy(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const error& e) {
      throw error(errc::config_error, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

inline scenario_config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::config_error, "cannot open config " + path);
  scenario_config c;
  apply_config_text(c, in);
  return c;
}

/// Explicit init map "node:msg,msg;node:msg" as node -> message indices.
inline std::map<std::size_t, std::vector<std::size_t>> parse_init_map(const std::string& text) {
  std::map<std::size_t, std::vector<std::size_t>> out;
  std::stringstream groups(text);
  for (std::string group; std::getline(groups, group, ';');) {
    group = detail::trim_copy(group);
    if (group.empty()) continue;
    const auto colon = group.find(':');
    if (colon == std::string::npos) throw error(errc::config_error, "init_map: expected node:msg,... in '" + group + "'");
    const auto node = detail::parse_uint("init_map", detail::trim_copy(group.substr(0, colon)));
    std::stringstream msgs(group.substr(colon + 1));
    for (std::string m; std::getline(msgs, m, ',');) {
      m = detail::trim_copy(m);
      if (!m.empty()) out[node].push_back(detail::parse_uint("init_map", m));
    }
  }
  return out;
}

/// Field-level checks; throws ConfigError naming the offending key.
inline void validate_config(const scenario_config& c) {
  auto fail = [](const std::string& key, const std::string& why) { throw error(errc::config_error, key + ": " + why); };
  if (c.n < 1) fail("n", "must be at least 1");
  if (c.k < 1) fail("k", "must be at least 1");
  try {
    make_field(c.q);
  } catch (const error& e) {
    fail("q", e.what());
  }
  if (c.trials < 1) fail("trials", "must be at least 1");
  if (c.threads < 1) fail("threads", "must be at least 1");
  if (!(c.delta > 0 && c.delta < 1)) fail("delta", "must be in (0, 1)");
  if (!(c.time_scale > 0)) fail("time_scale", "must be positive");
  switch (c.init) {
    case init_mode::single_source:
      if (c.init_source >= c.n) fail("init_source", "must be a node index below n");
      break;
    case init_mode::one_per_node:
      if (c.k > c.n) fail("k", "one_per_node needs k <= n");
      break;
    case init_mode::spread:
      if (c.init_spread < 1 || c.init_spread > c.n) fail("init_spread", "must be in [1, n]");
      break;
    case init_mode::explicit_map: {
      const auto m = parse_init_map(c.init_map);
      if (m.empty()) fail("init_map", "explicit init needs at least one entry");
      std::vector<char> seen(c.k, 0);
      for (const auto& [node, msgs] : m) {
        if (node >= c.n) fail("init_map", "node " + std::to_string(node) + " >= n");
        for (auto i : msgs) {
          if (i >= c.k) fail("init_map", "message " + std::to_string(i) + " >= k");
          seen[i] = 1;
        }
      }
      for (std::size_t i = 0; i < c.k; ++i)
        if (!seen[i]) fail("init_map", "message " + std::to_string(i) + " is held by no node");
      break;
    }
  }
  static const std::vector<std::string> graphs{"complete", "ring",   "line",       "star",           "hypercube",
                                               "barbell",  "two_cliques_bridged", "random_gnp", "random_matching", "file"};
  if (std::find(graphs.begin(), graphs.end(), c.graph) == graphs.end()) fail("graph", "unknown family '" + c.graph + "'");
  if (c.graph == "file" && c.graph_file.empty()) fail("graph_file", "required when graph = file");
  if (c.graph == "hypercube" && (c.n < 2 || (c.n & (c.n - 1)) != 0)) fail("n", "hypercube needs n a power of two");
  if (c.graph == "barbell" && c.n % 2 != 0) fail("n", "barbell needs even n");
  if (c.graph == "ring" && c.n < 3) fail("n", "ring needs n >= 3");
  if (c.graph == "random_gnp" && !(c.graph_param >= 0 && c.graph_param <= 1)) fail("graph_param", "edge probability must be in [0, 1]");
  static const std::vector<std::string> advs{"static", "random_gnp", "random_matching", "two_clique_split", "directory"};
  if (std::find(advs.begin(), advs.end(), c.adversary) == advs.end())
    fail("adversary", "unknown adversary '" + c.adversary + "'");
  if (c.adversary == "directory" && c.adversary_dir.empty()) fail("adversary_dir", "required for directory adversary");
  if (c.adversary == "two_clique_split" && c.adversary_dual >= c.k) fail("adversary_dual", "must be below k");
  if (c.adversary == "random_gnp" && !(c.adversary_p >= 0 && c.adversary_p <= 1)) fail("adversary_p", "must be in [0, 1]");
  if (c.tracked_duals != "none" && c.tracked_duals != "auto") fail("tracked_duals", "expected none or auto");
  if (!c.trace_dir.empty() && c.tracked_duals == "none") fail("trace_dir", "needs tracked_duals = auto");
  if (c.l > 0 && c.k > 4096) fail("l", "payload mode is meant for small k");
}

}  // namespace rlnc
