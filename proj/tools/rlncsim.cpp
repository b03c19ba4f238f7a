// rlncsim: command-line front end for scenarios, sweeps, flooding, graph
// metrics and validation suites.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "rlnc/rlnc.hpp"

using namespace rlnc;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_validation = 2;

const std::vector<std::string> config_keys{
    "scenario_id", "n",          "k",           "q",              "l",
    "comm_model",  "graph",      "graph_param", "graph_file",     "transfer",
    "adversary",   "adversary_p", "adversary_dir", "adversary_dual", "require_connected",
    "init",        "init_source", "init_spread", "init_map",      "trials",
    "seed",        "max_rounds", "delta",       "pull_sampling",  "async_broadcast",
    "time_scale",  "threads",    "tracked_duals", "trace_dir"};

/// --<key> flags for every config field; values override the file.
struct config_flags {
  std::string file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("config", file, "Scenario file (key = value lines)")->required()->check(CLI::ExistingFile);
    for (const auto& key : config_keys) {
      app->add_option_function<std::string>(
          "--" + key, [this, key](const std::string& v) { overrides[key] = v; }, "Override '" + key + "'");
    }
  }

  scenario_config load() const {
    auto c = load_config(file);
    for (const auto& [k, v] : overrides) set_config_value(c, k, v);
    return c;
  }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw error(errc::config_error, "cannot write " + path);
  out << text;
}

void print_summary(const experiment_result& r) {
  const auto s = r.stats.scaled(r.config.time_scale);
  std::cerr << r.config.scenario_id << ": rng " << rng_algorithm << ", max_rounds " << r.max_rounds;
  if (r.budget) std::cerr << " (flooding p99 cover " << r.budget->flood_cover << ")";
  std::cerr << ", converged " << r.stats.converged << "/" << r.stats.trials;
  if (r.stats.converged > 0) {
    std::cerr << ", mean " << format_number(r.stats.mean) << " rounds";
    if (r.config.time_scale != 1.0) std::cerr << " (scaled " << format_number(s.mean) << ")";
  }
  std::cerr << '\n';
}

struct output_flags {
  std::string raw;
  std::string json;

  void attach(CLI::App* app) {
    app->add_option("--raw", raw, "Write per-trial CSV here");
    app->add_option("--json", json, "Write the JSON mirror here");
  }

  void emit(const std::vector<experiment_result>& results) const {
    std::cout << aggregate_csv(results);
    if (!raw.empty()) write_file(raw, raw_csv(results));
    if (!json.empty()) {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& r : results) j.push_back(result_json(r));
      write_file(json, (results.size() == 1 ? j[0] : j).dump(2) + "\n");
    }
  }
};

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string v; std::getline(in, v, ',');) {
    const auto a = v.find_first_not_of(' '), b = v.find_last_not_of(' ');
    if (a != std::string::npos) out.push_back(v.substr(a, b - a + 1));
  }
  return out;
}

int run_flood(const scenario_config& c, const std::string& out_path) {
  validate_config(c);
  flood_options fo;
  fo.forward_prob = forward_probability(c.q);
  fo.comm = comm_options_of(c);
  const auto sources = holders_of(initial_holdings(c), 0);
  const adversary_factory factory = [&c](std::uint64_t ts) { return make_scenario_adversary(c, ts); };
  const std::size_t cap = c.max_rounds > 0 ? c.max_rounds : 100000;
  const auto cdf = estimate_tail(c.model, factory, sources, c.n, fo, c.trials, c.seed, cap);
  if (out_path.empty())
    std::cout << cdf.to_csv();
  else
    write_file(out_path, cdf.to_csv());
  std::cerr << c.scenario_id << ": rng " << rng_algorithm << ", forward probability " << fo.forward_prob << ", "
            << cdf.trials() - cdf.censored() << "/" << cdf.trials() << " covered within " << cap << " rounds\n";
  if (cdf.censored() == 0) std::cerr << "  mean cover time " << format_number(cdf.mean()) << '\n';
  for (double p : {0.5, 0.9, 0.99}) {
    try {
      std::cerr << "  quantile " << p << ": " << cdf.quantile(p) << '\n';
    } catch (const error& e) {
      std::cerr << "  quantile " << p << ": " << e.what() << '\n';
    }
  }
  const double target = c.delta * std::pow(static_cast<double>(c.q), -static_cast<double>(c.k));
  try {
    const auto e = cdf.extrapolate_tail(target);
    std::cerr << "  EXTRAPOLATED: P[cover > t] <= " << target << " at t ~ " << format_number(e.t)
              << " (log-linear fit over t in [" << e.fit_from << ", " << e.fit_to << "])\n";
  } catch (const error& e) {
    std::cerr << "  tail extrapolation unavailable: " << e.what() << '\n';
  }
  return exit_ok;
}

int run_metrics(const std::string& path, const std::string& induce, const std::string& method_name) {
  const auto g = load_edge_list(path);
  metric_method method = metric_method::automatic;
  if (method_name == "brute_force") method = metric_method::brute_force;
  else if (method_name == "structural") method = metric_method::structural;
  else if (method_name != "auto") throw error(errc::config_error, "method: expected auto, brute_force or structural");
  topology weighted = g;
  std::string weights_note = "edge-list weights";
  if (!g.weighted()) {
    transfer_model m = transfer_model::exchange;
    if (induce == "push") m = transfer_model::push;
    else if (induce == "pull") m = transfer_model::pull;
    else if (induce != "exchange") throw error(errc::config_error, "induce: expected push, pull or exchange");
    weighted = induce_weighted(g, m);
    weights_note = induce + "-induced weights";
  }
  auto show = [](const char* name, auto&& compute) {
    try {
      const rational r = compute();
      std::cout << name << " = " << format_number(static_cast<double>(r)) << " (exact " << r << ")\n";
    } catch (const error& e) {
      std::cout << name << " unavailable: " << e.what() << '\n';
    }
  };
  std::cout << "n = " << g.n() << ", edges = " << g.edges().size() << '\n';
  show("gamma", [&] { return min_cut_gamma_exact(weighted, method); });
  show("h", [&] { return isoperimetric_h_exact(g, method); });
  show("lambda", [&] { return conductance_lambda_exact(weighted, method); });
  std::cout << "gamma and lambda use " << weights_note << '\n';
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RLNC gossip simulator and analysis toolkit"};
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand("simulate", "Run one scenario");
  config_flags sim_cfg;
  output_flags sim_out;
  sim_cfg.attach(simulate);
  sim_out.attach(simulate);

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario for several values of one parameter");
  config_flags sweep_cfg;
  output_flags sweep_out;
  std::string axis, values;
  sweep_cfg.attach(sweep_cmd);
  sweep_out.attach(sweep_cmd);
  sweep_cmd->add_option("--axis", axis, "n, k, q or graph_param")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();

  auto* flood = app.add_subcommand("flood", "Faulty-flooding cover-time distribution of message 0");
  config_flags flood_cfg;
  std::string flood_out;
  flood_cfg.attach(flood);
  flood->add_option("--out", flood_out, "Write the CDF CSV here instead of stdout");

  auto* metrics = app.add_subcommand("metrics", "Print gamma, h and lambda of an edge-list graph");
  std::string graph_file, induce = "exchange", method = "auto";
  metrics->add_option("graph-file", graph_file, "Edge-list file")->required()->check(CLI::ExistingFile);
  metrics->add_option("--induce", induce, "Weights for unweighted graphs: push, pull or exchange");
  metrics->add_option("--method", method, "auto, brute_force or structural");

  auto* validate = app.add_subcommand("validate", "Run a validation suite and print a JSON report");
  std::string suite;
  validate_options vopt;
  std::string report_path;
  validate->add_option("suite", suite, "lemma1, theorem1_dominance, lemma9, lemma7 or decode_equivalence")
      ->required()
      ->check(CLI::IsMember(validation_suites()));
  validate->add_option("--seed", vopt.seed, "Base seed");
  validate->add_option("--scale", vopt.scale, "Multiplier on default trial counts")->check(CLI::PositiveNumber);
  validate->add_option("--threads", vopt.threads, "Worker threads")->check(CLI::PositiveNumber);
  validate->add_option("--out", report_path, "Also write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_ok : exit_config;
  }

  try {
    if (*simulate) {
      const auto r = run_experiment(sim_cfg.load());
      print_summary(r);
      sim_out.emit({r});
      return exit_ok;
    }
    if (*sweep_cmd) {
      const auto rows = rlnc::sweep(sweep_cfg.load(), axis, split_values(values));
      for (const auto& r : rows) print_summary(r);
      sweep_out.emit(rows);
      return exit_ok;
    }
    if (*flood) return run_flood(flood_cfg.load(), flood_out);
    if (*metrics) return run_metrics(graph_file, induce, method);
    if (*validate) {
      const auto rep = run_validation(suite, vopt);
      const auto text = rep.to_json().dump(2) + "\n";
      std::cout << text;
      if (!report_path.empty()) write_file(report_path, text);
      return rep.pass() ? exit_ok : exit_validation;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  }
  return exit_ok;
}
