#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rlnc {

enum class errc {
  not_prime_power,
  unsupported,
  division_by_zero,
  length_mismatch,
  index_out_of_range,
  not_full_rank,
  isolated_vertex,
  empty_graph,
  too_large_for_exact,
  size_mismatch,
  invalid_topology,
  model_topology_mismatch,
  zero_vector_tracked,
  insufficient_events,
  insufficient_trials,
  domain_error,
  empty_weights,
  config_error,
  parse_error,
};

constexpr std::string_view to_string(errc code) noexcept {
  switch (code) {
    case errc::not_prime_power: return "NotPrimePower";
    case errc::unsupported: return "Unsupported";
    case errc::division_by_zero: return "DivisionByZero";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::not_full_rank: return "NotFullRank";
    case errc::isolated_vertex: return "IsolatedVertex";
    case errc::empty_graph: return "EmptyGraph";
    case errc::too_large_for_exact: return "TooLargeForExact";
    case errc::size_mismatch: return "SizeMismatch";
    case errc::invalid_topology: return "InvalidTopology";
    case errc::model_topology_mismatch: return "ModelTopologyMismatch";
    case errc::zero_vector_tracked: return "ZeroVectorTracked";
    case errc::insufficient_events: return "InsufficientEvents";
    case errc::insufficient_trials: return "InsufficientTrials";
    case errc::domain_error: return "DomainError";
    case errc::empty_weights: return "EmptyWeights";
    case errc::config_error: return "ConfigError";
    case errc::parse_error: return "ParseError";
  }
  return "Unknown";
}

// Single exception type for the library; the code identifies the failure.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace rlnc
