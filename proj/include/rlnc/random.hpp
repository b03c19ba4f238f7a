#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace rlnc {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// The 64-bit key selects a trial, the upper half of the 128-bit counter
/// selects a stream within it, and the lower half counts blocks. Streams with
/// different (key, stream) pairs never overlap, which is what makes per-trial
/// and per-purpose randomness independent of scheduling.
class philox4x32 {
 public:
  using result_type = std::uint64_t;
  static constexpr std::string_view algorithm = "philox4x32-10";

  explicit philox4x32(std::uint64_t key = 0, std::uint64_t stream = 0) noexcept
      : key_(key), stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (buffered_ == 0) {
      block_ = block(next_block_++);
      buffered_ = 2;
    }
    --buffered_;
    ++consumed_;
    const std::size_t i = buffered_ == 1 ? 0 : 2;
    return (static_cast<std::uint64_t>(block_[i + 1]) << 32) | block_[i];
  }

  /// Raw output block for a counter value; does not advance the engine.
  std::array<std::uint32_t, 4> block(std::uint64_t index) const noexcept {
    std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(index),
                                     static_cast<std::uint32_t>(index >> 32),
                                     static_cast<std::uint32_t>(stream_),
                                     static_cast<std::uint32_t>(stream_ >> 32)};
    std::array<std::uint32_t, 2> k{static_cast<std::uint32_t>(key_),
                                   static_cast<std::uint32_t>(key_ >> 32)};
    return bijection(ctr, k);
  }

  static std::array<std::uint32_t, 4> bijection(std::array<std::uint32_t, 4> ctr,
                                                std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t m0 = 0xD2511F53u;
    constexpr std::uint32_t m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u;
    constexpr std::uint32_t w1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        key[0] += w0;
        key[1] += w1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t stream() const noexcept { return stream_; }
  /// Number of 64-bit outputs drawn so far.
  std::uint64_t consumed() const noexcept { return consumed_; }

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t next_block_ = 0;
  std::uint64_t consumed_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int buffered_ = 0;
};

/// Stream purposes inside one trial.
enum class stream_purpose : std::uint64_t {
  protocol = 0,
  adversary = 1,
  initialization = 2,
  oracle = 3,
};

/// Per-trial seed: a pure function of (seed, trial index).
inline std::uint64_t derive_trial_seed(std::uint64_t seed, std::uint64_t trial) noexcept {
  const philox4x32 root(seed, 0xFFFFFFFFFFFFFFFFull);
  const auto b = root.block(trial);
  return (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
}

inline philox4x32 make_stream(std::uint64_t trial_seed, stream_purpose purpose) noexcept {
  return philox4x32(trial_seed, static_cast<std::uint64_t>(purpose));
}

/// Uniform integer in [0, bound) (Lemire's multiply-shift with rejection).
template <class Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Rng>
bool bernoulli(Rng& rng, double p) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return uniform01(rng) < p;
}

}  // namespace rlnc
