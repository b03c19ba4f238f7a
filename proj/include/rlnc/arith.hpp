#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rlnc/field.hpp"

namespace rlnc {

/// Vector arithmetic over GF(2) on bit-packed 64-bit words.
class gf2_arith {
 public:
  using word_type = std::uint64_t;
  static constexpr bool packed = true;

  gf2_arith() : field_(make_field(2)) {}

  const field_spec& field() const noexcept { return field_; }
  std::uint64_t order() const noexcept { return 2; }
  static constexpr std::size_t storage_size(std::size_t len) noexcept { return (len + 63) / 64; }

  static element_t get(std::span<const word_type> v, std::size_t i) noexcept {
    return static_cast<element_t>((v[i >> 6] >> (i & 63)) & 1u);
  }
  static void set(std::span<word_type> v, std::size_t i, element_t x) noexcept {
    const word_type mask = word_type{1} << (i & 63);
    if (x & 1u)
      v[i >> 6] |= mask;
    else
      v[i >> 6] &= ~mask;
  }

  /// dst += c * src
  static void axpy(std::span<word_type> dst, element_t c, std::span<const word_type> src) noexcept {
    if ((c & 1u) == 0) return;
    word_type* d = dst.data();
    const word_type* s = src.data();
    const std::size_t n = dst.size();
    for (std::size_t i = 0; i < n; ++i) d[i] ^= s[i];
  }
  static void scale(std::span<word_type> v, element_t c) noexcept {
    if ((c & 1u) == 0) std::fill(v.begin(), v.end(), word_type{0});
  }
  static element_t dot(std::span<const word_type> u, std::span<const word_type> v) noexcept {
    word_type acc = 0;
    for (std::size_t i = 0; i < u.size(); ++i) acc ^= u[i] & v[i];
    return static_cast<element_t>(std::popcount(acc) & 1);
  }
  static bool is_zero(std::span<const word_type> v) noexcept {
    for (auto w : v)
      if (w) return false;
    return true;
  }
  static std::optional<std::size_t> leading(std::span<const word_type> v) noexcept {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i]) return i * 64 + static_cast<std::size_t>(std::countr_zero(v[i]));
    return std::nullopt;
  }
  static element_t neg(element_t a) noexcept { return a; }
  element_t inv(element_t a) const { return field_.inv(a); }
  template <class Rng>
  static element_t random(Rng& rng) {
    return static_cast<element_t>(rng() >> 63);
  }

 private:
  field_spec field_;
};

/// Vector arithmetic over a general F_q, one element per slot.
class fq_arith {
 public:
  using word_type = element_t;
  static constexpr bool packed = false;

  explicit fq_arith(field_spec f) : field_(std::move(f)) {}

  const field_spec& field() const noexcept { return field_; }
  std::uint64_t order() const noexcept { return field_.order(); }
  static constexpr std::size_t storage_size(std::size_t len) noexcept { return len; }

  static element_t get(std::span<const word_type> v, std::size_t i) noexcept { return v[i]; }
  static void set(std::span<word_type> v, std::size_t i, element_t x) noexcept { v[i] = x; }

  void axpy(std::span<word_type> dst, element_t c, std::span<const word_type> src) const noexcept {
    if (c == 0) return;
    for (std::size_t i = 0; i < dst.size(); ++i) {
      if (src[i] != 0) dst[i] = field_.add(dst[i], field_.mul(c, src[i]));
    }
  }
  void scale(std::span<word_type> v, element_t c) const noexcept {
    for (auto& x : v) x = field_.mul(c, x);
  }
  element_t dot(std::span<const word_type> u, std::span<const word_type> v) const noexcept {
    element_t acc = 0;
    for (std::size_t i = 0; i < u.size(); ++i) acc = field_.add(acc, field_.mul(u[i], v[i]));
    return acc;
  }
  static bool is_zero(std::span<const word_type> v) noexcept {
    for (auto x : v)
      if (x) return false;
    return true;
  }
  static std::optional<std::size_t> leading(std::span<const word_type> v) noexcept {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i]) return i;
    return std::nullopt;
  }
  element_t neg(element_t a) const noexcept { return field_.neg(a); }
  element_t inv(element_t a) const { return field_.inv(a); }
  template <class Rng>
  element_t random(Rng& rng) const {
    return field_.random(rng);
  }

 private:
  field_spec field_;
};

template <class Arith>
std::vector<typename Arith::word_type> pack(const Arith&, std::span<const element_t> values) {
  std::vector<typename Arith::word_type> out(Arith::storage_size(values.size()), 0);
  for (std::size_t i = 0; i < values.size(); ++i) Arith::set(out, i, values[i]);
  return out;
}

template <class Arith>
std::vector<element_t> unpack(const Arith&, std::span<const typename Arith::word_type> storage, std::size_t len) {
  std::vector<element_t> out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = Arith::get(storage, i);
  return out;
}

}  // namespace rlnc
