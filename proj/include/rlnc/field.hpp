#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlnc/error.hpp"
#include "rlnc/random.hpp"

namespace rlnc {

/// Canonical representative of a field element. Prime fields use [0, q);
/// extension fields pack the polynomial-basis coefficients c_0 + c_1 p + ...
using element_t = std::uint32_t;

enum class field_kind { prime, binary_extension, prime_power };

namespace detail {

inline std::uint64_t mulmod64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod64(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1) r = mulmod64(r, b, m);
    b = mulmod64(b, b, m);
    e >>= 1;
  }
  return r;
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t x = powmod64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod64(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

/// b^e, saturating at 2^64 - 1.
inline std::uint64_t saturating_pow(std::uint64_t b, unsigned e) {
  unsigned __int128 r = 1;
  for (unsigned i = 0; i < e; ++i) {
    r *= b;
    if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

inline std::uint64_t integer_root(std::uint64_t n, unsigned d) {
  if (d == 1) return n;
  auto r = static_cast<std::uint64_t>(std::pow(static_cast<long double>(n), 1.0L / d));
  while (r > 0 && saturating_pow(r, d) > n) --r;
  while (saturating_pow(r + 1, d) <= n) ++r;
  return r;
}

/// Returns (p, d) with q = p^d and p prime, or nullopt.
inline std::optional<std::pair<std::uint64_t, unsigned>> prime_power_decomposition(std::uint64_t q) {
  if (q < 2) return std::nullopt;
  for (unsigned d = 63; d >= 1; --d) {
    const std::uint64_t r = integer_root(q, d);
    if (r >= 2 && saturating_pow(r, d) == q && is_prime(r)) return std::pair{r, d};
  }
  return std::nullopt;
}

inline std::vector<std::uint64_t> distinct_prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t f = 2; f * f <= n; ++f) {
    if (n % f == 0) {
      out.push_back(f);
      while (n % f == 0) n /= f;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

// Dense polynomials over F_p, coefficient i of x^i, no trailing zeros.
using poly = std::vector<std::uint32_t>;

inline void trim(poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline std::uint32_t inv_mod_prime(std::uint32_t a, std::uint32_t p) {
  return static_cast<std::uint32_t>(powmod64(a, p - 2, p));
}

/// Remainder of a modulo b (b nonzero) over F_p.
inline poly poly_mod(poly a, const poly& b, std::uint32_t p) {
  trim(a);
  const std::size_t db = b.size() - 1;
  const std::uint32_t lead_inv = inv_mod_prime(b.back(), p);
  while (a.size() >= b.size()) {
    const std::uint64_t factor = static_cast<std::uint64_t>(a.back()) * lead_inv % p;
    const std::size_t shift = a.size() - 1 - db;
    for (std::size_t i = 0; i <= db; ++i) {
      const std::uint64_t sub = factor * b[i] % p;
      a[shift + i] = static_cast<std::uint32_t>((a[shift + i] + p - sub) % p);
    }
    trim(a);
  }
  return a;
}

inline poly poly_from_code(std::uint64_t code, std::uint32_t p, unsigned len) {
  poly out(len, 0);
  for (unsigned i = 0; i < len; ++i) {
    out[i] = static_cast<std::uint32_t>(code % p);
    code /= p;
  }
  return out;
}

/// Irreducibility by exhaustive trial division with every monic polynomial
/// of degree 1..deg/2.
inline bool is_irreducible(const poly& f, std::uint32_t p) {
  const unsigned deg = static_cast<unsigned>(f.size() - 1);
  for (unsigned d = 1; d <= deg / 2; ++d) {
    const std::uint64_t count = saturating_pow(p, d);
    for (std::uint64_t code = 0; code < count; ++code) {
      poly g = poly_from_code(code, p, d);
      g.push_back(1);
      if (poly_mod(f, g, p).empty()) return false;
    }
  }
  return true;
}

/// Lexicographically smallest monic irreducible polynomial of the degree,
/// i.e. the one whose lower coefficients form the smallest base-p code.
inline poly smallest_irreducible(std::uint32_t p, unsigned degree) {
  const std::uint64_t count = saturating_pow(p, degree);
  for (std::uint64_t code = 0; code < count; ++code) {
    poly f = poly_from_code(code, p, degree);
    f.push_back(1);
    if (f[0] == 0) continue;  // divisible by x
    if (is_irreducible(f, p)) return f;
  }
  throw error(errc::unsupported, "no irreducible polynomial found");
}

struct extension_tables {
  std::vector<element_t> exp;   // size 2(q-1)
  std::vector<std::uint32_t> log;  // log[0] unused
  std::vector<std::uint32_t> zech;  // odd characteristic only; zech_none marks 1 + g^n = 0
  element_t minus_one = 0;
  element_t generator = 0;
};

inline constexpr std::uint32_t zech_none = 0xFFFFFFFFu;

}  // namespace detail

/// An immutable description of F_q with its arithmetic.
class field_spec {
 public:
  std::uint64_t order() const noexcept { return q_; }
  std::uint32_t characteristic() const noexcept { return p_; }
  unsigned degree() const noexcept { return degree_; }
  field_kind kind() const noexcept { return kind_; }
  /// Monic modulus, coefficient i of x^i. Empty for prime fields.
  const std::vector<std::uint32_t>& modulus() const noexcept { return modulus_; }
  /// Modulus as a bit pattern (binary extensions only).
  std::uint32_t modulus_bits() const noexcept {
    std::uint32_t bits = 0;
    for (std::size_t i = 0; i < modulus_.size(); ++i) bits |= modulus_[i] << i;
    return bits;
  }
  element_t generator() const noexcept { return tables_ ? tables_->generator : prime_generator(); }

  bool contains(element_t a) const noexcept { return a < q_; }

  element_t add(element_t a, element_t b) const noexcept {
    switch (kind_) {
      case field_kind::prime: {
        const std::uint64_t s = static_cast<std::uint64_t>(a) + b;
        return static_cast<element_t>(s >= q_ ? s - q_ : s);
      }
      case field_kind::binary_extension: return a ^ b;
      case field_kind::prime_power: return zech_add(a, b);
    }
    return 0;
  }

  element_t neg(element_t a) const noexcept {
    switch (kind_) {
      case field_kind::prime: return a == 0 ? 0 : static_cast<element_t>(q_ - a);
      case field_kind::binary_extension: return a;
      case field_kind::prime_power: return mul(a, tables_->minus_one);
    }
    return 0;
  }

  element_t sub(element_t a, element_t b) const noexcept { return add(a, neg(b)); }

  element_t mul(element_t a, element_t b) const noexcept {
    if (kind_ == field_kind::prime) return static_cast<element_t>(static_cast<std::uint64_t>(a) * b % q_);
    if (a == 0 || b == 0) return 0;
    return tables_->exp[tables_->log[a] + tables_->log[b]];
  }

  element_t inv(element_t a) const {
    if (a == 0) throw error(errc::division_by_zero, "inverse of zero");
    if (kind_ == field_kind::prime) return prime_inverse(a);
    return tables_->exp[(q_ - 1) - tables_->log[a]];
  }

  element_t div(element_t a, element_t b) const { return mul(a, inv(b)); }

  element_t pow(element_t a, std::uint64_t e) const noexcept {
    element_t r = 1;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }

  template <class Rng>
  element_t random(Rng& rng) const {
    return static_cast<element_t>(uniform_below(rng, q_));
  }

  std::string describe() const {
    std::string s = "GF(" + std::to_string(q_) + ")";
    if (kind_ != field_kind::prime) {
      s += " mod ";
      bool first = true;
      for (std::size_t i = modulus_.size(); i-- > 0;) {
        if (modulus_[i] == 0) continue;
        if (!first) s += " + ";
        first = false;
        if (modulus_[i] != 1 || i == 0) s += std::to_string(modulus_[i]);
        if (i >= 1) s += "x";
        if (i >= 2) s += "^" + std::to_string(i);
      }
    }
    return s;
  }

  friend field_spec make_field(std::uint64_t q);

 private:
  field_spec() = default;

  element_t prime_inverse(element_t a) const noexcept {
    // extended Euclid on (a, q)
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = static_cast<std::int64_t>(q_), new_r = a;
    while (new_r != 0) {
      const std::int64_t quotient = r / new_r;
      std::int64_t tmp = t - quotient * new_t;
      t = new_t;
      new_t = tmp;
      tmp = r - quotient * new_r;
      r = new_r;
      new_r = tmp;
    }
    if (t < 0) t += static_cast<std::int64_t>(q_);
    return static_cast<element_t>(t);
  }

  element_t prime_generator() const noexcept {
    const auto factors = detail::distinct_prime_factors(q_ - 1);
    for (std::uint64_t g = 1; g < q_; ++g) {
      bool ok = true;
      for (auto f : factors) {
        if (detail::powmod64(g, (q_ - 1) / f, q_) == 1) {
          ok = false;
          break;
        }
      }
      if (ok) return static_cast<element_t>(g);
    }
    return 1;
  }

  element_t zech_add(element_t a, element_t b) const noexcept {
    if (a == 0) return b;
    if (b == 0) return a;
    const auto& t = *tables_;
    const std::uint32_t la = t.log[a];
    const std::uint32_t lb = t.log[b];
    const std::uint32_t n = lb >= la ? lb - la : static_cast<std::uint32_t>(lb + (q_ - 1) - la);
    const std::uint32_t z = t.zech[n];
    if (z == detail::zech_none) return 0;
    return t.exp[la + z];
  }

  std::uint64_t q_ = 2;
  std::uint32_t p_ = 2;
  unsigned degree_ = 1;
  field_kind kind_ = field_kind::prime;
  std::vector<std::uint32_t> modulus_;
  std::shared_ptr<const detail::extension_tables> tables_;
};

namespace detail {

/// Polynomial-basis product of two packed elements modulo f, used only while
/// building tables.
inline element_t slow_mul(element_t a, element_t b, const poly& f, std::uint32_t p) {
  const unsigned d = static_cast<unsigned>(f.size() - 1);
  const poly pa = poly_from_code(a, p, d);
  const poly pb = poly_from_code(b, p, d);
  poly prod(2 * d, 0);
  for (unsigned i = 0; i < d; ++i) {
    if (pa[i] == 0) continue;
    for (unsigned j = 0; j < d; ++j) {
      prod[i + j] = static_cast<std::uint32_t>((prod[i + j] + static_cast<std::uint64_t>(pa[i]) * pb[j]) % p);
    }
  }
  const poly r = poly_mod(prod, f, p);
  element_t code = 0;
  for (std::size_t i = r.size(); i-- > 0;) code = code * p + r[i];
  return code;
}

inline element_t slow_pow(element_t a, std::uint64_t e, const poly& f, std::uint32_t p) {
  element_t r = 1;
  while (e) {
    if (e & 1) r = slow_mul(r, a, f, p);
    a = slow_mul(a, a, f, p);
    e >>= 1;
  }
  return r;
}

}  // namespace detail

/// Builds F_q. Primes below 2^31 use direct modular arithmetic; 2^d (d <= 16)
/// and odd p^d (q <= 2^16) use log/exp tables over the lexicographically
/// smallest monic irreducible modulus.
inline field_spec make_field(std::uint64_t q) {
  if (q < 2) throw error(errc::domain_error, "field order must be at least 2");
  const auto pd = detail::prime_power_decomposition(q);
  if (!pd) throw error(errc::not_prime_power, std::to_string(q) + " is not a prime power");
  const auto [p, d] = *pd;

  field_spec f;
  f.q_ = q;
  f.p_ = static_cast<std::uint32_t>(p);
  f.degree_ = d;
  if (d == 1) {
    if (q >= (1ull << 31)) throw error(errc::unsupported, "prime fields are limited to q < 2^31");
    f.kind_ = field_kind::prime;
    return f;
  }
  if (p == 2 && d > 16) throw error(errc::unsupported, "binary extensions are limited to 2^16");
  if (p != 2 && q > (1ull << 16)) throw error(errc::unsupported, "odd prime powers are limited to q <= 2^16");

  f.kind_ = p == 2 ? field_kind::binary_extension : field_kind::prime_power;
  const detail::poly modulus = detail::smallest_irreducible(f.p_, d);
  f.modulus_ = modulus;

  auto tables = std::make_shared<detail::extension_tables>();
  const std::uint64_t group = q - 1;
  const auto factors = detail::distinct_prime_factors(group);
  element_t g = 0;
  for (element_t cand = 2; cand < q; ++cand) {
    bool primitive = true;
    for (auto r : factors) {
      if (detail::slow_pow(cand, group / r, modulus, f.p_) == 1) {
        primitive = false;
        break;
      }
    }
    if (primitive) {
      g = cand;
      break;
    }
  }
  if (g == 0) throw error(errc::unsupported, "no primitive element found");
  tables->generator = g;
  tables->exp.assign(2 * group, 0);
  tables->log.assign(q, 0);
  element_t x = 1;
  for (std::uint64_t i = 0; i < group; ++i) {
    tables->exp[i] = x;
    tables->log[x] = static_cast<std::uint32_t>(i);
    x = detail::slow_mul(x, g, modulus, f.p_);
  }
  for (std::uint64_t i = group; i < 2 * group; ++i) tables->exp[i] = tables->exp[i - group];

  if (f.kind_ == field_kind::prime_power) {
    tables->minus_one = tables->exp[group / 2];
    tables->zech.assign(group, detail::zech_none);
    for (std::uint64_t n = 0; n < group; ++n) {
      const element_t v = tables->exp[n];
      // adding 1 only touches the constant coefficient
      const element_t c0 = v % f.p_;
      const element_t one_plus = v - c0 + (c0 + 1) % f.p_;
      if (one_plus != 0) tables->zech[n] = tables->log[one_plus];
    }
  }
  f.tables_ = std::move(tables);
  return f;
}

/// Sum of u_i * v_i over the field.
inline element_t dot(const field_spec& f, std::span<const element_t> u, std::span<const element_t> v) {
  if (u.size() != v.size()) throw error(errc::length_mismatch, "dot of vectors with different lengths");
  element_t acc = 0;
  for (std::size_t i = 0; i < u.size(); ++i) acc = f.add(acc, f.mul(u[i], v[i]));
  return acc;
}

}  // namespace rlnc
