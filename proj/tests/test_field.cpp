#include <gtest/gtest.h>

#include <vector>

#include "rlnc/arith.hpp"
#include "rlnc/field.hpp"
#include "rlnc/random.hpp"

using rlnc::element_t;
using rlnc::errc;
using rlnc::make_field;

namespace {

errc code_of(auto&& f) {
  try {
    f();
  } catch (const rlnc::error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return errc::unsupported;
}

// Schoolbook product of base-p digit polynomials reduced by the monic
// modulus; independent of the table construction.
element_t poly_mul_oracle(element_t a, element_t b, const std::vector<std::uint32_t>& modulus, std::uint32_t p) {
  const std::size_t d = modulus.size() - 1;
  std::vector<std::uint64_t> x(d), y(d), prod(2 * d, 0);
  for (std::size_t i = 0; i < d; ++i) {
    x[i] = a % p;
    a /= p;
    y[i] = b % p;
    b /= p;
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) prod[i + j] = (prod[i + j] + x[i] * y[j]) % p;
  for (std::size_t i = 2 * d - 1; i >= d; --i) {
    const std::uint64_t c = prod[i];
    if (c == 0) continue;
    for (std::size_t j = 0; j <= d; ++j) prod[i - d + j] = (prod[i - d + j] + (p - c) * modulus[j]) % p;
  }
  element_t out = 0;
  for (std::size_t i = d; i-- > 0;) out = out * p + static_cast<element_t>(prod[i]);
  return out;
}

}  // namespace

TEST(Field, ExamplesFromContract) {
  const auto f2 = make_field(2);
  EXPECT_EQ(f2.kind(), rlnc::field_kind::prime);
  EXPECT_EQ(f2.add(1, 1), 0u);
  EXPECT_EQ(f2.mul(1, 1), 1u);
  EXPECT_EQ(code_of([] { make_field(6); }), errc::not_prime_power);
  EXPECT_EQ(code_of([] { make_field(12); }), errc::not_prime_power);
  EXPECT_EQ(code_of([] { make_field(1); }), errc::domain_error);

  const auto f4 = make_field(4);
  EXPECT_EQ(f4.kind(), rlnc::field_kind::binary_extension);
  EXPECT_EQ(f4.modulus_bits(), 0b111u);  // x^2 + x + 1
  EXPECT_EQ(f4.mul(2, 2), 3u);            // x * x = x + 1
  for (element_t a = 0; a < 4; ++a) EXPECT_EQ(f4.add(a, a), 0u);

  const auto f5 = make_field(5);
  EXPECT_EQ(f5.mul(3, f5.inv(3)), 1u);
  EXPECT_EQ(code_of([&] { f5.inv(0); }), errc::division_by_zero);
}

TEST(Field, Limits) {
  EXPECT_NO_THROW(make_field(2147483647));  // 2^31 - 1
  EXPECT_EQ(code_of([] { make_field(2147483659ull); }), errc::unsupported);
  EXPECT_NO_THROW(make_field(1u << 16));
  EXPECT_EQ(code_of([] { make_field(1u << 17); }), errc::unsupported);
  EXPECT_NO_THROW(make_field(59049));  // 3^10
  EXPECT_EQ(code_of([] { make_field(177147); }), errc::unsupported);  // 3^11
}

TEST(Field, CanonicalModuli) {
  EXPECT_EQ(make_field(8).modulus_bits(), 0b1011u);    // x^3 + x + 1
  EXPECT_EQ(make_field(16).modulus_bits(), 0b10011u);  // x^4 + x + 1
  EXPECT_EQ(make_field(256).modulus_bits(), 0b100011011u);  // x^8 + x^4 + x^3 + x + 1
  EXPECT_EQ(make_field(9).modulus(), (std::vector<std::uint32_t>{1, 0, 1}));  // x^2 + 1
  EXPECT_EQ(make_field(25).modulus(), (std::vector<std::uint32_t>{2, 0, 1}));  // x^2 + 2
}

class FieldAxioms : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(FieldAxioms, ExhaustiveLaws) {
  const auto f = make_field(GetParam());
  const auto q = static_cast<element_t>(f.order());
  for (element_t a = 0; a < q; ++a) {
    ASSERT_EQ(f.add(a, 0), a);
    ASSERT_EQ(f.mul(a, 1), a);
    ASSERT_EQ(f.mul(a, 0), 0u);
    ASSERT_EQ(f.add(a, f.neg(a)), 0u);
    if (a != 0) ASSERT_EQ(f.mul(a, f.inv(a)), 1u);
    for (element_t b = 0; b < q; ++b) {
      ASSERT_EQ(f.add(a, b), f.add(b, a));
      ASSERT_EQ(f.mul(a, b), f.mul(b, a));
      ASSERT_LT(f.add(a, b), q);
      ASSERT_LT(f.mul(a, b), q);
      if (f.kind() != rlnc::field_kind::prime)
        ASSERT_EQ(f.mul(a, b), poly_mul_oracle(a, b, f.modulus(), f.characteristic())) << a << "*" << b;
      else
        ASSERT_EQ(f.mul(a, b), (std::uint64_t(a) * b) % q);
    }
  }
  // Triples: exhaustive up to 64 elements, strided beyond.
  const element_t step = q <= 64 ? 1 : 7;
  for (element_t a = 0; a < q; ++a)
    for (element_t b = 0; b < q; b += step)
      for (element_t c = 0; c < q; c += (q <= 64 ? 1 : 3)) {
        ASSERT_EQ(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        ASSERT_EQ(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        ASSERT_EQ(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
      }
}

INSTANTIATE_TEST_SUITE_P(SmallFields, FieldAxioms,
                         ::testing::Values(2, 3, 4, 5, 7, 8, 9, 11, 16, 25, 27, 32, 49, 64, 81, 121, 125, 128, 243,
                                           251, 256));

TEST(Field, TriplesExhaustiveAt256) {
  for (std::uint64_t q : {256ull, 243ull}) {
    const auto f = make_field(q);
    const auto n = static_cast<element_t>(q);
    for (element_t a = 0; a < n; ++a)
      for (element_t b = 0; b < n; ++b)
        for (element_t c = 0; c < n; ++c) {
          ASSERT_EQ(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
          ASSERT_EQ(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        }
  }
}

TEST(Field, RandomizedLargeFields) {
  rlnc::philox4x32 rng(5, 0);
  for (std::uint64_t q : {65537ull, 1000000007ull, 2147483647ull, 65536ull, 59049ull, 4096ull}) {
    const auto f = make_field(q);
    for (int i = 0; i < 20000; ++i) {
      const element_t a = f.random(rng), b = f.random(rng), c = f.random(rng);
      ASSERT_EQ(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
      ASSERT_EQ(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
      ASSERT_EQ(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
      ASSERT_EQ(f.sub(f.add(a, b), b), a);
      if (a != 0) ASSERT_EQ(f.mul(a, f.inv(a)), 1u);
      if (b != 0) ASSERT_EQ(f.mul(f.div(a, b), b), a);
      if (f.kind() == rlnc::field_kind::prime) ASSERT_EQ(f.mul(a, b), std::uint64_t(a) * b % q);
      else ASSERT_EQ(f.mul(a, b), poly_mul_oracle(a, b, f.modulus(), f.characteristic()));
    }
  }
}

TEST(Field, PowAndGenerator) {
  for (std::uint64_t q : {2ull, 3ull, 4ull, 9ull, 16ull, 125ull, 257ull}) {
    const auto f = make_field(q);
    const element_t g = f.generator();
    std::vector<char> seen(q, 0);
    element_t x = 1;
    for (std::uint64_t i = 0; i + 1 < q; ++i) {
      ASSERT_EQ(f.pow(g, i), x);
      ASSERT_FALSE(seen[x]) << "generator order too small in GF(" << q << ")";
      seen[x] = 1;
      x = f.mul(x, g);
    }
    EXPECT_EQ(x, 1u);
  }
}

TEST(Field, Dot) {
  const auto f2 = make_field(2);
  const auto f3 = make_field(3);
  const std::vector<element_t> a{1, 1}, b{1, 0}, c{1, 2}, d{2, 2};
  EXPECT_EQ(rlnc::dot(f2, a, b), 1u);
  EXPECT_EQ(rlnc::dot(f2, a, a), 0u);
  EXPECT_EQ(rlnc::dot(f3, c, d), 0u);
  const std::vector<element_t> three{1, 1, 1};
  EXPECT_EQ(code_of([&] { rlnc::dot(f2, a, three); }), errc::length_mismatch);
}

TEST(Field, DotBilinearSymmetric) {
  rlnc::philox4x32 rng(11, 0);
  for (std::uint64_t q : {2ull, 3ull, 4ull, 9ull, 101ull}) {
    const auto f = make_field(q);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<element_t> u(6), v(6), w(6), uw(6);
      for (std::size_t i = 0; i < 6; ++i) {
        u[i] = f.random(rng);
        v[i] = f.random(rng);
        w[i] = f.random(rng);
      }
      const element_t s = f.random(rng);
      for (std::size_t i = 0; i < 6; ++i) uw[i] = f.add(f.mul(s, u[i]), w[i]);
      ASSERT_EQ(rlnc::dot(f, u, v), rlnc::dot(f, v, u));
      ASSERT_EQ(rlnc::dot(f, uw, v), f.add(f.mul(s, rlnc::dot(f, u, v)), rlnc::dot(f, w, v)));
    }
  }
}

TEST(Field, PackedGf2MatchesGeneric) {
  rlnc::philox4x32 rng(3, 0);
  const rlnc::gf2_arith packed;
  const rlnc::fq_arith generic(make_field(2));
  for (std::size_t len : {1u, 63u, 64u, 65u, 200u}) {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<element_t> a(len), b(len);
      for (auto& x : a) x = packed.random(rng);
      for (auto& x : b) x = packed.random(rng);
      auto pa = rlnc::pack(packed, std::span<const element_t>(a));
      const auto pb = rlnc::pack(packed, std::span<const element_t>(b));
      std::vector<element_t> ga = a;
      // packed add is XOR of words
      std::vector<std::uint64_t> x(pa.size());
      for (std::size_t i = 0; i < pa.size(); ++i) x[i] = pa[i] ^ pb[i];
      packed.axpy(pa, 1, pb);
      ASSERT_EQ(pa, x);
      generic.axpy(ga, 1, b);
      ASSERT_EQ(rlnc::unpack(packed, std::span<const std::uint64_t>(pa), len), ga);
      ASSERT_EQ(packed.dot(rlnc::pack(packed, std::span<const element_t>(a)), pb), generic.dot(a, b));
    }
  }
}
