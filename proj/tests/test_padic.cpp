#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "padyn/padic.hpp"

using namespace padyn;

namespace {

BigInt integer_binomial(int n, int k) {
  BigInt r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

std::uint64_t brute_teichmuller(std::uint64_t a, std::uint32_t p, int N) {
  const std::uint64_t q = checked_power(p, N);
  std::uint64_t found = q;
  for (std::uint64_t x = 0; x < q; ++x) {
    if (x % p != a % p) continue;
    BigInt y = pow(BigInt(x), p - 1) % q;
    if (y == 1) {
      REQUIRE(found == q);  // unique
      found = x;
    }
  }
  return found;
}

}  // namespace

TEST_CASE("from_integer reduces into [0, p^N)") {
  CHECK(PadicInt::from_integer(7, 5, 3).residue() == 7);
  CHECK(PadicInt::from_integer(-1, 5, 2).residue() == 24);
  auto x = PadicInt::from_integer(10, 5, 3);
  CHECK(x.residue() == 10);
  CHECK(x.valuation() == 1);
  CHECK(PadicInt::from_integer(-250, 5, 3).residue() == 0);
}

TEST_CASE("non-prime p is a configuration error") {
  try {
    (void)PadicInt::from_integer(1, 6, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Configuration);
  }
  CHECK_THROWS_AS((void)PadicInt::from_integer(1, 5, 0), Error);
}

TEST_CASE("moduli above the cap are refused") {
  CHECK_NOTHROW((void)PadicInt::from_integer(1, 2, 62));
  try {
    (void)PadicInt::from_integer(1, 2, 63);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PrecisionExhausted);
  }
}

TEST_CASE("valuation") {
  CHECK(PadicInt::from_integer(25, 5, 4).valuation() == 2);
  CHECK(PadicInt::from_integer(0, 5, 4).valuation() == 4);
  CHECK(PadicInt::from_integer(0, 5, 4).is_zero());
  CHECK(PadicInt::from_integer(3, 5, 4).valuation() == 0);
  CHECK(PadicInt::from_integer(3, 5, 4).is_unit());
}

TEST_CASE("inverse") {
  CHECK(PadicInt::from_integer(2, 5, 2).inverse().residue() == 13);
  CHECK(PadicInt::from_integer(1, 5, 2).inverse().residue() == 1);
  CHECK(PadicInt::from_integer(2, 3, 5).inverse().residue() == 122);
  try {
    (void)PadicInt::from_integer(10, 5, 3).inverse();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonUnit);
  }
}

TEST_CASE("ring axioms on random inputs") {
  std::mt19937_64 rng(1);
  for (std::uint32_t p : {2u, 3u, 5u, 7u, 101u}) {
    for (int N : {1, 3, 8}) {
      const std::uint64_t q = checked_power(p, N);
      for (int trial = 0; trial < 200; ++trial) {
        auto a = PadicInt::from_residue(rng() % q, p, N, N);
        auto b = PadicInt::from_residue(rng() % q, p, N, N);
        auto c = PadicInt::from_residue(rng() % q, p, N, N);
        CHECK((a * b) * c == a * (b * c));
        CHECK((a + b) + c == a + (b + c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK(a - a == a.zero());
        CHECK(a + (-a) == a.zero());
        // Reducing before or after agrees with exact integer arithmetic.
        BigInt exact = BigInt(a.residue()) * b.residue() + c.residue();
        CHECK((a * b + c).residue() == static_cast<std::uint64_t>(exact % q));
      }
    }
  }
}

TEST_CASE("valuation is additive when nothing saturates") {
  std::mt19937_64 rng(2);
  for (std::uint32_t p : {3u, 5u, 7u}) {
    const int N = 10;
    for (int trial = 0; trial < 500; ++trial) {
      const int va = static_cast<int>(rng() % 4), vb = static_cast<int>(rng() % 4);
      std::uint64_t ua = rng() % 1000 * p + 1 + rng() % (p - 1);
      std::uint64_t ub = rng() % 1000 * p + 1 + rng() % (p - 1);
      auto a = PadicInt::from_integer(static_cast<std::int64_t>(ua), p, N).times_p_power(va);
      auto b = PadicInt::from_integer(static_cast<std::int64_t>(ub), p, N).times_p_power(vb);
      CHECK((a * b).valuation() == va + vb);
    }
  }
}

TEST_CASE("precision tracking") {
  auto a = PadicInt::from_integer(9, 3, 6);               // exact
  auto b = PadicInt::from_residue(4, 3, 6, 2);            // known mod 9
  CHECK((a + b).precision() == 2);
  CHECK((a * b).precision() == 4);                        // 2 + v(9)
  CHECK(a.divided_by_p_power(2).precision() == 4);
  CHECK(a.divided_by_p_power(2).residue() == 1);
  CHECK_THROWS_AS((void)PadicInt::from_integer(10, 3, 6).divided_by_p_power(1), Error);
}

TEST_CASE("teichmuller") {
  CHECK(teichmuller(PadicInt::from_integer(1, 5, 4)).residue() == 1);
  CHECK(teichmuller(PadicInt::from_integer(2, 5, 2)).residue() == 7);
  for (std::uint32_t p : {3u, 5u, 7u}) {
    for (int N : {1, 2, 3}) {
      for (std::uint64_t a = 1; a < p; ++a) {
        auto w = teichmuller(PadicInt::from_integer(static_cast<std::int64_t>(a), p, N));
        CHECK(w.residue() == brute_teichmuller(a, p, N));
      }
    }
  }
  std::mt19937_64 rng(3);
  for (std::uint32_t p : {3u, 11u, 13u}) {
    const int N = 9;
    for (int trial = 0; trial < 50; ++trial) {
      std::uint64_t a = rng() % checked_power(p, N);
      if (a % p == 0) continue;
      auto x = PadicInt::from_residue(a, p, N, N);
      auto w = teichmuller(x);
      CHECK(w.pow(p - 1) == x.one());
      CHECK(w.congruent(x, 1));
      CHECK(teichmuller(PadicInt::from_integer(static_cast<std::int64_t>(w.residue() % p), p, N)) == w);
    }
  }
  CHECK_THROWS_AS((void)teichmuller(PadicInt::from_integer(1, 2, 4)), Error);
  CHECK_THROWS_AS((void)teichmuller(PadicInt::from_integer(5, 5, 4)), Error);
}

TEST_CASE("binom_padic matches integer binomials") {
  CHECK(binom_padic(PadicInt::from_integer(17, 5, 3), 0).residue() == 1);
  CHECK(binom_padic(PadicInt::from_integer(6, 5, 3), 2).residue() == 15);
  auto b = binom_padic(PadicInt::from_integer(5, 5, 3), 2);
  CHECK(b.residue() == 10);
  CHECK(b.valuation() == 1);
  for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
    for (int N : {1, 4, 7}) {
      const std::uint64_t q = checked_power(p, N);
      for (int n = 0; n <= 40; ++n) {
        for (int k = 0; k <= n; ++k) {
          auto v = binom_padic(PadicInt::from_integer(n, p, N), static_cast<std::uint64_t>(k));
          const auto expected = PadicInt::from_big(integer_binomial(n, k), p, N);
          if (static_cast<std::uint64_t>(n) < q) {
            CHECK(v.residue() == expected.residue());
          } else {
            // n mod p^N only determines binom(n, k) to the reported precision.
            CHECK(v.congruent(expected, v.precision()));
          }
        }
      }
    }
  }
}

TEST_CASE("binom_padic precision is honest for non-integer t") {
  // binom(t, k) for t known mod p^N must agree with binom(t + j p^N, k) to
  // the reported precision.
  std::mt19937_64 rng(4);
  for (std::uint32_t p : {2u, 3u, 5u}) {
    const int N = 6;
    const int wideN = 20;
    const std::uint64_t q = checked_power(p, N);
    for (int trial = 0; trial < 100; ++trial) {
      const std::uint64_t t = rng() % q;
      const std::uint64_t k = 1 + rng() % 30;
      auto b = binom_padic(PadicInt::from_residue(t, p, N, N), k);
      for (std::uint64_t j = 1; j < 4; ++j) {
        auto shifted = PadicInt::from_integer(static_cast<std::int64_t>(t + j * q), p, wideN);
        auto wide = binom_padic(shifted, k).with_digits(N);
        CHECK(wide.congruent(b, b.precision()));
      }
      CHECK(b.precision() == N - floor_log(k, p));
    }
  }
}

TEST_CASE("binom_padic with guard beyond the word cap") {
  // 3^(30 + v_3(60!)) exceeds 2^62; the value must still match the integer.
  auto v = binom_padic(PadicInt::from_integer(100, 3, 30), 60);
  CHECK(v.residue() == static_cast<std::uint64_t>(integer_binomial(100, 60) % checked_power(3, 30)));
}

TEST_CASE("sqrt_padic") {
  auto r = sqrt_padic(PadicInt::from_integer(2, 7, 5));  // 3^2 = 9 = 2 mod 7
  REQUIRE(r.has_value());
  CHECK((*r * *r) == PadicInt::from_integer(2, 7, 5));
  CHECK_FALSE(sqrt_padic(PadicInt::from_integer(3, 7, 5)).has_value());
  CHECK_FALSE(sqrt_padic(PadicInt::from_integer(5, 5, 3)).has_value());
  auto s = sqrt_padic(PadicInt::from_integer(4 * 25, 5, 6));
  REQUIRE(s.has_value());
  CHECK(s->valuation() == 1);
  CHECK((*s * *s).congruent(PadicInt::from_integer(100, 5, 6), s->precision()));
  std::mt19937_64 rng(5);
  for (std::uint32_t p : {3u, 5u, 13u, 17u}) {
    for (int trial = 0; trial < 100; ++trial) {
      auto x = PadicInt::from_residue(rng() % checked_power(p, 8), p, 8, 8);
      auto sq = x * x;
      auto root = sqrt_padic(sq);
      REQUIRE(root.has_value());
      CHECK((*root * *root).congruent(sq, root->precision() + root->valuation()));
    }
  }
}

TEST_CASE("mixing contexts is refused") {
  auto a = PadicInt::from_integer(1, 5, 3);
  auto b = PadicInt::from_integer(1, 5, 4);
  CHECK_THROWS_AS(a + b, Error);
  CHECK_THROWS_AS(a * PadicInt::from_integer(1, 7, 3), Error);
}
