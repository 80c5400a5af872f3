#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "padyn/tate.hpp"

using namespace padyn;

namespace {

IntPoly var(int n, int i) { return IntPoly::variable(n, i, BigInt(1)); }
IntPoly cst(int n, long c) { return IntPoly::constant(n, BigInt(c)); }

IntPoly random_int_poly(std::mt19937_64& rng, int nvars, int degree, int min_val_per_degree, std::uint32_t p,
                        int range = 20) {
  IntPoly f(nvars);
  std::uniform_int_distribution<int> coef(-range, range);
  // All monomials up to `degree`, coefficient p^(s (d - 1)) * random for d >= 2.
  std::vector<MultiIndex> idx{MultiIndex{}};
  for (int d = 1; d <= degree; ++d) {
    std::vector<MultiIndex> next;
    for (const auto& I : idx) {
      if (total_degree(I) != d - 1) continue;
      for (int i = 0; i < nvars; ++i) {
        MultiIndex J = I;
        ++J[i];
        next.push_back(J);
      }
    }
    idx.insert(idx.end(), next.begin(), next.end());
  }
  for (const auto& I : idx) {
    const int d = total_degree(I);
    BigInt c = coef(rng);
    if (d >= 2) c *= pow(BigInt(p), min_val_per_degree * (d - 1));
    f.add_term(I, c);
  }
  return f;
}

}  // namespace

TEST_CASE("gauss_valuation") {
  const int n = 2;
  auto g = TatePoly::from_int(var(n, 0) + cst(n, 3) * var(n, 1), 3, 4, 4);
  CHECK(g.gauss_valuation() == 0);
  auto h = TatePoly::from_int(cst(n, 9) * var(n, 0) * var(n, 0), 3, 4, 4);
  CHECK(h.gauss_valuation() == 2);
  TatePoly z(3, 4, n, 4);
  CHECK(z.gauss_valuation() == 4);
}

TEST_CASE("arithmetic") {
  const int n = 2;
  auto x = TatePoly::from_int(var(n, 0), 5, 3, 4);
  auto y = TatePoly::from_int(var(n, 1), 5, 3, 4);
  auto s = x + y;
  CHECK(s.terms().size() == 2);
  auto one = TatePoly::from_int(cst(n, 1), 5, 3, 4);
  auto prod = (x + one) * (x - one);
  CHECK(prod.terms().size() == 2);
  CHECK(prod.coefficient(MultiIndex{2, 0}).residue() == 1);
  CHECK(prod.coefficient(MultiIndex{}).residue() == 124);
  CHECK(prod.trunc_val() == kInfiniteValuation);
  // p^2 (x^2 + y) vanishes at N = 2.
  auto q = TatePoly::from_int(cst(n, 25) * (var(n, 0) * var(n, 0) + var(n, 1)), 5, 2, 4);
  CHECK(q.is_zero());
  CHECK(q.terms().empty());
  CHECK_THROWS_AS(x + TatePoly::from_int(var(n, 0), 5, 4, 4), Error);
}

TEST_CASE("product truncation lowers trunc_val to the discarded valuation") {
  auto x = TatePoly::from_int(var(1, 0), 3, 6, 2);
  auto f = TatePoly::from_int(var(1, 0) + cst(1, 9) * var(1, 0) * var(1, 0), 3, 6, 2);
  auto sq = f * f;  // x^2 + 18 x^3 + 81 x^4
  CHECK(sq.trunc_val() == 2);
  CHECK(sq.coefficient(MultiIndex{2}).residue() == 1);
  CHECK((x * x).trunc_val() == kInfiniteValuation);
}

TEST_CASE("compose examples") {
  auto g = TatePoly::from_int(var(1, 0) * var(1, 0), 3, 5, 4);
  auto f = TateMap::from_int({var(1, 0) + cst(1, 3)}, 3, 5, 4);
  auto h = compose(g, f);
  CHECK(h.coefficient(MultiIndex{2}).residue() == 1);
  CHECK(h.coefficient(MultiIndex{1}).residue() == 6);
  CHECK(h.coefficient(MultiIndex{}).residue() == 9);
  CHECK(h.trunc_val() == kInfiniteValuation);

  auto g2 = TatePoly::from_int(var(2, 0) * var(2, 1) + cst(2, 4) * var(2, 1), 5, 4, 6);
  auto id = TateMap::identity(5, 4, 2, 6);
  auto same = compose(g2, id);
  CHECK(same.poly() == g2.poly());
}

TEST_CASE("compose agrees with exact integer composition") {
  std::mt19937_64 rng(11);
  for (std::uint32_t p : {3u, 5u, 7u}) {
    const int N = 6;
    const std::uint64_t q = checked_power(p, N);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2;
      IntPoly g = random_int_poly(rng, n, 3, 0, p);
      IntPolyMap f{random_int_poly(rng, n, 2, 0, p), random_int_poly(rng, n, 2, 0, p)};
      IntPoly exact = compose<BigInt>(g, std::span<const IntPoly>(f), BigInt(1));
      const int D = 6;
      auto h = compose(TatePoly::from_int(g, p, N, D), TateMap::from_int(f, p, N, D));
      CHECK(h.trunc_val() == kInfiniteValuation);
      IntPoly reduced(n);
      for (const auto& [I, c] : exact.terms()) {
        BigInt r = c % q;
        if (r < 0) r += q;
        reduced.add_term(I, r);
      }
      CHECK(h.terms().size() == reduced.terms().size());
      for (const auto& [I, c] : reduced.terms()) {
        CHECK(BigInt(h.coefficient(I).residue()) == c);
      }
    }
  }
}

TEST_CASE("compose is associative in exact mode") {
  std::mt19937_64 rng(12);
  const std::uint32_t p = 5;
  const int N = 5, D = 8, n = 2;
  for (int trial = 0; trial < 10; ++trial) {
    IntPolyMap a{random_int_poly(rng, n, 2, 0, p), random_int_poly(rng, n, 1, 0, p)};
    IntPolyMap b{random_int_poly(rng, n, 2, 0, p), random_int_poly(rng, n, 2, 0, p)};
    IntPolyMap c{random_int_poly(rng, n, 2, 0, p), random_int_poly(rng, n, 1, 0, p)};
    auto A = TateMap::from_int(a, p, N, D), B = TateMap::from_int(b, p, N, D), C = TateMap::from_int(c, p, N, D);
    auto left = compose(compose(A, B), C);
    auto right = compose(A, compose(B, C));
    for (int i = 0; i < n; ++i) CHECK(left[i].poly() == right[i].poly());
  }
}

TEST_CASE("truncated composition is certified") {
  // Maps of the form p^-s F(p^s x): discarded terms must have valuation at
  // least trunc_val, kept terms must be exact.
  std::mt19937_64 rng(13);
  for (std::uint32_t p : {2u, 3u, 5u}) {
    for (int s : {1, 2}) {
      const int N = 8, n = 2;
      const std::uint64_t q = checked_power(p, N);
      for (int trial = 0; trial < 10; ++trial) {
        IntPoly g = random_int_poly(rng, n, 3, s, p);
        IntPolyMap f{random_int_poly(rng, n, 3, s, p), random_int_poly(rng, n, 2, s, p)};
        IntPoly exact = compose<BigInt>(g, std::span<const IntPoly>(f), BigInt(1));
        const int D = 4;
        bool caught = false;
        TatePoly h;
        try {
          h = compose(TatePoly::from_int(g, p, N, D), TateMap::from_int(f, p, N, D));
        } catch (const Error&) {
          caught = true;
        }
        REQUIRE_FALSE(caught);
        CHECK(h.trunc_val() >= s * D);
        for (const auto& [I, c] : exact.terms()) {
          BigInt r = c % q;
          if (r < 0) r += q;
          if (total_degree(I) <= D) {
            CHECK(BigInt(h.coefficient(I).residue()) == r);
          } else if (r != 0) {
            CHECK(valuation_of(r, p) >= std::min(N, h.trunc_val()));
          }
        }
      }
    }
  }
}

TEST_CASE("naive bound c(D+1) would be wrong; the certificate is not") {
  // x^D o (x + p x^2): the discarded term D p x^(D+1) has valuation 1.
  const std::uint32_t p = 3;
  const int D = 5, N = 6;
  IntPoly g = var(1, 0) * var(1, 0) * var(1, 0) * var(1, 0) * var(1, 0);
  auto f = TateMap::from_int({var(1, 0) + cst(1, 3) * var(1, 0) * var(1, 0)}, p, N, D);
  auto h = compose(TatePoly::from_int(g, p, N, D), f);
  CHECK(h.trunc_val() == 1);
}

TEST_CASE("uncontrolled truncation is refused") {
  // x^2 o (x + x^2) with cap 2 discards 2x^3 + x^4, units.
  auto g = TatePoly::from_int(var(1, 0) * var(1, 0), 5, 4, 2);
  auto f = TateMap::from_int({var(1, 0) + var(1, 0) * var(1, 0)}, 5, 4, 2);
  try {
    (void)compose(g, f);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UncontrolledTruncation);
  }
}

TEST_CASE("evaluate") {
  const int n = 2;
  auto g = TatePoly::from_int(var(n, 0) + var(n, 1), 5, 3, 2);
  PadicVector z{PadicInt::from_integer(1, 5, 3), PadicInt::from_integer(2, 5, 3)};
  CHECK(g.evaluate(z).residue() == 3);
  TatePoly zero(5, 3, n, 2);
  CHECK(zero.evaluate(z).residue() == 0);
}

TEST_CASE("evaluation respects the Gauss bound") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::uint32_t p = std::array<std::uint32_t, 3>{3, 5, 7}[trial % 3];
    const int N = 6, n = 2;
    IntPoly g = random_int_poly(rng, n, 3, 0, p).scaled(pow(BigInt(p), static_cast<unsigned>(rng() % 4)));
    auto G = TatePoly::from_int(g, p, N, 3);
    const std::uint64_t q = checked_power(p, N);
    PadicVector z{PadicInt::from_residue(rng() % q, p, N, N), PadicInt::from_residue(rng() % q, p, N, N)};
    CHECK(G.evaluate(z).valuation() >= G.gauss_valuation());
  }
}

TEST_CASE("evaluate(compose(g, f)) = evaluate(g, f(z)) to the certified precision") {
  std::mt19937_64 rng(15);
  for (std::uint32_t p : {3u, 5u}) {
    const int N = 8, n = 2, D = 5;
    const std::uint64_t q = checked_power(p, N);
    for (int trial = 0; trial < 30; ++trial) {
      IntPoly g = random_int_poly(rng, n, 3, 1, p);
      IntPolyMap f{random_int_poly(rng, n, 3, 1, p), random_int_poly(rng, n, 3, 1, p)};
      auto G = TatePoly::from_int(g, p, N, D);
      auto F = TateMap::from_int(f, p, N, D);
      auto H = compose(G, F);
      for (int k = 0; k < 5; ++k) {
        PadicVector z{PadicInt::from_residue(rng() % q, p, N, N), PadicInt::from_residue(rng() % q, p, N, N)};
        auto lhs = H.evaluate(z);
        auto fz = F.evaluate(z);
        auto rhs = G.evaluate(fz);
        CHECK(lhs.precision() == std::min(N, H.trunc_val()));
        CHECK(lhs.congruent(rhs, lhs.precision()));
      }
    }
  }
}

TEST_CASE("submultiplicativity of the Gauss valuation") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint32_t p = 3;
    const int N = 10;
    auto a = TatePoly::from_int(random_int_poly(rng, 2, 2, 0, p).scaled(BigInt(3)), p, N, 6);
    auto b = TatePoly::from_int(random_int_poly(rng, 2, 2, 0, p).scaled(BigInt(9)), p, N, 6);
    CHECK((a * b).gauss_valuation() >= a.gauss_valuation() + b.gauss_valuation());
  }
}

TEST_CASE("text round trip") {
  auto f = TateMap::from_int({var(2, 0) + cst(2, 9), var(2, 1) + cst(2, 3) * var(2, 0) * var(2, 0)}, 3, 5, 4);
  const std::string text = f.to_text();
  CHECK(text.rfind("tatepoly p=3 N=5 D=4 trunc_val=inf prec=5 nvars=2 component=0\n", 0) == 0);
  auto back = tate_map_from_text(text);
  REQUIRE(back.size() == 2);
  for (int i = 0; i < 2; ++i) CHECK(back[i].poly() == f[i].poly());
  CHECK_THROWS_AS((void)tate_map_from_text("tatepoly p=3\n0,0: 1\n"), Error);
  CHECK_THROWS_AS((void)tate_poly_from_text("garbage"), Error);
}
