#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>

#include "padyn/measure.hpp"

using namespace padyn;

namespace {

std::vector<ResidueMap> vieta_maps(const MarkovSurface& S, std::uint64_t q) {
  return {residue_map(S.vieta(1), q), residue_map(S.vieta(2), q), residue_map(S.vieta(3), q)};
}

std::vector<std::uint64_t> orbit_of(const OrbitPartition& part, std::uint64_t i) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t j = 0; j < part.size(); ++j)
    if (part.root(j) == part.root(i)) out.push_back(j);
  return out;
}

int vmin(const std::array<int, 3>& v) { return std::min({v[0], v[1], v[2]}); }

/// Disk mass as a lift count: #{points mod p^(l+k) over the residue} p^(-2(l+k)).
std::map<std::uint64_t, Rational> lift_count_mass(const MarkovSurface& S, std::uint32_t p, int l, int k) {
  const FinitePointSet lo = FinitePointSet::markov(S, p, l), hi = FinitePointSet::markov(S, p, l + k);
  std::map<std::uint64_t, std::uint64_t> count;
  std::uint64_t pt[3];
  for (std::uint64_t i = 0; i < hi.size(); ++i) {
    hi.point(i, pt);
    for (auto& c : pt) c %= lo.modulus();
    ++count[static_cast<std::uint64_t>(lo.index_of(pt))];
  }
  std::map<std::uint64_t, Rational> out;
  for (std::uint64_t i = 0; i < lo.size(); ++i) out[i] = Rational(BigInt(count[i]), pow(BigInt(p), 2 * (l + k)));
  return out;
}

}  // namespace

TEST_CASE("symplectic weight examples") {
  const MarkovSurface S{0, 0, 0, 20};
  // (2, 2, 2) lies on S over Z, with Fx = 8 a unit mod 7.
  std::uint64_t pt[3] = {2, 2, 2};
  CHECK(symplectic_weight(pt, S, 7, 2) == Rational(1, 7 * 7 * 7 * 7));
  const MarkovSurface cone{0, 0, 0, 0};
  std::uint64_t origin[3] = {0, 0, 0};
  for (int l = 1; l <= 3; ++l) {
    try {
      symplectic_weight(origin, cone, 3, l);
      FAIL("expected ChartSingular");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ChartSingular);
    }
  }
  // (3, 0, 0) on the cone mod 9: Fx = 6 has valuation 1.
  std::uint64_t q[3] = {3, 0, 0};
  std::uint64_t off[3] = {1, 2, 4};
  CHECK_THROWS_AS(symplectic_weight(off, S, 7, 2), Error);
  CHECK(chart_valuations(q, cone, 3, 2) == std::array<int, 3>{1, 2, 2});
  CHECK(symplectic_weight(q, cone, 3, 2) == Rational(1, 27));
}

TEST_CASE("unit-chart weights equal the lift-count disk mass") {
  std::mt19937_64 rng(5);
  std::vector<MarkovSurface> surfaces{{0, 0, 0, 0}, {0, 0, 0, 4}, {0, 0, 0, 20}, {3, 3, 3, 9}};
  for (int t = 0; t < 3; ++t) surfaces.push_back({long(rng() % 30), long(rng() % 30), long(rng() % 30), long(rng() % 30)});
  for (const auto& S : surfaces) {
    for (std::uint32_t p : {3u, 5u}) {
      for (int l = 1; l <= 2; ++l) {
        const auto oracle = lift_count_mass(S, p, l, p == 3 ? 3 : 2);
        const FinitePointSet set = FinitePointSet::markov(S, p, l);
        std::uint64_t pt[3];
        for (std::uint64_t i = 0; i < set.size(); ++i) {
          set.point(i, pt);
          if (vmin(chart_valuations(pt, S, p, l)) != 0) continue;
          CHECK(symplectic_weight(pt, S, p, l) == oracle.at(i));
        }
      }
    }
  }
}

TEST_CASE("two unit charts give the same weight") {
  const MarkovSurface S{0, 0, 0, 20};
  const FinitePointSet set = FinitePointSet::markov(S, 7, 2);
  const auto oracle = lift_count_mass(S, 7, 2, 1);
  std::mt19937_64 rng(9);
  int tested = 0;
  std::uint64_t pt[3];
  while (tested < 500) {
    const std::uint64_t i = rng() % set.size();
    set.point(i, pt);
    const auto v = chart_valuations(pt, S, 7, 2);
    if ((v[0] == 0) + (v[1] == 0) + (v[2] == 0) < 2) continue;
    ++tested;
    CHECK(symplectic_weight(pt, S, 7, 2) == oracle.at(i));
  }
}

TEST_CASE("smallest chart valuation is Vieta invariant") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const MarkovSurface S{long(rng() % 20), long(rng() % 20), long(rng() % 20), long(rng() % 20)};
    for (std::uint32_t p : {3u, 5u}) {
      const FinitePointSet set = FinitePointSet::markov(S, p, 3);
      const auto maps = vieta_maps(S, set.modulus());
      std::uint64_t pt[3], img[3];
      for (std::uint64_t i = 0; i < set.size(); i += 7) {
        set.point(i, pt);
        for (const auto& g : maps) {
          g.apply(pt, img);
          CHECK(vmin(chart_valuations(pt, S, p, 3)) == vmin(chart_valuations(img, S, p, 3)));
        }
      }
    }
  }
}

TEST_CASE("reference measures are normalized and invariant") {
  for (const MarkovSurface S : {MarkovSurface{0, 0, 0, 0}, MarkovSurface{0, 0, 0, 4}, MarkovSurface{1, 2, 3, 4},
                                MarkovSurface{0, 0, 0, 20}}) {
    for (std::uint32_t p : {3u, 5u, 7u}) {
      const int l = p == 7 ? 2 : 3;
      const FinitePointSet set = FinitePointSet::markov(S, p, l);
      const auto maps = vieta_maps(S, set.modulus());
      const OrbitPartition part = orbit_partition(set, maps);
      for (std::uint64_t r = 0; r < set.size(); ++r) {
        if (part.root(r) != r) continue;
        const auto orbit = orbit_of(part, r);
        const ResidueWeighting w = [&] {
          try {
            return reference_measure(set, orbit, true);
          } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ChartSingular);
            return ResidueWeighting{};
          }
        }();
        if (w.support.empty()) continue;
        CHECK(w.support.size() + w.excised.size() == orbit.size());
        Rational sum = 0;
        for (std::size_t i = 0; i < w.support.size(); ++i) sum += w.normalized(i);
        CHECK(sum == 1);
        if (w.excised.empty()) {
          for (const auto& g : maps) CHECK(pushforward_invariant(w, set, g));
        }
      }
    }
  }
}

TEST_CASE("reference measure special cases") {
  const MarkovSurface S{0, 0, 0, 20};
  const FinitePointSet set = FinitePointSet::markov(S, 7, 1);
  std::vector<std::uint64_t> all(set.size());
  for (std::uint64_t i = 0; i < set.size(); ++i) all[i] = i;
  const Distribution d = as_distribution(reference_measure(set, all));
  for (const auto& m : d.mass) CHECK(m == Rational(BigInt(1), BigInt(set.size())));
  const std::vector<std::uint64_t> one{5};
  const Distribution point = as_distribution(reference_measure(set, one));
  CHECK(point.mass == std::vector<Rational>{Rational(1)});

  const MarkovSurface cone{0, 0, 0, 0};
  const FinitePointSet cs = FinitePointSet::markov(cone, 3, 2);
  std::vector<std::uint64_t> cone_all(cs.size());
  for (std::uint64_t i = 0; i < cs.size(); ++i) cone_all[i] = i;
  CHECK_THROWS_AS(reference_measure(cs, cone_all), Error);
  const ResidueWeighting ex = reference_measure(cs, cone_all, true);
  CHECK_FALSE(ex.excised.empty());
  std::uint64_t pt[3];
  for (const auto i : ex.excised) {
    cs.point(i, pt);
    CHECK(vmin(chart_valuations(pt, cone, 3, 2)) == 2);
  }
}

TEST_CASE("total variation") {
  const Distribution a{{0, 1, 2, 3}, {Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)}};
  const Distribution mass0{{0, 1, 2, 3}, {1, 0, 0, 0}};
  const Distribution mass3{{0, 1, 2, 3}, {0, 0, 0, 1}};
  CHECK(tv_distance(a, a) == 0);
  CHECK(tv_distance(mass0, mass3) == 1);
  CHECK(tv_distance(a, mass0) == Rational(3, 4));
  const Distribution other{{0, 1, 2, 4}, {1, 0, 0, 0}};
  CHECK_THROWS_AS(tv_distance(a, other), Error);
}

TEST_CASE("counter-based generator") {
  CHECK(counter_random(1, 0) == counter_random(1, 0));
  CHECK(counter_random(1, 0) != counter_random(1, 1));
  CHECK(counter_random(1, 0) != counter_random(2, 0));
}

TEST_CASE("lifting a surface point") {
  const MarkovSurface S{0, 0, 0, 20};
  const FinitePointSet set = FinitePointSet::markov(S, 7, 1);
  std::uint64_t pt[3];
  for (std::uint64_t i = 0; i < set.size(); ++i) {
    set.point(i, pt);
    const auto P = lift_surface_point(S, pt, 7, 1, 6);
    const std::vector<BigInt> big{BigInt(P[0]), BigInt(P[1]), BigInt(P[2])};
    CHECK(S.on_surface_mod(big, pow(BigInt(7), 6)));
    for (int k = 0; k < 3; ++k) CHECK(P[k] % 7 == pt[k]);
  }
  std::uint64_t origin[3] = {0, 0, 0};
  CHECK_THROWS_AS(lift_surface_point({0, 0, 0, 0}, origin, 3, 1, 3), Error);
}

TEST_CASE("random walks") {
  const MarkovSurface S{0, 0, 0, 20};
  const FinitePointSet set = FinitePointSet::markov(S, 7, 2);
  const auto maps = vieta_maps(S, 49);
  const OrbitPartition part = orbit_partition(set, maps);
  std::uint64_t pt[3];
  set.point(0, pt);
  const auto deep = lift_surface_point(S, pt, 7, 2, 6);
  WalkConfig cfg;
  cfg.start = deep;
  cfg.start_level = 6;
  cfg.seed = 42;

  SUBCASE("no steps is a point mass at the start") {
    cfg.steps = 0;
    const WalkResult w = random_walk(S, cfg, set);
    CHECK(w.samples == 1);
    CHECK(w.counts[0] == 1);
  }
  SUBCASE("deterministic and confined to the orbit") {
    cfg.steps = 20000;
    const WalkResult a = random_walk(S, cfg, set), b = random_walk(S, cfg, set);
    CHECK(a.counts == b.counts);
    CHECK(a.burn_in == 2000);
    CHECK(a.samples == 18001);
    for (std::uint64_t i = 0; i < set.size(); ++i)
      if (a.counts[i]) CHECK(part.root(i) == part.root(0));
  }
  SUBCASE("the deep walk reduces to the shallow walk") {
    cfg.steps = 5000;
    WalkConfig shallow = cfg;
    shallow.start = {deep[0] % 49, deep[1] % 49, deep[2] % 49};
    shallow.start_level = 2;
    CHECK(random_walk(S, cfg, set).counts == random_walk(S, shallow, set).counts);
  }
  SUBCASE("distance to the reference measure shrinks with the step count") {
    const auto orbit = orbit_of(part, 0);
    const Distribution ref = as_distribution(reference_measure(set, orbit));
    Rational last = 2;
    for (std::uint64_t M : {1000u, 10000u, 100000u}) {
      cfg.steps = M;
      const Rational tv = tv_distance(empirical_distribution(random_walk(S, cfg, set), orbit), ref);
      CHECK(tv < last);
      last = tv;
    }
  }
  SUBCASE("walk configuration errors") {
    cfg.steps = 10;
    WalkConfig bad = cfg;
    bad.mu = {Rational(1, 2), Rational(1, 2), Rational(0)};
    CHECK_THROWS_AS(random_walk(S, bad, set), Error);
    bad.mu = {Rational(1, 2), Rational(1, 3), Rational(1, 3)};
    CHECK_THROWS_AS(random_walk(S, bad, set), Error);
    bad = cfg;
    bad.start = {1, 2, 4};
    CHECK_THROWS_AS(random_walk(S, bad, set), Error);
    bad = cfg;
    bad.start_level = 1;
    CHECK_THROWS_AS(random_walk(S, bad, set), Error);
  }
}

TEST_CASE("stationarity defect") {
  const MarkovSurface S{0, 0, 0, 20};
  const FinitePointSet set = FinitePointSet::markov(S, 7, 1);
  const auto maps = vieta_maps(S, 7);
  const OrbitPartition part = orbit_partition(set, maps);
  const auto orbit = orbit_of(part, 0);
  const Distribution ref = as_distribution(reference_measure(set, orbit));
  const std::array<Rational, 3> mu{Rational(1, 3), Rational(1, 3), Rational(1, 3)};
  CHECK(stationarity_defect(ref, set, maps, mu) == 0);
  Distribution peaked = ref;
  std::fill(peaked.mass.begin(), peaked.mass.end(), Rational(0));
  peaked.mass[0] = 1;
  CHECK(stationarity_defect(peaked, set, maps, mu) > 0);
}

namespace {

/// Start (1/p, d, a/p) on x^2 + y^2 + z^2 + xyz = By + D, with d picked so D is an integer.
std::pair<MarkovSurface, RationalPoint> escaping_start(std::uint32_t p, std::uint64_t a, long b) {
  const std::uint64_t q = std::uint64_t(p) * p;
  std::uint64_t inv = 1;
  for (std::uint64_t e = q - q / p - 1, base = a % q; e; e >>= 1, base = base * base % q)
    if (e & 1) inv = inv * base % q;
  const std::uint64_t d = (q - (1 + a * a) % q) % q * inv % q;
  const RationalPoint P{Rational(1, p), Rational(d), Rational(BigInt(a), BigInt(p))};
  const Rational D = P[0] * P[0] + P[1] * P[1] + P[2] * P[2] + P[0] * P[1] * P[2] - Rational(b) * P[1];
  REQUIRE(denominator(D) == 1);
  return {MarkovSurface{0, b, 0, numerator(D)}, P};
}

}  // namespace

TEST_CASE("escape from the integral points") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    const std::uint32_t p = std::array<std::uint32_t, 3>{3, 5, 7}[t % 3];
    std::uint64_t a;
    do a = rng() % (p * p);
    while (a % p == 0);
    const auto [S, P] = escaping_start(p, a, long(rng() % 20));
    const EscapeTrace tr = escape_test(S, P, p, 20);
    REQUIRE(tr.onset.has_value());
    CHECK(*tr.onset <= 10);
    CHECK_FALSE(tr.bounded);
    for (const auto& Q : tr.points) CHECK(Q[2] == P[2]);
  }
}

TEST_CASE("integral points stay integral") {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 20; ++t) {
    const long x = long(rng() % 50) - 25, y = long(rng() % 50) - 25, z = long(rng() % 50) - 25;
    const long A = long(rng() % 10), B = long(rng() % 10), C = long(rng() % 10);
    const long D = x * x + y * y + z * z + x * y * z - A * x - B * y - C * z;
    const EscapeTrace tr = escape_test({A, B, C, D}, {Rational(x), Rational(y), Rational(z)}, 5, 100,
                                       std::size_t{1} << 20);
    CHECK(tr.bounded);
    for (const int v : tr.min_valuation) CHECK(v >= 0);
  }
}

TEST_CASE("the z = 0 fiber has period two") {
  // 25 + 1 = 15 - 5 + 16.
  const MarkovSurface S{3, 5, 0, 16};
  const RationalPoint P{Rational(5), Rational(-1), Rational(0)};
  const EscapeTrace tr = escape_test(S, P, 3, 8);
  for (std::size_t k = 2; k < tr.points.size(); ++k) CHECK(tr.points[k] == tr.points[k - 2]);
  CHECK(tr.bounded);
}

TEST_CASE("escape test errors") {
  CHECK_THROWS_AS(escape_test({0, 0, 0, 1}, {Rational(1), Rational(1), Rational(1)}, 3, 5), Error);
  const auto [S, P] = escaping_start(3, 2, 1);
  try {
    escape_test(S, P, 3, 200, 64);
    FAIL("expected Budget");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Budget);
  }
}
