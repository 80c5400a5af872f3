#pragma once

#include <random>
#include <vector>

#include "padyn/flow.hpp"
#include "padyn/padic.hpp"
#include "padyn/polynomial.hpp"

namespace padyn::testing {

inline MultiIndex mono(int a, int b = 0) { return MultiIndex{static_cast<std::uint16_t>(a), static_cast<std::uint16_t>(b), 0, 0}; }

/// x_i + p^c q_i with q_i a random quadratic in two variables, coefficients in [0, p^2).
inline IntPolyMap random_flowable_quadratic(std::uint32_t p, int c, std::mt19937_64& rng) {
  const BigInt pc = pow(BigInt(p), c);
  const std::uint64_t span = static_cast<std::uint64_t>(p) * p;
  IntPolyMap f;
  for (int i = 0; i < 2; ++i) {
    IntPoly q(2);
    q.add_term(mono(i == 0 ? 1 : 0, i == 1 ? 1 : 0), BigInt(1));
    for (MultiIndex I : {mono(0, 0), mono(1, 0), mono(0, 1), mono(2, 0), mono(1, 1), mono(0, 2)}) {
      q.add_term(I, pc * BigInt(rng() % span));
    }
    // Keep it genuinely quadratic.
    q.add_term(mono(2, 0), pc);
    f.push_back(std::move(q));
  }
  return f;
}

/// g(x, y) = (y + x^2 + 5, -x).
inline IntPolyMap henon_example() {
  IntPoly a(2), b(2);
  a.add_term(mono(0, 1), 1);
  a.add_term(mono(2, 0), 1);
  a.add_term(mono(0, 0), 5);
  b.add_term(mono(1, 0), -1);
  return {a, b};
}

/// Linear map by its integer matrix.
inline IntPolyMap linear_map(long a, long b, long c, long d) {
  IntPoly u(2), v(2);
  u.add_term(mono(1, 0), a);
  u.add_term(mono(0, 1), b);
  v.add_term(mono(1, 0), c);
  v.add_term(mono(0, 1), d);
  return {u, v};
}

/// h0 g h0^-1 with h0(x, y) = (2x + y, x + y).
inline IntPolyMap henon_conjugate_example() {
  return compose_maps(linear_map(2, 1, 1, 1), compose_maps(henon_example(), linear_map(1, -1, -1, 2)));
}

inline PadicVector random_point(std::uint32_t p, int digits, int dim, std::mt19937_64& rng) {
  const std::uint64_t q = checked_power(p, digits);
  PadicVector x;
  for (int i = 0; i < dim; ++i) x.push_back(PadicInt::from_residue(rng() % q, p, digits, digits));
  return x;
}

inline PadicInt random_padic(std::uint32_t p, int digits, std::mt19937_64& rng) {
  return PadicInt::from_residue(rng() % checked_power(p, digits), p, digits, digits);
}

/// Orbit of x under f acting on (Z/p^level)^m, by iteration until it closes.
inline std::set<Residue> iteration_orbit(const IntPolyMap& f, const Residue& x, std::uint32_t p, int level) {
  const BigInt q = pow(BigInt(p), level);
  std::set<Residue> seen;
  Residue cur = x;
  while (seen.insert(cur).second) {
    std::vector<BigInt> z(cur.begin(), cur.end());
    std::vector<BigInt> w = evaluate_map(f, z);
    for (std::size_t i = 0; i < w.size(); ++i) {
      BigInt r = w[i] % q;
      if (r < 0) r += q;
      cur[i] = static_cast<std::uint64_t>(r);
    }
  }
  return seen;
}

}  // namespace padyn::testing
