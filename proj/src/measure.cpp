#include "padyn/measure.hpp"

#include <algorithm>
#include <sstream>

#include <boost/integer/common_factor.hpp>

namespace padyn {

namespace {

using u64 = std::uint64_t;
using i128 = __int128;

u64 reduce_signed(i128 v, u64 q) {
  i128 r = v % static_cast<i128>(q);
  if (r < 0) r += q;
  return static_cast<u64>(r);
}

u64 reduce(const BigInt& c, u64 q) {
  BigInt r = c % q;
  if (r < 0) r += q;
  return static_cast<u64>(r);
}

int residue_valuation(u64 r, std::uint32_t p, int level) {
  if (r == 0) return level;
  return std::min(valuation_of(r, p), level);
}

std::string point_text(const u64* pt) {
  std::ostringstream os;
  os << "(" << pt[0] << "," << pt[1] << "," << pt[2] << ")";
  return os.str();
}

}  // namespace

std::array<int, 3> chart_valuations(const std::uint64_t* pt, const MarkovSurface& S, std::uint32_t p, int level) {
  const u64 q = checked_power(p, level);
  const i128 x = pt[0] % q, y = pt[1] % q, z = pt[2] % q;
  const i128 A = reduce(S.A, q), B = reduce(S.B, q), C = reduce(S.C, q);
  return {residue_valuation(reduce_signed(2 * x - A + y * z, q), p, level),
          residue_valuation(reduce_signed(2 * y - B + z * x, q), p, level),
          residue_valuation(reduce_signed(2 * z - C + x * y, q), p, level)};
}

Rational symplectic_weight(const std::uint64_t* pt, const MarkovSurface& S, std::uint32_t p, int level) {
  const std::vector<BigInt> big{BigInt(pt[0]), BigInt(pt[1]), BigInt(pt[2])};
  if (!S.on_surface_mod(big, pow(BigInt(p), level))) fail(ErrorKind::Usage, point_text(pt) + " is not on the surface");
  const auto v = chart_valuations(pt, S, p, level);
  const int vmin = std::min({v[0], v[1], v[2]});
  if (vmin >= level) {
    fail(ErrorKind::ChartSingular, "every chart denominator vanishes mod p^" + std::to_string(level) + " at " +
                                       point_text(pt));
  }
  return Rational(BigInt(1), pow(BigInt(p), 2 * level - vmin));
}

std::array<std::uint64_t, 3> lift_surface_point(const MarkovSurface& S, const std::uint64_t* pt, std::uint32_t p,
                                                int from, int to) {
  if (from < 1 || to < from) fail(ErrorKind::Usage, "lift needs 1 <= from <= to");
  const auto v = chart_valuations(pt, S, p, 1);
  int k = 0;
  while (k < 3 && v[k] != 0) ++k;
  if (k == 3) fail(ErrorKind::ChartSingular, "no unit chart denominator at " + point_text(pt));
  const u64 q0 = checked_power(p, from);
  std::array<u64, 3> P{pt[0] % q0, pt[1] % q0, pt[2] % q0};
  std::vector<BigInt> big{BigInt(P[0]), BigInt(P[1]), BigInt(P[2])};
  if (!S.on_surface_mod(big, BigInt(q0))) fail(ErrorKind::Usage, "point is not on the surface");
  // Newton in coordinate k; the derivative stays a unit mod p along the way.
  for (int l = from; l < to; ++l) {
    const u64 q = checked_power(p, l), qn = q * p;
    big = {BigInt(P[0]), BigInt(P[1]), BigInt(P[2])};
    const BigInt F = S.equation(big);
    const BigInt grad = k == 0 ? 2 * big[0] - S.A + big[1] * big[2]
                               : (k == 1 ? 2 * big[1] - S.B + big[2] * big[0] : 2 * big[2] - S.C + big[0] * big[1]);
    const u64 f0 = reduce(F / BigInt(q), p), g = reduce(grad, p);
    u64 inv = 1;
    for (u64 e = p - 2, b = g; e; e >>= 1, b = b * b % p)
      if (e & 1) inv = inv * b % p;
    const u64 t = (p - f0 * inv % p) % p;
    P[k] = (P[k] + q * t) % qn;
  }
  return P;
}

Rational ResidueWeighting::weight_of(std::uint64_t index) const {
  auto it = std::lower_bound(support.begin(), support.end(), index);
  if (it == support.end() || *it != index) return Rational(0);
  return weight[static_cast<std::size_t>(it - support.begin())];
}

ResidueWeighting reference_measure(const FinitePointSet& set, std::span<const std::uint64_t> residues, bool excise) {
  if (set.kind() != SetKind::Markov) fail(ErrorKind::Usage, "reference measure needs a surface point set");
  std::vector<u64> idx(residues.begin(), residues.end());
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  ResidueWeighting w;
  w.level = set.level();
  u64 pt[3];
  for (const u64 i : idx) {
    if (i >= set.size()) fail(ErrorKind::Usage, "residue index outside the point set");
    set.point(i, pt);
    try {
      Rational m = symplectic_weight(pt, *set.surface(), set.prime(), set.level());
      w.total += m;
      w.support.push_back(i);
      w.weight.push_back(std::move(m));
    } catch (const Error& e) {
      if (!excise || e.kind() != ErrorKind::ChartSingular) throw;
      w.excised.push_back(i);
    }
  }
  if (w.support.empty()) fail(ErrorKind::ChartSingular, "no residue with a usable chart");
  return w;
}

bool pushforward_invariant(const ResidueWeighting& w, const FinitePointSet& set, const ResidueMap& g) {
  u64 pt[3], img[3];
  for (std::size_t k = 0; k < w.support.size(); ++k) {
    set.point(w.support[k], pt);
    g.apply(pt, img);
    const std::int64_t j = set.index_of(img);
    if (j < 0) return false;
    auto it = std::lower_bound(w.support.begin(), w.support.end(), static_cast<u64>(j));
    if (it == w.support.end() || *it != static_cast<u64>(j)) return false;
    if (w.weight[static_cast<std::size_t>(it - w.support.begin())] != w.weight[k]) return false;
  }
  return true;
}

Distribution as_distribution(const ResidueWeighting& w) {
  Distribution d;
  d.support = w.support;
  for (std::size_t i = 0; i < w.support.size(); ++i) d.mass.push_back(w.normalized(i));
  return d;
}

Rational tv_distance(const Distribution& a, const Distribution& b) {
  if (a.support != b.support || a.mass.size() != a.support.size() || b.mass.size() != b.support.size()) {
    fail(ErrorKind::Usage, "distributions live on different residue sets");
  }
  Rational sum = 0;
  for (std::size_t i = 0; i < a.mass.size(); ++i) sum += abs(a.mass[i] - b.mass[i]);
  return sum / 2;
}

std::uint64_t counter_random(std::uint64_t seed, std::uint64_t counter) {
  u64 z = seed + (counter + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

WalkResult random_walk(const MarkovSurface& S, const WalkConfig& cfg, const FinitePointSet& report_set) {
  if (report_set.kind() != SetKind::Markov) fail(ErrorKind::Usage, "walks report on a surface point set");
  if (report_set.level() > cfg.start_level) fail(ErrorKind::Usage, "report level exceeds the walk level");
  const std::uint32_t p = report_set.prime();
  const u64 q = checked_power(p, cfg.start_level);
  const u64 qr = report_set.modulus();

  // mu as integer numerators over a common denominator.
  BigInt den = 1;
  Rational msum = 0;
  for (const auto& m : cfg.mu) {
    if (m <= 0) fail(ErrorKind::Usage, "every generator weight must be positive");
    den = boost::integer::lcm(den, denominator(m));
    msum += m;
  }
  if (msum != 1) fail(ErrorKind::Usage, "generator weights must sum to 1");
  if (den > BigInt(u64{1} << 32)) fail(ErrorKind::Usage, "generator weight denominators too large");
  const u64 L = static_cast<u64>(den);
  std::array<u64, 3> cum{};
  u64 acc = 0;
  for (int i = 0; i < 3; ++i) {
    acc += static_cast<u64>(numerator(Rational(cfg.mu[i] * den)));
    cum[i] = acc;
  }
  const u64 limit = (~u64{0} / L) * L;

  std::vector<BigInt> start_big{BigInt(cfg.start[0]), BigInt(cfg.start[1]), BigInt(cfg.start[2])};
  if (!S.on_surface_mod(start_big, BigInt(q))) fail(ErrorKind::Usage, "start point is not on the surface");

  std::array<ResidueMap, 3> gens{residue_map(S.vieta(1), q), residue_map(S.vieta(2), q), residue_map(S.vieta(3), q)};
  WalkResult out;
  out.counts.assign(report_set.size(), 0);
  out.burn_in = cfg.effective_burn_in();
  u64 cur[3] = {cfg.start[0] % q, cfg.start[1] % q, cfg.start[2] % q}, nxt[3], red[3];
  u64 counter = 0;
  for (u64 t = 0;; ++t) {
    if (t >= out.burn_in) {
      for (int i = 0; i < 3; ++i) red[i] = cur[i] % qr;
      const std::int64_t j = report_set.index_of(red);
      if (j < 0) fail(ErrorKind::InternalInvariant, "walk left the surface");
      ++out.counts[static_cast<u64>(j)];
      ++out.samples;
    }
    if (t == cfg.steps) break;
    u64 r;
    do {
      r = counter_random(cfg.seed, counter++);
    } while (r >= limit);
    r %= L;
    const int g = r < cum[0] ? 0 : (r < cum[1] ? 1 : 2);
    gens[g].apply(cur, nxt);
    std::copy(nxt, nxt + 3, cur);
  }
  return out;
}

Distribution empirical_distribution(const WalkResult& walk, std::span<const std::uint64_t> support) {
  Distribution d;
  d.support.assign(support.begin(), support.end());
  std::sort(d.support.begin(), d.support.end());
  u64 inside = 0;
  for (const u64 i : d.support) {
    if (i >= walk.counts.size()) fail(ErrorKind::Usage, "support index outside the walk's set");
    inside += walk.counts[i];
  }
  if (inside != walk.samples) fail(ErrorKind::Usage, "walk visited residues outside the support");
  for (const u64 i : d.support) d.mass.emplace_back(BigInt(walk.counts[i]), BigInt(walk.samples));
  return d;
}

Rational stationarity_defect(const Distribution& nu, const FinitePointSet& set, std::span<const ResidueMap> gens,
                             const std::array<Rational, 3>& mu) {
  if (gens.size() != 3) fail(ErrorKind::Usage, "three generators expected");
  Distribution avg{nu.support, std::vector<Rational>(nu.support.size(), Rational(0))};
  u64 pt[3], img[3];
  for (std::size_t k = 0; k < nu.support.size(); ++k) {
    set.point(nu.support[k], pt);
    for (int g = 0; g < 3; ++g) {
      gens[g].apply(pt, img);
      const std::int64_t j = set.index_of(img);
      auto it = std::lower_bound(nu.support.begin(), nu.support.end(), static_cast<u64>(j));
      if (j < 0 || it == nu.support.end() || *it != static_cast<u64>(j)) {
        fail(ErrorKind::NotInvariant, "generator leaves the support");
      }
      avg.mass[static_cast<std::size_t>(it - nu.support.begin())] += mu[g] * nu.mass[k];
    }
  }
  return tv_distance(nu, avg);
}

int rational_valuation(const Rational& q, std::uint32_t p) {
  if (q == 0) return kZeroValuation;
  return valuation_of(BigInt(numerator(q)), p) - valuation_of(BigInt(denominator(q)), p);
}

EscapeTrace escape_test(const MarkovSurface& S, const RationalPoint& start, std::uint32_t p, std::size_t steps,
                        std::size_t max_bits) {
  if (!is_prime(p)) fail(ErrorKind::Configuration, std::to_string(p) + " is not prime");
  const Rational A(S.A), B(S.B), C(S.C), D(S.D);
  auto F = [&](const RationalPoint& P) {
    const auto& [x, y, z] = P;
    return x * x + y * y + z * z + x * y * z - A * x - B * y - C * z - D;
  };
  if (F(start) != 0) fail(ErrorKind::Usage, "start point is not on the surface");
  auto bits = [](const Rational& r) {
    const BigInt n = abs(numerator(r)), d = denominator(r);
    return std::max<std::size_t>(n == 0 ? 0 : msb(n), msb(d)) + 1;
  };
  EscapeTrace tr;
  RationalPoint P = start;
  for (std::size_t k = 0;; ++k) {
    int m = kZeroValuation;
    for (const auto& c : P) {
      if (bits(c) > max_bits) fail(ErrorKind::Budget, "coordinate exceeds the bit budget");
      m = std::min(m, rational_valuation(c, p));
    }
    tr.points.push_back(P);
    tr.min_valuation.push_back(m);
    if (m < 0) tr.bounded = false;
    if (k == steps) break;
    auto& [x, y, z] = P;
    y = B - z * x - y;
    x = A - y * z - x;
  }
  const auto& mv = tr.min_valuation;
  if (mv.size() >= 2 && mv[mv.size() - 1] < mv[mv.size() - 2]) {
    std::size_t k = mv.size() - 1;
    while (k > 0 && mv[k - 1] > mv[k]) --k;
    tr.onset = k;
  }
  return tr;
}

}  // namespace padyn
