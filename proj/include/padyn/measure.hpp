#pragma once

#include <array>
#include <climits>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "padyn/orbits.hpp"
#include "padyn/surface.hpp"

namespace padyn {

/// Valuations of the chart denominators (Fx, Fy, Fz) = (2x - A + yz, 2y - B + zx, 2z - C + xy)
/// at a point mod p^level; a denominator that vanishes mod p^level reports `level`.
std::array<int, 3> chart_valuations(const std::uint64_t* pt, const MarkovSurface& S, std::uint32_t p, int level);

/// Mass of the residue disk of the point under |Omega|: p^(v - 2 level) with v the
/// smallest chart valuation. ChartSingular when every denominator vanishes mod p^level.
Rational symplectic_weight(const std::uint64_t* pt, const MarkovSurface& S, std::uint32_t p, int level);

/// Hensel lift of a surface point mod p^from to one mod p^to, adjusting the
/// coordinate whose chart denominator is a unit. ChartSingular at points with
/// no unit denominator.
std::array<std::uint64_t, 3> lift_surface_point(const MarkovSurface& S, const std::uint64_t* pt, std::uint32_t p,
                                                int from, int to);

/// Nonnegative rational weights on residues of a FinitePointSet, keyed by dense index.
struct ResidueWeighting {
  int level = 0;
  /// Sorted set indices.
  std::vector<std::uint64_t> support;
  std::vector<Rational> weight;
  Rational total = 0;
  /// Indices dropped because they are ChartSingular.
  std::vector<std::uint64_t> excised;

  Rational normalized(std::size_t i) const { return weight[i] / total; }
  /// Weight of a set index, 0 outside the support.
  Rational weight_of(std::uint64_t index) const;
};

/// Normalized symplectic measure on the given residues of a surface point set.
/// With excise = false a ChartSingular residue is an error naming the point.
ResidueWeighting reference_measure(const FinitePointSet& set, std::span<const std::uint64_t> residues,
                                   bool excise = false);

/// Whether g_* w = w, i.e. w(g(i)) = w(i) on the support and g maps the support into itself.
bool pushforward_invariant(const ResidueWeighting& w, const FinitePointSet& set, const ResidueMap& g);

/// Probability vector over a fixed sorted support of set indices.
struct Distribution {
  std::vector<std::uint64_t> support;
  std::vector<Rational> mass;
};
Distribution as_distribution(const ResidueWeighting& w);

/// Half the L1 distance. Usage error unless both share the same support.
Rational tv_distance(const Distribution& a, const Distribution& b);

/// 64-bit output of a counter-based generator: splitmix64 finalizer of seed and counter.
std::uint64_t counter_random(std::uint64_t seed, std::uint64_t counter);

struct WalkConfig {
  /// Probabilities of s1, s2, s3; each positive, summing to 1.
  std::array<Rational, 3> mu{Rational(1, 3), Rational(1, 3), Rational(1, 3)};
  /// Start point mod p^start_level on the surface.
  std::array<std::uint64_t, 3> start{};
  int start_level = 1;
  std::uint64_t steps = 0;
  /// Defaults to steps / 10.
  std::optional<std::uint64_t> burn_in;
  std::uint64_t seed = 0;

  std::uint64_t effective_burn_in() const { return burn_in.value_or(steps / 10); }
};

struct WalkResult {
  /// Visit counts indexed by the report set.
  std::vector<std::uint64_t> counts;
  std::uint64_t samples = 0;
  std::uint64_t burn_in = 0;
};

/// Random walk X_{t+1} = s_i(X_t), i drawn from mu, iterated mod p^start_level.
/// Records the reductions of X_t into report_set for burn_in <= t <= steps.
WalkResult random_walk(const MarkovSurface& S, const WalkConfig& cfg, const FinitePointSet& report_set);

/// Empirical frequencies restricted to a support (usually the start's orbit).
Distribution empirical_distribution(const WalkResult& walk, std::span<const std::uint64_t> support);

/// TV(nu, sum_i mu_i (s_i)_* nu): zero exactly for stationary nu.
Rational stationarity_defect(const Distribution& nu, const FinitePointSet& set, std::span<const ResidueMap> gens,
                             const std::array<Rational, 3>& mu);

using RationalPoint = std::array<Rational, 3>;

/// Valuation reported for 0.
inline constexpr int kZeroValuation = INT_MAX;
/// v_p of a rational.
int rational_valuation(const Rational& q, std::uint32_t p);

struct EscapeTrace {
  /// Points f^0(x), ..., f^steps(x) with f = s1 o s2.
  std::vector<RationalPoint> points;
  /// Minimum coordinate valuation at each step.
  std::vector<int> min_valuation;
  /// Smallest k from which min_valuation decreases strictly to the end, if the
  /// last step decreases.
  std::optional<std::size_t> onset;
  /// Every valuation along the trace is nonnegative.
  bool bounded = true;
};

/// Exact rational iteration of s1 o s2. Usage error if the start is off the
/// surface; Budget error if a coordinate needs more than max_bits bits.
EscapeTrace escape_test(const MarkovSurface& S, const RationalPoint& start, std::uint32_t p, std::size_t steps,
                        std::size_t max_bits = 1 << 16);

}  // namespace padyn
