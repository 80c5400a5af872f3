#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "padyn/padic.hpp"
#include "padyn/polynomial.hpp"
#include "padyn/tate.hpp"

namespace padyn {

/// Largest c with f_i - x_i of Gauss valuation >= c for all i, capped at the
/// precision of f. Read off coefficients, never from sampled values.
int congruence_level(const TateMap& f);

/// c >= 1 for odd p, c >= 2 for p = 2 (c must exceed 1/(p-1)).
bool is_flowable(const TateMap& f);
bool is_flowable_level(int c, std::uint32_t p);

/// x -> p^-r f(p^r x). Requires the constant part to have valuation >= 2r and
/// the linear part to be the identity mod p^2r, else NotRescalable. The
/// constant term loses r digits of precision.
TateMap rescale(const TateMap& f, int r);
/// Exact version over the integers.
IntPolyMap rescale_int(const IntPolyMap& f, std::uint32_t p, int r);

/// Produces the map to flow at a requested working precision.
using MapFactory = std::function<TateMap(int digits)>;
/// A pointwise map, used for independent oracles.
using PointFn = std::function<PadicVector(std::span<const PadicInt>)>;

/// Truncation order and guard digits for target precision N and level c.
struct FlowParameters {
  int c = 0;
  int K = 0;
  int guard = 0;
  int work_digits = 0;
};
FlowParameters flow_parameters(std::uint32_t p, int N, int c);

/// Mahler data of a flowable map: deltas[k] = (T_f - Id)^k id.
struct FlowSeries {
  std::uint32_t p = 0;
  int target_digits = 0;
  int work_digits = 0;
  int c = 0;
  int K = 0;
  int degree_cap = 0;
  bool identity = false;
  TateMap f;
  std::vector<TateMap> deltas;

  int dimension() const { return f.size(); }
  /// Valuation bound of the omitted Mahler terms k > K.
  int tail_valuation() const { return c * (K + 1); }
};

/// Uses f at its own working precision (guard digits must already be there).
FlowSeries build_flow(const TateMap& f, int N);
/// Builds f at N plus guard digits.
FlowSeries build_flow(const MapFactory& source, int N);
FlowSeries build_flow(const IntPolyMap& f, std::uint32_t p, int N);

/// Phi^t(x) = sum_k binom(t, k) Delta_k(x), returned at the target precision.
/// The precision of each coordinate is what is certified.
PadicVector flow_eval(const FlowSeries& F, const PadicInt& t, std::span<const PadicInt> x);
/// Integer time; negative n uses the representative p^N' + n at working precision.
PadicVector flow_eval(const FlowSeries& F, std::int64_t n, std::span<const PadicInt> x);

/// The series Phi^t = sum_k binom(t, k) Delta_k at working precision.
TateMap flow_map(const FlowSeries& F, const PadicInt& t);

/// Theta_f = sum_{k=1..K} (-1)^(k-1)/k Delta_k, at the target precision; its
/// precision includes the tail bound min_{k>K} (ck - v_p(k)).
TateMap theta_field(const FlowSeries& F);

/// Point at the flow's working precision.
PadicVector lift_point(const FlowSeries& F, std::span<const PadicInt> x);

/// f^n by plain iteration; negative n inverts f pointwise with the
/// contraction y <- x - (f(y) - y), valid when f = id mod p.
PadicVector iterate_map(const PointFn& f, std::span<const PadicInt> x, std::int64_t n);
PadicVector inverse_point(const PointFn& f, std::span<const PadicInt> x);
PointFn point_fn(const TateMap& f);

struct InterpolationMismatch {
  std::int64_t n = 0;
  PadicVector flow;
  PadicVector oracle;
};
struct InterpolationReport {
  int checked = 0;
  int level = 0;
  std::vector<InterpolationMismatch> mismatches;
  bool ok() const { return mismatches.empty(); }
};

/// flow_eval(F, n, x) = f^n(x) mod p^level for |n| <= n_max. The oracle
/// defaults to plain iteration of F.f.
InterpolationReport verify_interpolation(const FlowSeries& F, std::span<const PadicInt> x, int n_max, int level,
                                         const PointFn& oracle = {});

using Residue = std::vector<std::uint64_t>;
/// {Phi^t(x) mod p^level : t in Z/p^level}.
std::set<Residue> trajectory(const FlowSeries& F, std::span<const PadicInt> x, int level);

/// min_i v(a_i - b_i), saturated at the smaller precision.
int vector_valuation_of_difference(std::span<const PadicInt> a, std::span<const PadicInt> b);

/// v(f^(p^j)(x) - x).
int contraction_valuation(const PointFn& f, std::span<const PadicInt> x, int j);
/// v(Theta(x) - (f^(p^j)(x) - x)/p^j), with Theta evaluated as given.
int finite_difference_agreement(const PointFn& f, const TateMap& theta, std::span<const PadicInt> x, int j);

struct TangentRank {
  int rank = 0;
  /// The rank equals the number of vectors or the dimension.
  bool certified = false;
};
/// Rank of the span of field values at one point. A rank r is counted only if
/// some r x r minor is nonzero to its known precision.
TangentRank tangent_rank(std::span<const PadicVector> vectors);

/// The element g^M of the kernel of reduction mod p^(2r) at a point, read in
/// the chart y -> center + p^r y: G(y) = p^-r (g^M(center + p^r y) - center).
struct KernelConjugate {
  TateMap map;
  std::uint64_t power = 0;
  std::uint64_t cycle_length = 0;
  std::uint64_t jacobian_order = 0;
  int r = 0;
};

/// Smallest M with g^M(center) = center and Dg^M(center) = I mod p^(2r),
/// returned as (cycle length, order of the Jacobian of g^L).
std::pair<std::uint64_t, std::uint64_t> kernel_power(const IntPolyMap& g, std::span<const BigInt> center,
                                                     std::uint32_t p, int r, std::uint64_t budget = 100000000);

/// Builds G through a chain of chart maps along the orbit of the center, each
/// with slope r, so truncation stays certified at every step.
KernelConjugate kernel_conjugate(const IntPolyMap& g, std::span<const BigInt> center, std::uint32_t p, int r,
                                 int digits);
/// G(y) evaluated by iterating g on integers mod p^(digits + r). Independent
/// of the series construction.
PadicVector kernel_conjugate_point(const IntPolyMap& g, std::span<const BigInt> center, std::uint32_t p, int r,
                                   std::uint64_t power, std::span<const PadicInt> y);

}  // namespace padyn
