#include "padyn/flow.hpp"

#include <algorithm>
#include <numeric>

namespace padyn {

namespace {

IntPoly derivative(const IntPoly& f, int i) {
  IntPoly d(f.nvars());
  for (const auto& [I, c] : f.terms()) {
    if (I[i] == 0) continue;
    MultiIndex J = I;
    --J[i];
    d.add_term(J, c * I[i]);
  }
  return d;
}

BigInt mod_floor(const BigInt& a, const BigInt& m) {
  BigInt r = a % m;
  if (r < 0) r += m;
  return r;
}

std::vector<BigInt> apply_mod(const IntPolyMap& g, const std::vector<BigInt>& x, const BigInt& q) {
  std::vector<BigInt> y = evaluate_map(g, x);
  for (auto& v : y) v = mod_floor(v, q);
  return y;
}

using Matrix = std::vector<std::vector<BigInt>>;

Matrix mat_mul(const Matrix& a, const Matrix& b, const BigInt& q) {
  const std::size_t n = a.size();
  Matrix c(n, std::vector<BigInt>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  for (auto& row : c)
    for (auto& v : row) v = mod_floor(v, q);
  return c;
}

Matrix mat_identity(std::size_t n) {
  Matrix m(n, std::vector<BigInt>(n, 0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

PadicInt determinant(const std::vector<std::vector<PadicInt>>& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  if (n == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  PadicInt det = a[0][0].zero();
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::vector<PadicInt>> minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<PadicInt> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != j) row.push_back(a[i][k]);
      minor.push_back(std::move(row));
    }
    const PadicInt term = a[0][j] * determinant(minor);
    det = (j % 2 == 0) ? det + term : det - term;
  }
  return det;
}

void for_each_subset(int n, int r, const std::function<bool(const std::vector<int>&)>& visit) {
  std::vector<int> idx(r);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    if (visit(idx)) return;
    int i = r - 1;
    while (i >= 0 && idx[i] == n - r + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
}

PadicVector at_digits(std::span<const PadicInt> x, int digits) {
  PadicVector y;
  y.reserve(x.size());
  for (const auto& v : x) y.push_back(v.with_digits(digits));
  return y;
}

FlowSeries build_flow_at(const TateMap& f, int N, int c) {
  const std::uint32_t p = f.prime();
  if (!is_flowable_level(c, p)) {
    fail(ErrorKind::NotFlowable, "f = id mod p^" + std::to_string(c) + " does not exceed 1/(p-1) for p = " +
                                     std::to_string(p));
  }
  FlowSeries F;
  F.p = p;
  F.target_digits = N;
  F.work_digits = f.digits();
  F.c = c;
  const FlowParameters params = flow_parameters(p, N, c);
  F.K = params.K;

  const int W = f.digits();
  const Slope rho = f.slope();
  int D;
  const bool affine = f.degree() <= 1 && f.trunc_val() >= kInfiniteValuation;
  if (affine || rho.is_unbounded()) {
    D = std::max(1, f.degree());
  } else if (rho.is_zero()) {
    fail(ErrorKind::UncontrolledTruncation, "the map has no positive slope certificate; cannot truncate its iterates");
  } else {
    // Monomials above degree D have valuation >= rho * D >= W.
    D = std::max(1, (W * rho.den + rho.num - 1) / rho.num);
  }
  F.degree_cap = D;
  F.f = f.with_degree_cap(D);

  F.deltas.push_back(TateMap::identity(p, W, f.size(), D));
  for (int k = 1; k <= F.K; ++k) {
    const TateMap& prev = F.deltas.back();
    TateMap next = compose(prev, F.f) - prev;
    const int need = std::min(c * k, next.precision());
    if (next.gauss_valuation() < need) {
      fail(ErrorKind::InternalInvariant, "Delta_" + std::to_string(k) + " has valuation " +
                                             std::to_string(next.gauss_valuation()) + " < " + std::to_string(need));
    }
    F.deltas.push_back(std::move(next));
  }
  return F;
}

FlowSeries identity_flow(const TateMap& f, int N) {
  FlowSeries F;
  F.p = f.prime();
  F.target_digits = N;
  F.work_digits = f.digits();
  F.c = f.digits();
  F.K = 0;
  F.degree_cap = 1;
  F.identity = true;
  F.f = TateMap::identity(f.prime(), f.digits(), f.size(), 1);
  F.deltas.push_back(F.f);
  return F;
}

bool is_identity(const TateMap& f) {
  if (f.trunc_val() < kInfiniteValuation) return false;
  for (int i = 0; i < f.size(); ++i) {
    const auto& terms = f[i].terms();
    if (terms.size() != 1 || terms.begin()->first != unit_index(i)) return false;
    const PadicInt& c = terms.begin()->second;
    if (c.residue() != 1 || c.precision() < c.digits()) return false;
  }
  return true;
}

}  // namespace

int congruence_level(const TateMap& f) {
  int c = f.precision();
  for (int i = 0; i < f.size(); ++i) {
    TatePoly x = TatePoly::variable(f.prime(), f.digits(), f.size(), std::max(1, f[i].degree_cap()), i);
    if (x.degree_cap() != f[i].degree_cap()) {
      // degree cap 0 cannot hold x_i; then f_i is a constant and c = 0.
      return 0;
    }
    c = std::min(c, (f[i] - x).gauss_valuation());
  }
  return c;
}

bool is_flowable_level(int c, std::uint32_t p) { return p == 2 ? c >= 2 : c >= 1; }

bool is_flowable(const TateMap& f) { return is_flowable_level(congruence_level(f), f.prime()); }

TateMap rescale(const TateMap& f, int r) {
  if (r < 1) fail(ErrorKind::Usage, "rescale exponent must be positive");
  std::vector<TatePoly> out;
  for (int i = 0; i < f.size(); ++i) {
    PadicPoly q(f.size());
    for (const auto& [I, c] : f[i].terms()) {
      const int d = total_degree(I);
      if (d == 0) {
        if (c.valuation() < 2 * r) {
          fail(ErrorKind::NotRescalable, "constant term of component " + std::to_string(i) + " has valuation " +
                                             std::to_string(c.valuation()) + " < " + std::to_string(2 * r));
        }
        q.set_term(I, c.divided_by_p_power(r));
      } else if (d == 1) {
        PadicInt delta = I[i] == 1 ? c - c.one() : c;
        if (delta.valuation() < 2 * r) {
          fail(ErrorKind::NotRescalable,
               "linear part of component " + std::to_string(i) + " is not the identity mod p^" + std::to_string(2 * r));
        }
        q.set_term(I, c);
      } else {
        q.set_term(I, c.times_p_power(r * (d - 1)));
      }
    }
    // A missing x_i term means the linear part is 0 there, which is never id mod p^2r.
    if (!q.find(unit_index(i))) {
      fail(ErrorKind::NotRescalable, "linear part of component " + std::to_string(i) + " lacks x_" + std::to_string(i));
    }
    const Slope s = f[i].slope();
    const Slope shifted = s.is_unbounded() ? s : Slope{s.num + r * s.den, s.den};
    TatePoly t = TatePoly::from_padic(q, f[i].degree_cap(), shifted);
    if (f[i].trunc_val() < kInfiniteValuation) t = t.with_precision(std::max(0, f[i].trunc_val() - r));
    out.push_back(std::move(t));
  }
  return TateMap(std::move(out));
}

IntPolyMap rescale_int(const IntPolyMap& f, std::uint32_t p, int r) {
  if (r < 1) fail(ErrorKind::Usage, "rescale exponent must be positive");
  const BigInt pr = pow(BigInt(p), r);
  const BigInt p2r = pr * pr;
  IntPolyMap out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    IntPoly q(f[i].nvars());
    bool has_linear = false;
    for (const auto& [I, c] : f[i].terms()) {
      const int d = total_degree(I);
      if (d == 0) {
        if (c % p2r != 0) fail(ErrorKind::NotRescalable, "constant term is not divisible by p^2r");
        q.add_term(I, c / pr);
      } else if (d == 1) {
        const bool diag = I[i] == 1;
        has_linear = has_linear || diag;
        if ((diag ? c - 1 : c) % p2r != 0) {
          fail(ErrorKind::NotRescalable, "linear part is not the identity mod p^2r");
        }
        q.add_term(I, c);
      } else {
        q.add_term(I, c * pow(pr, static_cast<unsigned>(d - 1)));
      }
    }
    if (!has_linear) fail(ErrorKind::NotRescalable, "linear part is not the identity mod p^2r");
    out.push_back(std::move(q));
  }
  return out;
}

FlowParameters flow_parameters(std::uint32_t p, int N, int c) {
  if (!is_flowable_level(c, p)) fail(ErrorKind::NotFlowable, "congruence level too small for p = " + std::to_string(p));
  FlowParameters fp;
  fp.c = c;
  // (c - 1/(p-1)) K >= N with the exact rational.
  const long long num = static_cast<long long>(N) * (p - 1);
  const long long den = static_cast<long long>(c) * (p - 1) - 1;
  fp.K = static_cast<int>((num + den - 1) / den);
  fp.guard = ceil_log(static_cast<std::uint64_t>(fp.K), p) + static_cast<int>((fp.K + p - 2) / (p - 1));
  fp.work_digits = N + fp.guard;
  return fp;
}

FlowSeries build_flow(const TateMap& f, int N) {
  if (f.digits() < N) fail(ErrorKind::Usage, "map is known to fewer digits than the target precision");
  if (is_identity(f)) return identity_flow(f, N);
  return build_flow_at(f, N, congruence_level(f));
}

FlowSeries build_flow(const MapFactory& source, int N) {
  const TateMap f0 = source(N);
  if (is_identity(f0)) return identity_flow(source(N), N);
  const int c = congruence_level(f0);
  if (!is_flowable_level(c, f0.prime())) {
    fail(ErrorKind::NotFlowable, "f = id mod p^" + std::to_string(c) + " only; flowing needs c > 1/(p-1)");
  }
  const FlowParameters params = flow_parameters(f0.prime(), N, c);
  const TateMap f = source(params.work_digits);
  // The level is a coefficient property; the value at higher precision can
  // only be larger, and c is what the Delta certificates use.
  return build_flow_at(f, N, c);
}

FlowSeries build_flow(const IntPolyMap& f, std::uint32_t p, int N) {
  const int deg = std::max(1, map_degree(f));
  return build_flow([&](int digits) { return TateMap::from_int(f, p, digits, deg); }, N);
}

PadicVector lift_point(const FlowSeries& F, std::span<const PadicInt> x) {
  if (static_cast<int>(x.size()) != F.dimension()) fail(ErrorKind::Usage, "point has the wrong dimension");
  return at_digits(x, F.work_digits);
}

PadicVector flow_eval(const FlowSeries& F, const PadicInt& t, std::span<const PadicInt> x) {
  const PadicVector xw = lift_point(F, x);
  if (F.identity) return at_digits(xw, F.target_digits);
  const PadicInt tw = t.with_digits(F.work_digits);
  PadicVector acc(xw.size(), xw.front().zero());
  for (int k = 0; k <= F.K; ++k) {
    const PadicInt b = binom_padic(tw, static_cast<std::uint64_t>(k));
    const PadicVector dk = F.deltas[k].evaluate(xw);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += b * dk[i];
  }
  const int tail = F.tail_valuation();
  PadicVector out;
  for (auto& v : acc) out.push_back(v.with_precision(std::min(v.precision(), tail)).with_digits(F.target_digits));
  return out;
}

PadicVector flow_eval(const FlowSeries& F, std::int64_t n, std::span<const PadicInt> x) {
  return flow_eval(F, PadicInt::from_integer(n, F.p, F.work_digits), x);
}

TateMap flow_map(const FlowSeries& F, const PadicInt& t) {
  if (F.identity) return F.f;
  const PadicInt tw = t.with_digits(F.work_digits);
  TateMap acc = F.deltas[0].scaled(binom_padic(tw, 0));
  for (int k = 1; k <= F.K; ++k) acc = acc + F.deltas[k].scaled(binom_padic(tw, static_cast<std::uint64_t>(k)));
  return acc.with_precision(F.tail_valuation());
}

TateMap theta_field(const FlowSeries& F) {
  const int m = F.dimension();
  if (F.identity) {
    std::vector<TatePoly> zero;
    for (int i = 0; i < m; ++i) zero.emplace_back(F.p, F.target_digits, m, 1);
    return TateMap(std::move(zero));
  }
  std::vector<TatePoly> acc;
  for (int i = 0; i < m; ++i) acc.emplace_back(F.p, F.work_digits, m, F.degree_cap);
  TateMap theta(std::move(acc));
  for (int k = 1; k <= F.K; ++k) {
    const int v = valuation_of(static_cast<std::uint64_t>(k), F.p);
    const std::int64_t unit = static_cast<std::int64_t>(k / checked_power(F.p, v));
    PadicInt coef = PadicInt::from_integer(unit, F.p, F.work_digits).inverse();
    if (k % 2 == 0) coef = -coef;
    theta = theta + F.deltas[k].divided_by_p_power(v).scaled(coef);
  }
  // Omitted terms k > K have valuation >= ck - v_p(k).
  int tail = kInfiniteValuation;
  for (long long k = F.K + 1;; ++k) {
    const int bound = static_cast<int>(F.c * k) - valuation_of(static_cast<std::uint64_t>(k), F.p);
    tail = std::min(tail, bound);
    if (F.c * k - floor_log(static_cast<std::uint64_t>(k), F.p) > tail) break;
  }
  return theta.with_precision(tail).with_digits(F.target_digits);
}

PointFn point_fn(const TateMap& f) {
  return [f](std::span<const PadicInt> x) {
    const int digits = x.front().digits();
    PadicVector y = f.evaluate(at_digits(x, f.digits()));
    return at_digits(y, digits);
  };
}

PadicVector inverse_point(const PointFn& f, std::span<const PadicInt> x) {
  PadicVector y(x.begin(), x.end());
  const int digits = x.front().digits();
  for (int iter = 0; iter <= digits + 2; ++iter) {
    const PadicVector fy = f(y);
    PadicVector next;
    bool same = true;
    for (std::size_t i = 0; i < y.size(); ++i) {
      next.push_back(x[i] - (fy[i] - y[i]));
      same = same && next[i] == y[i];
    }
    if (same) {
      // f(y) = x holds to the precision carried by the arithmetic.
      return next;
    }
    y = std::move(next);
  }
  fail(ErrorKind::InternalInvariant, "pointwise inverse did not converge; the map is not id mod p");
}

PadicVector iterate_map(const PointFn& f, std::span<const PadicInt> x, std::int64_t n) {
  PadicVector y(x.begin(), x.end());
  for (std::int64_t i = 0; i < n; ++i) y = f(y);
  for (std::int64_t i = 0; i > n; --i) y = inverse_point(f, y);
  return y;
}

int vector_valuation_of_difference(std::span<const PadicInt> a, std::span<const PadicInt> b) {
  if (a.size() != b.size()) fail(ErrorKind::Usage, "dimension mismatch");
  int v = kInfiniteValuation;
  for (std::size_t i = 0; i < a.size(); ++i) v = std::min(v, (a[i] - b[i]).valuation());
  return v;
}

InterpolationReport verify_interpolation(const FlowSeries& F, std::span<const PadicInt> x, int n_max, int level,
                                         const PointFn& oracle) {
  const PointFn f = oracle ? oracle : point_fn(F.f);
  InterpolationReport report;
  report.level = level;
  const PadicVector x0(x.begin(), x.end());
  PadicVector forward = x0, backward = x0;
  auto check = [&](std::int64_t n, const PadicVector& expected) {
    PadicVector got = flow_eval(F, n, x0);
    ++report.checked;
    bool ok = true;
    for (std::size_t i = 0; i < got.size(); ++i) {
      const PadicInt e = expected[i].with_digits(got[i].digits());
      ok = ok && got[i].precision() >= level && e.precision() >= level && got[i].congruent(e, level);
    }
    if (!ok) report.mismatches.push_back({n, got, expected});
  };
  check(0, x0);
  for (int n = 1; n <= n_max; ++n) {
    forward = f(forward);
    check(n, forward);
    backward = inverse_point(f, backward);
    check(-n, backward);
  }
  return report;
}

std::set<Residue> trajectory(const FlowSeries& F, std::span<const PadicInt> x, int level) {
  std::set<Residue> out;
  const std::uint64_t count = checked_power(F.p, level);
  for (std::uint64_t t = 0; t < count; ++t) {
    const PadicVector y = flow_eval(F, static_cast<std::int64_t>(t), x);
    Residue r;
    for (const auto& v : y) {
      if (v.precision() < level) fail(ErrorKind::PrecisionExhausted, "flow value known to fewer digits than the level");
      r.push_back(v.residue_mod_power(level));
    }
    out.insert(std::move(r));
  }
  return out;
}

int contraction_valuation(const PointFn& f, std::span<const PadicInt> x, int j) {
  const PadicVector y = iterate_map(f, x, static_cast<std::int64_t>(checked_power(x.front().prime(), j)));
  return vector_valuation_of_difference(y, x);
}

int finite_difference_agreement(const PointFn& f, const TateMap& theta, std::span<const PadicInt> x, int j) {
  const std::uint32_t p = x.front().prime();
  const PadicVector y = iterate_map(f, x, static_cast<std::int64_t>(checked_power(p, j)));
  PadicVector quotient;
  for (std::size_t i = 0; i < y.size(); ++i) {
    quotient.push_back((y[i] - x[i]).divided_by_p_power(j).with_digits(theta.digits()));
  }
  const PadicVector th = theta.evaluate(at_digits(x, theta.digits()));
  return vector_valuation_of_difference(th, quotient);
}

TangentRank tangent_rank(std::span<const PadicVector> vectors) {
  TangentRank out;
  const int n = static_cast<int>(vectors.size());
  if (n == 0) {
    out.certified = true;
    return out;
  }
  const int m = static_cast<int>(vectors.front().size());
  const int full = std::min(n, m);
  for (int r = full; r >= 1; --r) {
    bool found = false;
    for_each_subset(n, r, [&](const std::vector<int>& rows) {
      for_each_subset(m, r, [&](const std::vector<int>& cols) {
        std::vector<std::vector<PadicInt>> a;
        for (int i : rows) {
          std::vector<PadicInt> row;
          for (int j : cols) row.push_back(vectors[i][j]);
          a.push_back(std::move(row));
        }
        const PadicInt det = determinant(a);
        found = det.valuation() < det.precision();
        return found;
      });
      return found;
    });
    if (found) {
      out.rank = r;
      out.certified = r == full;
      return out;
    }
  }
  return out;
}

std::pair<std::uint64_t, std::uint64_t> kernel_power(const IntPolyMap& g, std::span<const BigInt> center,
                                                     std::uint32_t p, int r, std::uint64_t budget) {
  const BigInt q = pow(BigInt(p), 2 * r);
  const std::size_t m = g.size();
  std::vector<BigInt> x0;
  for (const auto& c : center) x0.push_back(mod_floor(c, q));
  std::vector<std::vector<IntPoly>> jac(m, std::vector<IntPoly>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) jac[i][j] = derivative(g[i], static_cast<int>(j));

  Matrix A = mat_identity(m);
  std::vector<BigInt> x = x0;
  std::uint64_t L = 0;
  do {
    Matrix J(m, std::vector<BigInt>(m));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) J[i][j] = mod_floor(jac[i][j].evaluate<BigInt>(x, BigInt(0)), q);
    A = mat_mul(J, A, q);
    x = apply_mod(g, x, q);
    if (++L > budget) fail(ErrorKind::Budget, "orbit of the center did not close within the budget");
  } while (x != x0);

  Matrix B = A;
  std::uint64_t e = 1;
  const Matrix I = mat_identity(m);
  while (B != I) {
    B = mat_mul(B, A, q);
    if (++e > budget) fail(ErrorKind::Budget, "Jacobian order exceeds the budget");
  }
  return {L, e};
}

KernelConjugate kernel_conjugate(const IntPolyMap& g, std::span<const BigInt> center, std::uint32_t p, int r,
                                 int digits) {
  const auto [L, e] = kernel_power(g, center, p, r);
  const int m = static_cast<int>(g.size());
  const int D = std::max(map_degree(g), (digits + r - 1) / r);
  const BigInt pr = pow(BigInt(p), r);
  const BigInt qx = pow(BigInt(p), digits + r);

  std::vector<BigInt> x;
  for (const auto& c : center) x.push_back(mod_floor(c, qx));
  const std::vector<BigInt> x0 = x;

  TateMap chain = TateMap::identity(p, digits, m, D);
  for (std::uint64_t i = 0; i < L; ++i) {
    const std::vector<BigInt> next = apply_mod(g, x, qx);
    IntPolyMap shift;
    for (int j = 0; j < m; ++j) {
      shift.push_back(IntPoly::constant(m, x[j]) + IntPoly::variable(m, j, BigInt(1)).scaled(pr));
    }
    IntPolyMap chart = compose_maps(g, shift);
    for (int j = 0; j < m; ++j) {
      IntPoly h(m);
      chart[j] -= IntPoly::constant(m, next[j]);
      for (const auto& [I, c] : chart[j].terms()) {
        if (c % pr != 0) fail(ErrorKind::InternalInvariant, "chart map is not divisible by p^r");
        h.add_term(I, c / pr);
      }
      chart[j] = std::move(h);
    }
    chain = compose(TateMap::from_int(chart, p, digits, D), chain);
    x = next;
  }
  // Recenter: the chain maps the disk at x_0 to the disk at x_L = x_0 mod p^2r.
  std::vector<TatePoly> comps;
  for (int j = 0; j < m; ++j) {
    const BigInt diff = x[j] - x0[j];
    if (diff % pr != 0) fail(ErrorKind::InternalInvariant, "orbit did not return to the center's disk");
    const PadicInt shift = PadicInt::from_big(diff / pr, p, digits);
    comps.push_back(chain[j] + TatePoly::constant(p, digits, m, D, shift));
  }
  const TateMap Q(std::move(comps));
  TateMap G = Q;
  for (std::uint64_t k = 1; k < e; ++k) G = compose(Q, G);

  const int c = congruence_level(G);
  if (c < std::min(r, G.precision())) {
    fail(ErrorKind::InternalInvariant, "kernel element is only id mod p^" + std::to_string(c));
  }
  KernelConjugate out;
  out.map = std::move(G);
  out.power = L * e;
  out.cycle_length = L;
  out.jacobian_order = e;
  out.r = r;
  return out;
}

PadicVector kernel_conjugate_point(const IntPolyMap& g, std::span<const BigInt> center, std::uint32_t p, int r,
                                   std::uint64_t power, std::span<const PadicInt> y) {
  const int digits = y.front().digits();
  const BigInt pr = pow(BigInt(p), r);
  const BigInt qx = pow(BigInt(p), digits + r);
  std::vector<BigInt> x;
  for (std::size_t i = 0; i < y.size(); ++i) x.push_back(mod_floor(center[i] + pr * BigInt(y[i].residue()), qx));
  for (std::uint64_t k = 0; k < power; ++k) x = apply_mod(g, x, qx);
  PadicVector out;
  const int prec = precision_of(y);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const BigInt diff = mod_floor(x[i] - center[i], qx);
    if (diff % pr != 0) fail(ErrorKind::InternalInvariant, "g^M does not preserve the chart disk");
    out.push_back(PadicInt::from_big(diff / pr, p, digits).with_precision(prec));
  }
  return out;
}

}  // namespace padyn
