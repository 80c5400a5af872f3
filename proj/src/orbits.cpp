#include "padyn/orbits.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

namespace padyn {

namespace {

using u64 = std::uint64_t;
using i128 = __int128;

u64 powmod(u64 a, u64 e, u64 q) {
  u64 r = 1 % q;
  while (e) {
    if (e & 1) r = mulmod_u64(r, a, q);
    a = mulmod_u64(a, a, q);
    e >>= 1;
  }
  return r;
}

u64 invmod(u64 a, u64 q) {
  std::int64_t t = 0, nt = 1;
  std::int64_t r = static_cast<std::int64_t>(q), nr = static_cast<std::int64_t>(a % q);
  while (nr != 0) {
    const std::int64_t k = r / nr;
    std::tie(t, nt) = std::make_pair(nt, t - k * nt);
    std::tie(r, nr) = std::make_pair(nr, r - k * nr);
  }
  if (r != 1) fail(ErrorKind::NonUnit, "residue is not invertible");
  return static_cast<u64>(t < 0 ? t + static_cast<std::int64_t>(q) : t);
}

u64 reduce(const BigInt& c, u64 q) {
  BigInt r = c % q;
  if (r < 0) r += q;
  return static_cast<u64>(r);
}

u64 reduce_signed(i128 v, u64 q) {
  i128 r = v % static_cast<i128>(q);
  if (r < 0) r += q;
  return static_cast<u64>(r);
}

std::string point_text(const u64* pt, int dim) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << pt[i];
  os << ")";
  return os.str();
}

/// Polynomial map with coefficients reduced mod q.
struct CompiledMap {
  struct Term {
    u64 coef;
    MultiIndex exp;
  };
  static constexpr int kTable = 64;
  u64 q = 0;
  int arity = 0;
  std::array<int, kMaxVars> max_deg{};
  std::vector<std::vector<Term>> comps;

  void apply(const u64* in, u64* out) const {
    u64 pw[kMaxVars][kTable + 1];
    for (int v = 0; v < arity; ++v) {
      pw[v][0] = 1 % q;
      const int top = std::min(max_deg[v], kTable);
      for (int e = 1; e <= top; ++e) pw[v][e] = mulmod_u64(pw[v][e - 1], in[v], q);
    }
    for (int i = 0; i < arity; ++i) {
      u64 acc = 0;
      for (const Term& t : comps[i]) {
        u64 m = t.coef;
        for (int v = 0; v < arity; ++v) {
          const int e = t.exp[v];
          if (e == 0) continue;
          m = mulmod_u64(m, e <= kTable ? pw[v][e] : powmod(in[v], static_cast<u64>(e), q), q);
        }
        acc += m;
        if (acc >= q) acc -= q;
      }
      out[i] = acc;
    }
  }
};

}  // namespace

FinitePointSet FinitePointSet::affine(std::uint32_t p, int level, int dim) {
  if (!is_prime(p)) fail(ErrorKind::Configuration, std::to_string(p) + " is not prime");
  if (dim < 1 || dim > kMaxVars) fail(ErrorKind::Usage, "affine dimension must be 1..4");
  FinitePointSet s;
  s.kind_ = SetKind::Affine;
  s.p_ = p;
  s.level_ = level;
  s.q_ = checked_power(p, level);
  s.dim_ = dim;
  BigInt size = pow(BigInt(s.q_), dim);
  if (size > BigInt(std::numeric_limits<std::uint32_t>::max())) fail(ErrorKind::Budget, "point set too large");
  s.size_ = static_cast<u64>(size);
  return s;
}

FinitePointSet FinitePointSet::torus(std::uint32_t p, int level) {
  if (!is_prime(p)) fail(ErrorKind::Configuration, std::to_string(p) + " is not prime");
  FinitePointSet s;
  s.kind_ = SetKind::Torus;
  s.p_ = p;
  s.level_ = level;
  s.q_ = checked_power(p, level);
  s.dim_ = 2;
  const u64 phi = s.q_ - s.q_ / p;
  if (BigInt(phi) * phi > BigInt(std::numeric_limits<std::uint32_t>::max())) fail(ErrorKind::Budget, "torus too large");
  s.size_ = phi * phi;
  return s;
}

FinitePointSet FinitePointSet::markov(const MarkovSurface& S, std::uint32_t p, int level, std::uint64_t cap) {
  if (!is_prime(p)) fail(ErrorKind::Configuration, std::to_string(p) + " is not prime");
  if (level < 1) fail(ErrorKind::Usage, "level must be positive");
  FinitePointSet s;
  s.kind_ = SetKind::Markov;
  s.p_ = p;
  s.level_ = level;
  s.q_ = checked_power(p, level);
  s.dim_ = 3;
  s.surface_ = S;
  if (s.q_ > (u64{1} << 20)) fail(ErrorKind::Budget, "surface modulus too large for point keys");

  auto key = [](u64 x, u64 y, u64 z, u64 q) { return x + q * (y + q * z); };
  const i128 A = static_cast<i128>(reduce(S.A, s.q_)), B = static_cast<i128>(reduce(S.B, s.q_)),
             C = static_cast<i128>(reduce(S.C, s.q_)), D = static_cast<i128>(reduce(S.D, s.q_));

  // Level 1: solve z^2 + (xy - C) z + (x^2 + y^2 - Ax - By - D) = 0 over F_p.
  std::vector<u64> pts;
  {
    const u64 P = p;
    std::vector<std::int64_t> root(P, -1);
    for (u64 a = 0; a < P; ++a) {
      const u64 sq = a * a % P;
      if (root[sq] < 0) root[sq] = static_cast<std::int64_t>(a);
    }
    const u64 inv2 = p == 2 ? 0 : invmod(2, P);
    for (u64 x = 0; x < P; ++x)
      for (u64 y = 0; y < P; ++y) {
        const i128 X = x, Y = y;
        const u64 b = reduce_signed(X * Y - C, P);
        const u64 c = reduce_signed(X * X + Y * Y - A * X - B * Y - D, P);
        if (p == 2) {
          for (u64 z = 0; z < 2; ++z)
            if ((z * z + b * z + c) % 2 == 0) pts.push_back(key(x, y, z, P));
          continue;
        }
        const u64 disc = reduce_signed(static_cast<i128>(b) * b - 4 * static_cast<i128>(c), P);
        if (root[disc] < 0) continue;
        const u64 r = static_cast<u64>(root[disc]);
        const u64 z1 = mulmod_u64((P - b + r) % P, inv2, P);
        const u64 z2 = mulmod_u64((2 * P - b - r) % P, inv2, P);
        pts.push_back(key(x, y, z1, P));
        if (z2 != z1) pts.push_back(key(x, y, z2, P));
      }
    if (pts.size() > cap) fail(ErrorKind::Budget, "surface point count exceeds the cap");
  }

  // Lift: F(P + q t) = F(P) + q grad F(P) . t mod pq, since 2 * level >= level + 1.
  u64 qc = p;
  for (int l = 2; l <= level; ++l) {
    const u64 qn = qc * p;
    std::vector<u64> next;
    for (const u64 k : pts) {
      const u64 x = k % qc, y = (k / qc) % qc, z = k / (qc * qc);
      const i128 X = x, Y = y, Z = z;
      const i128 F = X * X + Y * Y + Z * Z + X * Y * Z - A * X - B * Y - C * Z - D;
      const u64 Fq = reduce_signed(F, qn);
      if (Fq % qc != 0) fail(ErrorKind::InternalInvariant, "lifted point is not on the surface");
      const u64 f0 = Fq / qc % p;
      const u64 g[3] = {reduce_signed(2 * X + Y * Z - A, p), reduce_signed(2 * Y + X * Z - B, p),
                        reduce_signed(2 * Z + X * Y - C, p)};
      auto emit = [&](u64 t0, u64 t1, u64 t2) { next.push_back(key(x + qc * t0, y + qc * t1, z + qc * t2, qn)); };
      int pivot = -1;
      for (int i = 0; i < 3; ++i)
        if (g[i] != 0) {
          pivot = i;
          break;
        }
      if (pivot < 0) {
        if (f0 == 0)
          for (u64 a = 0; a < p; ++a)
            for (u64 b = 0; b < p; ++b)
              for (u64 c = 0; c < p; ++c) emit(a, b, c);
      } else {
        const u64 inv = invmod(g[pivot], p);
        const int o1 = (pivot + 1) % 3, o2 = (pivot + 2) % 3;
        for (u64 a = 0; a < p; ++a)
          for (u64 b = 0; b < p; ++b) {
            const u64 rest = (f0 + g[o1] * a + g[o2] * b) % p;
            const u64 tp = mulmod_u64((p - rest) % p, inv, p);
            u64 t[3];
            t[pivot] = tp;
            t[o1] = a;
            t[o2] = b;
            emit(t[0], t[1], t[2]);
          }
      }
      if (next.size() > cap) fail(ErrorKind::Budget, "surface point count exceeds the cap");
    }
    pts = std::move(next);
    qc = qn;
  }
  std::sort(pts.begin(), pts.end());
  s.keys_ = std::move(pts);
  s.size_ = s.keys_.size();
  return s;
}

void FinitePointSet::point(std::uint64_t index, std::uint64_t* out) const {
  switch (kind_) {
    case SetKind::Affine:
      for (int i = 0; i < dim_; ++i) {
        out[i] = index % q_;
        index /= q_;
      }
      return;
    case SetKind::Torus: {
      const u64 phi = q_ - q_ / p_;
      const u64 i0 = index % phi, i1 = index / phi;
      out[0] = i0 + 1 + i0 / (p_ - 1);
      out[1] = i1 + 1 + i1 / (p_ - 1);
      return;
    }
    case SetKind::Markov: {
      const u64 k = keys_[index];
      out[0] = k % q_;
      out[1] = (k / q_) % q_;
      out[2] = k / (q_ * q_);
      return;
    }
  }
}

std::int64_t FinitePointSet::index_of(const std::uint64_t* pt) const {
  for (int i = 0; i < dim_; ++i)
    if (pt[i] >= q_) return -1;
  switch (kind_) {
    case SetKind::Affine: {
      u64 idx = 0;
      for (int i = dim_ - 1; i >= 0; --i) idx = idx * q_ + pt[i];
      return static_cast<std::int64_t>(idx);
    }
    case SetKind::Torus: {
      if (pt[0] % p_ == 0 || pt[1] % p_ == 0) return -1;
      const u64 phi = q_ - q_ / p_;
      return static_cast<std::int64_t>((pt[0] - pt[0] / p_ - 1) + phi * (pt[1] - pt[1] / p_ - 1));
    }
    case SetKind::Markov: {
      const u64 k = pt[0] + q_ * (pt[1] + q_ * pt[2]);
      auto it = std::lower_bound(keys_.begin(), keys_.end(), k);
      if (it == keys_.end() || *it != k) return -1;
      return it - keys_.begin();
    }
  }
  return -1;
}

std::string FinitePointSet::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case SetKind::Affine: os << "affine(p=" << p_ << ",level=" << level_ << ",dim=" << dim_ << ")"; break;
    case SetKind::Torus: os << "torus(p=" << p_ << ",level=" << level_ << ")"; break;
    case SetKind::Markov: os << "surface(" << surface_->to_string() << ",p=" << p_ << ",level=" << level_ << ")"; break;
  }
  return os.str();
}

ResidueMap residue_map(const PolyAuto& f, std::uint64_t q) {
  auto cm = std::make_shared<CompiledMap>();
  cm->q = q;
  cm->arity = f.arity();
  for (const auto& comp : f.forward()) {
    std::vector<CompiledMap::Term> terms;
    for (const auto& [I, c] : comp.terms()) {
      const u64 r = reduce(c, q);
      if (r == 0) continue;
      terms.push_back({r, I});
      for (int v = 0; v < cm->arity; ++v) cm->max_deg[v] = std::max<int>(cm->max_deg[v], I[v]);
    }
    cm->comps.push_back(std::move(terms));
  }
  return ResidueMap(f.arity(), f.label(), [cm](const u64* in, u64* out) { cm->apply(in, out); });
}

ResidueMap residue_map(const MonomialSpec& m, std::uint32_t p, int level) {
  const u64 q = checked_power(p, level);
  const u64 alpha = reduce(m.alpha, q), beta = reduce(m.beta, q);
  if (alpha % p == 0 || beta % p == 0) fail(ErrorKind::NonUnit, "monomial translation must be a unit pair");
  const std::int64_t a = m.a, b = m.b, c = m.c, d = m.d;
  auto term = [q](u64 v, std::int64_t e, u64 inv) {
    return e >= 0 ? powmod(v, static_cast<u64>(e), q) : powmod(inv, static_cast<u64>(-e), q);
  };
  return ResidueMap(2, m.to_string(), [=](const u64* in, u64* out) {
    const u64 i0 = invmod(in[0], q), i1 = invmod(in[1], q);
    out[0] = mulmod_u64(alpha, mulmod_u64(term(in[0], a, i0), term(in[1], b, i1), q), q);
    out[1] = mulmod_u64(beta, mulmod_u64(term(in[0], c, i0), term(in[1], d, i1), q), q);
  });
}

OrbitPartition::OrbitPartition(std::uint64_t n) {
  if (n > std::numeric_limits<std::uint32_t>::max()) fail(ErrorKind::Budget, "too many points for the partition");
  parent_.resize(n);
  for (u64 i = 0; i < n; ++i) parent_[i] = static_cast<std::uint32_t>(i);
}

std::uint64_t OrbitPartition::find(std::uint64_t i) {
  while (parent_[i] != i) {
    parent_[i] = parent_[parent_[i]];
    i = parent_[i];
  }
  return i;
}

void OrbitPartition::unite(std::uint64_t a, std::uint64_t b) {
  const u64 ra = find(a), rb = find(b);
  if (ra == rb) return;
  if (ra < rb) {
    parent_[rb] = static_cast<std::uint32_t>(ra);
  } else {
    parent_[ra] = static_cast<std::uint32_t>(rb);
  }
}

void OrbitPartition::finalize() {
  // Parents never exceed their child, so one ascending pass resolves every root.
  for (u64 i = 0; i < parent_.size(); ++i) parent_[i] = parent_[parent_[i]];
  sizes_.assign(parent_.size(), 0);
  for (u64 i = 0; i < parent_.size(); ++i) ++sizes_[parent_[i]];
}

OrbitPartition orbit_partition(const FinitePointSet& set, std::span<const ResidueMap> generators) {
  OrbitPartition part(set.size());
  u64 pt[kMaxVars], img[kMaxVars];
  for (const auto& g : generators) {
    if (g.arity() != set.dim()) fail(ErrorKind::Usage, "generator " + g.label() + " has the wrong arity for the set");
  }
  for (u64 i = 0; i < set.size(); ++i) {
    set.point(i, pt);
    for (const auto& g : generators) {
      g.apply(pt, img);
      const std::int64_t j = set.index_of(img);
      if (j < 0) {
        fail(ErrorKind::NotInvariant, g.label() + " maps " + point_text(pt, set.dim()) + " to " +
                                          point_text(img, set.dim()) + " outside " + set.describe());
      }
      part.unite(i, static_cast<u64>(j));
    }
  }
  part.finalize();
  return part;
}

OrbitStats orbit_stats(const OrbitPartition& partition) {
  OrbitStats s;
  for (u64 i = 0; i < partition.size(); ++i) {
    if (partition.root(i) != i) continue;
    const u64 n = partition.orbit_size(i);
    ++s.orbit_count;
    s.max_size = std::max(s.max_size, n);
    if (n == 1) ++s.fixed_points;
    ++s.histogram[n];
  }
  return s;
}

OrbitStats cycle_stats(const FinitePointSet& set, const ResidueMap& g) {
  std::vector<bool> seen(set.size(), false);
  OrbitStats s;
  u64 pt[kMaxVars], img[kMaxVars];
  for (u64 start = 0; start < set.size(); ++start) {
    if (seen[start]) continue;
    u64 len = 0, cur = start;
    do {
      seen[cur] = true;
      ++len;
      set.point(cur, pt);
      g.apply(pt, img);
      const std::int64_t j = set.index_of(img);
      if (j < 0) fail(ErrorKind::NotInvariant, g.label() + " leaves " + set.describe());
      cur = static_cast<u64>(j);
      if (cur != start && seen[cur]) fail(ErrorKind::InternalInvariant, g.label() + " is not a bijection of the set");
    } while (cur != start);
    ++s.orbit_count;
    s.max_size = std::max(s.max_size, len);
    if (len == 1) ++s.fixed_points;
    ++s.histogram[len];
  }
  return s;
}

std::uint64_t max_cycle_length(const FinitePointSet& set, const ResidueMap& g) { return cycle_stats(set, g).max_size; }

std::string scan_csv_header() { return "p,level,orbit_count,max_orbit,fixed_points,ratio,seconds"; }

std::string format_scan_row(const ScanRow& r, bool timing) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%u,%d,%llu,%llu,%llu,%.6f,%s", r.p, r.level,
                static_cast<unsigned long long>(r.orbit_count), static_cast<unsigned long long>(r.max_orbit),
                static_cast<unsigned long long>(r.fixed_points), r.ratio,
                timing ? std::to_string(r.seconds).c_str() : "0");
  return buf;
}

namespace {
double p_log_p(std::uint32_t p) { return static_cast<double>(p) * std::log(static_cast<double>(p)); }
}  // namespace

ScanRow scan_set(const FinitePointSet& set, std::span<const ResidueMap> generators) {
  const auto t0 = std::chrono::steady_clock::now();
  const OrbitPartition part = orbit_partition(set, generators);
  const OrbitStats st = orbit_stats(part);
  ScanRow row;
  row.p = set.prime();
  row.level = set.level();
  row.orbit_count = st.orbit_count;
  row.max_orbit = st.max_size;
  row.fixed_points = st.fixed_points;
  row.ratio = static_cast<double>(st.max_size) / p_log_p(set.prime());
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

ScanRow scan_prime(const MapSpec& spec, std::uint32_t p, int level) {
  if (spec.generators.empty()) fail(ErrorKind::Usage, "no generators");
  const FinitePointSet set = spec.surface ? FinitePointSet::markov(*spec.surface, p, level)
                                          : FinitePointSet::affine(p, level, spec.generators.front().arity());
  std::vector<ResidueMap> gens;
  for (const auto& g : spec.generators) gens.push_back(residue_map(g, set.modulus()));
  return scan_set(set, gens);
}

RatioResult max_orbit_ratio(const PolyAuto& g, std::uint32_t p) {
  const ScanRow row = scan_cyclic(g, p, 1);
  return {p, row.max_orbit, row.ratio};
}

ScanRow scan_cyclic(const PolyAuto& g, std::uint32_t p, int level) {
  const auto t0 = std::chrono::steady_clock::now();
  const FinitePointSet set = FinitePointSet::affine(p, level, g.arity());
  const OrbitStats st = cycle_stats(set, residue_map(g, set.modulus()));
  ScanRow row;
  row.p = p;
  row.level = level;
  row.orbit_count = st.orbit_count;
  row.max_orbit = st.max_size;
  row.fixed_points = st.fixed_points;
  row.ratio = static_cast<double>(st.max_size) / p_log_p(p);
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

std::vector<std::uint32_t> primes_between(std::uint32_t lo, std::uint32_t hi) {
  std::vector<std::uint32_t> out;
  if (hi < 2 || lo > hi) return out;
  std::vector<bool> composite(hi + 1, false);
  for (std::uint64_t i = 2; i <= hi; ++i) {
    if (composite[i]) continue;
    if (i >= lo) out.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= hi; j += i) composite[j] = true;
  }
  return out;
}

std::vector<RefinementRow> refinement_probe(const FinitePointSet& coarse, std::span<const ResidueMap> coarse_gens,
                                            const FinitePointSet& fine, std::span<const ResidueMap> fine_gens) {
  if (coarse.prime() != fine.prime() || coarse.kind() != fine.kind() || coarse.dim() != fine.dim() ||
      fine.level() != coarse.level() + 1) {
    fail(ErrorKind::Usage, "refinement needs the same kind of set one level apart");
  }
  const OrbitPartition pc = orbit_partition(coarse, coarse_gens);
  const OrbitPartition pf = orbit_partition(fine, fine_gens);
  const u64 qc = coarse.modulus();
  std::vector<u64> preimage(coarse.size(), 0);
  std::vector<std::int64_t> first_lift(coarse.size(), -1);
  std::vector<std::pair<u64, u64>> pairs;
  pairs.reserve(fine.size());
  u64 pt[kMaxVars];
  for (u64 j = 0; j < fine.size(); ++j) {
    fine.point(j, pt);
    for (int i = 0; i < fine.dim(); ++i) pt[i] %= qc;
    const std::int64_t c = coarse.index_of(pt);
    if (c < 0) fail(ErrorKind::InternalInvariant, "a fine point does not reduce into the coarse set");
    const u64 rc = pc.root(static_cast<u64>(c));
    ++preimage[rc];
    if (first_lift[c] < 0) first_lift[c] = static_cast<std::int64_t>(j);
    pairs.emplace_back(rc, pf.root(j));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<u64> fibers(coarse.size(), 0);
  for (const auto& [rc, rf] : pairs) ++fibers[rc];

  std::vector<RefinementRow> out;
  for (u64 r = 0; r < coarse.size(); ++r) {
    if (pc.root(r) != r) continue;
    RefinementRow row;
    row.root = r;
    row.orbit_size = pc.orbit_size(r);
    row.preimage_size = preimage[r];
    row.fiber_orbit_count = fibers[r];
    const std::int64_t lift = first_lift[r];
    row.is_full_preimage = lift >= 0 && pf.orbit_size(static_cast<u64>(lift)) == preimage[r];
    out.push_back(row);
  }
  return out;
}

std::string refinement_csv_header() {
  return "p,level,orbit_root,orbit_size,preimage_size,fiber_orbit_count,is_full_preimage";
}

std::string format_refinement_row(std::uint32_t p, int level, const RefinementRow& r) {
  std::ostringstream os;
  os << p << "," << level << "," << r.root << "," << r.orbit_size << "," << r.preimage_size << ","
     << r.fiber_orbit_count << "," << (r.is_full_preimage ? 1 : 0);
  return os.str();
}

}  // namespace padyn
