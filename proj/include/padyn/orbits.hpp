#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "padyn/surface.hpp"

namespace padyn {

/// x * y mod q for q < 2^62.
inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  if (q <= (std::uint64_t{1} << 32)) return a * b % q;
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % q);
}

enum class SetKind { Affine, Markov, Torus };

/// A finite set of residue points with a dense index.
class FinitePointSet {
 public:
  /// (Z/p^level)^dim.
  static FinitePointSet affine(std::uint32_t p, int level, int dim = 2);
  /// S(Z/p^level): solved in z over each (x, y) at level 1, then lifted
  /// level by level (Hensel at smooth residues, whole fiber at singular ones).
  static FinitePointSet markov(const MarkovSurface& S, std::uint32_t p, int level,
                               std::uint64_t cap = 100000000);
  /// ((Z/p^level)^x)^2.
  static FinitePointSet torus(std::uint32_t p, int level);

  SetKind kind() const { return kind_; }
  std::uint32_t prime() const { return p_; }
  int level() const { return level_; }
  std::uint64_t modulus() const { return q_; }
  int dim() const { return dim_; }
  std::uint64_t size() const { return size_; }
  const std::optional<MarkovSurface>& surface() const { return surface_; }

  void point(std::uint64_t index, std::uint64_t* out) const;
  /// -1 when the point is not in the set.
  std::int64_t index_of(const std::uint64_t* pt) const;
  std::string describe() const;

 private:
  SetKind kind_ = SetKind::Affine;
  std::uint32_t p_ = 0;
  int level_ = 0;
  std::uint64_t q_ = 0;
  int dim_ = 0;
  std::uint64_t size_ = 0;
  std::optional<MarkovSurface> surface_;
  /// Markov points as x + q (y + q z), sorted.
  std::vector<std::uint64_t> keys_;
};

inline FinitePointSet enumerate_surface_points(const MarkovSurface& S, std::uint32_t p, int level,
                                               std::uint64_t cap = 100000000) {
  return FinitePointSet::markov(S, p, level, cap);
}

/// A map on residue points, evaluated coordinatewise mod q.
class ResidueMap {
 public:
  using Fn = std::function<void(const std::uint64_t*, std::uint64_t*)>;
  ResidueMap(int arity, std::string label, Fn fn) : arity_(arity), label_(std::move(label)), fn_(std::move(fn)) {}

  int arity() const { return arity_; }
  const std::string& label() const { return label_; }
  void apply(const std::uint64_t* in, std::uint64_t* out) const { fn_(in, out); }

 private:
  int arity_;
  std::string label_;
  Fn fn_;
};

/// Forward map of f reduced mod q.
ResidueMap residue_map(const PolyAuto& f, std::uint64_t q);
/// Monomial torus map v -> (alpha v1^a v2^b, beta v1^c v2^d) mod p^level.
ResidueMap residue_map(const MonomialSpec& m, std::uint32_t p, int level);

/// Union-find over indices whose root is always the smallest index of its class.
class OrbitPartition {
 public:
  explicit OrbitPartition(std::uint64_t n);

  std::uint64_t size() const { return parent_.size(); }
  std::uint64_t find(std::uint64_t i);
  void unite(std::uint64_t a, std::uint64_t b);
  /// Compresses every path; afterwards root() is a plain lookup.
  void finalize();
  std::uint64_t root(std::uint64_t i) const { return parent_[i]; }
  /// Number of points in the orbit of i (after finalize()).
  std::uint64_t orbit_size(std::uint64_t i) const { return sizes_[parent_[i]]; }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> sizes_;
};

/// Orbits of the group generated by the maps. A generator leaving the set
/// raises NotInvariant naming the point.
OrbitPartition orbit_partition(const FinitePointSet& set, std::span<const ResidueMap> generators);

struct OrbitStats {
  std::uint64_t orbit_count = 0;
  std::uint64_t max_size = 0;
  /// Points fixed by the whole group (singleton orbits).
  std::uint64_t fixed_points = 0;
  std::map<std::uint64_t, std::uint64_t> histogram;
};
OrbitStats orbit_stats(const OrbitPartition& partition);

/// Cycle statistics of a single bijection of the set, by walking cycles.
OrbitStats cycle_stats(const FinitePointSet& set, const ResidueMap& g);
/// Longest cycle of a single bijection of the set.
std::uint64_t max_cycle_length(const FinitePointSet& set, const ResidueMap& g);

struct ScanRow {
  std::uint32_t p = 0;
  int level = 1;
  std::uint64_t orbit_count = 0;
  std::uint64_t max_orbit = 0;
  std::uint64_t fixed_points = 0;
  /// max_orbit / (p ln p).
  double ratio = 0;
  double seconds = 0;
};

std::string scan_csv_header();
/// seconds is printed as 0 unless timing is requested, keeping output byte-stable.
std::string format_scan_row(const ScanRow& row, bool timing);

/// One scan row for the group generated by the maps acting on the set.
ScanRow scan_set(const FinitePointSet& set, std::span<const ResidueMap> generators);
/// Convenience: the generators from a map spec, acting on (Z/p^level)^m or on
/// S(Z/p^level) when the MapSpec names a surface.
ScanRow scan_prime(const MapSpec& spec, std::uint32_t p, int level);

/// max orbit of <g> on (Z/p)^m divided by p ln p.
struct RatioResult {
  std::uint32_t p = 0;
  std::uint64_t max_orbit = 0;
  double ratio = 0;
};
RatioResult max_orbit_ratio(const PolyAuto& g, std::uint32_t p);
/// Scan row for the cyclic group of g on (Z/p^level)^m, by cycle walking.
ScanRow scan_cyclic(const PolyAuto& g, std::uint32_t p, int level = 1);

std::vector<std::uint32_t> primes_between(std::uint32_t lo, std::uint32_t hi);

struct RefinementRow {
  std::uint64_t root = 0;
  std::uint64_t orbit_size = 0;
  std::uint64_t preimage_size = 0;
  std::uint64_t fiber_orbit_count = 0;
  /// The level-(l+1) orbit of the first lift of the orbit's root covers the
  /// whole preimage. Heuristic evidence for a clopen orbit closure, not proof.
  bool is_full_preimage = false;
};
/// Compares the orbits at level l with those at level l + 1 over each level-l orbit.
std::vector<RefinementRow> refinement_probe(const FinitePointSet& coarse, std::span<const ResidueMap> coarse_gens,
                                            const FinitePointSet& fine, std::span<const ResidueMap> fine_gens);
std::string refinement_csv_header();
std::string format_refinement_row(std::uint32_t p, int level, const RefinementRow& row);

}  // namespace padyn
