#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "padyn/padic.hpp"
#include "padyn/polynomial.hpp"

namespace padyn {

inline constexpr int kDefaultWordDegree = 256;

class PolyAuto;
PolyAuto compose_word(std::span<const PolyAuto> word, int arity, int max_degree = kDefaultWordDegree);

/// Polynomial automorphism with an explicit inverse; both directions have
/// integer coefficients.
class PolyAuto {
 public:
  PolyAuto() = default;
  /// Checks forward o backward = backward o forward = id symbolically.
  PolyAuto(IntPolyMap forward, IntPolyMap backward, std::string label);

  static PolyAuto identity(int arity);

  int arity() const { return static_cast<int>(forward_.size()); }
  const IntPolyMap& forward() const { return forward_; }
  const IntPolyMap& backward() const { return backward_; }
  const std::string& label() const { return label_; }
  int degree() const { return map_degree(forward_); }
  /// Hénon maps with deg P < 2 are kept but flagged.
  bool elliptic() const { return elliptic_; }
  void set_elliptic(bool e) { elliptic_ = e; }

  PolyAuto inverse() const;
  std::vector<BigInt> apply(std::span<const BigInt> x) const { return evaluate_map(forward_, x); }
  std::vector<BigInt> apply_inverse(std::span<const BigInt> x) const { return evaluate_map(backward_, x); }

 private:
  friend PolyAuto compose_word(std::span<const PolyAuto> word, int arity, int max_degree);
  static PolyAuto unchecked(IntPolyMap forward, IntPolyMap backward, std::string label);

  IntPolyMap forward_;
  IntPolyMap backward_;
  std::string label_;
  bool elliptic_ = false;
};

/// (x, y) -> (y + P(x), x), P given by coefficients c0, c1, ... (low first).
PolyAuto henon(const std::vector<BigInt>& P);
/// Integer matrix with det = +-1.
PolyAuto linear_auto(const BigInt& a, const BigInt& b, const BigInt& c, const BigInt& d);
/// Triangular map whose component i is +-x_i plus a polynomial in variables
/// solved before it; the inverse is found by back substitution.
PolyAuto triangular(const IntPolyMap& f, std::string label);
/// Explicit forward and backward maps.
PolyAuto poly_auto(const IntPolyMap& f, const IntPolyMap& b, std::string label);

/// word[0] o word[1] o ... (the last one acts first). An empty word is the
/// identity in `arity` variables. Fails with DegreeOverflow past max_degree.
PolyAuto compose_word(std::span<const PolyAuto> word, int arity, int max_degree);
/// deg(f^n) for n = 1..n_max.
std::vector<int> degree_sequence(const PolyAuto& f, int n_max, int max_degree = 4096);

/// x^2 + y^2 + z^2 + xyz = Ax + By + Cz + D.
struct MarkovSurface {
  BigInt A = 0, B = 0, C = 0, D = 0;

  /// Left side minus right side.
  BigInt equation(std::span<const BigInt> point) const;
  bool on_surface(std::span<const BigInt> point) const { return equation(point) == 0; }
  /// Modulo q.
  bool on_surface_mod(std::span<const BigInt> point, const BigInt& q) const;
  bool on_surface(std::span<const PadicInt> point) const;
  /// Vieta involution s_i, i in {1, 2, 3}: s_1(x, y, z) = (-x + A - yz, y, z).
  PolyAuto vieta(int i) const;
  std::string to_string() const;
};

/// The linear part M_z and translation T_z of s_1 o s_2 on the fiber z = const.
struct ParabolicData {
  std::array<std::array<BigInt, 2>, 2> M;
  std::array<BigInt, 2> T;
  BigInt trace;
  BigInt det;
};
/// M_z = [[z^2 - 1, z], [-z, -1]], T_z = (A - Bz, B). Fails with
/// InternalInvariant if det != 1 or trace != z^2 - 2.
ParabolicData parabolic_matrix(const MarkovSurface& S, const BigInt& z);

struct NeedsQuadraticExtension {
  /// z^2 - 4, which is not a square in Q_p.
  PadicInt discriminant;
};
/// Root of alpha + 1/alpha = z^2 - 2 taken from 2 alpha = (z^2 - 2) + s z
/// sqrt(z^2 - 4), s = +-1. Both roots are units here; the one with the
/// smaller residue is returned. p = 2 is Unsupported.
std::variant<PadicInt, NeedsQuadraticExtension> eigenvalue_alpha(const PadicInt& z);

enum class Verdict { Yes, No, Unknown };

struct FiniteOrderReport {
  Verdict verdict = Verdict::Unknown;
  /// Order of the matching root of unity when verdict == Yes.
  std::uint64_t order = 0;
  /// Digits to which the match was checked.
  int precision = 0;
};
/// Whether r = zeta + 1/zeta for a root of unity zeta in a quadratic extension
/// of Q_p. Candidates: Teichmüller traces (orders dividing p^2 - 1), found by
/// iterating r -> V_{p^2}(r) with V_n the Lucas recurrence, plus the traces
/// 1 and -1 of the cube and sixth roots of unity when p = 3.
FiniteOrderReport is_finite_order_mobius(const PadicInt& r);

/// v -> (alpha v_1^a v_2^b, beta v_1^c v_2^d), det [[a, b], [c, d]] = +-1.
struct MonomialAuto {
  std::int64_t a = 1, b = 0, c = 0, d = 1;
  PadicInt alpha, beta;

  MonomialAuto() = default;
  MonomialAuto(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d, PadicInt alpha, PadicInt beta);
  std::int64_t det() const { return a * d - b * c; }
};
PadicVector monomial_apply(const MonomialAuto& M, std::span<const PadicInt> v);

/// Integer data of a monomial map, before choosing p and a precision.
struct MonomialSpec {
  std::int64_t a = 1, b = 0, c = 0, d = 1;
  BigInt alpha = 1, beta = 1;

  MonomialAuto at(std::uint32_t p, int digits) const;
  std::string to_string() const;
};
/// "monomial:a,b,c,d" with optional "@alpha,beta".
MonomialSpec parse_monomial_spec(const std::string& text);

/// -(v_1 + 1/v_1, v_2 + 1/v_2, v_1 v_2 + 1/(v_1 v_2)), on x^2 + y^2 + z^2 + xyz = 4.
std::array<PadicInt, 3> cayley_project(std::span<const PadicInt> v);

/// u^(p-1) = 1 to the known precision. p = 2 is Unsupported.
bool torsion_test(const PadicInt& u);

/// Lucas sequence V_n(r) = zeta^n + zeta^-n, by doubling.
PadicInt lucas_v(const PadicInt& r, std::uint64_t n);

/// Named maps used by the experiments.
namespace builtin {
/// g(x, y) = (y + x^2 + 5, -x), also called g1.
PolyAuto bgs_g();
/// h0(x, y) = (2x + y, x + y).
PolyAuto bgs_h0();
/// g2(x, y) = (-y, x + y^3 + 2).
PolyAuto bgs_g2();
/// g3 = g2 o h0 o g1.
PolyAuto bgs_g3();
/// h0 o g o h0^-1.
PolyAuto bgs_conjugate();
}  // namespace builtin

/// A parsed map specification: the generators and, for Vieta maps, the surface.
struct MapSpec {
  std::vector<PolyAuto> generators;
  std::optional<MarkovSurface> surface;
  std::string text;
};

/// Grammar (brackets optional around argument lists):
///   henon:c0,c1,...          (x, y) -> (y + P(x), x)
///   linear:a,b,c,d           integer matrix, det +-1
///   elem:f1,f2,...           triangular map, e.g. elem:x+9 or elem:x+y^2,-y
///   poly:f1,f2;g1,g2         forward and inverse given explicitly
///   vieta:i@markov:A,B,C,D   one Vieta involution
///   markov:A,B,C,D           all three Vieta involutions
///   word:s1∘s2∘...           composition (also written with '|'), last acts first
///   bgs-henon                the pair g, h0 o g o h0^-1
///   bgs-henon:NAME           one of g1, g2, g3, h0, conj
/// Errors are Parse errors that give the character position.
MapSpec parse_map_spec(const std::string& text);

/// A single map for the flow engine: `map:f1,f2,...` (any polynomial map, no
/// inverse needed) or the forward map of a one-generator spec.
IntPolyMap parse_flow_map(const std::string& text);

}  // namespace padyn
