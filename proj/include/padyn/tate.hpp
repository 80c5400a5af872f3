#pragma once

#include <climits>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "padyn/padic.hpp"
#include "padyn/polynomial.hpp"

namespace padyn {

/// Stands for an infinite valuation bound (nothing discarded).
inline constexpr int kInfiniteValuation = INT_MAX / 4;

/// Lower bound rho with v(a_I) >= rho * (|I| - 1) for every coefficient of
/// degree >= 2. Series of this shape are p^-rho F(p^rho x) with F integral, a
/// class closed under composition; any monomial of degree > D then has
/// valuation >= rho * D. Stored as num/den; den == 0 means unbounded (affine).
struct Slope {
  int num = 0;
  int den = 0;

  static Slope unbounded() { return {1, 0}; }
  static Slope zero() { return {0, 1}; }
  bool is_unbounded() const { return den == 0; }
  bool is_zero() const { return den != 0 && num == 0; }
  /// ceil(rho * D), or kInfiniteValuation when unbounded.
  int bound_at_degree(int D) const;
  friend bool operator<(const Slope& a, const Slope& b);
  friend Slope min(const Slope& a, const Slope& b) { return b < a ? b : a; }
  std::string to_string() const;
};

using PadicPoly = Polynomial<PadicInt>;

class TateMap;

/// A power series of which the monomials of degree <= degree_cap are stored
/// and the rest is controlled by trunc_val: the true series differs from the
/// stored one by something of Gauss valuation >= trunc_val.
class TatePoly {
 public:
  TatePoly() = default;
  TatePoly(std::uint32_t p, int digits, int nvars, int degree_cap);

  /// Exact integer polynomial; fails with DegreeOverflow if deg f > degree_cap.
  static TatePoly from_int(const IntPoly& f, std::uint32_t p, int digits, int degree_cap);
  static TatePoly from_padic(const PadicPoly& f, int degree_cap, Slope slope);
  static TatePoly constant(std::uint32_t p, int digits, int nvars, int degree_cap, const PadicInt& c);
  static TatePoly variable(std::uint32_t p, int digits, int nvars, int degree_cap, int i);

  std::uint32_t prime() const { return p_; }
  int digits() const { return digits_; }
  int nvars() const { return poly_.nvars(); }
  int degree_cap() const { return degree_cap_; }
  int trunc_val() const { return trunc_val_; }
  const Slope& slope() const { return slope_; }
  const PadicPoly& poly() const { return poly_; }
  const PadicPoly::Terms& terms() const { return poly_.terms(); }
  int degree() const { return poly_.degree(); }

  /// Digits to which the whole series is known: min of trunc_val and the
  /// coefficient precisions, capped at N.
  int precision() const;
  /// min_I v(a_I), saturated at precision().
  int gauss_valuation() const;
  bool is_zero() const { return gauss_valuation() >= precision(); }
  /// Slope read off the stored coefficients.
  Slope coefficient_slope() const;

  PadicInt coefficient(const MultiIndex& I) const;
  PadicInt zero_scalar() const { return PadicInt::from_integer(0, p_, digits_); }

  TatePoly operator-() const;
  friend TatePoly operator+(const TatePoly& a, const TatePoly& b);
  friend TatePoly operator-(const TatePoly& a, const TatePoly& b);
  /// Product truncated at the common degree cap; trunc_val drops to the
  /// smallest valuation among discarded terms.
  friend TatePoly operator*(const TatePoly& a, const TatePoly& b);
  TatePoly scaled(const PadicInt& s) const;
  /// Exact division of every coefficient by p^k.
  TatePoly divided_by_p_power(int k) const;
  /// Lower all coefficient precisions (and trunc_val) to at most `prec`.
  TatePoly with_precision(int prec) const;
  /// Same data at a smaller working precision.
  TatePoly with_digits(int digits) const;

  /// Value at z; its precision includes the truncation bound.
  PadicInt evaluate(std::span<const PadicInt> z) const;

  std::string to_text(int component = -1) const;

 private:
  friend class TateMap;
  friend TatePoly compose(const TatePoly& g, const TateMap& f);
  void check_compatible(const TatePoly& o) const;

  std::uint32_t p_ = 0;
  int digits_ = 0;
  int degree_cap_ = 0;
  int trunc_val_ = kInfiniteValuation;
  Slope slope_ = Slope::unbounded();
  PadicPoly poly_;
};

/// m components sharing nvars = m, degree cap and working precision.
class TateMap {
 public:
  TateMap() = default;
  explicit TateMap(std::vector<TatePoly> components);

  static TateMap identity(std::uint32_t p, int digits, int nvars, int degree_cap);
  static TateMap from_int(const IntPolyMap& f, std::uint32_t p, int digits, int degree_cap);

  int size() const { return static_cast<int>(comps_.size()); }
  const TatePoly& operator[](int i) const { return comps_[i]; }
  const std::vector<TatePoly>& components() const { return comps_; }
  std::uint32_t prime() const { return comps_.front().prime(); }
  int digits() const { return comps_.front().digits(); }
  int degree_cap() const { return comps_.front().degree_cap(); }
  int degree() const;

  int precision() const;
  int gauss_valuation() const;
  int trunc_val() const;
  Slope slope() const;
  Slope coefficient_slope() const;

  friend TateMap operator+(const TateMap& a, const TateMap& b);
  friend TateMap operator-(const TateMap& a, const TateMap& b);
  TateMap scaled(const PadicInt& s) const;
  TateMap divided_by_p_power(int k) const;
  TateMap with_precision(int prec) const;
  TateMap with_digits(int digits) const;
  /// Re-express with another degree cap (only lowering discards terms).
  TateMap with_degree_cap(int degree_cap) const;

  PadicVector evaluate(std::span<const PadicInt> z) const;

  std::string to_text() const;

 private:
  std::vector<TatePoly> comps_;
};

/// g o f with certified truncation at g's degree cap. Discarded terms are
/// bounded through the slope class; a discard with zero slope raises
/// UncontrolledTruncation.
TatePoly compose(const TatePoly& g, const TateMap& f);
TateMap compose(const TateMap& g, const TateMap& f);

/// Parse the output of TatePoly::to_text / TateMap::to_text.
TatePoly tate_poly_from_text(const std::string& text);
TateMap tate_map_from_text(const std::string& text);

}  // namespace padyn
