#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "padyn/error.hpp"

namespace padyn {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Largest modulus p^n a PadicInt may use. Products are formed in 128 bits.
inline constexpr std::uint64_t kMaxModulus = std::uint64_t{1} << 62;

bool is_prime(std::uint64_t n);

/// p^e, or throws PrecisionExhausted when it exceeds kMaxModulus.
std::uint64_t checked_power(std::uint32_t p, int e);

/// v_p(n) for n != 0.
int valuation_of(std::uint64_t n, std::uint32_t p);
int valuation_of(const BigInt& n, std::uint32_t p);

/// v_p(k!) by Legendre's formula.
int factorial_valuation(std::uint64_t k, std::uint32_t p);

/// floor(log_p k) for k >= 1.
int floor_log(std::uint64_t k, std::uint32_t p);

/// Smallest e with p^e >= k.
int ceil_log(std::uint64_t k, std::uint32_t p);

/// An element of Z_p truncated to Z/p^N, carrying the number of digits that
/// are actually known (its absolute precision, at most N).
///
/// The ring modulus p^N is the "working precision" of a computation; values
/// from different working precisions never mix implicitly. Arithmetic is exact
/// mod p^N and propagates precision the way interval arithmetic would:
/// a sum knows as many digits as its least precise summand, a product knows
/// min(prec_a + v(b), prec_b + v(a)).
class PadicInt {
 public:
  PadicInt() = default;

  static PadicInt from_integer(std::int64_t n, std::uint32_t p, int digits);
  static PadicInt from_big(const BigInt& n, std::uint32_t p, int digits);
  /// r/s for s prime to p.
  static PadicInt from_rational(const Rational& q, std::uint32_t p, int digits);
  /// residue is reduced mod p^digits; precision clamps to [0, digits].
  static PadicInt from_residue(std::uint64_t residue, std::uint32_t p, int digits, int precision);

  /// Same prime and working precision as *this.
  PadicInt like(std::int64_t n) const { return from_integer(n, p_, digits_); }
  PadicInt zero() const { return like(0); }
  PadicInt one() const { return like(1); }

  std::uint32_t prime() const { return p_; }
  int digits() const { return digits_; }
  int precision() const { return prec_; }
  std::uint64_t residue() const { return residue_; }
  std::uint64_t modulus() const { return modulus_; }
  bool valid() const { return p_ != 0; }

  /// p-adic valuation; saturates at precision() when no known digit is nonzero.
  int valuation() const;
  bool is_unit() const { return valuation() == 0 && prec_ > 0; }
  /// All known digits vanish.
  bool is_zero() const { return valuation() >= prec_; }
  /// Zero with every digit of the working precision known.
  bool is_exact_zero() const { return residue_ == 0 && prec_ == digits_; }

  PadicInt operator-() const;
  PadicInt& operator+=(const PadicInt& o);
  PadicInt& operator-=(const PadicInt& o);
  PadicInt& operator*=(const PadicInt& o);

  friend PadicInt operator+(PadicInt a, const PadicInt& b) { return a += b; }
  friend PadicInt operator-(PadicInt a, const PadicInt& b) { return a -= b; }
  friend PadicInt operator*(PadicInt a, const PadicInt& b) { return a *= b; }

  /// Same context and same residue. Precision is not compared.
  friend bool operator==(const PadicInt& a, const PadicInt& b) {
    return a.p_ == b.p_ && a.digits_ == b.digits_ && a.residue_ == b.residue_;
  }

  /// Multiplicative inverse; throws NonUnit when valuation() > 0.
  PadicInt inverse() const;
  /// Negative exponents go through inverse().
  PadicInt pow(std::int64_t e) const;
  PadicInt times_p_power(int k) const;
  /// Exact division by p^k; loses k digits of precision. Throws
  /// InternalInvariant when a known digit below p^k is nonzero.
  PadicInt divided_by_p_power(int k) const;
  /// Unit part u with x = p^v(x) u; precision drops by v(x).
  PadicInt unit_part() const;

  /// Re-express at another working precision. Lowering reduces the residue;
  /// raising keeps the representative and leaves precision unchanged.
  PadicInt with_digits(int digits) const;
  PadicInt with_precision(int precision) const;

  /// a ≡ b (mod p^k).
  bool congruent(const PadicInt& o, int k) const;
  std::uint64_t residue_mod_power(int k) const;

  /// Representative in (-p^N/2, p^N/2].
  std::int64_t signed_residue() const;

  std::string to_string() const;

 private:
  void check_compatible(const PadicInt& o) const;

  std::uint64_t residue_ = 0;
  std::uint64_t modulus_ = 0;
  std::uint32_t p_ = 0;
  int digits_ = 0;
  int prec_ = 0;
};

std::ostream& operator<<(std::ostream& os, const PadicInt& x);

using PadicVector = std::vector<PadicInt>;

/// Smallest precision over the components.
int precision_of(std::span<const PadicInt> v);
bool congruent(std::span<const PadicInt> a, std::span<const PadicInt> b, int k);

/// Teichmüller representative: the (p-1)-st root of unity congruent to a mod p,
/// computed by iterating w <- w^p until it stabilises.
PadicInt teichmuller(const PadicInt& a);

/// t(t-1)...(t-k+1)/k!. The numerator is formed at N + v_p(k!) digits so the
/// division by k! is exact.
PadicInt binom_padic(const PadicInt& t, std::uint64_t k);

/// Square root in Z_p for p odd; nullopt when x is not a square (odd
/// valuation, or a non-residue unit part).
std::optional<PadicInt> sqrt_padic(const PadicInt& x);

}  // namespace padyn
