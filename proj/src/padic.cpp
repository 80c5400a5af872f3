#include "padyn/padic.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace padyn {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>((static_cast<u128>(a) * b) % m); }

u64 powmod(u64 base, u64 e, u64 m) {
  u64 result = 1 % m;
  base %= m;
  while (e > 0) {
    if (e & 1) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    e >>= 1;
  }
  return result;
}

// Inverse of a unit mod m by the extended Euclidean algorithm.
u64 invmod(u64 a, u64 m) {
  __int128 t = 0, new_t = 1;
  __int128 r = m, new_r = a % m;
  while (new_r != 0) {
    __int128 q = r / new_r;
    __int128 tmp = t - q * new_t;
    t = new_t;
    new_t = tmp;
    tmp = r - q * new_r;
    r = new_r;
    new_r = tmp;
  }
  if (r != 1) fail(ErrorKind::NonUnit, "residue is not invertible");
  if (t < 0) t += m;
  return static_cast<u64>(t);
}

void check_prime(std::uint32_t p) {
  thread_local std::uint32_t last_ok = 0;
  if (p == last_ok) return;
  if (!is_prime(p)) fail(ErrorKind::Configuration, "p = " + std::to_string(p) + " is not prime");
  last_ok = p;
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Configuration: return "configuration error";
    case ErrorKind::Usage: return "usage error";
    case ErrorKind::NonUnit: return "non-unit";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::PrecisionExhausted: return "precision exhausted";
    case ErrorKind::UncontrolledTruncation: return "uncontrolled truncation";
    case ErrorKind::NotFlowable: return "not flowable";
    case ErrorKind::NotRescalable: return "not rescalable";
    case ErrorKind::DegreeOverflow: return "degree overflow";
    case ErrorKind::NotInvariant: return "not invariant";
    case ErrorKind::ChartSingular: return "chart singular";
    case ErrorKind::Budget: return "budget exceeded";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::InternalInvariant: return "internal invariant violated";
  }
  return "error";
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (u64 d : {2u, 3u, 5u, 7u}) {
    if (n % d == 0) return n == d;
  }
  for (u64 d = 11; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

std::uint64_t checked_power(std::uint32_t p, int e) {
  u64 result = 1;
  for (int i = 0; i < e; ++i) {
    if (result > kMaxModulus / p) {
      fail(ErrorKind::PrecisionExhausted,
           std::to_string(p) + "^" + std::to_string(e) + " exceeds the 62-bit modulus cap");
    }
    result *= p;
  }
  return result;
}

int valuation_of(std::uint64_t n, std::uint32_t p) {
  int v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

int valuation_of(const BigInt& n, std::uint32_t p) {
  BigInt m = abs(n);
  int v = 0;
  while (m % p == 0) {
    m /= p;
    ++v;
  }
  return v;
}

int factorial_valuation(std::uint64_t k, std::uint32_t p) {
  int v = 0;
  while (k > 0) {
    k /= p;
    v += static_cast<int>(k);
  }
  return v;
}

int floor_log(std::uint64_t k, std::uint32_t p) {
  int e = 0;
  while (k >= p) {
    k /= p;
    ++e;
  }
  return e;
}

int ceil_log(std::uint64_t k, std::uint32_t p) {
  int e = 0;
  u128 power = 1;
  while (power < k) {
    power *= p;
    ++e;
  }
  return e;
}

// ---------------------------------------------------------------------------

PadicInt PadicInt::from_residue(std::uint64_t residue, std::uint32_t p, int digits, int precision) {
  if (digits < 1) fail(ErrorKind::Configuration, "precision N must be >= 1");
  check_prime(p);
  PadicInt x;
  x.p_ = p;
  x.digits_ = digits;
  x.modulus_ = checked_power(p, digits);
  x.residue_ = residue % x.modulus_;
  x.prec_ = std::clamp(precision, 0, digits);
  return x;
}

PadicInt PadicInt::from_integer(std::int64_t n, std::uint32_t p, int digits) {
  PadicInt x = from_residue(0, p, digits, digits);
  const auto m = static_cast<std::int64_t>(x.modulus_);
  std::int64_t r = n % m;
  if (r < 0) r += m;
  x.residue_ = static_cast<u64>(r);
  return x;
}

PadicInt PadicInt::from_big(const BigInt& n, std::uint32_t p, int digits) {
  PadicInt x = from_residue(0, p, digits, digits);
  BigInt r = n % x.modulus_;
  if (r < 0) r += x.modulus_;
  x.residue_ = static_cast<u64>(r);
  return x;
}

PadicInt PadicInt::from_rational(const Rational& q, std::uint32_t p, int digits) {
  const BigInt num = numerator(q);
  const BigInt den = denominator(q);
  if (den % p == 0) fail(ErrorKind::Usage, "rational with p in the denominator is not in Z_p");
  return from_big(num, p, digits) * from_big(den, p, digits).inverse();
}

void PadicInt::check_compatible(const PadicInt& o) const {
  if (p_ != o.p_ || digits_ != o.digits_) {
    fail(ErrorKind::Usage, "mixing p-adic values of different prime or working precision");
  }
}

int PadicInt::valuation() const {
  if (residue_ == 0) return prec_;
  return std::min(valuation_of(residue_, p_), prec_);
}

PadicInt PadicInt::operator-() const {
  PadicInt r = *this;
  r.residue_ = residue_ == 0 ? 0 : modulus_ - residue_;
  return r;
}

PadicInt& PadicInt::operator+=(const PadicInt& o) {
  check_compatible(o);
  residue_ += o.residue_;
  if (residue_ >= modulus_) residue_ -= modulus_;
  prec_ = std::min(prec_, o.prec_);
  return *this;
}

PadicInt& PadicInt::operator-=(const PadicInt& o) {
  check_compatible(o);
  residue_ = residue_ >= o.residue_ ? residue_ - o.residue_ : residue_ + (modulus_ - o.residue_);
  prec_ = std::min(prec_, o.prec_);
  return *this;
}

PadicInt& PadicInt::operator*=(const PadicInt& o) {
  check_compatible(o);
  const int va = valuation();
  const int vb = o.valuation();
  residue_ = mulmod(residue_, o.residue_, modulus_);
  prec_ = std::min({digits_, prec_ + vb, o.prec_ + va});
  return *this;
}

PadicInt PadicInt::inverse() const {
  if (!is_unit()) fail(ErrorKind::NonUnit, "cannot invert " + to_string());
  PadicInt r = *this;
  r.residue_ = invmod(residue_, modulus_);
  return r;
}

PadicInt PadicInt::pow(std::int64_t e) const {
  if (e < 0) return inverse().pow(-e);
  PadicInt result = one();
  PadicInt base = *this;
  auto k = static_cast<u64>(e);
  while (k > 0) {
    if (k & 1) result *= base;
    k >>= 1;
    if (k > 0) base *= base;
  }
  return result;
}

PadicInt PadicInt::times_p_power(int k) const {
  PadicInt r = *this;
  if (k >= digits_) {
    r.residue_ = 0;
  } else {
    r.residue_ = mulmod(residue_, checked_power(p_, k), modulus_);
  }
  r.prec_ = std::min(digits_, prec_ + k);
  return r;
}

PadicInt PadicInt::divided_by_p_power(int k) const {
  if (k == 0) return *this;
  if (k >= digits_) fail(ErrorKind::PrecisionExhausted, "division by p^" + std::to_string(k));
  const int known = std::min(k, prec_);
  if (residue_ % checked_power(p_, known) != 0) {
    fail(ErrorKind::InternalInvariant,
         "exact division by p^" + std::to_string(k) + " of " + to_string());
  }
  PadicInt r = *this;
  r.residue_ = residue_ / checked_power(p_, k);
  r.prec_ = std::max(0, prec_ - k);
  return r;
}

PadicInt PadicInt::unit_part() const {
  if (is_zero()) fail(ErrorKind::NonUnit, "zero has no unit part");
  return divided_by_p_power(valuation());
}

PadicInt PadicInt::with_digits(int digits) const {
  if (digits == digits_) return *this;
  PadicInt r = from_residue(0, p_, digits, digits);
  r.residue_ = residue_ % r.modulus_;
  r.prec_ = std::min(prec_, digits);
  return r;
}

PadicInt PadicInt::with_precision(int precision) const {
  PadicInt r = *this;
  r.prec_ = std::clamp(precision, 0, digits_);
  return r;
}

std::uint64_t PadicInt::residue_mod_power(int k) const {
  if (k >= digits_) return residue_;
  return residue_ % checked_power(p_, k);
}

bool PadicInt::congruent(const PadicInt& o, int k) const {
  check_compatible(o);
  return residue_mod_power(k) == o.residue_mod_power(k);
}

std::int64_t PadicInt::signed_residue() const {
  if (residue_ > modulus_ / 2) return -static_cast<std::int64_t>(modulus_ - residue_);
  return static_cast<std::int64_t>(residue_);
}

std::string PadicInt::to_string() const {
  std::ostringstream os;
  os << residue_ << " (mod " << p_ << "^" << digits_ << ", prec " << prec_ << ")";
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const PadicInt& x) { return os << x.to_string(); }

int precision_of(std::span<const PadicInt> v) {
  int prec = v.empty() ? 0 : v.front().digits();
  for (const auto& x : v) prec = std::min(prec, x.precision());
  return prec;
}

bool congruent(std::span<const PadicInt> a, std::span<const PadicInt> b, int k) {
  if (a.size() != b.size()) fail(ErrorKind::Usage, "dimension mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].congruent(b[i], k)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

PadicInt teichmuller(const PadicInt& a) {
  if (a.prime() == 2) fail(ErrorKind::Unsupported, "Teichmüller lifts are not provided for p = 2");
  if (!a.is_unit()) fail(ErrorKind::NonUnit, "Teichmüller lift of a non-unit");
  // The lift depends only on a mod p, so the result carries every digit.
  PadicInt w = a.with_precision(a.digits());
  for (int i = 0; i <= a.digits() + 1; ++i) {
    PadicInt next = w.pow(a.prime());
    if (next == w) break;
    w = next;
  }
  return w.with_precision(a.digits());
}

PadicInt binom_padic(const PadicInt& t, std::uint64_t k) {
  if (k == 0) return t.one();
  const std::uint32_t p = t.prime();
  const int guard = factorial_valuation(k, p);
  if (guard > 4096) fail(ErrorKind::PrecisionExhausted, "binomial guard precision exceeds cap");
  // Guard precision can exceed the machine-word cap, so the numerator uses
  // wide integers.
  const BigInt wide = pow(BigInt(p), t.digits() + guard);
  const BigInt tt = t.residue();
  BigInt numerator = 1;
  u64 unit_factorial = 1 % t.modulus();
  for (u64 i = 0; i < k; ++i) {
    BigInt term = tt - i;
    if (term < 0) term += wide;
    numerator = (numerator * term) % wide;
    u64 j = i + 1;
    while (j % p == 0) j /= p;
    unit_factorial = mulmod(unit_factorial, j % t.modulus(), t.modulus());
  }
  const BigInt shift = pow(BigInt(p), guard);
  if (numerator % shift != 0) fail(ErrorKind::InternalInvariant, "binomial numerator not divisible by k!");
  const u64 reduced = static_cast<u64>((numerator / shift) % t.modulus());
  const u64 value = mulmod(reduced, invmod(unit_factorial, t.modulus()), t.modulus());
  // The binomial polynomial is Lipschitz with constant p^floor(log_p k).
  return PadicInt::from_residue(value, p, t.digits(), t.precision() - floor_log(k, p));
}

std::optional<PadicInt> sqrt_padic(const PadicInt& x) {
  const std::uint32_t p = x.prime();
  if (p == 2) fail(ErrorKind::Unsupported, "square roots are not provided for p = 2");
  if (x.is_zero()) return x.zero().with_precision(x.precision() / 2);
  const int v = x.valuation();
  if (v % 2 != 0) return std::nullopt;
  const PadicInt u = x.unit_part();
  const u64 ubar = u.residue() % p;
  if (powmod(ubar, (p - 1) / 2, p) != 1) return std::nullopt;

  // Tonelli-Shanks mod p.
  u64 q = p - 1;
  int s = 0;
  while (q % 2 == 0) {
    q /= 2;
    ++s;
  }
  u64 z = 2;
  while (powmod(z, (p - 1) / 2, p) != p - 1) ++z;
  u64 m = static_cast<u64>(s);
  u64 c = powmod(z, q, p);
  u64 t = powmod(ubar, q, p);
  u64 r = powmod(ubar, (q + 1) / 2, p);
  while (t != 1) {
    u64 i = 0;
    u64 t2 = t;
    while (t2 != 1) {
      t2 = mulmod(t2, t2, p);
      ++i;
    }
    u64 b = c;
    for (u64 j = 0; j + i + 1 < m; ++j) b = mulmod(b, b, p);
    m = i;
    c = mulmod(b, b, p);
    t = mulmod(t, c, p);
    r = mulmod(r, b, p);
  }

  // Newton lift r <- (r + u/r)/2; the derivative 2r is a unit.
  PadicInt root = PadicInt::from_residue(r, p, x.digits(), x.digits());
  const PadicInt half = x.like(2).inverse();
  const PadicInt uexact = u.with_precision(x.digits());
  for (int i = 0; i <= x.digits(); ++i) {
    PadicInt next = (root + uexact * root.inverse()) * half;
    if (next == root) break;
    root = next;
  }
  root = root.with_precision(u.precision());
  return root.times_p_power(v / 2);
}

}  // namespace padyn
