#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <string>
#include <vector>

#include "padyn/error.hpp"
#include "padyn/padic.hpp"

namespace padyn {

inline constexpr int kMaxVars = 4;

/// Exponent vector; unused trailing slots stay zero.
using MultiIndex = std::array<std::uint16_t, kMaxVars>;

inline int total_degree(const MultiIndex& I) {
  int d = 0;
  for (auto e : I) d += e;
  return d;
}

inline MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex c{};
  for (int i = 0; i < kMaxVars; ++i) c[i] = static_cast<std::uint16_t>(a[i] + b[i]);
  return c;
}

inline MultiIndex unit_index(int i) {
  MultiIndex I{};
  I[i] = 1;
  return I;
}

/// Graded lexicographic order: total degree first, then exponents of x_1, x_2, ...
/// from the left. All iteration over terms follows this order.
struct GradedLex {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const {
    const int da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    return a > b;
  }
};

template <class Scalar>
struct ScalarTraits;

template <>
struct ScalarTraits<BigInt> {
  static bool is_zero(const BigInt& x) { return x == 0; }
};

template <>
struct ScalarTraits<PadicInt> {
  // Coefficients that are zero only to a reduced precision stay stored: they
  // still carry an error bound.
  static bool is_zero(const PadicInt& x) { return x.is_exact_zero(); }
};

/// Sparse multivariate polynomial over a commutative ring.
template <class Scalar>
class Polynomial {
 public:
  using Terms = std::map<MultiIndex, Scalar, GradedLex>;

  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {
    if (nvars < 1 || nvars > kMaxVars) fail(ErrorKind::Usage, "unsupported number of variables");
  }

  static Polynomial constant(int nvars, const Scalar& c) { return monomial(nvars, MultiIndex{}, c); }
  static Polynomial variable(int nvars, int i, const Scalar& one) {
    return monomial(nvars, unit_index(i), one);
  }
  static Polynomial monomial(int nvars, const MultiIndex& I, const Scalar& c) {
    Polynomial r(nvars);
    r.add_term(I, c);
    return r;
  }

  int nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Total degree; -1 for the zero polynomial.
  int degree() const { return terms_.empty() ? -1 : total_degree(terms_.rbegin()->first); }

  /// Largest exponent of variable i.
  int degree_in(int i) const {
    int d = 0;
    for (const auto& [I, c] : terms_) d = std::max<int>(d, I[i]);
    return d;
  }

  const Scalar* find(const MultiIndex& I) const {
    auto it = terms_.find(I);
    return it == terms_.end() ? nullptr : &it->second;
  }

  void add_term(const MultiIndex& I, const Scalar& c) {
    auto [it, inserted] = terms_.try_emplace(I, c);
    if (!inserted) it->second = it->second + c;
    if (ScalarTraits<Scalar>::is_zero(it->second)) terms_.erase(it);
  }

  void set_term(const MultiIndex& I, const Scalar& c) {
    if (ScalarTraits<Scalar>::is_zero(c)) {
      terms_.erase(I);
    } else {
      terms_.insert_or_assign(I, c);
    }
  }

  void erase(const MultiIndex& I) { terms_.erase(I); }

  Polynomial& operator+=(const Polynomial& o) {
    check_same(o);
    for (const auto& [I, c] : o.terms_) add_term(I, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check_same(o);
    for (const auto& [I, c] : o.terms_) add_term(I, -c);
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  Polynomial operator-() const {
    Polynomial r(nvars_);
    for (const auto& [I, c] : terms_) r.terms_.emplace(I, -c);
    return r;
  }

  Polynomial scaled(const Scalar& s) const {
    Polynomial r(nvars_);
    for (const auto& [I, c] : terms_) r.add_term(I, c * s);
    return r;
  }

  /// Keep only monomials of total degree <= cap. The removed terms are
  /// appended to `removed` when given.
  Polynomial truncated(int cap, Polynomial* removed = nullptr) const {
    Polynomial r(nvars_);
    for (const auto& [I, c] : terms_) {
      if (total_degree(I) <= cap) {
        r.terms_.emplace_hint(r.terms_.end(), I, c);
      } else if (removed) {
        removed->add_term(I, c);
      }
    }
    return r;
  }

  /// Horner-free evaluation with one power table per variable.
  template <class T>
  T evaluate(std::span<const T> point, const T& zero) const {
    if (static_cast<int>(point.size()) != nvars_) fail(ErrorKind::Usage, "evaluation point has wrong dimension");
    std::vector<std::vector<T>> powers(nvars_);
    for (int i = 0; i < nvars_; ++i) {
      const int d = degree_in(i);
      powers[i].reserve(d + 1);
      powers[i].push_back(zero + one_like(zero));
      for (int e = 1; e <= d; ++e) powers[i].push_back(powers[i].back() * point[i]);
    }
    T acc = zero;
    for (const auto& [I, c] : terms_) {
      T term = lift(c, zero);
      for (int i = 0; i < nvars_; ++i) {
        if (I[i] != 0) term = term * powers[i][I[i]];
      }
      acc = acc + term;
    }
    return acc;
  }

  bool operator==(const Polynomial& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }

 private:
  template <class T>
  static T one_like(const T& zero) {
    if constexpr (std::is_same_v<T, PadicInt>) {
      return zero.one();
    } else {
      return T(1);
    }
  }
  template <class T>
  static T lift(const Scalar& c, const T& zero) {
    if constexpr (std::is_same_v<T, Scalar>) {
      (void)zero;
      return c;
    } else if constexpr (std::is_same_v<T, PadicInt> && std::is_same_v<Scalar, BigInt>) {
      return PadicInt::from_big(c, zero.prime(), zero.digits());
    } else {
      return T(c);
    }
  }

  void check_same(const Polynomial& o) const {
    if (nvars_ != o.nvars_) fail(ErrorKind::Usage, "polynomials in different numbers of variables");
  }

  int nvars_ = 1;
  Terms terms_;
};

/// Product, keeping monomials with total degree <= cap (cap < 0: keep all).
/// Terms above the cap are accumulated into `removed` when given.
template <class Scalar>
Polynomial<Scalar> multiply(const Polynomial<Scalar>& a, const Polynomial<Scalar>& b, int cap = -1,
                            Polynomial<Scalar>* removed = nullptr) {
  if (a.nvars() != b.nvars()) fail(ErrorKind::Usage, "polynomials in different numbers of variables");
  Polynomial<Scalar> r(a.nvars());
  for (const auto& [I, c] : a.terms()) {
    for (const auto& [J, d] : b.terms()) {
      const MultiIndex K = I + J;
      if (cap >= 0 && total_degree(K) > cap) {
        if (removed) removed->add_term(K, c * d);
        continue;
      }
      r.add_term(K, c * d);
    }
  }
  return r;
}

template <class Scalar>
Polynomial<Scalar> operator*(const Polynomial<Scalar>& a, const Polynomial<Scalar>& b) {
  return multiply(a, b);
}

/// g(f_1, ..., f_m), keeping total degree <= cap (cap < 0: exact). `one` is
/// the multiplicative identity of Scalar. Returns whether anything was
/// discarded through `discarded`.
template <class Scalar>
Polynomial<Scalar> compose(const Polynomial<Scalar>& g, std::span<const Polynomial<Scalar>> f,
                           const Scalar& one, int cap = -1, bool* discarded = nullptr) {
  if (static_cast<int>(f.size()) != g.nvars()) fail(ErrorKind::Usage, "composition arity mismatch");
  const int out_vars = f.empty() ? 1 : f.front().nvars();
  bool dropped = false;
  // powers[i][e] = f_i^e
  std::vector<std::vector<Polynomial<Scalar>>> powers(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const int d = g.degree_in(static_cast<int>(i));
    powers[i].push_back(Polynomial<Scalar>::constant(out_vars, one));
    for (int e = 1; e <= d; ++e) {
      Polynomial<Scalar> removed(out_vars);
      powers[i].push_back(multiply(powers[i].back(), f[i], cap, &removed));
      dropped = dropped || !removed.is_zero();
    }
  }
  Polynomial<Scalar> result(out_vars);
  for (const auto& [I, c] : g.terms()) {
    Polynomial<Scalar> term = Polynomial<Scalar>::constant(out_vars, c);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (I[i] == 0) continue;
      Polynomial<Scalar> removed(out_vars);
      term = multiply(term, powers[i][I[i]], cap, &removed);
      dropped = dropped || !removed.is_zero();
    }
    result += term;
  }
  if (discarded) *discarded = dropped;
  return result;
}

using IntPoly = Polynomial<BigInt>;
/// A polynomial map given by its coordinate functions.
using IntPolyMap = std::vector<IntPoly>;

IntPolyMap compose_maps(const IntPolyMap& outer, const IntPolyMap& inner, int max_degree = -1);
IntPolyMap identity_map(int nvars);
int map_degree(const IntPolyMap& f);
std::vector<BigInt> evaluate_map(const IntPolyMap& f, std::span<const BigInt> point);

/// Human-readable form such as "x^2 + 3*x*y - 5".
std::string to_string(const IntPoly& f);

/// Parses integer polynomial expressions in x, y, z, w with + - * ^,
/// parentheses and juxtaposition ("2x" = 2*x). Parse errors report the
/// character position, counted from `offset`.
IntPoly parse_int_poly(std::string_view text, int nvars, std::size_t offset = 0);
/// 1 + the largest variable index used in the text (0 if none).
int variables_used(std::string_view text);

}  // namespace padyn
