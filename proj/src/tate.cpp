#include "padyn/tate.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace padyn {

namespace {

int add_valuation(int a, int b) {
  if (a >= kInfiniteValuation || b >= kInfiniteValuation) return kInfiniteValuation;
  return std::min(a + b, kInfiniteValuation);
}

// Saturated Gauss valuation of an auxiliary polynomial (kInfiniteValuation when empty).
int poly_valuation(const PadicPoly& f) {
  int v = kInfiniteValuation;
  for (const auto& [I, c] : f.terms()) v = std::min(v, c.valuation());
  return v;
}

Slope data_slope(const PadicPoly& f) {
  Slope s = Slope::unbounded();
  for (const auto& [I, c] : f.terms()) {
    const int d = total_degree(I);
    if (d < 2) continue;
    s = min(s, Slope{c.valuation(), d - 1});
  }
  return s;
}

Slope max_slope(const Slope& a, const Slope& b) { return a < b ? b : a; }

std::string valuation_text(int v) { return v >= kInfiniteValuation ? "inf" : std::to_string(v); }

}  // namespace

int Slope::bound_at_degree(int D) const {
  if (is_unbounded()) return kInfiniteValuation;
  const long long prod = static_cast<long long>(num) * D;
  return static_cast<int>((prod + den - 1) / den);
}

bool operator<(const Slope& a, const Slope& b) {
  if (a.is_unbounded()) return false;
  if (b.is_unbounded()) return true;
  return static_cast<long long>(a.num) * b.den < static_cast<long long>(b.num) * a.den;
}

std::string Slope::to_string() const {
  if (is_unbounded()) return "inf";
  const int g = std::gcd(num, den);
  if (den / g == 1) return std::to_string(num / g);
  return std::to_string(num / g) + "/" + std::to_string(den / g);
}

// ---------------------------------------------------------------------------

TatePoly::TatePoly(std::uint32_t p, int digits, int nvars, int degree_cap)
    : p_(p), digits_(digits), degree_cap_(degree_cap), poly_(nvars) {
  if (degree_cap < 0) fail(ErrorKind::Usage, "degree cap must be nonnegative");
  (void)PadicInt::from_integer(0, p, digits);  // validates p and N
}

TatePoly TatePoly::from_int(const IntPoly& f, std::uint32_t p, int digits, int degree_cap) {
  if (f.degree() > degree_cap) {
    fail(ErrorKind::DegreeOverflow,
         "polynomial of degree " + std::to_string(f.degree()) + " exceeds cap " + std::to_string(degree_cap));
  }
  TatePoly r(p, digits, f.nvars(), degree_cap);
  for (const auto& [I, c] : f.terms()) r.poly_.add_term(I, PadicInt::from_big(c, p, digits));
  r.slope_ = data_slope(r.poly_);
  return r;
}

TatePoly TatePoly::from_padic(const PadicPoly& f, int degree_cap, Slope slope) {
  if (f.is_zero()) fail(ErrorKind::Usage, "from_padic needs a context; use the constructor for zero");
  const PadicInt& any = f.terms().begin()->second;
  TatePoly r(any.prime(), any.digits(), f.nvars(), degree_cap);
  if (f.degree() > degree_cap) fail(ErrorKind::DegreeOverflow, "polynomial exceeds degree cap");
  r.poly_ = f;
  r.slope_ = slope;
  return r;
}

TatePoly TatePoly::constant(std::uint32_t p, int digits, int nvars, int degree_cap, const PadicInt& c) {
  TatePoly r(p, digits, nvars, degree_cap);
  r.poly_.add_term(MultiIndex{}, c);
  return r;
}

TatePoly TatePoly::variable(std::uint32_t p, int digits, int nvars, int degree_cap, int i) {
  TatePoly r(p, digits, nvars, degree_cap);
  if (degree_cap < 1) fail(ErrorKind::DegreeOverflow, "degree cap 0 cannot hold a variable");
  r.poly_.add_term(unit_index(i), PadicInt::from_integer(1, p, digits));
  return r;
}

int TatePoly::precision() const {
  int prec = std::min(digits_, trunc_val_);
  for (const auto& [I, c] : poly_.terms()) prec = std::min(prec, c.precision());
  return prec;
}

int TatePoly::gauss_valuation() const {
  return std::min(precision(), poly_valuation(poly_));
}

Slope TatePoly::coefficient_slope() const { return data_slope(poly_); }

PadicInt TatePoly::coefficient(const MultiIndex& I) const {
  if (const PadicInt* c = poly_.find(I)) return *c;
  return zero_scalar();
}

void TatePoly::check_compatible(const TatePoly& o) const {
  if (p_ != o.p_ || digits_ != o.digits_ || nvars() != o.nvars() || degree_cap_ != o.degree_cap_) {
    fail(ErrorKind::Usage, "Tate series of different shape or precision");
  }
}

TatePoly TatePoly::operator-() const {
  TatePoly r = *this;
  r.poly_ = -poly_;
  return r;
}

TatePoly operator+(const TatePoly& a, const TatePoly& b) {
  a.check_compatible(b);
  TatePoly r = a;
  r.poly_ += b.poly_;
  r.trunc_val_ = std::min(a.trunc_val_, b.trunc_val_);
  r.slope_ = min(a.slope_, b.slope_);
  return r;
}

TatePoly operator-(const TatePoly& a, const TatePoly& b) { return a + (-b); }

TatePoly operator*(const TatePoly& a, const TatePoly& b) {
  a.check_compatible(b);
  TatePoly r(a.p_, a.digits_, a.nvars(), a.degree_cap_);
  PadicPoly removed(a.nvars());
  r.poly_ = multiply(a.poly_, b.poly_, a.degree_cap_, &removed);
  r.trunc_val_ = std::min({a.trunc_val_, b.trunc_val_, poly_valuation(removed)});
  const bool exact = a.trunc_val_ >= kInfiniteValuation && b.trunc_val_ >= kInfiniteValuation && removed.is_zero();
  r.slope_ = exact ? data_slope(r.poly_) : Slope::zero();
  return r;
}

TatePoly TatePoly::scaled(const PadicInt& s) const {
  TatePoly r = *this;
  r.poly_ = poly_.scaled(s);
  r.trunc_val_ = add_valuation(trunc_val_, s.valuation());
  return r;
}

TatePoly TatePoly::divided_by_p_power(int k) const {
  TatePoly r(p_, digits_, nvars(), degree_cap_);
  for (const auto& [I, c] : poly_.terms()) r.poly_.set_term(I, c.divided_by_p_power(k));
  r.trunc_val_ = trunc_val_ >= kInfiniteValuation ? trunc_val_ : std::max(0, trunc_val_ - k);
  r.slope_ = trunc_val_ >= kInfiniteValuation ? data_slope(r.poly_) : Slope::zero();
  return r;
}

TatePoly TatePoly::with_precision(int prec) const {
  TatePoly r = *this;
  PadicPoly q(nvars());
  for (const auto& [I, c] : poly_.terms()) {
    q.set_term(I, c.precision() > prec ? c.with_precision(prec) : c);
  }
  r.poly_ = std::move(q);
  r.trunc_val_ = std::min(trunc_val_, std::max(prec, 0));
  return r;
}

TatePoly TatePoly::with_digits(int digits) const {
  TatePoly r(p_, digits, nvars(), degree_cap_);
  for (const auto& [I, c] : poly_.terms()) r.poly_.set_term(I, c.with_digits(digits));
  r.trunc_val_ = trunc_val_;
  r.slope_ = slope_;
  return r;
}

PadicInt TatePoly::evaluate(std::span<const PadicInt> z) const {
  PadicInt zero = zero_scalar();
  PadicInt v = poly_.evaluate<PadicInt>(z, zero);
  return v.with_precision(std::min(v.precision(), precision()));
}

std::string TatePoly::to_text(int component) const {
  std::ostringstream os;
  os << "tatepoly p=" << p_ << " N=" << digits_ << " D=" << degree_cap_
     << " trunc_val=" << valuation_text(trunc_val_) << " prec=" << precision() << " nvars=" << nvars();
  if (component >= 0) os << " component=" << component;
  os << "\n";
  for (const auto& [I, c] : poly_.terms()) {
    for (int i = 0; i < nvars(); ++i) os << (i ? "," : "") << I[i];
    os << ": " << c.residue() << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------

TateMap::TateMap(std::vector<TatePoly> components) : comps_(std::move(components)) {
  if (comps_.empty()) fail(ErrorKind::Usage, "a map needs at least one component");
  for (const auto& c : comps_) {
    comps_.front().check_compatible(c);
    if (c.nvars() != size()) fail(ErrorKind::Usage, "component count must equal the number of variables");
  }
}

TateMap TateMap::identity(std::uint32_t p, int digits, int nvars, int degree_cap) {
  std::vector<TatePoly> c;
  for (int i = 0; i < nvars; ++i) c.push_back(TatePoly::variable(p, digits, nvars, degree_cap, i));
  return TateMap(std::move(c));
}

TateMap TateMap::from_int(const IntPolyMap& f, std::uint32_t p, int digits, int degree_cap) {
  std::vector<TatePoly> c;
  for (const auto& fi : f) c.push_back(TatePoly::from_int(fi, p, digits, degree_cap));
  return TateMap(std::move(c));
}

int TateMap::degree() const {
  int d = -1;
  for (const auto& c : comps_) d = std::max(d, c.degree());
  return d;
}

int TateMap::precision() const {
  int prec = digits();
  for (const auto& c : comps_) prec = std::min(prec, c.precision());
  return prec;
}

int TateMap::gauss_valuation() const {
  int v = digits();
  for (const auto& c : comps_) v = std::min(v, c.gauss_valuation());
  return std::min(v, precision());
}

int TateMap::trunc_val() const {
  int t = kInfiniteValuation;
  for (const auto& c : comps_) t = std::min(t, c.trunc_val());
  return t;
}

Slope TateMap::slope() const {
  Slope s = Slope::unbounded();
  for (const auto& c : comps_) s = min(s, c.slope());
  return s;
}

Slope TateMap::coefficient_slope() const {
  Slope s = Slope::unbounded();
  for (const auto& c : comps_) s = min(s, c.coefficient_slope());
  return s;
}

TateMap operator+(const TateMap& a, const TateMap& b) {
  if (a.size() != b.size()) fail(ErrorKind::Usage, "maps of different dimension");
  std::vector<TatePoly> c;
  for (int i = 0; i < a.size(); ++i) c.push_back(a[i] + b[i]);
  return TateMap(std::move(c));
}

TateMap operator-(const TateMap& a, const TateMap& b) {
  if (a.size() != b.size()) fail(ErrorKind::Usage, "maps of different dimension");
  std::vector<TatePoly> c;
  for (int i = 0; i < a.size(); ++i) c.push_back(a[i] - b[i]);
  return TateMap(std::move(c));
}

TateMap TateMap::scaled(const PadicInt& s) const {
  std::vector<TatePoly> c;
  for (const auto& x : comps_) c.push_back(x.scaled(s));
  return TateMap(std::move(c));
}

TateMap TateMap::divided_by_p_power(int k) const {
  std::vector<TatePoly> c;
  for (const auto& x : comps_) c.push_back(x.divided_by_p_power(k));
  return TateMap(std::move(c));
}

TateMap TateMap::with_precision(int prec) const {
  std::vector<TatePoly> c;
  for (const auto& x : comps_) c.push_back(x.with_precision(prec));
  return TateMap(std::move(c));
}

TateMap TateMap::with_digits(int digits) const {
  std::vector<TatePoly> c;
  for (const auto& x : comps_) c.push_back(x.with_digits(digits));
  return TateMap(std::move(c));
}

TateMap TateMap::with_degree_cap(int degree_cap) const {
  std::vector<TatePoly> c;
  for (const auto& x : comps_) {
    TatePoly r(x.prime(), x.digits(), x.nvars(), degree_cap);
    PadicPoly removed(x.nvars());
    r.poly_ = x.poly_.truncated(degree_cap, &removed);
    r.trunc_val_ = std::min(x.trunc_val_, poly_valuation(removed));
    r.slope_ = x.slope_;
    c.push_back(std::move(r));
  }
  return TateMap(std::move(c));
}

PadicVector TateMap::evaluate(std::span<const PadicInt> z) const {
  PadicVector out;
  out.reserve(comps_.size());
  for (const auto& c : comps_) out.push_back(c.evaluate(z));
  return out;
}

std::string TateMap::to_text() const {
  std::string s;
  for (int i = 0; i < size(); ++i) s += comps_[i].to_text(i);
  return s;
}

// ---------------------------------------------------------------------------

TatePoly compose(const TatePoly& g, const TateMap& f) {
  if (g.nvars() != f.size()) fail(ErrorKind::Usage, "composition arity mismatch");
  if (g.prime() != f.prime() || g.digits() != f.digits()) {
    fail(ErrorKind::Usage, "composition across different precisions");
  }
  const int D = g.degree_cap();
  const int m = f.size();
  const PadicInt one = PadicInt::from_integer(1, g.prime(), g.digits());

  int removed_val = kInfiniteValuation;
  auto mul = [&](const PadicPoly& a, const PadicPoly& b) {
    PadicPoly removed(a.nvars());
    PadicPoly r = multiply(a, b, D, &removed);
    removed_val = std::min(removed_val, poly_valuation(removed));
    return r;
  };

  std::vector<std::vector<PadicPoly>> powers(m);
  for (int i = 0; i < m; ++i) {
    const int d = g.poly().degree_in(i);
    PadicPoly fi = f[i].poly().truncated(D);
    powers[i].push_back(PadicPoly::constant(m, one));
    for (int e = 1; e <= d; ++e) powers[i].push_back(mul(powers[i].back(), fi));
  }
  // Group g's terms by the exponents of all but the last variable: each group
  // is a linear combination of powers of f_last, then one product per prefix
  // variable.
  std::map<MultiIndex, PadicPoly, GradedLex> groups;
  for (const auto& [I, c] : g.terms()) {
    MultiIndex prefix = I;
    prefix[m - 1] = 0;
    auto [it, inserted] = groups.try_emplace(prefix, m);
    for (const auto& [J, d] : powers[m - 1][I[m - 1]].terms()) it->second.add_term(J, c * d);
  }
  PadicPoly result(m);
  for (auto& [prefix, acc] : groups) {
    PadicPoly term = std::move(acc);
    for (int i = 0; i + 1 < m; ++i) {
      if (prefix[i] != 0 && !term.is_zero()) term = mul(term, powers[i][prefix[i]]);
    }
    result += term;
  }

  const Slope rho = min(g.slope(), f.slope());
  int discard_bound = kInfiniteValuation;
  if (removed_val < kInfiniteValuation) {
    // Either bound is valid; the slope bound covers the true (untruncated)
    // composite, the removed-term valuation covers what was formed here.
    discard_bound = std::max(rho.bound_at_degree(D), removed_val);
    if (discard_bound <= 0) {
      fail(ErrorKind::UncontrolledTruncation,
           "composition discards terms above degree " + std::to_string(D) + " with no valuation bound");
    }
  }

  TatePoly r(g.prime(), g.digits(), m, D);
  r.poly_ = std::move(result);
  const int ftrunc = f.trunc_val();
  r.trunc_val_ = std::min({g.trunc_val(), ftrunc, discard_bound});
  const bool exact = g.trunc_val() >= kInfiniteValuation && ftrunc >= kInfiniteValuation &&
                     removed_val >= kInfiniteValuation;
  r.slope_ = exact ? max_slope(rho, data_slope(r.poly_)) : rho;
  return r;
}

TateMap compose(const TateMap& g, const TateMap& f) {
  std::vector<TatePoly> c;
  for (const auto& gi : g.components()) c.push_back(compose(gi, f));
  return TateMap(std::move(c));
}

// ---------------------------------------------------------------------------

namespace {

std::map<std::string, std::string> parse_header(const std::string& line) {
  std::istringstream is(line);
  std::string word;
  is >> word;
  if (word != "tatepoly") fail(ErrorKind::Parse, "expected 'tatepoly' header, got '" + word + "'");
  std::map<std::string, std::string> kv;
  while (is >> word) {
    auto eq = word.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Parse, "malformed header field '" + word + "'");
    kv[word.substr(0, eq)] = word.substr(eq + 1);
  }
  for (const char* key : {"p", "N", "D", "trunc_val", "nvars"}) {
    if (!kv.count(key)) fail(ErrorKind::Parse, std::string("header lacks '") + key + "'");
  }
  return kv;
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    fail(ErrorKind::Parse, "bad integer for " + what + ": '" + s + "'");
  }
}

std::vector<TatePoly> parse_blocks(const std::string& text) {
  std::vector<TatePoly> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  int prec = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("tatepoly", 0) == 0) {
      auto kv = parse_header(line);
      const int p = parse_int(kv["p"], "p");
      const int N = parse_int(kv["N"], "N");
      TatePoly t(static_cast<std::uint32_t>(p), N, parse_int(kv["nvars"], "nvars"), parse_int(kv["D"], "D"));
      const int trunc = kv["trunc_val"] == "inf" ? kInfiniteValuation : parse_int(kv["trunc_val"], "trunc_val");
      prec = kv.count("prec") ? parse_int(kv["prec"], "prec") : N;
      out.push_back(t.with_precision(trunc));
      continue;
    }
    if (out.empty()) fail(ErrorKind::Parse, "line " + std::to_string(lineno) + ": monomial before header");
    auto colon = line.find(':');
    if (colon == std::string::npos) fail(ErrorKind::Parse, "line " + std::to_string(lineno) + ": expected ':'");
    MultiIndex I{};
    std::istringstream idx(line.substr(0, colon));
    std::string part;
    int k = 0;
    while (std::getline(idx, part, ',')) {
      if (k >= out.back().nvars()) fail(ErrorKind::Parse, "line " + std::to_string(lineno) + ": too many exponents");
      I[k++] = static_cast<std::uint16_t>(parse_int(part, "exponent"));
    }
    if (k != out.back().nvars()) fail(ErrorKind::Parse, "line " + std::to_string(lineno) + ": too few exponents");
    std::string value = line.substr(colon + 1);
    value.erase(0, value.find_first_not_of(' '));
    const BigInt residue(value);
    TatePoly& t = out.back();
    PadicInt c = PadicInt::from_big(residue, t.prime(), t.digits()).with_precision(prec);
    t = t + TatePoly::from_padic(PadicPoly::monomial(t.nvars(), I, c), t.degree_cap(), Slope::zero());
  }
  if (out.empty()) fail(ErrorKind::Parse, "no tatepoly header found");
  return out;
}

}  // namespace

TatePoly tate_poly_from_text(const std::string& text) {
  auto blocks = parse_blocks(text);
  if (blocks.size() != 1) fail(ErrorKind::Parse, "expected one tatepoly block");
  return blocks.front();
}

TateMap tate_map_from_text(const std::string& text) { return TateMap(parse_blocks(text)); }

}  // namespace padyn
