#include "padyn/surface.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace padyn {

namespace {

IntPoly var(int n, int i) { return IntPoly::variable(n, i, BigInt(1)); }
IntPoly cst(int n, const BigInt& c) { return IntPoly::constant(n, c); }

bool is_identity_map(const IntPolyMap& f) { return f == identity_map(static_cast<int>(f.size())); }

std::string join_ints(const std::vector<BigInt>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

PolyAuto::PolyAuto(IntPolyMap forward, IntPolyMap backward, std::string label)
    : forward_(std::move(forward)), backward_(std::move(backward)), label_(std::move(label)) {
  const std::size_t m = forward_.size();
  if (m == 0 || backward_.size() != m) fail(ErrorKind::Configuration, label_ + ": forward and inverse differ in arity");
  for (const auto& c : forward_)
    if (c.nvars() != static_cast<int>(m)) fail(ErrorKind::Configuration, label_ + ": component arity mismatch");
  for (const auto& c : backward_)
    if (c.nvars() != static_cast<int>(m)) fail(ErrorKind::Configuration, label_ + ": component arity mismatch");
  if (!is_identity_map(compose_maps(forward_, backward_)) || !is_identity_map(compose_maps(backward_, forward_))) {
    fail(ErrorKind::Configuration, label_ + ": the given inverse does not invert the map");
  }
}

PolyAuto PolyAuto::identity(int arity) { return PolyAuto(identity_map(arity), identity_map(arity), "id"); }

PolyAuto PolyAuto::unchecked(IntPolyMap forward, IntPolyMap backward, std::string label) {
  PolyAuto r;
  r.forward_ = std::move(forward);
  r.backward_ = std::move(backward);
  r.label_ = std::move(label);
  return r;
}

PolyAuto PolyAuto::inverse() const {
  PolyAuto r;
  r.forward_ = backward_;
  r.backward_ = forward_;
  r.label_ = label_ + "^-1";
  r.elliptic_ = elliptic_;
  return r;
}

PolyAuto henon(const std::vector<BigInt>& P) {
  IntPoly p(2), q(2);
  for (std::size_t k = 0; k < P.size(); ++k) {
    MultiIndex I{};
    I[0] = static_cast<std::uint16_t>(k);
    p.add_term(I, P[k]);
    MultiIndex J{};
    J[1] = static_cast<std::uint16_t>(k);
    q.add_term(J, P[k]);
  }
  // (y + P(x), x) and its inverse (v, u - P(v)).
  PolyAuto f({var(2, 1) + p, var(2, 0)}, {var(2, 1), var(2, 0) - q}, "henon:" + join_ints(P));
  f.set_elliptic(p.degree() < 2);
  return f;
}

PolyAuto linear_auto(const BigInt& a, const BigInt& b, const BigInt& c, const BigInt& d) {
  const BigInt det = a * d - b * c;
  if (det != 1 && det != -1) fail(ErrorKind::Configuration, "linear map has determinant " + det.str() + ", not +-1");
  const IntPolyMap f{var(2, 0).scaled(a) + var(2, 1).scaled(b), var(2, 0).scaled(c) + var(2, 1).scaled(d)};
  const IntPolyMap g{var(2, 0).scaled(det * d) + var(2, 1).scaled(-det * b),
                     var(2, 0).scaled(-det * c) + var(2, 1).scaled(det * a)};
  return PolyAuto(f, g, "linear:" + join_ints({a, b, c, d}));
}

PolyAuto triangular(const IntPolyMap& f, std::string label) {
  const int m = static_cast<int>(f.size());
  std::vector<bool> solved(m, false);
  // inverse[j] expresses x_j through the new coordinates u.
  IntPolyMap inverse(m, IntPoly(m));
  for (int round = 0; round < m; ++round) {
    bool progress = false;
    for (int i = 0; i < m && !progress; ++i) {
      if (solved[i]) continue;
      const BigInt* s = f[i].find(unit_index(i));
      if (!s || (*s != 1 && *s != -1)) continue;
      IntPoly rest = f[i];
      rest.erase(unit_index(i));
      bool ok = true;
      for (const auto& [I, c] : rest.terms())
        for (int j = 0; j < m; ++j)
          if (I[j] > 0 && !solved[j]) ok = false;
      if (!ok) continue;
      // x_i = s (u_i - rest(x)).
      inverse[i] = (var(m, i) - compose<BigInt>(rest, std::span<const IntPoly>(inverse), BigInt(1))).scaled(*s);
      solved[i] = true;
      progress = true;
    }
    if (!progress) fail(ErrorKind::Configuration, label + ": map is not triangular");
  }
  return PolyAuto(f, inverse, std::move(label));
}

PolyAuto poly_auto(const IntPolyMap& f, const IntPolyMap& b, std::string label) {
  return PolyAuto(f, b, std::move(label));
}

PolyAuto compose_word(std::span<const PolyAuto> word, int arity, int max_degree) {
  IntPolyMap fwd = identity_map(arity), bwd = identity_map(arity);
  std::string label;
  for (const auto& w : word) {
    if (w.arity() != arity) fail(ErrorKind::Usage, "word mixes arities");
    fwd = compose_maps(fwd, w.forward(), max_degree);
    bwd = compose_maps(w.backward(), bwd, max_degree);
    label += (label.empty() ? "" : "∘") + w.label();
  }
  if (word.empty()) return PolyAuto::identity(arity);
  // Compositions of automorphisms need no second symbolic check.
  return PolyAuto::unchecked(std::move(fwd), std::move(bwd), std::move(label));
}

std::vector<int> degree_sequence(const PolyAuto& f, int n_max, int max_degree) {
  std::vector<int> out;
  IntPolyMap it = identity_map(f.arity());
  for (int n = 1; n <= n_max; ++n) {
    it = compose_maps(f.forward(), it, max_degree);
    out.push_back(map_degree(it));
  }
  return out;
}

BigInt MarkovSurface::equation(std::span<const BigInt> p) const {
  if (p.size() != 3) fail(ErrorKind::Usage, "Markov surface points have three coordinates");
  const BigInt &x = p[0], &y = p[1], &z = p[2];
  return x * x + y * y + z * z + x * y * z - A * x - B * y - C * z - D;
}

bool MarkovSurface::on_surface_mod(std::span<const BigInt> point, const BigInt& q) const {
  return equation(point) % q == 0;
}

bool MarkovSurface::on_surface(std::span<const PadicInt> p) const {
  if (p.size() != 3) fail(ErrorKind::Usage, "Markov surface points have three coordinates");
  const PadicInt &x = p[0], &y = p[1], &z = p[2];
  auto lift = [&](const BigInt& c) { return PadicInt::from_big(c, x.prime(), x.digits()); };
  const PadicInt e = x * x + y * y + z * z + x * y * z - lift(A) * x - lift(B) * y - lift(C) * z - lift(D);
  return e.is_zero();
}

PolyAuto MarkovSurface::vieta(int i) const {
  if (i < 1 || i > 3) fail(ErrorKind::Usage, "Vieta involution index must be 1, 2 or 3");
  IntPolyMap s = identity_map(3);
  const IntPoly x = var(3, 0), y = var(3, 1), z = var(3, 2);
  switch (i) {
    case 1: s[0] = -x + cst(3, A) - y * z; break;
    case 2: s[1] = -y + cst(3, B) - x * z; break;
    default: s[2] = -z + cst(3, C) - x * y; break;
  }
  return PolyAuto(s, s, "vieta:" + std::to_string(i) + "@" + to_string());
}

std::string MarkovSurface::to_string() const { return "markov:" + join_ints({A, B, C, D}); }

ParabolicData parabolic_matrix(const MarkovSurface& S, const BigInt& z) {
  ParabolicData out;
  out.M = {{{z * z - 1, z}, {-z, BigInt(-1)}}};
  out.T = {S.A - S.B * z, S.B};
  out.trace = out.M[0][0] + out.M[1][1];
  out.det = out.M[0][0] * out.M[1][1] - out.M[0][1] * out.M[1][0];
  if (out.det != 1 || out.trace != z * z - 2) fail(ErrorKind::InternalInvariant, "parabolic matrix identities fail");
  return out;
}

std::variant<PadicInt, NeedsQuadraticExtension> eigenvalue_alpha(const PadicInt& z) {
  if (z.prime() == 2) fail(ErrorKind::Unsupported, "eigenvalue_alpha needs an odd prime");
  const PadicInt trace = z * z - z.like(2);
  const PadicInt half = z.like(2).inverse();
  if (z.is_zero()) {
    // z sqrt(z^2 - 4) vanishes to the precision of z.
    return (trace * half).with_precision(std::min(trace.precision(), z.precision()));
  }
  const PadicInt disc = z * z - z.like(4);
  if (disc.is_zero()) {
    // sqrt(disc) has valuation at least ceil(prec/2).
    const int prec = (disc.precision() + 1) / 2;
    return (trace * half).with_precision(std::min(trace.precision(), prec));
  }
  const auto root = sqrt_padic(disc);
  if (!root) return NeedsQuadraticExtension{disc};
  const PadicInt a = (trace + z * *root) * half;
  const PadicInt b = (trace - z * *root) * half;
  return a.residue() <= b.residue() ? a : b;
}

PadicInt lucas_v(const PadicInt& r, std::uint64_t n) {
  if (n == 0) return r.like(2);
  // (V_k, V_{k+1}) from the top bit down.
  PadicInt vk = r, vk1 = r * r - r.like(2);
  int top = 63;
  while (!((n >> top) & 1)) --top;
  for (int bit = top - 1; bit >= 0; --bit) {
    if ((n >> bit) & 1) {
      vk = vk * vk1 - r;
      vk1 = vk1 * vk1 - r.like(2);
    } else {
      vk1 = vk * vk1 - r;
      vk = vk * vk - r.like(2);
    }
  }
  return vk;
}

FiniteOrderReport is_finite_order_mobius(const PadicInt& r) {
  const std::uint32_t p = r.prime();
  if (p == 2) fail(ErrorKind::Unsupported, "finite-order test needs an odd prime");
  const std::uint64_t p2 = static_cast<std::uint64_t>(p) * p;
  // zeta -> zeta^(p^2) converges to the Teichmüller lift; on traces this is V_{p^2}.
  PadicInt tau = r.with_precision(r.digits());
  bool stable = false;
  for (int iter = 0; iter <= r.digits() + 2; ++iter) {
    const PadicInt next = lucas_v(tau, p2);
    if (next == tau) {
      stable = true;
      break;
    }
    tau = next;
  }
  if (!stable) fail(ErrorKind::InternalInvariant, "Teichmüller trace iteration did not settle");

  struct Candidate {
    PadicInt trace;
    std::uint64_t order;
  };
  std::vector<Candidate> candidates;
  std::uint64_t order = 0;
  for (std::uint64_t n = 1; n <= p2 - 1; ++n) {
    if ((p2 - 1) % n != 0) continue;
    if (lucas_v(tau, n).congruent(r.like(2), 1)) {
      order = n;
      break;
    }
  }
  candidates.push_back({tau, order});
  if (p == 3) {
    candidates.push_back({r.like(-1), 3});
    candidates.push_back({r.like(1), 6});
  }
  FiniteOrderReport report;
  report.precision = r.precision();
  report.verdict = Verdict::No;
  for (const auto& c : candidates) {
    if (!(r - c.trace).is_zero()) continue;
    report.verdict = r.precision() >= r.digits() && r.precision() > 0 ? Verdict::Yes : Verdict::Unknown;
    report.order = c.order;
    return report;
  }
  return report;
}

MonomialAuto::MonomialAuto(std::int64_t a_, std::int64_t b_, std::int64_t c_, std::int64_t d_, PadicInt alpha_,
                           PadicInt beta_)
    : a(a_), b(b_), c(c_), d(d_), alpha(std::move(alpha_)), beta(std::move(beta_)) {
  if (det() != 1 && det() != -1) fail(ErrorKind::Configuration, "monomial matrix must have determinant +-1");
  if (!alpha.is_unit() || !beta.is_unit()) fail(ErrorKind::NonUnit, "monomial translation must be a unit pair");
}

PadicVector monomial_apply(const MonomialAuto& M, std::span<const PadicInt> v) {
  if (v.size() != 2) fail(ErrorKind::Usage, "monomial maps act on pairs");
  if (!v[0].is_unit() || !v[1].is_unit()) fail(ErrorKind::NonUnit, "monomial maps act on units");
  return {M.alpha * v[0].pow(M.a) * v[1].pow(M.b), M.beta * v[0].pow(M.c) * v[1].pow(M.d)};
}

std::array<PadicInt, 3> cayley_project(std::span<const PadicInt> v) {
  if (v.size() != 2) fail(ErrorKind::Usage, "cayley_project takes a pair");
  if (!v[0].is_unit() || !v[1].is_unit()) fail(ErrorKind::NonUnit, "cayley_project needs units");
  const PadicInt w = v[0] * v[1];
  return {-(v[0] + v[0].inverse()), -(v[1] + v[1].inverse()), -(w + w.inverse())};
}

bool torsion_test(const PadicInt& u) {
  if (u.prime() == 2) fail(ErrorKind::Unsupported, "torsion test needs an odd prime");
  if (!u.is_unit()) fail(ErrorKind::NonUnit, "torsion test needs a unit");
  return (u.pow(u.prime() - 1) - u.one()).is_zero();
}

namespace builtin {

PolyAuto bgs_g() {
  const IntPoly x = var(2, 0), y = var(2, 1);
  return PolyAuto({y + x * x + cst(2, 5), -x}, {-y, x - y * y - cst(2, 5)}, "g1");
}

PolyAuto bgs_h0() {
  PolyAuto h = linear_auto(2, 1, 1, 1);
  return PolyAuto(h.forward(), h.backward(), "h0");
}

PolyAuto bgs_g2() {
  const IntPoly x = var(2, 0), y = var(2, 1);
  return PolyAuto({-y, x + y * y * y + cst(2, 2)}, {y + x * x * x - cst(2, 2), -x}, "g2");
}

PolyAuto bgs_g3() {
  const std::vector<PolyAuto> word{bgs_g2(), bgs_h0(), bgs_g()};
  const PolyAuto w = compose_word(word, 2);
  return PolyAuto(w.forward(), w.backward(), "g3");
}

PolyAuto bgs_conjugate() {
  const std::vector<PolyAuto> word{bgs_h0(), bgs_g(), bgs_h0().inverse()};
  const PolyAuto w = compose_word(word, 2);
  return PolyAuto(w.forward(), w.backward(), "h0∘g1∘h0^-1");
}

}  // namespace builtin

namespace {

std::string_view trim(std::string_view s, std::size_t& offset) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
    ++offset;
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_error(std::size_t pos, const std::string& what) {
  fail(ErrorKind::Parse, "at position " + std::to_string(pos) + ": " + what);
}

/// Strip optional angle brackets around an argument list.
std::string_view unwrap(std::string_view s, std::size_t& offset) {
  s = trim(s, offset);
  if (!s.empty() && s.front() == '<') {
    if (s.back() != '>') parse_error(offset + s.size(), "missing '>'");
    s = s.substr(1, s.size() - 2);
    ++offset;
    s = trim(s, offset);
  }
  return s;
}

struct Piece {
  std::string_view text;
  std::size_t offset;
};

std::vector<Piece> split(std::string_view s, std::size_t offset, std::string_view sep) {
  std::vector<Piece> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(sep, start);
    const std::size_t end = at == std::string_view::npos ? s.size() : at;
    std::size_t off = offset + start;
    std::string_view piece = trim(s.substr(start, end - start), off);
    out.push_back({piece, off});
    if (at == std::string_view::npos) return out;
    start = at + sep.size();
  }
}

std::vector<BigInt> parse_ints(std::string_view s, std::size_t offset, std::size_t expected = 0) {
  std::vector<BigInt> out;
  for (const auto& piece : split(s, offset, ",")) {
    std::string_view t = piece.text;
    std::size_t i = 0;
    if (!t.empty() && (t[0] == '-' || t[0] == '+')) ++i;
    if (i == t.size()) parse_error(piece.offset, "expected an integer");
    for (std::size_t j = i; j < t.size(); ++j)
      if (!std::isdigit(static_cast<unsigned char>(t[j]))) parse_error(piece.offset + j, "expected a digit");
    out.emplace_back(std::string(t[0] == '+' ? t.substr(1) : t));
  }
  if (expected && out.size() != expected) {
    parse_error(offset, "expected " + std::to_string(expected) + " integers, got " + std::to_string(out.size()));
  }
  return out;
}

IntPolyMap parse_poly_list(std::string_view s, std::size_t offset, int nvars) {
  IntPolyMap out;
  for (const auto& piece : split(s, offset, ",")) {
    if (piece.text.empty()) parse_error(piece.offset, "empty component");
    out.push_back(parse_int_poly(piece.text, nvars, piece.offset));
  }
  return out;
}

MarkovSurface parse_markov(std::string_view s, std::size_t offset) {
  const auto v = parse_ints(unwrap(s, offset), offset, 4);
  return MarkovSurface{v[0], v[1], v[2], v[3]};
}

MapSpec parse_spec(std::string_view text, std::size_t offset);

MapSpec parse_spec(std::string_view text, std::size_t offset) {
  text = trim(text, offset);
  MapSpec spec;
  spec.text = std::string(text);
  const std::size_t colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  std::size_t arg_off = offset + (colon == std::string_view::npos ? text.size() : colon + 1);
  const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  if (head == "bgs-henon") {
    if (colon == std::string_view::npos) {
      spec.generators = {builtin::bgs_g(), builtin::bgs_conjugate()};
      return spec;
    }
    std::string_view name = trim(rest, arg_off);
    if (name == "g" || name == "g1") spec.generators = {builtin::bgs_g()};
    else if (name == "g2") spec.generators = {builtin::bgs_g2()};
    else if (name == "g3") spec.generators = {builtin::bgs_g3()};
    else if (name == "h0") spec.generators = {builtin::bgs_h0()};
    else if (name == "conj") spec.generators = {builtin::bgs_conjugate()};
    else parse_error(arg_off, "unknown bgs-henon map '" + std::string(name) + "' (g1, g2, g3, h0, conj)");
    return spec;
  }
  if (colon == std::string_view::npos) parse_error(offset + text.size(), "expected ':' after the map kind");
  if (head == "henon") {
    const auto args = unwrap(rest, arg_off);
    spec.generators = {henon(parse_ints(args, arg_off))};
  } else if (head == "linear") {
    const auto args = unwrap(rest, arg_off);
    const auto v = parse_ints(args, arg_off, 4);
    spec.generators = {linear_auto(v[0], v[1], v[2], v[3])};
  } else if (head == "elem") {
    const auto args = unwrap(rest, arg_off);
    const int n = static_cast<int>(split(args, arg_off, ",").size());
    if (n > kMaxVars) parse_error(arg_off, "at most 4 components");
    spec.generators = {triangular(parse_poly_list(args, arg_off, n), spec.text)};
  } else if (head == "poly") {
    const auto args = unwrap(rest, arg_off);
    const auto halves = split(args, arg_off, ";");
    if (halves.size() != 2) parse_error(arg_off, "poly needs 'forward;inverse'");
    const int n = static_cast<int>(split(halves[0].text, halves[0].offset, ",").size());
    if (n > kMaxVars) parse_error(arg_off, "at most 4 components");
    spec.generators = {poly_auto(parse_poly_list(halves[0].text, halves[0].offset, n),
                                 parse_poly_list(halves[1].text, halves[1].offset, n), spec.text)};
  } else if (head == "vieta") {
    const std::size_t at = rest.find('@');
    if (at == std::string_view::npos) parse_error(arg_off + rest.size(), "expected '@markov:A,B,C,D'");
    std::size_t idx_off = arg_off;
    const auto idx = unwrap(rest.substr(0, at), idx_off);
    const auto i = parse_ints(idx, idx_off, 1);
    std::size_t surf_off = arg_off + at + 1;
    const std::string_view surf = trim(rest.substr(at + 1), surf_off);
    if (surf.substr(0, 7) != "markov:") parse_error(surf_off, "expected 'markov:'");
    const MarkovSurface S = parse_markov(surf.substr(7), surf_off + 7);
    if (i[0] < 1 || i[0] > 3) parse_error(idx_off, "Vieta index must be 1, 2 or 3");
    spec.generators = {S.vieta(static_cast<int>(i[0]))};
    spec.surface = S;
  } else if (head == "markov") {
    const MarkovSurface S = parse_markov(rest, arg_off);
    spec.generators = {S.vieta(1), S.vieta(2), S.vieta(3)};
    spec.surface = S;
  } else if (head == "word") {
    const std::string_view ring = "∘";
    std::vector<PolyAuto> word;
    std::optional<MarkovSurface> surface;
    const std::string_view args = rest;
    const std::string_view sep = args.find(ring) != std::string_view::npos ? ring : std::string_view("|");
    for (const auto& piece : split(args, arg_off, sep)) {
      if (piece.text.empty()) parse_error(piece.offset, "empty word entry");
      MapSpec sub = parse_spec(piece.text, piece.offset);
      if (sub.generators.size() != 1) parse_error(piece.offset, "a word entry must be a single map");
      if (!word.empty() && sub.generators.front().arity() != word.front().arity()) {
        parse_error(piece.offset, "word entries have different arities");
      }
      if (sub.surface) surface = sub.surface;
      word.push_back(sub.generators.front());
    }
    const PolyAuto w = compose_word(word, word.front().arity());
    spec.generators = {w};
    spec.surface = surface;
  } else {
    parse_error(offset, "unknown map kind '" + std::string(head) + "'");
  }
  return spec;
}

}  // namespace

MapSpec parse_map_spec(const std::string& text) { return parse_spec(text, 0); }

IntPolyMap parse_flow_map(const std::string& text) {
  std::size_t offset = 0;
  const std::string_view t = trim(std::string_view(text), offset);
  if (t.substr(0, 4) == "map:") {
    std::size_t arg_off = offset + 4;
    const auto args = unwrap(t.substr(4), arg_off);
    const int n = static_cast<int>(split(args, arg_off, ",").size());
    if (n > kMaxVars) parse_error(arg_off, "at most 4 components");
    return parse_poly_list(args, arg_off, n);
  }
  const MapSpec spec = parse_spec(text, 0);
  if (spec.generators.size() != 1 || spec.surface) fail(ErrorKind::Usage, "flow needs a single affine map");
  return spec.generators.front().forward();
}

MonomialAuto MonomialSpec::at(std::uint32_t p, int digits) const {
  return MonomialAuto(a, b, c, d, PadicInt::from_big(alpha, p, digits), PadicInt::from_big(beta, p, digits));
}

std::string MonomialSpec::to_string() const {
  return "monomial:" + join_ints({BigInt(a), BigInt(b), BigInt(c), BigInt(d)}) + "@" + join_ints({alpha, beta});
}

MonomialSpec parse_monomial_spec(const std::string& text) {
  std::size_t offset = 0;
  std::string_view t = trim(text, offset);
  if (t.substr(0, 9) != "monomial:") parse_error(offset, "expected 'monomial:a,b,c,d'");
  std::string_view rest = t.substr(9);
  std::size_t off = offset + 9;
  const std::size_t at = rest.find('@');
  MonomialSpec m;
  std::size_t mat_off = off;
  const auto v = parse_ints(unwrap(rest.substr(0, at), mat_off), mat_off, 4);
  for (const auto& x : v)
    if (abs(x) > 1000000) parse_error(mat_off, "matrix entries are limited to 10^6");
  m.a = static_cast<std::int64_t>(v[0]);
  m.b = static_cast<std::int64_t>(v[1]);
  m.c = static_cast<std::int64_t>(v[2]);
  m.d = static_cast<std::int64_t>(v[3]);
  if (m.a * m.d - m.b * m.c != 1 && m.a * m.d - m.b * m.c != -1) {
    parse_error(mat_off, "monomial matrix must have determinant +-1");
  }
  if (at != std::string_view::npos) {
    std::size_t tr_off = off + at + 1;
    const auto w = parse_ints(unwrap(rest.substr(at + 1), tr_off), tr_off, 2);
    m.alpha = w[0];
    m.beta = w[1];
  }
  return m;
}

}  // namespace padyn
