#include "padyn/polynomial.hpp"

#include <cctype>
#include <sstream>

namespace padyn {

IntPolyMap compose_maps(const IntPolyMap& outer, const IntPolyMap& inner, int max_degree) {
  IntPolyMap out;
  out.reserve(outer.size());
  for (const auto& g : outer) {
    out.push_back(compose<BigInt>(g, std::span<const IntPoly>(inner), BigInt(1)));
    if (max_degree >= 0 && out.back().degree() > max_degree) {
      fail(ErrorKind::DegreeOverflow, "composition degree " + std::to_string(out.back().degree()) +
                                          " exceeds bound " + std::to_string(max_degree));
    }
  }
  return out;
}

IntPolyMap identity_map(int nvars) {
  IntPolyMap id;
  for (int i = 0; i < nvars; ++i) id.push_back(IntPoly::variable(nvars, i, BigInt(1)));
  return id;
}

int map_degree(const IntPolyMap& f) {
  int d = -1;
  for (const auto& c : f) d = std::max(d, c.degree());
  return d;
}

std::vector<BigInt> evaluate_map(const IntPolyMap& f, std::span<const BigInt> point) {
  std::vector<BigInt> out;
  out.reserve(f.size());
  for (const auto& c : f) out.push_back(c.evaluate<BigInt>(point, BigInt(0)));
  return out;
}

std::string to_string(const IntPoly& f) {
  static const char* names[] = {"x", "y", "z", "w"};
  if (f.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  // Highest degree first reads more naturally.
  for (auto it = f.terms().rbegin(); it != f.terms().rend(); ++it) {
    const auto& [I, c] = *it;
    BigInt mag = abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    const bool constant = total_degree(I) == 0;
    bool wrote = false;
    if (mag != 1 || constant) {
      os << mag;
      wrote = true;
    }
    for (int i = 0; i < f.nvars(); ++i) {
      if (I[i] == 0) continue;
      if (wrote) os << "*";
      os << names[i];
      if (I[i] > 1) os << "^" << I[i];
      wrote = true;
    }
  }
  return os.str();
}

namespace {

int variable_index(char c) {
  switch (c) {
    case 'x': return 0;
    case 'y': return 1;
    case 'z': return 2;
    case 'w': return 3;
    default: return -1;
  }
}

class PolyParser {
 public:
  PolyParser(std::string_view text, int nvars, std::size_t offset) : s_(text), nvars_(nvars), offset_(offset) {}

  IntPoly parse() {
    IntPoly r = expr();
    skip();
    if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
    return r;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::Parse, "at position " + std::to_string(offset_ + pos_) + ": " + what);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool starts_atom() {
    skip();
    if (pos_ >= s_.size()) return false;
    const char c = s_[pos_];
    return std::isdigit(static_cast<unsigned char>(c)) || variable_index(c) >= 0 || c == '(';
  }

  IntPoly expr() {
    IntPoly r = term();
    while (true) {
      if (peek('+')) {
        ++pos_;
        r += term();
      } else if (peek('-')) {
        ++pos_;
        r -= term();
      } else {
        return r;
      }
    }
  }

  IntPoly term() {
    IntPoly r = unary();
    while (true) {
      if (peek('*')) {
        ++pos_;
        r = r * unary();
      } else if (starts_atom()) {
        r = r * power();
      } else {
        return r;
      }
    }
  }

  IntPoly unary() {
    if (peek('-')) {
      ++pos_;
      return -unary();
    }
    if (peek('+')) {
      ++pos_;
      return unary();
    }
    return power();
  }

  IntPoly power() {
    IntPoly base = atom();
    if (!peek('^')) return base;
    ++pos_;
    skip();
    const std::size_t start = pos_;
    unsigned e = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      e = e * 10 + static_cast<unsigned>(s_[pos_] - '0');
      if (e > 1000) error("exponent too large");
      ++pos_;
    }
    if (pos_ == start) error("expected an exponent");
    IntPoly r = IntPoly::constant(nvars_, BigInt(1));
    for (unsigned i = 0; i < e; ++i) r = r * base;
    return r;
  }

  IntPoly atom() {
    skip();
    if (pos_ >= s_.size()) error("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      IntPoly r = expr();
      if (!peek(')')) error("expected ')'");
      ++pos_;
      return r;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      return IntPoly::constant(nvars_, BigInt(std::string(s_.substr(start, pos_ - start))));
    }
    const int v = variable_index(c);
    if (v >= 0) {
      if (v >= nvars_) error(std::string("variable ") + c + " is not available with " + std::to_string(nvars_) + " variables");
      ++pos_;
      return IntPoly::variable(nvars_, v, BigInt(1));
    }
    error("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  int nvars_;
  std::size_t offset_;
  std::size_t pos_ = 0;
};

}  // namespace

IntPoly parse_int_poly(std::string_view text, int nvars, std::size_t offset) {
  return PolyParser(text, nvars, offset).parse();
}

int variables_used(std::string_view text) {
  int n = 0;
  for (char c : text) n = std::max(n, variable_index(c) + 1);
  return n;
}

}  // namespace padyn
