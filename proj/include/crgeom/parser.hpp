#pragma once

// Text DSL for expressions:
//   variables   z1 .. zm
//   functions   conj(e) re(e) abs2(e) log(e)
//   operators   + - * / ^   (^ takes an integer exponent, is right-associative
//                            and binds tighter than unary minus: -z1^2 = -(z1^2))
//   literals    2, 0.5, 1e-3, 2i, i   (so "1+2i" is the complex number 1+2i)

#include <cctype>
#include <cstdlib>
#include <string>
#include <string_view>

#include "crgeom/error.hpp"
#include "crgeom/expr.hpp"

namespace crgeom {

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, int max_vars) : s_(text), max_vars_(max_vars) {}

  Expr parse_all() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::Parse, what + " at offset " + std::to_string(pos_) + " in \"" + std::string(s_) + "\"");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr parse_sum() {
    Expr acc = parse_product();
    for (;;) {
      if (accept('+')) acc = acc + parse_product();
      else if (accept('-')) acc = acc - parse_product();
      else return acc;
    }
  }

  Expr parse_product() {
    Expr acc = parse_unary();
    for (;;) {
      if (accept('*')) acc = acc * parse_unary();
      else if (accept('/')) acc = acc / parse_unary();
      else return acc;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return neg(parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return pow(base, parse_exponent());
    return base;
  }

  // Integer exponent: [+-] digits | ( exponent ), optionally raised again (right-assoc).
  int parse_exponent() {
    int sign = 1;
    if (accept('-')) sign = -1;
    else accept('+');
    long long value = 0;
    skip_ws();
    if (accept('(')) {
      value = parse_exponent();
      expect(')');
    } else {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        value = value * 10 + (s_[pos_] - '0');
        if (value > 10000) fail("exponent too large");
        ++pos_;
      }
      if (pos_ == start) fail("expected integer exponent");
      if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E'))
        fail("only integer exponents are supported");
    }
    if (accept('^')) {
      const int k = parse_exponent();
      if (k < 0) fail("negative exponent of an exponent");
      long long r = 1;
      for (int i = 0; i < k; ++i) {
        r *= value;
        if (r > 10000 || r < -10000) fail("exponent too large");
      }
      value = r;
    }
    return static_cast<int>(sign * value);
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    const std::string rest(s_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    // An imaginary suffix must not be the start of an identifier such as "if".
    if (pos_ < s_.size() && s_[pos_] == 'i' &&
        !(pos_ + 1 < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_ + 1])))) {
      ++pos_;
      return constant(cplx{0.0, v});
    }
    return constant(cplx{v, 0.0});
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string_view name = s_.substr(start, pos_ - start);
    if (name == "i") return constant(cplx{0.0, 1.0});
    if (name.size() > 1 && name[0] == 'z' &&
        name.substr(1).find_first_not_of("0123456789") == std::string_view::npos) {
      const int k = std::atoi(std::string(name.substr(1)).c_str());
      if (k < 1 || k > 64) fail("variable index out of range");
      if (max_vars_ > 0 && k > max_vars_)
        fail("variable " + std::string(name) + " exceeds dimension " + std::to_string(max_vars_));
      return variable(k - 1);
    }
    if (name == "conj" || name == "re" || name == "abs2" || name == "log") {
      expect('(');
      Expr arg = parse_sum();
      expect(')');
      if (name == "conj") return conj(arg);
      if (name == "re") return re(arg);
      if (name == "abs2") return abs2(arg);
      return log(arg);
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int max_vars_;
};

}  // namespace detail

/// Parses DSL text. When `max_vars` > 0, variables beyond z<max_vars> are rejected.
inline Expr parse(std::string_view text, int max_vars = 0) {
  return detail::Parser(text, max_vars).parse_all();
}

}  // namespace crgeom
