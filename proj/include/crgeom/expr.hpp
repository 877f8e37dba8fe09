#pragma once

// Complex expression trees under Wirtinger calculus: z^j and conj(z^j) are
// independent symbols. Trees are immutable and shared; every builder applies
// local simplifications (constant folding, 0/1 absorption, flattening) and
// pushes conj() down to the leaves, so a normalized tree never contains a
// conjugation node. re(e) is rewritten as (e + conj(e)) / 2.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crgeom/error.hpp"

namespace crgeom {

using cplx = std::complex<double>;

enum class Op : std::uint8_t { Const, Var, Add, Mul, Neg, Recip, Pow, Log };

class Expr;

namespace detail {

struct Node {
  Op op = Op::Const;
  cplx value{};
  int index = 0;
  bool conjugated = false;
  int exponent = 0;
  std::vector<Expr> args;
  std::uint64_t holo_mask = 0;  // variables z^j occurring
  std::uint64_t anti_mask = 0;  // variables conj(z^j) occurring
};

}  // namespace detail

class Expr {
 public:
  Expr() : Expr(cplx{0.0, 0.0}) {}
  Expr(cplx c) {  // NOLINT(google-explicit-constructor)
    auto n = std::make_shared<detail::Node>();
    n->op = Op::Const;
    n->value = c;
    node_ = std::move(n);
  }
  Expr(double c) : Expr(cplx{c, 0.0}) {}  // NOLINT(google-explicit-constructor)

  static Expr from_node(std::shared_ptr<const detail::Node> n) {
    Expr e;
    e.node_ = std::move(n);
    return e;
  }

  Op op() const { return node_->op; }
  cplx value() const { return node_->value; }
  int index() const { return node_->index; }
  bool conjugated() const { return node_->conjugated; }
  int exponent() const { return node_->exponent; }
  const std::vector<Expr>& args() const { return node_->args; }
  std::uint64_t holo_mask() const { return node_->holo_mask; }
  std::uint64_t anti_mask() const { return node_->anti_mask; }
  const detail::Node* id() const { return node_.get(); }

  bool is_constant() const { return op() == Op::Const; }
  bool is_zero() const { return is_constant() && value() == cplx{0.0, 0.0}; }
  bool is_one() const { return is_constant() && value() == cplx{1.0, 0.0}; }

  /// Number of variables referenced, i.e. 1 + the largest index in use (0 if none).
  int arity() const {
    const std::uint64_t mask = holo_mask() | anti_mask();
    int k = 0;
    for (int j = 0; j < 64; ++j)
      if (mask & (std::uint64_t{1} << j)) k = j + 1;
    return k;
  }

 private:
  std::shared_ptr<const detail::Node> node_;
};

// ---------------------------------------------------------------- builders

namespace detail {

inline Expr make(Op op, std::vector<Expr> args, int exponent = 0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->exponent = exponent;
  for (const auto& a : args) {
    n->holo_mask |= a.holo_mask();
    n->anti_mask |= a.anti_mask();
  }
  n->args = std::move(args);
  return Expr::from_node(std::move(n));
}

}  // namespace detail

inline Expr constant(cplx c) { return Expr(c); }

inline Expr variable(int j, bool conjugated = false) {
  if (j < 0 || j >= 64) throw Error(ErrorKind::BadParams, "variable index out of range: " + std::to_string(j));
  auto n = std::make_shared<detail::Node>();
  n->op = Op::Var;
  n->index = j;
  n->conjugated = conjugated;
  (conjugated ? n->anti_mask : n->holo_mask) = std::uint64_t{1} << j;
  return Expr::from_node(std::move(n));
}

inline Expr sum(std::span<const Expr> terms) {
  std::vector<Expr> out;
  cplx c{0.0, 0.0};
  for (const auto& t : terms) {
    if (t.op() == Op::Add) {
      for (const auto& s : t.args()) {
        if (s.is_constant()) c += s.value();
        else out.push_back(s);
      }
    } else if (t.is_constant()) {
      c += t.value();
    } else {
      out.push_back(t);
    }
  }
  if (c != cplx{0.0, 0.0}) out.insert(out.begin(), Expr(c));
  if (out.empty()) return Expr(0.0);
  if (out.size() == 1) return out.front();
  return detail::make(Op::Add, std::move(out));
}

inline Expr product(std::span<const Expr> factors) {
  std::vector<Expr> out;
  cplx c{1.0, 0.0};
  for (const auto& f : factors) {
    if (f.op() == Op::Mul) {
      for (const auto& g : f.args()) {
        if (g.is_constant()) c *= g.value();
        else out.push_back(g);
      }
    } else if (f.is_constant()) {
      c *= f.value();
    } else {
      out.push_back(f);
    }
  }
  if (c == cplx{0.0, 0.0}) return Expr(0.0);
  if (c != cplx{1.0, 0.0}) out.insert(out.begin(), Expr(c));
  if (out.empty()) return Expr(c);
  if (out.size() == 1) return out.front();
  return detail::make(Op::Mul, std::move(out));
}

inline Expr sum(std::initializer_list<Expr> terms) { return sum(std::span<const Expr>(terms.begin(), terms.size())); }
inline Expr product(std::initializer_list<Expr> factors) {
  return product(std::span<const Expr>(factors.begin(), factors.size()));
}

inline Expr neg(const Expr& e) {
  if (e.is_constant()) return Expr(-e.value());
  if (e.op() == Op::Neg) return e.args()[0];
  if (e.op() == Op::Mul && e.args()[0].is_constant()) {
    std::vector<Expr> f = e.args();
    f[0] = Expr(-f[0].value());
    return product(f);
  }
  return detail::make(Op::Neg, {e});
}

inline Expr recip(const Expr& e) {
  if (e.is_constant() && e.value() != cplx{0.0, 0.0}) return Expr(cplx{1.0, 0.0} / e.value());
  if (e.op() == Op::Recip) return e.args()[0];
  return detail::make(Op::Recip, {e});
}

namespace detail {

inline cplx ipow(cplx base, int k) {
  if (k < 0) return cplx{1.0, 0.0} / ipow(base, -k);
  cplx result{1.0, 0.0};
  while (k > 0) {
    if (k & 1) result *= base;
    base *= base;
    k >>= 1;
  }
  return result;
}

}  // namespace detail

inline Expr pow(const Expr& e, int k) {
  if (k == 0) return Expr(1.0);
  if (k == 1) return e;
  if (k < 0) return recip(pow(e, -k));
  if (e.is_constant()) return Expr(detail::ipow(e.value(), k));
  if (e.op() == Op::Pow) return pow(e.args()[0], e.exponent() * k);
  return detail::make(Op::Pow, {e}, k);
}

inline Expr log(const Expr& e) {
  if (e.is_constant() && e.value() != cplx{0.0, 0.0}) return Expr(std::log(e.value()));
  return detail::make(Op::Log, {e});
}

inline Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) { return sum({a, neg(b)}); }
inline Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
inline Expr operator/(const Expr& a, const Expr& b) { return product({a, recip(b)}); }
inline Expr operator-(const Expr& a) { return neg(a); }

namespace detail {

inline Expr conj_impl(const Expr& e, std::unordered_map<const Node*, Expr>& memo) {
  if (auto it = memo.find(e.id()); it != memo.end()) return it->second;
  Expr out;
  switch (e.op()) {
    case Op::Const: out = Expr(std::conj(e.value())); break;
    case Op::Var: out = variable(e.index(), !e.conjugated()); break;
    case Op::Add:
    case Op::Mul: {
      std::vector<Expr> a;
      a.reserve(e.args().size());
      for (const auto& x : e.args()) a.push_back(conj_impl(x, memo));
      out = e.op() == Op::Add ? sum(a) : product(a);
      break;
    }
    case Op::Neg: out = neg(conj_impl(e.args()[0], memo)); break;
    case Op::Recip: out = recip(conj_impl(e.args()[0], memo)); break;
    case Op::Pow: out = pow(conj_impl(e.args()[0], memo), e.exponent()); break;
    // conj(log u) = log(conj u) off the negative real axis.
    case Op::Log: out = log(conj_impl(e.args()[0], memo)); break;
  }
  memo.emplace(e.id(), out);
  return out;
}

}  // namespace detail

inline Expr conj(const Expr& e) {
  std::unordered_map<const detail::Node*, Expr> memo;
  return detail::conj_impl(e, memo);
}

inline Expr re(const Expr& e) { return product({Expr(0.5), sum({e, conj(e)})}); }
inline Expr abs2(const Expr& e) { return product({e, conj(e)}); }

// ----------------------------------------------------------- differentiation

namespace detail {

inline Expr diff_impl(const Expr& e, int j, bool conjugated, std::unordered_map<const Node*, Expr>& memo) {
  const std::uint64_t bit = std::uint64_t{1} << j;
  if (!((conjugated ? e.anti_mask() : e.holo_mask()) & bit)) return Expr(0.0);
  if (auto it = memo.find(e.id()); it != memo.end()) return it->second;
  Expr out;
  switch (e.op()) {
    case Op::Const: out = Expr(0.0); break;
    case Op::Var: out = Expr((e.index() == j && e.conjugated() == conjugated) ? 1.0 : 0.0); break;
    case Op::Add: {
      std::vector<Expr> terms;
      for (const auto& a : e.args()) terms.push_back(diff_impl(a, j, conjugated, memo));
      out = sum(terms);
      break;
    }
    case Op::Mul: {
      std::vector<Expr> terms;
      const auto& f = e.args();
      for (std::size_t i = 0; i < f.size(); ++i) {
        Expr d = diff_impl(f[i], j, conjugated, memo);
        if (d.is_zero()) continue;
        std::vector<Expr> factors;
        factors.reserve(f.size());
        for (std::size_t k = 0; k < f.size(); ++k) factors.push_back(k == i ? d : f[k]);
        terms.push_back(product(factors));
      }
      out = sum(terms);
      break;
    }
    case Op::Neg: out = neg(diff_impl(e.args()[0], j, conjugated, memo)); break;
    case Op::Recip: {
      const Expr& u = e.args()[0];
      out = neg(product({diff_impl(u, j, conjugated, memo), pow(e, 2)}));
      break;
    }
    case Op::Pow: {
      const Expr& u = e.args()[0];
      const int k = e.exponent();
      out = product({Expr(static_cast<double>(k)), pow(u, k - 1), diff_impl(u, j, conjugated, memo)});
      break;
    }
    case Op::Log: {
      const Expr& u = e.args()[0];
      out = product({diff_impl(u, j, conjugated, memo), recip(u)});
      break;
    }
  }
  memo.emplace(e.id(), out);
  return out;
}

}  // namespace detail

/// Wirtinger derivative d e / d z^j, or d e / d conj(z^j) when `conjugated`.
inline Expr differentiate(const Expr& e, int j, bool conjugated) {
  std::unordered_map<const detail::Node*, Expr> memo;
  return detail::diff_impl(e, j, conjugated, memo);
}

// ----------------------------------------------------------------- printing

namespace detail {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_constant(cplx c) {
  if (c.imag() == 0.0) {
    std::string s = format_double(c.real());
    return c.real() < 0 ? "(" + s + ")" : s;
  }
  std::string im = format_double(std::abs(c.imag()));
  if (c.real() == 0.0) return c.imag() < 0 ? "(-" + im + "i)" : "(" + im + "i)";
  return "(" + format_double(c.real()) + (c.imag() < 0 ? "-" : "+") + im + "i)";
}

inline std::string print(const Expr& e) {
  auto wrap = [](const Expr& a) {
    std::string s = print(a);
    return (a.op() == Op::Add || a.op() == Op::Mul || a.op() == Op::Neg) ? "(" + s + ")" : s;
  };
  switch (e.op()) {
    case Op::Const: return format_constant(e.value());
    case Op::Var: {
      std::string v = "z" + std::to_string(e.index() + 1);
      return e.conjugated() ? "conj(" + v + ")" : v;
    }
    case Op::Add: {
      std::string s;
      for (std::size_t i = 0; i < e.args().size(); ++i) s += (i ? " + " : "") + print(e.args()[i]);
      return s;
    }
    case Op::Mul: {
      std::string s;
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        const Expr& a = e.args()[i];
        s += (i ? " * " : "") + (a.op() == Op::Add || a.op() == Op::Neg ? "(" + print(a) + ")" : print(a));
      }
      return s;
    }
    case Op::Neg: return "-" + wrap(e.args()[0]);
    case Op::Recip: return "1/" + wrap(e.args()[0]);
    case Op::Pow: return wrap(e.args()[0]) + "^" + std::to_string(e.exponent());
    case Op::Log: return "log(" + print(e.args()[0]) + ")";
  }
  return {};
}

}  // namespace detail

/// DSL text for the expression; parse(to_string(e)) rebuilds an equivalent tree.
inline std::string to_string(const Expr& e) { return detail::print(e); }

// --------------------------------------------------------------- evaluation

namespace detail {

inline cplx eval_impl(const Expr& e, std::span<const cplx> p, std::unordered_map<const Node*, cplx>& memo) {
  if (auto it = memo.find(e.id()); it != memo.end()) return it->second;
  cplx v{};
  switch (e.op()) {
    case Op::Const: v = e.value(); break;
    case Op::Var: {
      if (static_cast<std::size_t>(e.index()) >= p.size())
        throw Error(ErrorKind::Domain, "variable z" + std::to_string(e.index() + 1) + " outside the point dimension");
      v = e.conjugated() ? std::conj(p[e.index()]) : p[e.index()];
      break;
    }
    case Op::Add:
      for (const auto& a : e.args()) v += eval_impl(a, p, memo);
      break;
    case Op::Mul:
      v = 1.0;
      for (const auto& a : e.args()) v *= eval_impl(a, p, memo);
      break;
    case Op::Neg: v = -eval_impl(e.args()[0], p, memo); break;
    case Op::Recip: {
      const cplx u = eval_impl(e.args()[0], p, memo);
      if (u == cplx{0.0, 0.0}) throw Error(ErrorKind::Domain, "division by zero in " + to_string(e));
      v = 1.0 / u;
      break;
    }
    case Op::Pow: v = ipow(eval_impl(e.args()[0], p, memo), e.exponent()); break;
    case Op::Log: {
      const cplx u = eval_impl(e.args()[0], p, memo);
      if (u == cplx{0.0, 0.0}) throw Error(ErrorKind::Domain, "log of zero in " + to_string(e));
      v = std::log(u);
      break;
    }
  }
  memo.emplace(e.id(), v);
  return v;
}

}  // namespace detail

inline cplx evaluate(const Expr& e, std::span<const cplx> point) {
  std::unordered_map<const detail::Node*, cplx> memo;
  return detail::eval_impl(e, point, memo);
}

// ------------------------------------------------------------ zero testing

/// Randomized zero test: simplification first (a structural zero is decisive),
/// then evaluation at `samples` pseudo-random points of the polydisc of radius
/// 1.5. Points where evaluation fails (log of zero, division by zero) are skipped.
inline bool vanishes_identically(const Expr& e, double tol = 1e-12, int samples = 16) {
  if (e.is_zero()) return true;
  if (e.is_constant()) return std::abs(e.value()) <= tol;
  const int m = e.arity();
  std::mt19937_64 rng(0x5eedc0deULL);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<cplx> p(static_cast<std::size_t>(m));
  int tested = 0;
  for (int attempt = 0; attempt < 8 * samples && tested < samples; ++attempt) {
    for (auto& x : p) x = cplx{u(rng), u(rng)};
    cplx v;
    try {
      v = evaluate(e, p);
    } catch (const Error&) {
      continue;
    }
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) continue;
    if (std::abs(v) > tol) return false;
    ++tested;
  }
  return true;
}

/// True iff every antiholomorphic derivative of `e` vanishes.
inline bool is_holomorphic(const Expr& e) {
  if (e.anti_mask() == 0) return true;
  for (int j = 0; j < 64; ++j) {
    if (!(e.anti_mask() & (std::uint64_t{1} << j))) continue;
    if (!vanishes_identically(differentiate(e, j, true))) return false;
  }
  return true;
}

/// True iff all mixed derivatives d^2 e / dz^j d conj(z^k) vanish.
inline bool is_pluriharmonic(const Expr& e, double tol = 1e-10) {
  const int m = e.arity();
  for (int j = 0; j < m; ++j) {
    const Expr ej = differentiate(e, j, false);
    for (int k = 0; k < m; ++k)
      if (!vanishes_identically(differentiate(ej, k, true), tol)) return false;
  }
  return true;
}

}  // namespace crgeom
