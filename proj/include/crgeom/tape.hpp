#pragma once

// Straight-line evaluation of many expressions at once. A Tape is compiled from
// a list of root expressions: shared and structurally identical subtrees are
// merged into a single instruction, and the instruction list is in topological
// order so one forward pass evaluates every root.

#include <cstring>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "crgeom/error.hpp"
#include "crgeom/expr.hpp"

namespace crgeom {

class Tape {
 public:
  Tape() = default;

  explicit Tape(std::span<const Expr> roots) {
    std::unordered_map<const detail::Node*, int> by_node;
    std::unordered_map<std::string, int> by_key;
    outputs_.reserve(roots.size());
    for (const auto& r : roots) outputs_.push_back(emit(r, by_node, by_key));
  }

  std::size_t size() const { return code_.size(); }
  std::size_t outputs() const { return outputs_.size(); }

  /// Evaluates every root at `point`, writing outputs in root order.
  void run(std::span<const cplx> point, std::span<cplx> out) const {
    thread_local std::vector<cplx> reg;
    reg.resize(code_.size());
    for (std::size_t i = 0; i < code_.size(); ++i) {
      const Instr& in = code_[i];
      cplx v;
      switch (in.op) {
        case Op::Const: v = in.value; break;
        case Op::Var:
          if (static_cast<std::size_t>(in.a) >= point.size())
            throw Error(ErrorKind::Domain, "variable z" + std::to_string(in.a + 1) + " outside the point dimension");
          v = in.conj ? std::conj(point[in.a]) : point[in.a];
          break;
        case Op::Add:
          v = 0.0;
          for (int k = 0; k < in.b; ++k) v += reg[args_[in.a + k]];
          break;
        case Op::Mul:
          v = 1.0;
          for (int k = 0; k < in.b; ++k) v *= reg[args_[in.a + k]];
          break;
        case Op::Neg: v = -reg[in.a]; break;
        case Op::Recip:
          if (reg[in.a] == cplx{0.0, 0.0})
            throw Error(ErrorKind::Domain, "division by zero in " + to_string(source_[i]));
          v = 1.0 / reg[in.a];
          break;
        case Op::Pow: v = detail::ipow(reg[in.a], in.b); break;
        case Op::Log:
          if (reg[in.a] == cplx{0.0, 0.0}) throw Error(ErrorKind::Domain, "log of zero in " + to_string(source_[i]));
          v = std::log(reg[in.a]);
          break;
      }
      reg[i] = v;
    }
    for (std::size_t k = 0; k < outputs_.size(); ++k) out[k] = reg[outputs_[k]];
  }

  std::vector<cplx> run(std::span<const cplx> point) const {
    std::vector<cplx> out(outputs_.size());
    run(point, out);
    return out;
  }

 private:
  struct Instr {
    Op op = Op::Const;
    bool conj = false;
    int a = 0;  // Var: index; unary: operand slot; n-ary: offset into args_
    int b = 0;  // n-ary: operand count; Pow: exponent
    cplx value{};
  };

  int emit(const Expr& e, std::unordered_map<const detail::Node*, int>& by_node,
           std::unordered_map<std::string, int>& by_key) {
    if (auto it = by_node.find(e.id()); it != by_node.end()) return it->second;
    std::vector<int> kids;
    kids.reserve(e.args().size());
    for (const auto& a : e.args()) kids.push_back(emit(a, by_node, by_key));

    Instr in;
    in.op = e.op();
    std::string key(1, static_cast<char>(e.op()));
    auto put = [&key](const void* p, std::size_t n) { key.append(static_cast<const char*>(p), n); };
    switch (e.op()) {
      case Op::Const:
        in.value = e.value();
        put(&in.value, sizeof in.value);
        break;
      case Op::Var:
        in.a = e.index();
        in.conj = e.conjugated();
        put(&in.a, sizeof in.a);
        put(&in.conj, sizeof in.conj);
        break;
      case Op::Add:
      case Op::Mul:
        put(kids.data(), kids.size() * sizeof(int));
        break;
      case Op::Pow:
        in.a = kids[0];
        in.b = e.exponent();
        put(&in.a, sizeof in.a);
        put(&in.b, sizeof in.b);
        break;
      default:
        in.a = kids[0];
        put(&in.a, sizeof in.a);
        break;
    }
    int slot;
    if (auto it = by_key.find(key); it != by_key.end()) {
      slot = it->second;
    } else {
      if (e.op() == Op::Add || e.op() == Op::Mul) {
        in.a = static_cast<int>(args_.size());
        in.b = static_cast<int>(kids.size());
        args_.insert(args_.end(), kids.begin(), kids.end());
      }
      slot = static_cast<int>(code_.size());
      code_.push_back(in);
      source_.push_back(e);
      by_key.emplace(std::move(key), slot);
    }
    by_node.emplace(e.id(), slot);
    return slot;
  }

  std::vector<Instr> code_;
  std::vector<int> args_;
  std::vector<Expr> source_;
  std::vector<int> outputs_;
};

}  // namespace crgeom
