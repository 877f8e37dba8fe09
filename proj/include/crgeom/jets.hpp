#pragma once

// Numeric Wirtinger jets of a scalar expression: all derivatives with at most
// two holomorphic and two antiholomorphic indices, compiled once into a Tape.
//
//   order 1: value, f_j, f_k̄, f_{jk̄}
//   order 2: + f_{jl}, f_{k̄q̄}, f_{jlk̄}, f_{jk̄q̄}
//   order 3: + f_{jlk̄q̄}

#include <array>
#include <span>
#include <vector>

#include "crgeom/expr.hpp"
#include "crgeom/linalg.hpp"
#include "crgeom/tape.hpp"

namespace crgeom {

struct Jet {
  int m = 0;
  int order = 1;
  cplx val{};
  CVec d1, d1b;         // f_j, f_k̄
  CMat d11, d20, d02;   // f_{jk̄}, f_{jl}, f_{k̄q̄}
  std::vector<cplx> t21, t12, t22;

  cplx d21(int j, int l, int k) const { return t21[(j * m + l) * m + k]; }          // f_{j l k̄}
  cplx d12(int j, int k, int q) const { return t12[(j * m + k) * m + q]; }          // f_{j k̄ q̄}
  cplx d22(int j, int l, int k, int q) const { return t22[((j * m + l) * m + k) * m + q]; }  // f_{j l k̄ q̄}
};

class JetProgram {
 public:
  JetProgram() = default;

  JetProgram(const Expr& f, int m, int order) : m_(m), order_(order) {
    std::vector<Expr> roots;
    auto add = [&roots](const Expr& e) {
      roots.push_back(e);
      return static_cast<int>(roots.size() - 1);
    };
    val_ = add(f);
    std::vector<Expr> d1(m), d1b(m);
    for (int j = 0; j < m; ++j) {
      d1[j] = differentiate(f, j, false);
      d1b[j] = differentiate(f, j, true);
      d1_.push_back(add(d1[j]));
      d1b_.push_back(add(d1b[j]));
    }
    std::vector<Expr> d11(m * m);
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        d11[j * m + k] = differentiate(d1[j], k, true);
        d11_.push_back(add(d11[j * m + k]));
      }
    if (order < 2) {
      tape_ = Tape(roots);
      return;
    }
    std::vector<Expr> d20(m * m);
    d20_.assign(m * m, 0);
    d02_.assign(m * m, 0);
    for (int j = 0; j < m; ++j)
      for (int l = j; l < m; ++l) {
        d20[j * m + l] = d20[l * m + j] = differentiate(d1[j], l, false);
        d20_[j * m + l] = d20_[l * m + j] = add(d20[j * m + l]);
        d02_[j * m + l] = d02_[l * m + j] = add(differentiate(d1b[j], l, true));
      }
    std::vector<Expr> d21(m * m * m);
    d21_.assign(m * m * m, 0);
    d12_.assign(m * m * m, 0);
    for (int j = 0; j < m; ++j)
      for (int l = j; l < m; ++l)
        for (int k = 0; k < m; ++k) {
          d21[(j * m + l) * m + k] = d21[(l * m + j) * m + k] = differentiate(d20[j * m + l], k, true);
          d21_[(j * m + l) * m + k] = d21_[(l * m + j) * m + k] = add(d21[(j * m + l) * m + k]);
        }
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int q = k; q < m; ++q)
          d12_[(j * m + k) * m + q] = d12_[(j * m + q) * m + k] = add(differentiate(d11[j * m + k], q, true));
    if (order >= 3) {
      d22_.assign(m * m * m * m, 0);
      for (int j = 0; j < m; ++j)
        for (int l = j; l < m; ++l)
          for (int k = 0; k < m; ++k)
            for (int q = k; q < m; ++q) {
              const int s = add(differentiate(d21[(j * m + l) * m + k], q, true));
              for (auto [a, b] : {std::array{j, l}, std::array{l, j}})
                for (auto [c, d] : {std::array{k, q}, std::array{q, k}}) d22_[((a * m + b) * m + c) * m + d] = s;
            }
    }
    tape_ = Tape(roots);
  }

  int dim() const { return m_; }
  int order() const { return order_; }
  std::size_t tape_size() const { return tape_.size(); }

  Jet operator()(std::span<const cplx> p) const {
    thread_local std::vector<cplx> out;
    out.resize(tape_.outputs());
    tape_.run(p, out);
    const int m = m_;
    Jet jet;
    jet.m = m;
    jet.order = order_;
    jet.val = out[val_];
    jet.d1.resize(m);
    jet.d1b.resize(m);
    jet.d11.resize(m, m);
    for (int j = 0; j < m; ++j) {
      jet.d1(j) = out[d1_[j]];
      jet.d1b(j) = out[d1b_[j]];
      for (int k = 0; k < m; ++k) jet.d11(j, k) = out[d11_[j * m + k]];
    }
    if (order_ >= 2) {
      jet.d20.resize(m, m);
      jet.d02.resize(m, m);
      for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l) {
          jet.d20(j, l) = out[d20_[j * m + l]];
          jet.d02(j, l) = out[d02_[j * m + l]];
        }
      jet.t21.resize(d21_.size());
      jet.t12.resize(d12_.size());
      for (std::size_t i = 0; i < d21_.size(); ++i) {
        jet.t21[i] = out[d21_[i]];
        jet.t12[i] = out[d12_[i]];
      }
    }
    if (order_ >= 3) {
      jet.t22.resize(d22_.size());
      for (std::size_t i = 0; i < d22_.size(); ++i) jet.t22[i] = out[d22_[i]];
    }
    return jet;
  }

 private:
  int m_ = 0;
  int order_ = 1;
  Tape tape_;
  int val_ = 0;
  std::vector<int> d1_, d1b_, d11_, d20_, d02_, d21_, d12_, d22_;
};

/// Holomorphic jets of a vector of holomorphic maps F^d: values, F^d_j, F^d_{jl}.
struct HoloJet {
  CVec val;                  // F^d
  CMat d1;                   // d1(d, j) = F^d_j
  std::vector<CMat> d2;      // d2[d](j, l) = F^d_{jl}
};

class HoloJetProgram {
 public:
  HoloJetProgram() = default;

  HoloJetProgram(std::span<const Expr> maps, int m) : n_(static_cast<int>(maps.size())), m_(m) {
    std::vector<Expr> roots;
    for (const auto& f : maps) {
      roots.push_back(f);
      for (int j = 0; j < m; ++j) {
        const Expr fj = differentiate(f, j, false);
        roots.push_back(fj);
        for (int l = 0; l < m; ++l) roots.push_back(differentiate(fj, l, false));
      }
    }
    tape_ = Tape(roots);
  }

  int components() const { return n_; }

  HoloJet operator()(std::span<const cplx> p) const {
    thread_local std::vector<cplx> out;
    out.resize(tape_.outputs());
    tape_.run(p, out);
    HoloJet jet;
    jet.val.resize(n_);
    jet.d1.resize(n_, m_);
    jet.d2.assign(n_, CMat(m_, m_));
    std::size_t i = 0;
    for (int d = 0; d < n_; ++d) {
      jet.val(d) = out[i++];
      for (int j = 0; j < m_; ++j) {
        jet.d1(d, j) = out[i++];
        for (int l = 0; l < m_; ++l) jet.d2[d](j, l) = out[i++];
      }
    }
    return jet;
  }

 private:
  int n_ = 0;
  int m_ = 0;
  Tape tape_;
};

}  // namespace crgeom
