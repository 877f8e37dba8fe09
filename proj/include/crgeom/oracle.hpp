#pragma once

// Independent finite-difference oracles for every derivative the library uses.
// Each jet order is checked against central differences (in the real
// coordinates x^j, y^j, combined into Wirtinger derivatives) of the order
// below it, so a wrong entry anywhere in the tower is caught.

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "crgeom/hypersurface.hpp"
#include "crgeom/jets.hpp"
#include "crgeom/linalg.hpp"

namespace crgeom {

inline constexpr double kFdStep = 1e-5;
inline constexpr double kFdRelTol = 1e-6;

struct OracleResult {
  double worst = 0.0;       // max |symbolic - fd| / max(1, |symbolic|)
  std::string worst_entry;
  int compared = 0;

  void record(cplx sym, cplx fd, const std::string& entry) {
    ++compared;
    const double e = std::abs(sym - fd) / std::max(1.0, std::abs(sym));
    if (e > worst || worst_entry.empty()) {
      worst = e;
      worst_entry = entry;
    }
  }
  void merge(const OracleResult& o) {
    compared += o.compared;
    if (o.worst > worst) {
      worst = o.worst;
      worst_entry = o.worst_entry;
    }
  }
};

/// Wirtinger derivative along the (1,0) direction v by central differences:
/// (D_v f - i D_{iv} f) / 2 = sum_l v_l df/dz^l  (or sum conj(v_l) df/dzbar^l when `anti`).
template <class F>
auto fd_wirtinger(const F& f, std::span<const cplx> p, const CVec& v, bool anti, double h = kFdStep) {
  auto shifted = [&](cplx s) {
    std::vector<cplx> q(p.begin(), p.end());
    for (std::size_t j = 0; j < q.size(); ++j) q[j] += s * v(j);
    return f(q);
  };
  // Concrete values: Eigen expressions must not outlive the temporaries they reference.
  using Value = decltype(f(std::vector<cplx>{}));
  const Value fp = shifted(cplx{h, 0.0}), fm = shifted(cplx{-h, 0.0});
  const Value gp = shifted(cplx{0.0, h}), gm = shifted(cplx{0.0, -h});
  const cplx sgn = anti ? cplx{0.0, 1.0} : cplx{0.0, -1.0};
  return Value((fp - fm + sgn * (gp - gm)) / (4.0 * h));
}

namespace detail {

inline CVec unit(int m, int l) {
  CVec e = CVec::Zero(m);
  e(l) = 1.0;
  return e;
}

/// Packs every jet entry into a vector so one finite difference serves all of them.
inline CVec pack(const Jet& j) {
  const int m = j.m;
  std::vector<cplx> v;
  v.push_back(j.val);
  for (int a = 0; a < m; ++a) v.push_back(j.d1(a));
  for (int a = 0; a < m; ++a) v.push_back(j.d1b(a));
  for (int a = 0; a < m * m; ++a) v.push_back(j.d11(a % m, a / m));
  if (j.order >= 2) {
    for (int a = 0; a < m * m; ++a) v.push_back(j.d20(a % m, a / m));
    for (int a = 0; a < m * m; ++a) v.push_back(j.d02(a % m, a / m));
    v.insert(v.end(), j.t21.begin(), j.t21.end());
    v.insert(v.end(), j.t12.begin(), j.t12.end());
  }
  return Eigen::Map<CVec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

/// Checks a scalar jet (orders up to that of `jet_at`) against finite differences.
inline OracleResult check_jet_fd(const std::function<Jet(std::span<const cplx>)>& jet_at, std::span<const cplx> p) {
  const Jet j0 = jet_at(p);
  const int m = j0.m;
  const int ord = j0.order;
  // Finite differences of the packed lower-order entries.
  auto packed = [&](std::span<const cplx> q) { return detail::pack(jet_at(q)); };
  const int n1 = 1 + 2 * m + m * m;        // offset of d20 block
  const int n2 = n1 + 2 * m * m;           // offset of t21
  OracleResult res;
  for (int l = 0; l < m; ++l) {
    const CVec e = detail::unit(m, l);
    const CVec dl = fd_wirtinger(packed, p, e, false);
    const CVec dlb = fd_wirtinger(packed, p, e, true);
    const std::string L = std::to_string(l + 1);
    res.record(j0.d1(l), dl(0), "rho_" + L);
    res.record(j0.d1b(l), dlb(0), "rho_" + L + "bar");
    for (int j = 0; j < m; ++j) {
      const std::string J = std::to_string(j + 1);
      res.record(j0.d11(j, l), dlb(1 + j), "rho_" + J + L + "bar");
      if (ord >= 2) {
        res.record(j0.d20(j, l), dl(1 + j), "rho_" + J + L);
        res.record(j0.d02(j, l), dlb(1 + m + j), "rho_" + J + "bar" + L + "bar");
        for (int k = 0; k < m; ++k) {
          const std::string K = std::to_string(k + 1);
          // d21(j,k,l) = d/dzbar^l of d20(j,k); d12(j,k,l) = d/dzbar^l of d11(j,k).
          res.record(j0.d21(j, k, l), dlb(n1 + j + m * k), "rho_" + J + K + L + "bar");
          res.record(j0.d12(j, k, l), dlb(1 + 2 * m + j + m * k), "rho_" + J + K + "bar" + L + "bar");
          if (ord >= 3)
            for (int q = 0; q < m; ++q)
              res.record(j0.d22(j, k, q, l), dlb(n2 + (j * m + k) * m + q),
                         "rho_" + J + K + std::to_string(q + 1) + "bar" + L + "bar");
        }
      }
    }
  }
  return res;
}

/// Checks holomorphic map jets F^d_j, F^d_{jl} against finite differences.
inline OracleResult check_holojet_fd(const std::function<HoloJet(std::span<const cplx>)>& jet_at,
                                     std::span<const cplx> p) {
  const HoloJet j0 = jet_at(p);
  const int N = static_cast<int>(j0.val.size());
  const int m = static_cast<int>(j0.d1.cols());
  auto packed = [&](std::span<const cplx> q) {
    const HoloJet j = jet_at(q);
    CVec v(N + N * m);
    v.head(N) = j.val;
    for (int d = 0; d < N; ++d) v.segment(N + d * m, m) = j.d1.row(d).transpose();
    return v;
  };
  OracleResult res;
  for (int l = 0; l < m; ++l) {
    const CVec dl = fd_wirtinger(packed, p, detail::unit(m, l), false);
    const CVec dlb = fd_wirtinger(packed, p, detail::unit(m, l), true);
    for (int d = 0; d < N; ++d) {
      const std::string D = "F" + std::to_string(d + 1);
      res.record(j0.d1(d, l), dl(d), D + "_" + std::to_string(l + 1));
      res.record(0.0, dlb(d), D + "_" + std::to_string(l + 1) + "bar");
      for (int j = 0; j < m; ++j)
        res.record(j0.d2[d](j, l), dl(N + d * m + j), D + "_" + std::to_string(j + 1) + std::to_string(l + 1));
    }
  }
  return res;
}

/// Z_gamma h_{b mubar} and Z_gamma xi against differences of the Levi formula
/// (fixed distinguished coordinate) and of the transverse solve along Z_gamma.
inline OracleResult check_frame_derivatives_fd(const HypersurfaceChart& chart, const FrameData& f) {
  OracleResult res;
  auto levi_at = [&](std::span<const cplx> q) {
    const Jet j = chart.jet1(q);
    CVec v(f.n * f.n);
    for (int b = 0; b < f.n; ++b)
      for (int mu = 0; mu < f.n; ++mu) v(b * f.n + mu) = levi_entry(j, f.w, f.tau[b], f.tau[mu]);
    return v;
  };
  auto xi_at = [&](std::span<const cplx> q) { return CVec(transverse_solve(chart.jet1(q)).xi); };
  for (int g = 0; g < f.n; ++g) {
    const CVec v = f.Zc.row(g).transpose();
    const CMat dh = levi_derivative(f, g);
    const CVec fdh = fd_wirtinger(levi_at, f.point, v, false);
    for (int b = 0; b < f.n; ++b)
      for (int mu = 0; mu < f.n; ++mu)
        res.record(dh(b, mu), fdh(b * f.n + mu), "Z" + std::to_string(g + 1) + "h");
    const CVec dxi = xi_derivative(f, g);
    const CVec fdxi = fd_wirtinger(xi_at, f.point, v, false);
    for (int j = 0; j < f.m; ++j) res.record(dxi(j), fdxi(j), "Z" + std::to_string(g + 1) + "xi");
  }
  return res;
}

/// (log J)_{l qbar} against differences of the analytic first derivative tr(B^{-1} d_l B).
inline OracleResult check_loghess_fd(const HypersurfaceChart& chart, std::span<const cplx> p) {
  const int m = chart.dim();
  auto first = [&](std::span<const cplx> q) {
    const Jet j = chart.jet(q);
    const CMat b = bordered_hessian(j);
    const CMat binv = b.inverse();
    CVec out(m);
    for (int l = 0; l < m; ++l) {
      CMat d(m + 1, m + 1);
      d(0, 0) = j.d1(l);
      for (int k = 0; k < m; ++k) d(0, 1 + k) = j.d11(l, k);
      for (int a = 0; a < m; ++a) {
        d(1 + a, 0) = j.d20(a, l);
        for (int k = 0; k < m; ++k) d(1 + a, 1 + k) = j.d21(a, l, k);
      }
      out(l) = (binv * d).trace();
    }
    return out;
  };
  const CMat x = loghess_J_ambient(chart.jet(p));
  OracleResult res;
  for (int q = 0; q < m; ++q) {
    const CVec fd = fd_wirtinger(first, p, detail::unit(m, q), true);
    for (int l = 0; l < m; ++l)
      res.record(x(l, q), fd(l), "logJ_" + std::to_string(l + 1) + std::to_string(q + 1) + "bar");
  }
  return res;
}

/// -det by Laplace expansion along the first row (independent of LU).
inline cplx cofactor_det(const CMat& a) {
  const int n = static_cast<int>(a.rows());
  if (n == 1) return a(0, 0);
  cplx s = 0.0;
  for (int j = 0; j < n; ++j) {
    CMat minor(n - 1, n - 1);
    for (int r = 1; r < n; ++r)
      for (int c = 0, cc = 0; c < n; ++c)
        if (c != j) minor(r - 1, cc++) = a(r, c);
    s += ((j % 2) ? -1.0 : 1.0) * a(0, j) * cofactor_det(minor);
  }
  return s;
}

}  // namespace crgeom
