#pragma once

// Pointwise pseudohermitian geometry of M = {rho = 0} with theta = i dbar(rho)
// restricted to M: frame, Levi matrix, transverse field and curvature,
// Fefferman determinant, connection coefficients, Ricci, conformal change.
//
// Index conventions used everywhere below:
//   Zc(alpha, j)   coefficient of d/dz^j in Z_alpha; Z_alpha = d_{tau(alpha)} - (rho_{tau(alpha)}/rho_w) d_w
//   levi(a, b)     h_{a bbar}
//   levi_inv(a, b) h^{a bbar}, i.e. sum_mu levi_inv(a, mu) levi(b, mu) = delta_ab

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crgeom/error.hpp"
#include "crgeom/expr.hpp"
#include "crgeom/jets.hpp"
#include "crgeom/linalg.hpp"

namespace crgeom {

struct ChartOptions {
  double point_tol = 1e-10;         // |rho(p)| accepted as on-surface
  double frame_threshold = 1e-8;    // minimal |rho_w| for the distinguished coordinate
  double levi_min_eig = 1e-10;      // strict pseudoconvexity threshold
  std::optional<int> w_index;       // force the distinguished coordinate (0-based)
};

class HypersurfaceChart {
 public:
  HypersurfaceChart() = default;

  HypersurfaceChart(Expr rho, int m) : rho_(std::move(rho)), m_(m) {
    if (m < 2) throw Error(ErrorKind::BadParams, "ambient dimension must be at least 2");
    if (rho_.arity() > m) throw Error(ErrorKind::BadParams, "rho uses variables beyond z" + std::to_string(m));
    jets_ = JetProgram(rho_, m_, 3);
    jets1_ = JetProgram(rho_, m_, 1);
  }

  const Expr& rho() const { return rho_; }
  int dim() const { return m_; }
  int n() const { return m_ - 1; }

  Jet jet(std::span<const cplx> p) const {
    check_point(p);
    return jets_(p);
  }

  /// Value, first derivatives and complex Hessian only.
  Jet jet1(std::span<const cplx> p) const {
    check_point(p);
    return jets1_(p);
  }

  double value(std::span<const cplx> p) const {
    check_point(p);
    return evaluate(rho_, p).real();
  }

 private:
  void check_point(std::span<const cplx> p) const {
    if (static_cast<int>(p.size()) != m_)
      throw Error(ErrorKind::BadParams,
                  "point has " + std::to_string(p.size()) + " coordinates, expected " + std::to_string(m_));
  }

  Expr rho_;
  int m_ = 0;
  JetProgram jets_;
  JetProgram jets1_;
};

// ------------------------------------------------------------------ frame

struct TransverseData {
  CVec xi;              // xi^j, with xi ⌋ d(rho) = 1
  double r = 0.0;       // transverse curvature
  double r_imag = 0.0;  // imaginary part of the solved r (should vanish)
  double cond = 0.0;    // condition number of the bordered system
  CMat system;          // the (m+1)x(m+1) matrix, kept for derivatives of xi
};

/// Solves rho_j xi^j = 1, rho_{j kbar} xi^j = r rho_kbar for (xi, r).
inline TransverseData transverse_solve(const Jet& jet) {
  const int m = jet.m;
  CMat s = CMat::Zero(m + 1, m + 1);
  CVec rhs = CVec::Zero(m + 1);
  for (int j = 0; j < m; ++j) s(0, j) = jet.d1(j);
  rhs(0) = 1.0;
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < m; ++j) s(1 + k, j) = jet.d11(j, k);
    s(1 + k, m) = -jet.d1b(k);
  }
  TransverseData out;
  out.cond = condition_number(s);
  const CVec x = guarded_solve(s, rhs, "transverse system");
  out.xi = x.head(m);
  out.r = x(m).real();
  out.r_imag = x(m).imag();
  out.system = std::move(s);
  return out;
}

/// J(rho) = -det [[rho, rho_kbar], [rho_j, rho_{j kbar}]].
inline CMat bordered_hessian(const Jet& jet) {
  const int m = jet.m;
  CMat b(m + 1, m + 1);
  b(0, 0) = jet.val;
  for (int k = 0; k < m; ++k) b(0, 1 + k) = jet.d1b(k);
  for (int j = 0; j < m; ++j) {
    b(1 + j, 0) = jet.d1(j);
    for (int k = 0; k < m; ++k) b(1 + j, 1 + k) = jet.d11(j, k);
  }
  return b;
}

inline double fefferman_det(const Jet& jet) { return -bordered_hessian(jet).determinant().real(); }

struct FrameData {
  std::vector<cplx> point;
  int m = 0;
  int n = 0;
  int w = 0;              // distinguished coordinate
  std::vector<int> tau;   // tau[alpha] = coordinate index of Z_alpha
  Jet jet;
  CMat Zc;                // n x m
  CMat levi, levi_inv;    // n x n
  CVec xi;
  double r = 0.0;
  double J = 0.0;
  TransverseData transverse;

  /// Holomorphic part of the Reeb field T = i(xi - conj xi): T = reeb + conj(reeb).
  CVec reeb() const { return cplx{0.0, 1.0} * xi; }
};

inline int pick_w(const Jet& jet, const ChartOptions& opt) {
  const int m = jet.m;
  if (opt.w_index) {
    const int w = *opt.w_index;
    if (w < 0 || w >= m) throw Error(ErrorKind::BadParams, "w_index out of range");
    if (std::abs(jet.d1(w)) <= opt.frame_threshold)
      throw Error(ErrorKind::DegenerateFrame, "|rho_w| below threshold for the requested w_index");
    return w;
  }
  int w = 0;
  for (int j = 1; j < m; ++j)
    if (std::abs(jet.d1(j)) > std::abs(jet.d1(w))) w = j;
  if (std::abs(jet.d1(w)) <= opt.frame_threshold) throw Error(ErrorKind::DegenerateFrame, "d(rho) vanishes at the point");
  return w;
}

/// Levi matrix from the defining function with distinguished coordinate w.
inline cplx levi_entry(const Jet& jet, int w, int a, int b) {
  const cplx rw = jet.d1(w), rwb = jet.d1b(w);
  return jet.d11(a, b) - jet.d1(a) * jet.d11(w, b) / rw - jet.d1b(b) * jet.d11(a, w) / rwb +
         jet.d11(w, w) * jet.d1(a) * jet.d1b(b) / (rw * rwb);
}

inline FrameData frame_from_jet(Jet jet, std::span<const cplx> p, const ChartOptions& opt = {}) {
  if (!(std::abs(jet.val) < opt.point_tol))
    throw Error(ErrorKind::NotOnSurface, "|rho(p)| = " + std::to_string(std::abs(jet.val)));
  FrameData f;
  f.point.assign(p.begin(), p.end());
  f.m = jet.m;
  f.n = jet.m - 1;
  f.w = pick_w(jet, opt);
  for (int j = 0; j < f.m; ++j)
    if (j != f.w) f.tau.push_back(j);
  f.Zc = CMat::Zero(f.n, f.m);
  for (int a = 0; a < f.n; ++a) {
    f.Zc(a, f.tau[a]) = 1.0;
    f.Zc(a, f.w) = -jet.d1(f.tau[a]) / jet.d1(f.w);
  }
  f.levi.resize(f.n, f.n);
  for (int a = 0; a < f.n; ++a)
    for (int b = 0; b < f.n; ++b) f.levi(a, b) = levi_entry(jet, f.w, f.tau[a], f.tau[b]);
  const RVec eig = hermitian_eigenvalues(f.levi);
  if (!(eig(0) > opt.levi_min_eig))
    throw Error(ErrorKind::NotStrictlyPseudoconvex, "smallest Levi eigenvalue " + std::to_string(eig(0)));
  f.levi_inv = guarded_inverse(f.levi.transpose(), "Levi matrix");
  f.transverse = transverse_solve(jet);
  f.xi = f.transverse.xi;
  f.r = f.transverse.r;
  f.J = fefferman_det(jet);
  f.jet = std::move(jet);
  return f;
}

inline FrameData frame_at(const HypersurfaceChart& chart, std::span<const cplx> p, const ChartOptions& opt = {}) {
  return frame_from_jet(chart.jet(p), p, opt);
}

/// Newton projection onto M along the Euclidean gradient of rho.
inline std::vector<cplx> project_to_surface(const HypersurfaceChart& chart, std::span<const cplx> p,
                                            double tol = 1e-14, int max_iter = 60) {
  std::vector<cplx> q(p.begin(), p.end());
  for (int it = 0; it < max_iter; ++it) {
    const Jet jet = chart.jet1(q);
    const double v = jet.val.real();
    if (std::abs(v) < tol) return q;
    double g2 = 0.0;
    for (int j = 0; j < jet.m; ++j) g2 += 4.0 * std::norm(jet.d1(j));
    if (g2 == 0.0) throw Error(ErrorKind::DegenerateFrame, "gradient of rho vanishes during projection");
    for (int j = 0; j < jet.m; ++j) q[j] -= v * 2.0 * std::conj(jet.d1(j)) / g2;
  }
  if (std::abs(chart.value(q)) < 1e-10) return q;
  throw Error(ErrorKind::NotOnSurface, "projection onto the surface did not converge");
}

// ------------------------------------------------------- log J Hessian

/// (log J)_{l qbar} in ambient coordinates, via Jacobi's formula on the bordered Hessian.
inline CMat loghess_J_ambient(const Jet& jet) {
  if (jet.order < 3) throw Error(ErrorKind::BadParams, "log J Hessian needs a third-order jet");
  const int m = jet.m;
  const CMat b = bordered_hessian(jet);
  const double J = -b.determinant().real();
  if (!(J > 0.0)) throw Error(ErrorKind::NonpositiveJ, "J(rho) = " + std::to_string(J));
  const CMat binv = guarded_inverse(b, "bordered Hessian");
  std::vector<CMat> dl(m, CMat(m + 1, m + 1)), dq(m, CMat(m + 1, m + 1));
  for (int l = 0; l < m; ++l) {
    CMat& d = dl[l];
    d(0, 0) = jet.d1(l);
    for (int k = 0; k < m; ++k) d(0, 1 + k) = jet.d11(l, k);
    for (int j = 0; j < m; ++j) {
      d(1 + j, 0) = jet.d20(j, l);
      for (int k = 0; k < m; ++k) d(1 + j, 1 + k) = jet.d21(j, l, k);
    }
    CMat& e = dq[l];
    e(0, 0) = jet.d1b(l);
    for (int k = 0; k < m; ++k) e(0, 1 + k) = jet.d02(k, l);
    for (int j = 0; j < m; ++j) {
      e(1 + j, 0) = jet.d11(j, l);
      for (int k = 0; k < m; ++k) e(1 + j, 1 + k) = jet.d12(j, k, l);
    }
  }
  std::vector<CMat> bl(m), bq(m);
  for (int l = 0; l < m; ++l) {
    bl[l] = binv * dl[l];
    bq[l] = binv * dq[l];
  }
  CMat x(m, m);
  CMat dd(m + 1, m + 1);
  for (int l = 0; l < m; ++l)
    for (int q = 0; q < m; ++q) {
      dd(0, 0) = jet.d11(l, q);
      for (int k = 0; k < m; ++k) dd(0, 1 + k) = jet.d12(l, k, q);
      for (int j = 0; j < m; ++j) {
        dd(1 + j, 0) = jet.d21(j, l, q);
        for (int k = 0; k < m; ++k) dd(1 + j, 1 + k) = jet.d22(j, l, k, q);
      }
      x(l, q) = (binv * dd).trace() - (bq[q] * bl[l]).trace();
    }
  return x;
}

/// L_{a bbar}: restriction of i dd̄ log J(rho) to the holomorphic tangent space, in the frame.
inline CMat loghess_J(const FrameData& f) { return f.Zc * loghess_J_ambient(f.jet) * f.Zc.adjoint(); }

// ------------------------------------------------ derivatives along Z_gamma

namespace detail {

/// Forward-mode pair (value, derivative along a fixed (1,0) direction).
struct Dual {
  cplx v, d;
};
inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }

/// Jet entries carried with their derivative along v = sum_l v_l d/dz^l.
struct DirectionalJet {
  const Jet& jet;
  const CVec& v;
  Dual d1(int a) const {
    cplx d = 0.0;
    for (int l = 0; l < jet.m; ++l) d += v(l) * jet.d20(a, l);
    return {jet.d1(a), d};
  }
  Dual d1b(int b) const {
    cplx d = 0.0;
    for (int l = 0; l < jet.m; ++l) d += v(l) * jet.d11(l, b);
    return {jet.d1b(b), d};
  }
  Dual d11(int a, int b) const {
    cplx d = 0.0;
    for (int l = 0; l < jet.m; ++l) d += v(l) * jet.d21(a, l, b);
    return {jet.d11(a, b), d};
  }
};

inline Dual levi_entry_dual(const DirectionalJet& dj, int w, int a, int b) {
  const Dual rw = dj.d1(w), rwb = dj.d1b(w);
  return dj.d11(a, b) - dj.d1(a) * dj.d11(w, b) / rw - dj.d1b(b) * dj.d11(a, w) / rwb +
         dj.d11(w, w) * dj.d1(a) * dj.d1b(b) / (rw * rwb);
}

}  // namespace detail

/// Derivative along Z_gamma of the Levi matrix: out(b, mu) = Z_gamma h_{b mubar}.
inline CMat levi_derivative(const FrameData& f, int gamma) {
  const CVec v = f.Zc.row(gamma).transpose();
  const detail::DirectionalJet dj{f.jet, v};
  CMat out(f.n, f.n);
  for (int b = 0; b < f.n; ++b)
    for (int mu = 0; mu < f.n; ++mu) out(b, mu) = detail::levi_entry_dual(dj, f.w, f.tau[b], f.tau[mu]).d;
  return out;
}

/// Derivative of xi along Z_gamma (m-vector), from differentiating the bordered system.
inline CVec xi_derivative(const FrameData& f, int gamma) {
  const int m = f.m;
  const CVec v = f.Zc.row(gamma).transpose();
  CMat ds = CMat::Zero(m + 1, m + 1);
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < m; ++l) ds(0, j) += v(l) * f.jet.d20(j, l);
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < m; ++l) ds(1 + k, j) += v(l) * f.jet.d21(j, l, k);
    for (int l = 0; l < m; ++l) ds(1 + k, m) -= v(l) * f.jet.d11(l, k);
  }
  CVec x(m + 1);
  x.head(m) = f.xi;
  x(m) = f.r;
  const CVec dx = guarded_solve(f.transverse.system, -(ds * x), "transverse system derivative");
  return dx.head(m);
}

// ------------------------------------------------------------ connection

struct ConnectionData {
  int n = 0;
  // onZ[gamma](beta, alpha)  = omega_beta^alpha(Z_gamma)
  // onZb[gamma](beta, alpha) = omega_beta^alpha(Zbar_gamma)
  // onT(beta, alpha)         = omega_beta^alpha(T)
  std::vector<CMat> onZ, onZb;
  CMat onT;
  std::vector<CMat> dlevi;   // dlevi[gamma](beta, mu) = Z_gamma h_{beta mubar}
  CVec xi_lower;             // xi_beta = h_{beta sigmabar} conj(xi^{tau(sigma)})
};

inline ConnectionData connection_coeffs(const FrameData& f) {
  const int n = f.n;
  ConnectionData c;
  c.n = n;
  CVec xit(n);
  for (int a = 0; a < n; ++a) xit(a) = f.xi(f.tau[a]);
  c.xi_lower = f.levi * xit.conjugate();
  c.onZ.assign(n, CMat(n, n));
  c.onZb.assign(n, CMat(n, n));
  c.onT.resize(n, n);
  for (int g = 0; g < n; ++g) {
    c.dlevi.push_back(levi_derivative(f, g));
    const CMat& dh = c.dlevi.back();
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) {
        cplx s = 0.0;
        for (int mu = 0; mu < n; ++mu) s += f.levi_inv(a, mu) * dh(b, mu);
        c.onZ[g](b, a) = s - (g == a ? c.xi_lower(b) : cplx{0.0, 0.0});
        c.onZb[g](b, a) = xit(a) * f.levi(b, g);
      }
  }
  for (int b = 0; b < n; ++b) {
    const CVec dxi = xi_derivative(f, b);
    for (int a = 0; a < n; ++a) c.onT(b, a) = cplx{0.0, -1.0} * dxi(f.tau[a]);
  }
  return c;
}

/// Max over (gamma, beta, mu) of |Z_gamma h_{beta mubar} - omega_beta^s(Z_gamma) h_{s mubar}
/// - conj(omega_mu^s(Zbar_gamma)) h_{beta sbar}|.
inline double metric_compatibility_residual(const FrameData& f, const ConnectionData& c) {
  double worst = 0.0;
  for (int g = 0; g < f.n; ++g)
    for (int b = 0; b < f.n; ++b)
      for (int mu = 0; mu < f.n; ++mu) {
        cplx s = c.dlevi[g](b, mu);
        for (int k = 0; k < f.n; ++k) {
          s -= c.onZ[g](b, k) * f.levi(k, mu);
          s -= std::conj(c.onZb[g](mu, k)) * f.levi(b, k);
        }
        worst = std::max(worst, std::abs(s));
      }
  return worst;
}

// ------------------------------------------------------------------ Ricci

struct RicciData {
  CMat ric;        // Ric_{a bbar}
  double scalar = 0.0;
  CMat L;          // restricted log J Hessian
};

inline double h_trace(const FrameData& f, const CMat& a) {
  cplx s = 0.0;
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j) s += f.levi_inv(i, j) * a(i, j);
  return s.real();
}

/// Ric = (n+1) r h - L (Li–Luk), scalar curvature R = h^{a bbar} Ric_{a bbar}.
inline RicciData ricci_liluk(const FrameData& f) {
  RicciData out;
  out.L = loghess_J(f);
  out.ric = static_cast<double>(f.n + 1) * f.r * f.levi - out.L;
  out.scalar = h_trace(f, out.ric);
  return out;
}

// ------------------------------------------------------ conformal change

/// |dbar_b s|^2 for the function with jet `sj` at the frame point.
inline double dbarb_norm2(const FrameData& f, const Jet& sj) {
  CVec v(f.n);
  for (int a = 0; a < f.n; ++a) {
    cplx s = 0.0;
    for (int k = 0; k < f.m; ++k) s += std::conj(f.Zc(a, k)) * sj.d1b(k);
    v(a) = s;
  }
  return (v.adjoint() * f.levi_inv * v)(0, 0).real();
}

/// r(e^sigma rho) from r(rho): e^{-sigma} (r + 2 Re(xi sigma) - |dbar_b sigma|^2).
inline double conformal_transverse(const FrameData& f, const Jet& sigma) {
  cplx xs = 0.0;
  for (int j = 0; j < f.m; ++j) xs += f.xi(j) * sigma.d1(j);
  return std::exp(-sigma.val.real()) * (f.r + 2.0 * xs.real() - dbarb_norm2(f, sigma));
}

/// First-order jet of e^sigma rho, assembled from the jets of rho and sigma.
inline Jet conformal_jet(const Jet& rho, const Jet& sigma) {
  const int m = rho.m;
  const cplx es = std::exp(sigma.val);
  Jet out;
  out.m = m;
  out.order = 1;
  out.val = es * rho.val;
  out.d1.resize(m);
  out.d1b.resize(m);
  out.d11.resize(m, m);
  for (int j = 0; j < m; ++j) {
    out.d1(j) = es * (sigma.d1(j) * rho.val + rho.d1(j));
    out.d1b(j) = es * (sigma.d1b(j) * rho.val + rho.d1b(j));
  }
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k)
      out.d11(j, k) = es * (sigma.d1b(k) * (sigma.d1(j) * rho.val + rho.d1(j)) + sigma.d11(j, k) * rho.val +
                            sigma.d1(j) * rho.d1b(k) + rho.d11(j, k));
  return out;
}

}  // namespace crgeom
