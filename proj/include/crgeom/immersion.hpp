#pragma once

// Extrinsic geometry of a semi-isometric CR immersion F: M -> C^N, where
// rho = ||F||^2 + psi with psi pluriharmonic. Second fundamental form, mean
// curvature, torsion, Gauss-equation curvature and umbilicity.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "crgeom/error.hpp"
#include "crgeom/expr.hpp"
#include "crgeom/hypersurface.hpp"
#include "crgeom/jets.hpp"
#include "crgeom/linalg.hpp"

namespace crgeom {

inline constexpr double kUmbilicTolerance = 1e-8;

class ImmersionSpec {
 public:
  ImmersionSpec() = default;

  /// F must be holomorphic and psi pluriharmonic; rho is assembled as ||F||^2 + psi.
  ImmersionSpec(std::vector<Expr> F, Expr psi, int m) : F_(std::move(F)), psi_(std::move(psi)) {
    if (F_.empty()) throw Error(ErrorKind::InvalidImmersion, "immersion has no components");
    for (std::size_t d = 0; d < F_.size(); ++d)
      if (!is_holomorphic(F_[d]))
        throw Error(ErrorKind::InvalidImmersion, "component F" + std::to_string(d + 1) + " is not holomorphic");
    if (!is_pluriharmonic(psi_)) throw Error(ErrorKind::NotPluriharmonic, "psi is not pluriharmonic");
    if (static_cast<int>(F_.size()) < m)
      throw Error(ErrorKind::InvalidImmersion, "target dimension is smaller than the ambient dimension");
    std::vector<Expr> terms;
    for (const auto& f : F_) terms.push_back(abs2(f));
    terms.push_back(psi_);
    chart_ = HypersurfaceChart(sum(terms), m);
    fjets_ = HoloJetProgram(F_, m);
  }

  const std::vector<Expr>& F() const { return F_; }
  const Expr& psi() const { return psi_; }
  const HypersurfaceChart& chart() const { return chart_; }
  int target_dim() const { return static_cast<int>(F_.size()); }
  HoloJet fjet(std::span<const cplx> p) const { return fjets_(p); }

 private:
  std::vector<Expr> F_;
  Expr psi_;
  HypersurfaceChart chart_;
  HoloJetProgram fjets_;
};

struct SecondFundamentalForm {
  FrameData frame;
  ConnectionData conn;
  HoloJet fjet;
  CMat T;                       // N x n, column beta = dF Z_beta
  std::vector<CMat> ambient;    // ambient[d](alpha, gamma): holomorphic part, ambient components
  std::vector<CMat> mixed;      // mixed[d](alpha, beta): II(Z_alpha, Zbar_beta), coefficient of d/dconj(w^d)
  CMat normal;                  // N x (N-n), orthonormal basis of N^{1,0}
  std::vector<CMat> holo;       // holo[a](alpha, gamma) = omega^a_{alpha gamma}
  CVec H;                       // (1,0) mean curvature, ambient components
  CVec H_trace;                 // conj of the Levi trace of the mixed part, for comparison with H
  double Hnorm2 = 0.0;
  CMat torsion;                 // A_{alpha beta}
  double IIcirc_norm2 = 0.0;
  // residuals
  double symmetry = 0.0;        // max |omega_{ag} - omega_{ga}|
  double normality = 0.0;       // max |<II(Z_a, Z_g), dF Z_b>|
  double mixed_residual = 0.0;  // max |mixed + h conj(dF xi)|
  double torsion_routes = 0.0;  // |A via normal basis - A via ambient components|
};

namespace detail {

inline CMat normal_basis(const CMat& T, int N) {
  const int n = static_cast<int>(T.cols());
  std::vector<CVec> basis;
  auto orthogonalize = [&basis](CVec v) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= b.dot(v) * b;
    return v;
  };
  for (int b = 0; b < n; ++b) {
    CVec v = orthogonalize(T.col(b));
    const double nv = v.norm();
    if (nv < 1e-8 * std::max(1.0, T.col(b).norm()))
      throw Error(ErrorKind::RankDeficientNormalBasis, "tangent vectors dF Z_alpha are linearly dependent");
    basis.push_back(v / nv);
  }
  CMat out(N, N - n);
  int k = 0;
  for (int d = 0; d < N && k < N - n; ++d) {
    CVec e = CVec::Zero(N);
    e(d) = 1.0;
    CVec v = orthogonalize(e);
    const double nv = v.norm();
    if (nv < 1e-6) continue;
    v /= nv;
    basis.push_back(v);
    out.col(k++) = v;
  }
  if (k < N - n) throw Error(ErrorKind::RankDeficientNormalBasis, "normal space has deficient rank");
  return out;
}

}  // namespace detail

/// Squared norm of a symmetric 2-tensor family omega^a in an h-orthonormal frame.
inline double tensor_norm2(const std::vector<CMat>& omega, const CMat& g) {
  double s = 0.0;
  for (const auto& w : omega) s += (g * w * g.transpose()).squaredNorm();
  return s;
}

inline SecondFundamentalForm second_fundamental_form(const ImmersionSpec& spec, std::span<const cplx> p,
                                                     const ChartOptions& opt = {}) {
  SecondFundamentalForm s;
  s.frame = frame_at(spec.chart(), p, opt);
  const FrameData& f = s.frame;
  const int n = f.n, m = f.m, N = spec.target_dim();
  s.conn = connection_coeffs(f);
  s.fjet = spec.fjet(p);
  const HoloJet& fj = s.fjet;

  Eigen::JacobiSVD<CMat> svd(fj.d1);
  if (svd.singularValues()(m - 1) < 1e-8) throw Error(ErrorKind::InvalidImmersion, "dF is not of full rank");

  s.T = fj.d1 * f.Zc.transpose();
  s.normal = detail::normal_basis(s.T, N);

  // Z_alpha(q_gamma) with q_gamma = rho_{tau gamma} / rho_w, and Z_alpha(rho_bbar / rho_wbar).
  CMat zq(n, n), zqb(n, n);
  for (int a = 0; a < n; ++a) {
    const CVec v = f.Zc.row(a).transpose();
    const detail::DirectionalJet dj{f.jet, v};
    for (int g = 0; g < n; ++g) {
      zq(a, g) = (dj.d1(f.tau[g]) / dj.d1(f.w)).d;
      zqb(a, g) = (dj.d1b(f.tau[g]) / dj.d1b(f.w)).d;
    }
  }

  s.ambient.assign(N, CMat(n, n));
  s.mixed.assign(N, CMat(n, n));
  const CVec dfxi = fj.d1 * f.xi;
  for (int d = 0; d < N; ++d) {
    const CMat hess = f.Zc * fj.d2[d] * f.Zc.transpose();  // (alpha, gamma) = Zc(a,l) Zc(g,j) F_{jl}
    for (int a = 0; a < n; ++a)
      for (int g = 0; g < n; ++g) {
        cplx v = hess(a, g) - zq(a, g) * fj.d1(d, f.w);
        for (int b = 0; b < n; ++b) v -= s.conn.onZ[a](g, b) * s.T(d, b);
        s.ambient[d](a, g) = v;
        cplx mix = -zqb(a, g) * std::conj(fj.d1(d, f.w));
        for (int c = 0; c < n; ++c) mix -= std::conj(s.conn.onZb[a](g, c)) * std::conj(s.T(d, c));
        s.mixed[d](a, g) = mix;
        s.mixed_residual = std::max(s.mixed_residual, std::abs(mix + f.levi(a, g) * std::conj(dfxi(d))));
      }
  }

  s.H = -dfxi;
  s.Hnorm2 = s.H.squaredNorm();
  s.H_trace = CVec::Zero(N);
  for (int d = 0; d < N; ++d) {
    cplx t = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) t += f.levi_inv(a, b) * s.mixed[d](a, b);
    s.H_trace(d) = std::conj(t / static_cast<double>(n));
  }

  const int k = N - n;
  s.holo.assign(k, CMat::Zero(n, n));
  for (int a = 0; a < k; ++a)
    for (int d = 0; d < N; ++d) s.holo[a] += s.ambient[d] * std::conj(s.normal(d, a));

  for (int a = 0; a < n; ++a)
    for (int g = 0; g < n; ++g) {
      for (int d = 0; d < N; ++d)
        s.symmetry = std::max(s.symmetry, std::abs(s.ambient[d](a, g) - s.ambient[d](g, a)));
      for (int b = 0; b < n; ++b) {
        cplx pr = 0.0;
        for (int d = 0; d < N; ++d) pr += s.ambient[d](a, g) * std::conj(s.T(d, b));
        s.normality = std::max(s.normality, std::abs(pr));
      }
    }

  // Torsion A_{ab} = -i omega^c_{ab} conj(H_c), H_c the normal-basis components of H.
  const CVec Hn = s.normal.adjoint() * s.H;
  s.torsion = CMat::Zero(n, n);
  CMat direct = CMat::Zero(n, n);
  for (int c = 0; c < k; ++c) s.torsion += cplx{0.0, -1.0} * s.holo[c] * std::conj(Hn(c));
  for (int d = 0; d < N; ++d) direct += cplx{0.0, -1.0} * s.ambient[d] * std::conj(s.H(d));
  s.torsion_routes = max_abs(s.torsion - direct);

  s.IIcirc_norm2 = tensor_norm2(s.holo, unitarizer(f.levi));
  return s;
}

/// Torsion from an already computed second fundamental form.
inline CMat torsion_from_II(const SecondFundamentalForm& s) { return s.torsion; }

// --------------------------------------------------------------- curvature

struct CurvatureData {
  int n = 0;
  std::vector<cplx> riem;  // R_{a bbar c dbar}, index ((a*n + b)*n + c)*n + d
  CMat ric;
  double scalar = 0.0;
  double cm_norm2 = 0.0;
  double pair_symmetry = 0.0;  // max of the two pair-symmetry defects

  cplx operator()(int a, int b, int c, int d) const { return riem[((a * n + b) * n + c) * n + d]; }
};

inline CurvatureData gauss_curvature(const SecondFundamentalForm& s) {
  const FrameData& f = s.frame;
  const int n = f.n;
  const CMat& h = f.levi;
  CurvatureData c;
  c.n = n;
  c.riem.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
  auto idx = [n](int a, int b, int g, int d) { return ((a * n + b) * n + g) * n + d; };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int g = 0; g < n; ++g)
        for (int d = 0; d < n; ++d) {
          cplx v = s.Hnorm2 * (h(a, b) * h(g, d) + h(a, d) * h(g, b));
          for (const auto& w : s.holo) v -= w(a, g) * std::conj(w(b, d));
          c.riem[idx(a, b, g, d)] = v;
        }
  c.ric = CMat::Zero(n, n);
  for (int g = 0; g < n; ++g)
    for (int d = 0; d < n; ++d)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) c.ric(g, d) += f.levi_inv(a, b) * c.riem[idx(a, b, g, d)];
  c.scalar = h_trace(f, c.ric);

  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int g = 0; g < n; ++g)
        for (int d = 0; d < n; ++d) {
          const cplx r = c.riem[idx(a, b, g, d)];
          c.pair_symmetry = std::max(c.pair_symmetry, std::abs(r - std::conj(c.riem[idx(b, a, d, g)])));
          c.pair_symmetry = std::max(c.pair_symmetry, std::abs(r - c.riem[idx(g, b, a, d)]));
        }

  if (n >= 2) {
    const double nn = n;
    std::vector<cplx> S(c.riem.size());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int g = 0; g < n; ++g)
          for (int d = 0; d < n; ++d) {
            const cplx ricterms = c.ric(a, b) * h(g, d) + c.ric(g, b) * h(a, d) + c.ric(a, d) * h(g, b) +
                                  c.ric(g, d) * h(a, b);
            const cplx hh = h(a, b) * h(g, d) + h(a, d) * h(g, b);
            S[idx(a, b, g, d)] =
                c.riem[idx(a, b, g, d)] - ricterms / (nn + 2.0) + c.scalar * hh / ((nn + 1.0) * (nn + 2.0));
          }
    // Norm in an h-orthonormal frame: transform each index with G (conjugated slots with conj G).
    const CMat G = unitarizer(h);
    std::vector<cplx> t = S, u(S.size());
    for (int slot = 0; slot < 4; ++slot) {
      const bool barred = slot == 1 || slot == 3;
      for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1)
          for (int i2 = 0; i2 < n; ++i2)
            for (int i3 = 0; i3 < n; ++i3) {
              int ix[4] = {i0, i1, i2, i3};
              const int target = ix[slot];
              cplx acc = 0.0;
              for (int q = 0; q < n; ++q) {
                ix[slot] = q;
                const cplx g = barred ? std::conj(G(target, q)) : G(target, q);
                acc += g * t[idx(ix[0], ix[1], ix[2], ix[3])];
              }
              u[idx(i0, i1, i2, i3)] = acc;
            }
      std::swap(t, u);
    }
    for (const auto& v : t) c.cm_norm2 += std::norm(v);
  }
  return c;
}

// -------------------------------------------------------------- umbilicity

struct UmbilicityReport {
  double II0norm2 = 0.0;
  CMat logJ_form;       // L from log J(rho) alone
  CMat logJ_from_II;    // h^{a bbar} omega^c_{a g} conj(omega^c_{b s})
  double logJ_trace_residual = 0.0;
  bool is_umbilic = false;
};

inline CMat ii_contraction(const SecondFundamentalForm& s) {
  const FrameData& f = s.frame;
  const int n = f.n;
  CMat out = CMat::Zero(n, n);
  for (int g = 0; g < n; ++g)
    for (int d = 0; d < n; ++d)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (const auto& w : s.holo) out(g, d) += f.levi_inv(a, b) * w(a, g) * std::conj(w(b, d));
  return out;
}

inline UmbilicityReport umbilicity_report(const SecondFundamentalForm& s, double tol = kUmbilicTolerance) {
  UmbilicityReport u;
  u.II0norm2 = s.IIcirc_norm2;
  u.logJ_form = loghess_J(s.frame);
  u.logJ_from_II = ii_contraction(s);
  u.logJ_trace_residual = max_abs(u.logJ_form - u.logJ_from_II);
  u.is_umbilic = u.II0norm2 < tol;
  return u;
}

inline UmbilicityReport umbilicity_report(const ImmersionSpec& spec, std::span<const cplx> p,
                                          double tol = kUmbilicTolerance) {
  return umbilicity_report(second_fundamental_form(spec, p), tol);
}

}  // namespace crgeom
