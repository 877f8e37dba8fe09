#pragma once

// Kohn Laplacian values on restrictions of pluriharmonic functions,
// dbar_b-energy densities, tension, Takahashi-type eigenmap checks and the
// two eigenvalue upper bounds (mean curvature average, tension ratio).

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "crgeom/error.hpp"
#include "crgeom/expr.hpp"
#include "crgeom/hypersurface.hpp"
#include "crgeom/immersion.hpp"
#include "crgeom/jets.hpp"
#include "crgeom/quadrature.hpp"

namespace crgeom {

class PluriharmonicFunction {
 public:
  PluriharmonicFunction() = default;

  PluriharmonicFunction(Expr ftilde, int m, std::string label = {})
      : ftilde_(std::move(ftilde)), label_(std::move(label)) {
    if (!is_pluriharmonic(ftilde_))
      throw Error(ErrorKind::NotPluriharmonic, "'" + (label_.empty() ? to_string(ftilde_) : label_) +
                                                   "' has nonvanishing mixed derivatives");
    jets_ = JetProgram(ftilde_, m, 1);
  }

  const Expr& ftilde() const { return ftilde_; }
  const std::string& label() const { return label_; }
  Jet jet(std::span<const cplx> p) const { return jets_(p); }

 private:
  Expr ftilde_;
  std::string label_;
  JetProgram jets_;
};

/// box_b f = -n conj(H) f~ = n sum_j conj(xi^j) f~_{jbar}.
inline cplx boxb_value(const CVec& xi, int n, const Jet& fj) {
  cplx s = 0.0;
  for (int j = 0; j < fj.m; ++j) s += std::conj(xi(j)) * fj.d1b(j);
  return static_cast<double>(n) * s;
}

inline cplx boxb_pluriharmonic(const FrameData& f, const PluriharmonicFunction& fn) {
  return boxb_value(f.xi, f.n, fn.jet(f.point));
}

inline cplx boxb_pluriharmonic(const HypersurfaceChart& chart, const PluriharmonicFunction& fn,
                               std::span<const cplx> p) {
  return boxb_pluriharmonic(frame_at(chart, p), fn);
}

/// |dbar_b f|^2 at the frame point.
inline double dbarb_energy_density(const FrameData& f, const PluriharmonicFunction& fn) {
  return dbarb_norm2(f, fn.jet(f.point));
}

inline double dbarb_energy_density(const HypersurfaceChart& chart, const PluriharmonicFunction& fn,
                                   std::span<const cplx> p) {
  return dbarb_energy_density(frame_at(chart, p), fn);
}

// --------------------------------------------------------------- Takahashi

struct TakahashiReport {
  double lambda = 0.0;
  double radius = 0.0;
  bool is_eigen = false;
  bool is_pseudohermitian = false;
  double eigen_residual = 0.0;     // max |box_b conj(F^d) - lambda conj(F^d)|
  double sphere_residual = 0.0;    // max | ||F(p)|| - radius |
  double reeb_residual = 0.0;      // max |F_* T - T_sphere(F(p))|
  double pullback_residual = 0.0;  // max |iota^*(i dbar psi)| on Zbar_alpha and T
  std::size_t samples = 0;
};

/// box_b applied to each conj(F^d): n conj(dF xi).
inline CVec boxb_conj_components(const FrameData& f, const HoloJet& fj) {
  return static_cast<double>(f.n) * (fj.d1 * f.xi).conjugate();
}

/// CR map with jets `fjet` on (M, theta) given by `chart`; the map need not be semi-isometric for theta.
inline TakahashiReport takahashi_check(const HypersurfaceChart& chart,
                                       const std::function<HoloJet(std::span<const cplx>)>& fjet,
                                       std::span<const std::vector<cplx>> sample, double tol = 1e-8) {
  if (sample.empty()) throw Error(ErrorKind::BadParams, "takahashi_check needs at least one sample point");
  TakahashiReport rep;
  rep.samples = sample.size();
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const FrameData f = frame_at(chart, sample[i]);
    const HoloJet fj = fjet(sample[i]);
    const CVec b = boxb_conj_components(f, fj);
    const double f2 = fj.val.squaredNorm();
    if (i == 0) {
      if (f2 < 1e-300) throw Error(ErrorKind::NotEigenmap, "F vanishes at the first sample point");
      rep.lambda = (b.transpose() * fj.val)(0, 0).real() / f2;
      if (!(rep.lambda > 0.0)) throw Error(ErrorKind::NotEigenmap, "fitted eigenvalue is not positive");
      rep.radius = std::sqrt(f.n / rep.lambda);
    }
    const double res = (b - rep.lambda * fj.val.conjugate()).cwiseAbs().maxCoeff();
    rep.eigen_residual = std::max(rep.eigen_residual, res);
    if (res > tol * std::max(1.0, b.norm()))
      throw Error(ErrorKind::NotEigenmap, "box_b conj(F) is not proportional to conj(F) at sample " +
                                              std::to_string(i) + " (residual " + std::to_string(res) + ")");
    rep.sphere_residual = std::max(rep.sphere_residual, std::abs(std::sqrt(f2) - rep.radius));
    // F_* T has holomorphic part i dF xi; the sphere of radius R has Reeb field i(W - conj W)/R^2.
    const CVec dfxi = fj.d1 * f.xi;
    rep.reeb_residual = std::max(rep.reeb_residual, (dfxi - fj.val / (rep.radius * rep.radius)).cwiseAbs().maxCoeff());
    // i dbar psi on T M, with psi_kbar = rho_kbar - sum_d F^d conj(F^d_k).
    CVec psib(f.m);
    for (int k = 0; k < f.m; ++k) psib(k) = f.jet.d1b(k) - (fj.val.transpose() * fj.d1.col(k).conjugate())(0, 0);
    for (int a = 0; a < f.n; ++a) {
      cplx s = 0.0;
      for (int k = 0; k < f.m; ++k) s += std::conj(f.Zc(a, k)) * psib(k);
      rep.pullback_residual = std::max(rep.pullback_residual, std::abs(s));
    }
    const CVec reeb = f.reeb();
    cplx s = 0.0;
    for (int k = 0; k < f.m; ++k) s += psib(k) * std::conj(reeb(k));
    rep.pullback_residual = std::max(rep.pullback_residual, std::abs(s));
  }
  rep.is_eigen = true;
  rep.is_pseudohermitian = rep.sphere_residual < tol && rep.reeb_residual < tol && rep.pullback_residual < tol;
  return rep;
}

inline TakahashiReport takahashi_check(const ImmersionSpec& spec, std::span<const std::vector<cplx>> sample,
                                       double tol = 1e-8) {
  return takahashi_check(
      spec.chart(), [&](std::span<const cplx> p) { return spec.fjet(p); }, sample, tol);
}

// ----------------------------------------------------------------- bounds

struct EigenBoundReport {
  double volume = 0.0;
  double volume_error = 0.0;
  double mean_H2 = 0.0;
  double reilly_upper = 0.0;
  double tension_energy = 0.0;
  double tension_total = 0.0;
  double tension_upper = 0.0;
  long long samples_used = 0;
  int orientation = 1;
  std::string method;
};

/// Mean of |H|^2 = r(rho) over M, and n times it.
inline EigenBoundReport reilly_bound(const HypersurfaceChart& chart, const QuadratureRule& rule) {
  const RadialChart rc{&chart};
  const Density r = [](std::span<const cplx>, const Jet& jet) { return transverse_solve(jet).r; };
  const Density dens[] = {r};
  const auto res = integrate_many(rc, dens, rule);
  EigenBoundReport rep;
  rep.volume = res[0].value;
  rep.volume_error = res[0].error_estimate;
  rep.mean_H2 = res[1].value / res[0].value;
  rep.reilly_upper = chart.n() * rep.mean_H2;
  rep.samples_used = res[0].nodes;
  rep.orientation = res[0].orientation;
  rep.method = rule.describe();
  return rep;
}

inline EigenBoundReport reilly_bound(const ImmersionSpec& spec, const QuadratureRule& rule) {
  return reilly_bound(spec.chart(), rule);
}

namespace detail {

inline void densities_at(const FrameData& f, std::span<const PluriharmonicFunction> fs, double& energy,
                         double& tension) {
  energy = 0.0;
  tension = 0.0;
  for (const auto& fn : fs) {
    const Jet fj = fn.jet(f.point);
    energy += dbarb_norm2(f, fj);
    tension += std::norm(boxb_value(f.xi, f.n, fj));
  }
}

}  // namespace detail

/// Tension ratio sum_I int |box_b f^I|^2 / sum_I int |dbar_b f^I|^2 by quadrature.
inline EigenBoundReport tension_bound(const HypersurfaceChart& chart, std::span<const PluriharmonicFunction> fs,
                                      const QuadratureRule& rule) {
  const RadialChart rc{&chart};
  // Both densities come from one frame; the second reads what the first computed at the same node.
  double last_tension = 0.0;
  const Density both[] = {
      [&](std::span<const cplx> p, const Jet&) {
        double e = 0.0;
        detail::densities_at(frame_at(chart, p), fs, e, last_tension);
        return e;
      },
      [&](std::span<const cplx>, const Jet&) { return last_tension; },
  };
  const auto res = integrate_many(rc, both, rule);
  EigenBoundReport rep;
  rep.volume = res[0].value;
  rep.volume_error = res[0].error_estimate;
  rep.tension_energy = res[1].value;
  rep.tension_total = res[2].value;
  if (rep.tension_energy < 1e-12) throw Error(ErrorKind::ZeroEnergy, "all components are CR functions");
  rep.tension_upper = rep.tension_total / rep.tension_energy;
  rep.samples_used = res[0].nodes;
  rep.orientation = res[0].orientation;
  rep.method = rule.describe();
  return rep;
}

/// Tension ratio certified by constancy of both densities over the given points
/// (used where M is not star-shaped). Energy and tension are reported per unit volume.
inline EigenBoundReport tension_bound_constant(const HypersurfaceChart& chart,
                                               std::span<const PluriharmonicFunction> fs,
                                               std::span<const std::vector<cplx>> points, double rel_tol = 1e-9) {
  if (points.empty()) throw Error(ErrorKind::BadParams, "constancy certificate needs sample points");
  double e0 = 0.0, t0 = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double e, t;
    detail::densities_at(frame_at(chart, points[i]), fs, e, t);
    if (i == 0) {
      e0 = e;
      t0 = t;
      continue;
    }
    if (std::abs(e - e0) > rel_tol * std::max(1.0, std::abs(e0)) ||
        std::abs(t - t0) > rel_tol * std::max(1.0, std::abs(t0)))
      throw Error(ErrorKind::BadParams, "densities are not constant; a quadrature rule is required");
  }
  if (e0 < 1e-12) throw Error(ErrorKind::ZeroEnergy, "all components are CR functions");
  EigenBoundReport rep;
  rep.tension_energy = e0;
  rep.tension_total = t0;
  rep.tension_upper = t0 / e0;
  rep.samples_used = static_cast<long long>(points.size());
  rep.method = "constant-density";
  return rep;
}

}  // namespace crgeom
