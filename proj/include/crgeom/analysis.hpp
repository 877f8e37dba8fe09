#pragma once

// Everything the tools report about a single point of a gallery surface:
// intrinsic data from rho alone, and, when an immersion is attached, the
// second fundamental form, Gauss curvature and the identity residuals that
// tie the two routes together.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crgeom/gallery.hpp"
#include "crgeom/hypersurface.hpp"
#include "crgeom/immersion.hpp"
#include "crgeom/linalg.hpp"

namespace crgeom {

struct Residual {
  std::string name;
  double value = 0.0;
};

struct PointAnalysis {
  FrameData frame;
  RicciData ricci;
  RVec loghess_eigs;                // eigenvalues of L relative to h
  double min_eig_L = 0.0;
  std::optional<SecondFundamentalForm> sff;
  std::optional<CurvatureData> curvature;
  std::optional<UmbilicityReport> umbilicity;
  double torsion_norm2 = 0.0;
  double ricci_slack = 0.0;          // min eigenvalue of (n+1)|H|^2 h - Ric relative to h
  std::vector<Residual> residuals;   // identity residuals tying the routes together

  double residual(const std::string& name) const {
    for (const auto& r : residuals)
      if (r.name == name) return r.value;
    return 0.0;
  }
};

inline PointAnalysis analyze_point(const SurfaceSpec& s, std::span<const cplx> p, const ChartOptions& opt = {}) {
  PointAnalysis a;
  if (s.immersion) {
    a.sff = second_fundamental_form(*s.immersion, p, opt);
    a.frame = a.sff->frame;
  } else {
    a.frame = frame_at(s.chart, p, opt);
  }
  const FrameData& f = a.frame;
  a.ricci = ricci_liluk(f);
  a.loghess_eigs = relative_eigenvalues(a.ricci.L, f.levi);
  a.min_eig_L = a.loghess_eigs.size() ? a.loghess_eigs.minCoeff() : 0.0;
  const RVec slack = relative_eigenvalues(static_cast<double>(f.n + 1) * f.r * f.levi - a.ricci.ric, f.levi);
  a.ricci_slack = slack.minCoeff();
  if (!a.sff) return a;

  const SecondFundamentalForm& sf = *a.sff;
  a.curvature = gauss_curvature(sf);
  a.umbilicity = umbilicity_report(sf);
  const CMat G = unitarizer(f.levi);
  a.torsion_norm2 = tensor_norm2({sf.torsion}, G);
  const double n = f.n;
  const double gauss_R = n * (n + 1.0) * sf.Hnorm2 - sf.IIcirc_norm2;
  const CMat ric_ii = (n + 1.0) * sf.Hnorm2 * f.levi - a.umbilicity->logJ_from_II;
  a.ricci_slack = relative_eigenvalues((n + 1.0) * sf.Hnorm2 * f.levi - a.ricci.ric, f.levi).minCoeff();
  a.residuals = {
      {"gauss_trace", std::abs(a.curvature->scalar - gauss_R)},
      {"scalar_two_route", std::abs(a.ricci.scalar - a.curvature->scalar)},
      {"logJ_two_route", a.umbilicity->logJ_trace_residual},
      {"ricci_two_route", max_abs(a.ricci.ric - ric_ii)},
      {"ricci_gauss_route", max_abs(a.ricci.ric - a.curvature->ric)},
      {"H2_minus_r", std::abs(sf.Hnorm2 - f.r)},
      {"H_trace_route", (sf.H - sf.H_trace).cwiseAbs().maxCoeff()},
      {"torsion_symmetry", max_abs(sf.torsion - sf.torsion.transpose())},
      {"torsion_routes", sf.torsion_routes},
      {"ii_symmetry", sf.symmetry},
      {"ii_normality", sf.normality},
      {"ii_mixed", sf.mixed_residual},
      {"pair_symmetry", a.curvature->pair_symmetry},
  };
  return a;
}

}  // namespace crgeom
