#pragma once

// Invariant suites run by `check`: each line is a residual (or slack) with a
// pinned threshold, aggregated as a maximum (or minimum) over sample points.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "crgeom/analysis.hpp"
#include "crgeom/gallery.hpp"
#include "crgeom/oracle.hpp"
#include "crgeom/quadrature.hpp"
#include "crgeom/spectral.hpp"

namespace crgeom {

struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool lower_bound = false;  // value must be >= threshold instead of <=
  bool pass = true;
};

struct CheckOptions {
  int points = 20;
  std::uint64_t seed = 7;
  bool all = false;          // adds the oracle, quadrature and bound suites
  int oracle_points = 4;
  long long quad_budget = 32768;  // nodes for the grid vs Monte-Carlo comparison
};

class CheckLog {
 public:
  /// Records the worst value seen for an upper-bounded line.
  void max(const std::string& suite, const std::string& name, double value, double threshold) {
    CheckResult& r = line(suite, name, threshold, false, value);
    r.value = std::isnan(value) ? value : std::max(r.value, value);
  }
  /// Records the worst value seen for a lower-bounded line.
  void min(const std::string& suite, const std::string& name, double value, double threshold) {
    CheckResult& r = line(suite, name, threshold, true, value);
    r.value = std::isnan(value) ? value : std::min(r.value, value);
  }

  std::vector<CheckResult> finish() {
    for (auto& r : lines_) r.pass = r.lower_bound ? r.value >= r.threshold : r.value <= r.threshold;
    return lines_;
  }

 private:
  CheckResult& line(const std::string& suite, const std::string& name, double threshold, bool lower, double init) {
    for (auto& r : lines_)
      if (r.suite == suite && r.name == name) return r;
    lines_.push_back({suite, name, init, threshold, lower, true});
    return lines_.back();
  }
  std::vector<CheckResult> lines_;
};

inline bool all_passed(const std::vector<CheckResult>& rs) {
  return std::all_of(rs.begin(), rs.end(), [](const CheckResult& r) { return r.pass; });
}

namespace detail {

inline double jet_scale(const Jet& j) {
  double s = 1.0;
  for (int a = 0; a < j.m; ++a) {
    s = std::max(s, std::abs(j.d1(a)));
    for (int b = 0; b < j.m; ++b) s = std::max(s, std::abs(j.d11(a, b)));
  }
  return s;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline void hypersurface_suite(CheckLog& log, const SurfaceSpec& s, const PointAnalysis& a) {
  const FrameData& f = a.frame;
  const Jet& j = f.jet;
  const int m = f.m;
  const double sc = jet_scale(j);
  const char* S = "hypersurface";
  log.max(S, "on_surface", std::abs(j.val), 1e-10);

  cplx norm = 0.0;
  for (int k = 0; k < m; ++k) norm += j.d1(k) * f.xi(k);
  log.max(S, "transverse_normalization", std::abs(norm - 1.0), 1e-10);
  double eq = 0.0;
  for (int k = 0; k < m; ++k) {
    cplx v = -f.r * j.d1b(k);
    for (int q = 0; q < m; ++q) v += j.d11(q, k) * f.xi(q);
    eq = std::max(eq, std::abs(v));
  }
  log.max(S, "transverse_equation", eq / sc, 1e-9);
  log.max(S, "r_imaginary_part", std::abs(f.transverse.r_imag), 1e-9);
  cplx quad = 0.0;
  for (int q = 0; q < m; ++q)
    for (int k = 0; k < m; ++k) quad += j.d11(q, k) * f.xi(q) * std::conj(f.xi(k));
  log.max(S, "r_quadratic_form", std::abs(quad - f.r) / sc, 1e-9);
  // r = 1 / (rho^T (P^T)^{-1} conj(rho)) wherever the complex Hessian is invertible.
  if (condition_number(j.d11) < kLeastSquaresCond) {
    const CVec y = j.d11.transpose().fullPivLu().solve(CVec(j.d1b));
    const cplx denom = (j.d1.transpose() * y)(0, 0);
    log.max(S, "r_inverse_hessian", rel(f.r, (1.0 / denom).real()), 1e-8);
  }

  log.max(S, "levi_hermitian", hermitian_defect(f.levi) / sc, 1e-10);
  const CMat ambient = f.Zc * j.d11 * f.Zc.adjoint();
  log.max(S, "levi_ambient_route", max_abs(f.levi - ambient) / sc, 1e-10);
  log.min(S, "levi_min_eigenvalue", hermitian_eigenvalues(f.levi).minCoeff(), 1e-10);
  log.max(S, "frame_annihilates_drho", (f.Zc * CVec(j.d1)).cwiseAbs().maxCoeff() / sc, 1e-12);
  log.min(S, "J_positive", f.J, 1e-12);
  const double jc = -cofactor_det(bordered_hessian(j)).real();
  log.max(S, "J_cofactor_route", rel(f.J, jc), 1e-10);
  log.max(S, "loghess_hermitian", hermitian_defect(a.ricci.L) / sc, 1e-9);
  log.max(S, "connection_compatibility", metric_compatibility_residual(f, connection_coeffs(f)) / sc, 1e-8);

  // Frame independence: every admissible distinguished coordinate gives the same invariants.
  const double big = j.d1.cwiseAbs().maxCoeff();
  for (int w = 0; w < m; ++w) {
    if (w == f.w || std::abs(j.d1(w)) <= 0.05 * big) continue;
    ChartOptions opt;
    opt.w_index = w;
    const PointAnalysis b = analyze_point(s, f.point, opt);
    double d = std::max(rel(b.frame.r, f.r), rel(b.frame.J, f.J));
    d = std::max(d, rel(b.ricci.scalar, a.ricci.scalar));
    d = std::max(d, (b.loghess_eigs - a.loghess_eigs).cwiseAbs().maxCoeff() / std::max(1.0, a.loghess_eigs.cwiseAbs().maxCoeff()));
    if (a.sff) {
      d = std::max(d, rel(b.sff->IIcirc_norm2, a.sff->IIcirc_norm2));
      d = std::max(d, rel(b.torsion_norm2, a.torsion_norm2));
      d = std::max(d, rel(b.curvature->cm_norm2, a.curvature->cm_norm2));
    }
    log.max(S, "frame_independence", d, 1e-8);
  }
}

inline void immersion_suite(CheckLog& log, const SurfaceSpec& s, const PointAnalysis& a, std::mt19937_64& rng,
                            int& cm_disagree) {
  const char* S = "immersion";
  struct Limit {
    const char* name;
    double threshold;
  };
  static constexpr Limit limits[] = {
      {"gauss_trace", 1e-8},     {"scalar_two_route", 1e-7}, {"logJ_two_route", 1e-7},
      {"ricci_two_route", 1e-7}, {"ricci_gauss_route", 1e-7}, {"H2_minus_r", 1e-9},
      {"H_trace_route", 1e-9},   {"torsion_symmetry", 1e-9}, {"torsion_routes", 1e-9},
      {"ii_symmetry", 1e-9},     {"ii_normality", 1e-9},     {"ii_mixed", 1e-9},
      {"pair_symmetry", 1e-9},
  };
  const double sc = std::max(1.0, jet_scale(a.frame.jet));
  for (const auto& l : limits) log.max(S, l.name, a.residual(l.name) / sc, l.threshold);
  log.min(S, "ricci_upper_bound_slack", a.ricci_slack, -1e-9);

  // Unitary change of the normal basis leaves |II°|^2 and A unchanged.
  const SecondFundamentalForm& sf = *a.sff;
  const int k = static_cast<int>(sf.holo.size());
  std::normal_distribution<double> g(0.0, 1.0);
  CMat z(k, k);
  for (int i = 0; i < k; ++i)
    for (int q = 0; q < k; ++q) z(i, q) = {g(rng), g(rng)};
  const CMat U = Eigen::HouseholderQR<CMat>(z).householderQ();
  const CMat nu = sf.normal * U;
  std::vector<CMat> holo(k, CMat::Zero(a.frame.n, a.frame.n));
  for (int c = 0; c < k; ++c)
    for (std::size_t d = 0; d < sf.ambient.size(); ++d) holo[c] += sf.ambient[d] * std::conj(nu(d, c));
  const CVec hn = nu.adjoint() * sf.H;
  CMat tors = CMat::Zero(a.frame.n, a.frame.n);
  for (int c = 0; c < k; ++c) tors += cplx{0.0, -1.0} * holo[c] * std::conj(hn(c));
  const double d = std::max(rel(tensor_norm2(holo, unitarizer(a.frame.levi)), sf.IIcirc_norm2),
                            max_abs(tors - sf.torsion) / sc);
  log.max(S, "normal_basis_invariance", d, 1e-9);

  // With codimension at most n, II° = 0 exactly where the Chern–Moser tensor vanishes.
  const int n = a.frame.n;
  if (n >= 2 && s.immersion->target_dim() <= 2 * n) {
    const bool u1 = sf.IIcirc_norm2 < kUmbilicTolerance;
    const bool u2 = a.curvature->cm_norm2 < kUmbilicTolerance;
    if (u1 != u2) ++cm_disagree;
  }
}

inline void conformal_suite(CheckLog& log, const PointAnalysis& a, const JetProgram& sigma) {
  const Jet sj = sigma(a.frame.point);
  const double r1 = conformal_transverse(a.frame, sj);
  const double r2 = transverse_solve(conformal_jet(a.frame.jet, sj)).r;
  log.max("conformal", "transverse_two_route", rel(r1, r2), 1e-8);
}

inline void spectral_suite(CheckLog& log, const SurfaceSpec& s, const PointAnalysis& a, std::mt19937_64& rng) {
  const char* S = "spectral";
  const FrameData& f = a.frame;
  std::normal_distribution<double> g(0.0, 1.0);
  const cplx ca{g(rng), g(rng)}, cb{g(rng), g(rng)};
  const auto& f0 = s.family.front();
  const auto& f1 = s.family.size() > 1 ? s.family[1] : s.family.front();
  const PluriharmonicFunction comb(constant(ca) * f0.ftilde() + constant(cb) * f1.ftilde(), s.m);
  const cplx lhs = boxb_pluriharmonic(f, comb);
  const cplx rhs = ca * boxb_pluriharmonic(f, f0) + cb * boxb_pluriharmonic(f, f1);
  log.max(S, "boxb_linearity", std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)), 1e-10);
  double emin = 1e300;
  for (const auto& fn : s.family) emin = std::min(emin, dbarb_energy_density(f, fn));
  log.min(S, "energy_density_nonnegative", emin, -1e-12);
  if (s.immersion) {
    // CR functions are annihilated: box_b F^d = 0.
    double worst = 0.0;
    for (const auto& F : s.immersion->F()) worst = std::max(worst, std::abs(boxb_value(f.xi, f.n, JetProgram(F, s.m, 1)(f.point))));
    log.max(S, "boxb_annihilates_cr", worst, 1e-12);
  }
}

inline void oracle_suite(CheckLog& log, const SurfaceSpec& s, std::span<const cplx> p) {
  const char* S = "oracle";
  const HypersurfaceChart& chart = s.chart;
  log.max(S, "rho_jets", check_jet_fd([&](std::span<const cplx> q) { return chart.jet(q); }, p).worst, kFdRelTol);
  const FrameData f = frame_at(chart, p);
  log.max(S, "frame_derivatives", check_frame_derivatives_fd(chart, f).worst, kFdRelTol);
  log.max(S, "loghess_J", check_loghess_fd(chart, p).worst, kFdRelTol);
  if (s.immersion) {
    const auto& im = *s.immersion;
    log.max(S, "F_jets", check_holojet_fd([&](std::span<const cplx> q) { return im.fjet(q); }, p).worst, kFdRelTol);
  }
  if (s.sigma) {
    const JetProgram sj(*s.sigma, s.m, 3);
    log.max(S, "sigma_jets", check_jet_fd([&](std::span<const cplx> q) { return sj(q); }, p).worst, kFdRelTol);
  }
  OracleResult fam;
  for (const auto& fn : s.family) {
    const JetProgram fj(fn.ftilde(), s.m, 3);
    fam.merge(check_jet_fd([&](std::span<const cplx> q) { return fj(q); }, p));
  }
  if (!s.family.empty()) log.max(S, "family_jets", fam.worst, kFdRelTol);
}

/// Grid resolution whose node count k^{2m-1} is closest to the budget.
inline int quad_resolution(int m, const CheckOptions& opt) {
  const double k = std::pow(static_cast<double>(opt.quad_budget), 1.0 / (2.0 * m - 1.0));
  return std::max(4, static_cast<int>(std::lround(k)));
}

inline void quadrature_suite(CheckLog& log, const SurfaceSpec& s, const CheckOptions& opt) {
  const char* S = "quadrature";
  const RadialChart rc{&s.chart};
  const Density r = [](std::span<const cplx>, const Jet& jet) { return transverse_solve(jet).r; };
  const Density dens[] = {r};
  QuadratureRule grid;
  grid.resolution = quad_resolution(s.m, opt);
  const auto ig = integrate_many(rc, dens, grid);
  QuadratureRule mc;
  mc.kind = QuadKind::MonteCarlo;
  mc.samples = ig[0].nodes;
  mc.seed = opt.seed;
  const auto im = integrate_many(rc, dens, mc);
  log.min(S, "volume_positive", ig[0].value, 1e-12);
  log.max(S, "grid_vs_montecarlo_volume", rel(im[0].value, ig[0].value), 5e-3);
  log.max(S, "grid_vs_montecarlo_mean_H2", rel(im[1].value / im[0].value, ig[1].value / ig[0].value), 5e-3);
  if (s.m == 2) {
    // Refinement: doubling the resolution shrinks the distance to the finest value at least threefold.
    QuadratureRule q;
    double v[3];
    const int ks[3] = {6, 12, 24};
    for (int i = 0; i < 3; ++i) {
      q.resolution = ks[i];
      v[i] = integrate_many(rc, {}, q)[0].value;
    }
    const double e0 = std::abs(v[0] - v[2]), e1 = std::abs(v[1] - v[2]);
    const double ratio = e1 < 1e-12 * std::abs(v[2]) ? 1e300 : e0 / e1;
    log.min(S, "refinement_ratio", ratio, 3.0);
  }
}

inline void bound_suite(CheckLog& log, const SurfaceSpec& s, const CheckOptions& opt,
                        std::span<const std::vector<cplx>> pts) {
  const char* S = "bounds";
  const double n = s.n();
  if (!s.star_shaped) {
    if (s.name == "reinhardt") {
      const auto b = tension_bound_constant(s.chart, s.family, pts);
      log.max(S, "tension_constant_equals_n_over_2", std::abs(b.tension_upper - 0.5 * n), 1e-9);
    }
    return;
  }
  QuadratureRule grid;
  grid.resolution = quad_resolution(s.m, opt);
  const auto re = reilly_bound(s.chart, grid);
  log.min(S, "reilly_upper_positive", re.reilly_upper, 1e-12);
  // On the sphere both bounds are attained: they equal the first eigenvalue n / r^2.
  const bool sphere = s.name == "sphere";
  const double lambda1 = sphere ? n / std::pow(param_double(s.params, "r", 1.0), 2) : 0.0;
  if (sphere) log.max(S, "reilly_equals_eigenvalue", rel(re.reilly_upper, lambda1), 1e-3);
  if (!s.family.empty()) {
    const auto te = tension_bound(s.chart, s.family, grid);
    log.min(S, "tension_upper_positive", te.tension_upper, 1e-12);
    log.max(S, "tension_volume_agreement", rel(te.volume, re.volume), 1e-12);
    if (sphere) log.max(S, "tension_equals_eigenvalue", rel(te.tension_upper, lambda1), 1e-3);
  }
}

}  // namespace detail

inline std::vector<CheckResult> run_checks(const SurfaceSpec& s, const CheckOptions& opt = {}) {
  CheckLog log;
  std::mt19937_64 rng(opt.seed);
  const auto pts = s.samples(opt.points, opt.seed);
  std::optional<JetProgram> sigma;
  if (s.sigma) sigma.emplace(*s.sigma, s.m, 1);
  int cm_disagree = 0;
  for (const auto& p : pts) {
    const PointAnalysis a = analyze_point(s, p);
    detail::hypersurface_suite(log, s, a);
    if (a.sff) detail::immersion_suite(log, s, a, rng, cm_disagree);
    if (sigma) detail::conformal_suite(log, a, *sigma);
    if (!s.family.empty()) detail::spectral_suite(log, s, a, rng);
  }
  if (s.immersion && s.n() >= 2 && s.immersion->target_dim() <= 2 * s.n())
    log.max("immersion", "umbilic_chern_moser_agreement", cm_disagree, 0.0);
  if (s.immersion && s.name == "sphere") {
    const auto t = takahashi_check(*s.immersion, pts);
    const double r0 = detail::param_double(s.params, "r", 1.0);
    log.max("spectral", "takahashi_radius", std::abs(t.radius - r0), 1e-9);
    log.max("spectral", "takahashi_image_on_sphere", std::max({t.sphere_residual, t.reeb_residual, t.pullback_residual}), 1e-9);
  }
  if (opt.all) {
    for (int i = 0; i < std::min<int>(opt.oracle_points, static_cast<int>(pts.size())); ++i)
      detail::oracle_suite(log, s, pts[i]);
    if (s.star_shaped) detail::quadrature_suite(log, s, opt);
    detail::bound_suite(log, s, opt, pts);
  }
  return log.finish();
}

}  // namespace crgeom
