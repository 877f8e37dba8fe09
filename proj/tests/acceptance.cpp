// Acceptance binary: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Tolerances are pinned below; a criterion that fails is reported with the
// measured numbers, never relaxed.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crgeom/crgeom.hpp"

using namespace crgeom;

namespace {

constexpr double kPi = std::numbers::pi;

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

int run_cli(const std::string& args, std::string& out) {
  const std::string cmd = std::string("\"") + CRGEOM_CLI + "\" " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return -1;
  std::array<char, 4096> buf{};
  std::size_t n;
  out.clear();
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = pclose(p);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<SurfaceSpec> gallery_surfaces() {
  std::vector<SurfaceSpec> out = {gallery("sphere"), gallery("sphere", {{"n", "2"}}), gallery("ellipsoid"),
                                  gallery("whitney"), gallery("whitney", {{"n", "2"}}), gallery("reinhardt"),
                                  gallery("reinhardt", {{"n", "2"}})};
  for (const char* f : {"whitney.surf", "egg.surf", "complex_ellipsoid.surf"})
    out.push_back(gallery("custom", read_surface_file(std::string(CRGEOM_SURFACES) + "/" + f)));
  return out;
}

std::string label(const SurfaceSpec& s) {
  std::string l = s.name;
  for (const auto& [k, v] : s.params)
    if (k == "n" || k == "A" || k == "dim") l += " " + k + "=" + v;
  return l;
}

// ------------------------------------------------------------ criterion 1

Outcome sphere_baseline() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int n : {1, 2}) {
    const SurfaceSpec s = gallery("sphere", {{"n", std::to_string(n)}});
    for (const auto& p : s.samples(100, 101)) {
      const PointAnalysis a = analyze_point(s, p);
      const double e = std::max({std::abs(a.frame.r - 1.0), std::abs(a.frame.J - 1.0), std::abs(a.sff->IIcirc_norm2),
                                 max_abs(a.sff->torsion), std::abs(a.ricci.scalar - n * (n + 1.0)),
                                 std::abs(a.sff->Hnorm2 - 1.0)});
      worst = std::max(worst, e);
    }
  }
  const double dt = seconds_since(t0);
  o.detail << "max deviation of r, J, |II0|^2, A, R, |H|^2 = " << fmt(worst) << " (tol 1e-9), " << fmt(dt) << " s";
  o.require(worst <= 1e-9, "residual");
  o.require(dt < 10.0, "runtime >= 10 s");
  return o;
}

// ------------------------------------------------------------ criterion 2

Outcome beltrami_equality() {
  Outcome o;
  double boxb = 0.0;
  for (int n : {1, 2}) {
    const SurfaceSpec s = gallery("sphere", {{"n", std::to_string(n)}});
    for (const auto& p : s.samples(100, 202)) {
      const FrameData f = frame_at(s.chart, p);
      for (int j = 0; j <= n; ++j)
        boxb = std::max(boxb, std::abs(boxb_pluriharmonic(f, s.family[j]) - double(n) * std::conj(p[j])));
    }
  }
  QuadratureRule q3;
  q3.resolution = 48;
  const auto s3 = gallery("sphere");
  const auto b3 = reilly_bound(s3.chart, q3);
  const double vol_err = std::abs(b3.volume - 4.0 * kPi * kPi) / (4.0 * kPi * kPi);
  QuadratureRule q5;
  q5.resolution = 12;
  const auto s5 = gallery("sphere", {{"n", "2"}});
  const auto b5 = reilly_bound(s5.chart, q5);
  const double r1 = std::abs(b3.reilly_upper - 1.0), r2 = std::abs(b5.reilly_upper - 2.0) / 2.0;
  o.detail << "box_b conj(z) - n conj(z) = " << fmt(boxb) << " (tol 1e-10); vol(S^3) rel err " << fmt(vol_err)
           << "; reilly_upper n=1: " << b3.reilly_upper << ", n=2: " << b5.reilly_upper << " (tol 0.1%)";
  o.require(boxb <= 1e-10, "box_b");
  o.require(vol_err <= 1e-3, "volume");
  o.require(r1 <= 1e-3 && r2 <= 1e-3, "reilly_upper");
  return o;
}

// ------------------------------------------------------------ criterion 3

Outcome reinhardt_example() {
  Outcome o;
  double worst = 0.0, tension = 0.0;
  for (int n : {1, 2}) {
    const SurfaceSpec s = gallery("reinhardt", {{"n", std::to_string(n)}});
    const auto pts = s.samples(100, 303);
    for (const auto& p : pts) {
      const FrameData f = frame_at(s.chart, p);
      double total = 0.0;
      for (int j = 0; j <= n; ++j) {
        const double lj = std::log(std::norm(p[j]));
        const double e = dbarb_energy_density(f, s.family[j]);
        worst = std::max(worst, std::abs(e - (0.5 - 0.5 * lj * lj)));
        worst = std::max(worst, std::abs(boxb_pluriharmonic(f, s.family[j]) - 0.5 * n * lj));
        total += e;
      }
      worst = std::max(worst, std::abs(total - 0.5 * n));
    }
    const auto b = tension_bound_constant(s.chart, s.family, pts);
    tension = std::max(tension, std::abs(b.tension_upper - 0.5 * n));
  }
  o.detail << "pointwise identities max residual " << fmt(worst) << " (tol 1e-9); |tension_upper - n/2| = "
           << fmt(tension);
  o.require(worst <= 1e-9, "identities");
  o.require(tension <= 1e-12, "tension constant");
  return o;
}

// ------------------------------------------------------------ criterion 4

std::vector<cplx> whitney_point(double t, double a, double b) {
  return {std::polar(std::sqrt(1.0 - t * t), a), std::polar(t, b)};
}

Outcome whitney_example() {
  Outcome o;
  const SurfaceSpec s = gallery("whitney");
  const int n = 1;
  // Along |w| = t: the formula as stated, and the form that the computation (and
  // the independent log J route) actually produce.
  double stated = 0.0, corrected = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.99 * i / 100.0, w2 = t * t;
    const double ii0 = umbilicity_report(*s.immersion, whitney_point(t, 0.05 * i, -0.11 * i)).II0norm2;
    const double e_sigma = 1.0 / (1.0 + w2);
    stated = std::max(stated, std::abs(ii0 - 2.0 * (n + 1) * std::pow(1.0 - w2, 2) / std::pow(1.0 + w2, 2) * e_sigma));
    corrected = std::max(corrected, std::abs(ii0 - 2.0 * (n + 1) * (1.0 - w2) / std::pow(1.0 + w2, 2) * e_sigma));
  }
  // Umbilic scan: flagged points must sit within one grid spacing (in |w|) of the circle |w| = 1,
  // and every scan point on the circle must be flagged.
  const auto params = scan_parameters(32, s.m);
  std::vector<double> absw;
  std::vector<char> flag;
  for (const auto& t : params) {
    const auto p = s.param(t);
    absw.push_back(std::abs(p[1]));
    flag.push_back(umbilicity_report(*s.immersion, p).is_umbilic);
  }
  std::set<double> layers;
  for (double a : absw) layers.insert(std::round(a * 1e10) / 1e10);
  double spacing = 0.0;
  for (auto it = std::next(layers.begin()); it != layers.end(); ++it) spacing = std::max(spacing, *it - *std::prev(it));
  long long flagged = 0, stray = 0, missed = 0;
  for (std::size_t i = 0; i < absw.size(); ++i) {
    flagged += flag[i];
    if (flag[i] && 1.0 - absw[i] > spacing) ++stray;
    if (!flag[i] && absw[i] > 1.0 - 1e-12) ++missed;
  }
  // Conformal change along the sampled points: both routes to the transverse curvature.
  const JetProgram sigma(*s.sigma, s.m, 1);
  double conformal = 0.0;
  for (const auto& p : s.samples(100, 404)) {
    const FrameData f = frame_at(s.chart, p);
    const Jet sj = sigma(f.point);
    const double r1 = conformal_transverse(f, sj), r2 = transverse_solve(conformal_jet(f.jet, sj)).r;
    conformal = std::max(conformal, std::abs(r1 - r2) / std::max(1.0, std::abs(r2)));
  }
  o.detail << "stated closed form max dev " << fmt(stated) << " (tol 1e-7); with (1-|w|^2) to the first power "
           << fmt(corrected) << "; umbilic scan " << flagged << "/" << absw.size() << " flagged, " << stray
           << " off-circle, " << missed << " missed (spacing " << fmt(spacing) << "); conformal two-route "
           << fmt(conformal) << " (tol 1e-8)";
  o.require(stated <= 1e-7, "stated closed form; the computed values follow the first-power form");
  o.require(flagged > 0 && stray == 0 && missed == 0, "umbilic scan");
  o.require(conformal < 1e-8, "conformal");
  return o;
}

// ------------------------------------------------------------ criterion 5

Outcome ellipsoid_umbilicity() {
  Outcome o;
  // Two nonzero entries in C^3: nowhere umbilic.
  const SurfaceSpec two = gallery("ellipsoid", {{"A", "0.2,0.3,0"}, {"dim", "3"}});
  const auto grid = scan_parameters(40, 3);
  double lo = 1e300;
  for (const auto& t : grid) lo = std::min(lo, umbilicity_report(*two.immersion, two.param(t)).II0norm2);
  // A = (A1, 0, 0): flagged points lie within grid spacing of z2 = z3 = 0.
  const double A1 = 0.3;
  const SurfaceSpec one = gallery("ellipsoid", {{"A", "0.3,0,0"}, {"dim", "3"}});
  const int k = scan_nodes_per_param(40, 3);
  double spacing = 0.0;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  for (int s = 0; s < 400; ++s) {
    const auto& t = grid[pick(rng)];
    const auto p = one.param(t);
    for (int i = 0; i < 5; ++i) {
      auto u = t;
      u[i] += i < 2 ? 1.0 / (k - 1) : 1.0 / k;
      if (u[i] > 1.0) continue;
      const auto q = one.param(u);
      double d = 0.0;
      for (int j = 0; j < 3; ++j) d += std::norm(p[j] - q[j]);
      spacing = std::max(spacing, std::sqrt(d));
    }
  }
  long long flagged = 0, stray = 0;
  double farthest = 0.0;
  for (const auto& t : grid) {
    const auto p = one.param(t);
    if (!umbilicity_report(*one.immersion, p).is_umbilic) continue;
    ++flagged;
    const double d = std::sqrt(std::norm(p[1]) + std::norm(p[2]));
    farthest = std::max(farthest, d);
    if (d > spacing) ++stray;
  }
  long long curve_missed = 0;
  for (int i = 0; i < 64; ++i) {
    const double a = 2.0 * kPi * i / 64.0;
    const double x = 1.0 / std::sqrt(1.0 + A1 * std::cos(2.0 * a));
    if (!umbilicity_report(*one.immersion, std::vector<cplx>{std::polar(x, a), 0.0, 0.0}).is_umbilic) ++curve_missed;
  }
  // Closed-form (log J)_{j kbar}: J^2 L = |d rho|^2 A_j A_k delta_jk - A_j A_k rho_jbar rho_k.
  double closed = 0.0;
  for (const char* spec : {"0.1,0.2,0.3", "0.2,0.3,0", "0.3,0,0", "-0.5,0.4,0.9"}) {
    const SurfaceSpec s = gallery("ellipsoid", {{"A", spec}, {"dim", "3"}});
    const auto A = detail::param_list(s.params, "A");
    for (const auto& p : s.samples(50, 505)) {
      const Jet jet = s.chart.jet(p);
      const CMat X = loghess_J_ambient(jet);
      const double J = fefferman_det(jet);
      for (int j = 0; j < 3; ++j)
        for (int c = 0; c < 3; ++c) {
          const cplx rhs = ((j == c ? J * A[j] * A[c] : 0.0) - A[j] * A[c] * jet.d1b(j) * jet.d1(c)) / (J * J);
          closed = std::max(closed, std::abs(X(j, c) - rhs) / std::max(1.0, std::abs(rhs)));
        }
    }
  }
  o.detail << "min |II0|^2 over " << grid.size() << " points = " << fmt(lo) << " (must exceed 1e-4); A=(0.3,0,0): "
           << flagged << " flagged, farthest " << fmt(farthest) << " from z2 = z3 = 0, " << stray << " beyond the spacing "
           << fmt(spacing) << ", "
           << curve_missed << "/64 curve points missed; closed-form log J dev " << fmt(closed) << " (tol 1e-8)";
  o.require(lo > 1e-4, "minimum");
  o.require(flagged > 0 && stray == 0 && curve_missed == 0, "umbilic curve");
  o.require(closed <= 1e-8, "closed form");
  return o;
}

// ------------------------------------------------------------ criterion 6

Outcome identity_suite() {
  Outcome o;
  double gauss = 0.0, liluk = 0.0, h2 = 0.0, torsion = 0.0, slack = 1e300;
  int surfaces = 0;
  for (const auto& s : gallery_surfaces()) {
    if (!s.immersion) continue;
    ++surfaces;
    for (const auto& p : s.samples(50, 606)) {
      const PointAnalysis a = analyze_point(s, p);
      gauss = std::max(gauss, a.residual("gauss_trace"));
      liluk = std::max({liluk, a.residual("ricci_two_route"), a.residual("logJ_two_route"), a.residual("scalar_two_route")});
      h2 = std::max(h2, a.residual("H2_minus_r"));
      torsion = std::max({torsion, a.residual("torsion_symmetry"), a.residual("torsion_routes")});
      slack = std::min(slack, a.ricci_slack);
    }
  }
  o.detail << surfaces << " immersed surfaces x 50 points: Gauss trace " << fmt(gauss) << " (1e-8), two-route Ricci "
           << fmt(liluk) << " (1e-7), |H|^2 - r " << fmt(h2) << " (1e-9), torsion " << fmt(torsion)
           << " (1e-9), min Ricci slack " << fmt(slack) << " (>= -1e-9)";
  o.require(gauss <= 1e-8, "Gauss trace");
  o.require(liluk <= 1e-7, "two-route");
  o.require(h2 <= 1e-9, "|H|^2 = r");
  o.require(torsion <= 1e-9, "torsion");
  o.require(slack >= -1e-9, "Ricci inequality");
  return o;
}

// ------------------------------------------------------------ criterion 7

Outcome takahashi() {
  Outcome o;
  const SurfaceSpec s3 = gallery("sphere");
  const auto pts = s3.samples(50, 707);
  const auto id = takahashi_check(*s3.immersion, pts);
  const Expr z = variable(0), w = variable(1), c = constant(1.0 / std::numbers::sqrt2);
  const std::vector<Expr> maps = {c * pow(z, 2), z * w, c * pow(w, 2)};
  const HoloJetProgram h2(maps, 2);
  const auto q = takahashi_check(s3.chart, [&](std::span<const cplx> p) { return h2(p); }, pts);
  const double id_err = std::max(std::abs(id.lambda - 1.0), std::abs(id.radius - 1.0));
  const double q_err = std::max(std::abs(q.lambda - 2.0), std::abs(q.radius - 1.0 / std::numbers::sqrt2));
  o.detail << "identity: lambda " << id.lambda << ", radius " << id.radius << "; H2: lambda " << q.lambda
           << ", radius " << q.radius << ", image residual " << fmt(q.sphere_residual) << " (tol 1e-9)";
  o.require(id_err <= 1e-9 && q_err <= 1e-9, "eigenvalue/radius");
  o.require(q.sphere_residual < 1e-9 && id.sphere_residual < 1e-9, "image on sphere");
  return o;
}

// ------------------------------------------------------------ criterion 8

Outcome oracle_and_check_all() {
  Outcome o;
  OracleResult worst;
  for (const auto& s : gallery_surfaces()) {
    for (const auto& p : s.samples(5, 808)) {
      worst.merge(check_jet_fd([&](std::span<const cplx> q) { return s.chart.jet(q); }, p));
      worst.merge(check_frame_derivatives_fd(s.chart, frame_at(s.chart, p)));
      worst.merge(check_loghess_fd(s.chart, p));
      if (s.immersion) worst.merge(check_holojet_fd([&](std::span<const cplx> q) { return s.immersion->fjet(q); }, p));
      if (s.sigma) {
        const JetProgram sj(*s.sigma, s.m, 3);
        worst.merge(check_jet_fd([&](std::span<const cplx> q) { return sj(q); }, p));
      }
      for (const auto& fn : s.family) {
        const JetProgram fj(fn.ftilde(), s.m, 3);
        worst.merge(check_jet_fd([&](std::span<const cplx> q) { return fj(q); }, p));
      }
    }
  }
  const std::vector<std::string> runs = {
      "--surface sphere", "--surface ellipsoid", "--surface whitney", "--surface reinhardt",
      "--surface-file \"" + std::string(CRGEOM_SURFACES) + "/whitney.surf\"",
      "--surface-file \"" + std::string(CRGEOM_SURFACES) + "/egg.surf\"",
      "--surface-file \"" + std::string(CRGEOM_SURFACES) + "/complex_ellipsoid.surf\""};
  const auto t0 = Clock::now();
  int failed = 0;
  std::string out;
  for (const auto& r : runs) {
    if (run_cli("check --all " + r, out) != 0) {
      ++failed;
      o.detail << " [check --all " << r << " exited nonzero]";
    }
  }
  const double dt = seconds_since(t0);
  o.detail << "worst FD relative error " << fmt(worst.worst) << " at " << worst.worst_entry << " over "
           << worst.compared << " entries (tol 1e-6); check --all on " << runs.size() << " surfaces: " << failed
           << " failed, " << fmt(dt) << " s (limit 300 s)";
  o.require(worst.worst <= kFdRelTol, "oracle");
  o.require(failed == 0, "check --all");
  o.require(dt < 300.0, "runtime");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"sphere baseline", sphere_baseline},
      {"Beltrami equality and volume", beltrami_equality},
      {"Reinhardt example", reinhardt_example},
      {"Whitney example", whitney_example},
      {"ellipsoid umbilicity", ellipsoid_umbilicity},
      {"identity suite", identity_suite},
      {"Takahashi", takahashi},
      {"oracle and check --all", oracle_and_check_all},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "threw: " << e.what();
    }
    failures += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
