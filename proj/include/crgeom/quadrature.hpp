#pragma once

// Integration over star-shaped hypersurfaces against the contact volume
// theta ^ (d theta)^n. M is parametrized as a radial graph t(omega) omega over
// the unit sphere S^{2m-1} of R^{2m} = C^m (real coordinates x1, y1, x2, y2, ...),
// using generalized spherical angles (product grid) or random directions
// (Monte Carlo).

#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "crgeom/error.hpp"
#include "crgeom/hypersurface.hpp"
#include "crgeom/jets.hpp"
#include "crgeom/linalg.hpp"

namespace crgeom {

struct RadialChart {
  const HypersurfaceChart* chart = nullptr;
  std::vector<cplx> center;   // defaults to the origin when empty
  double t_max = 10.0;
  double t_start = 1.0 / 64.0;

  int dim() const { return chart->dim(); }
  cplx center_at(int j) const { return center.empty() ? cplx{0.0, 0.0} : center[j]; }
};

/// Point center + t * omega, omega given in real coordinates.
inline std::vector<cplx> ray_point(const RadialChart& rc, std::span<const double> omega, double t) {
  const int m = rc.dim();
  std::vector<cplx> p(m);
  for (int j = 0; j < m; ++j) p[j] = rc.center_at(j) + t * cplx{omega[2 * j], omega[2 * j + 1]};
  return p;
}

/// Directional derivative of rho along the real vector v (given as complex components).
inline double real_directional(const Jet& jet, std::span<const cplx> v) {
  cplx s = 0.0;
  for (int j = 0; j < jet.m; ++j) s += jet.d1(j) * v[j];
  return 2.0 * s.real();
}

/// Smallest t in (0, t_max] with rho(center + t omega) = 0.
inline double radial_solve(const RadialChart& rc, std::span<const double> omega) {
  const int m = rc.dim();
  std::vector<cplx> dir(m);
  for (int j = 0; j < m; ++j) dir[j] = {omega[2 * j], omega[2 * j + 1]};
  auto f = [&](double t) { return rc.chart->jet1(ray_point(rc, omega, t)).val.real(); };

  double lo = 0.0, flo = f(0.0);
  if (flo >= 0.0) throw Error(ErrorKind::NoCrossing, "rho is not negative at the star center");
  double hi = rc.t_start, fhi = f(hi);
  while (fhi < 0.0) {
    if (hi >= rc.t_max) throw Error(ErrorKind::NoCrossing, "ray does not meet the surface within t_max");
    lo = hi;
    flo = fhi;
    hi = std::min(2.0 * hi, rc.t_max);
    fhi = f(hi);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm < 0.0) lo = mid;
    else hi = mid;
  }
  double t = 0.5 * (lo + hi);
  double slope = 0.0;
  for (int it = 0; it < 4; ++it) {
    const Jet jet = rc.chart->jet1(ray_point(rc, omega, t));
    slope = real_directional(jet, dir);
    if (std::abs(slope) < 1e-10) throw Error(ErrorKind::NonTransversal, "ray is tangent to the surface");
    const double step = jet.val.real() / slope;
    t -= step;
    if (std::abs(jet.val.real()) < 1e-15) break;
  }
  if (!(slope > 0.0)) throw Error(ErrorKind::NonTransversal, "ray leaves the surface from outside");
  return t;
}

// ----------------------------------------------------------- form values

/// theta(V) = Re(i sum_k rho_kbar conj(V^k)) for a tangent vector V.
inline double theta_of(const Jet& jet, std::span<const cplx> v) {
  cplx s = 0.0;
  for (int k = 0; k < jet.m; ++k) s += jet.d1b(k) * std::conj(v[k]);
  return (cplx{0.0, 1.0} * s).real();
}

/// d theta(U, V) = -2 Im(u^T P conj(v)), P = rho_{j kbar}.
inline double dtheta_of(const Jet& jet, std::span<const cplx> u, std::span<const cplx> v) {
  cplx s = 0.0;
  for (int j = 0; j < jet.m; ++j)
    for (int k = 0; k < jet.m; ++k) s += u[j] * jet.d11(j, k) * std::conj(v[k]);
  return -2.0 * s.imag();
}

/// Pfaffian of a real antisymmetric matrix of even size (expansion along the first row).
inline double pfaffian(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  if (n == 0) return 1.0;
  if (n == 2) return a(0, 1);
  double s = 0.0;
  for (int j = 1; j < n; ++j) {
    if (a(0, j) == 0.0) continue;
    std::vector<int> keep;
    for (int k = 1; k < n; ++k)
      if (k != j) keep.push_back(k);
    Eigen::MatrixXd minor(n - 2, n - 2);
    for (int r = 0; r < n - 2; ++r)
      for (int c = 0; c < n - 2; ++c) minor(r, c) = a(keep[r], keep[c]);
    s += ((j % 2) ? 1.0 : -1.0) * a(0, j) * pfaffian(minor);
  }
  return s;
}

/// (theta ^ (d theta)^n)(V_0, ..., V_{2n}) = n! Pf [[0, a], [-a, Omega]],
/// a_i = theta(V_i), Omega_ij = d theta(V_i, V_j).
inline double contact_volume(const Jet& jet, const std::vector<std::vector<cplx>>& v) {
  const int k = static_cast<int>(v.size());  // 2n + 1
  const int n = (k - 1) / 2;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k + 1, k + 1);
  for (int i = 0; i < k; ++i) {
    b(0, 1 + i) = theta_of(jet, v[i]);
    b(1 + i, 0) = -b(0, 1 + i);
    for (int j = i + 1; j < k; ++j) {
      b(1 + i, 1 + j) = dtheta_of(jet, v[i], v[j]);
      b(1 + j, 1 + i) = -b(1 + i, 1 + j);
    }
  }
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  return fact * pfaffian(b);
}

// ------------------------------------------------------------ rules

enum class QuadKind { Grid, MonteCarlo };

struct QuadratureRule {
  QuadKind kind = QuadKind::Grid;
  int resolution = 32;              // grid: nodes per angle
  long long samples = 100000;       // Monte Carlo
  std::uint64_t seed = 1;

  std::string describe() const {
    return kind == QuadKind::Grid ? "grid:" + std::to_string(resolution)
                                  : "mc:" + std::to_string(samples) + ":" + std::to_string(seed);
  }
};

/// Parses "grid:<n>" or "mc:<samples>:<seed>".
inline QuadratureRule parse_quadrature(const std::string& text) {
  QuadratureRule q;
  try {
    if (text.rfind("grid:", 0) == 0) {
      q.kind = QuadKind::Grid;
      std::size_t used = 0;
      q.resolution = std::stoi(text.substr(5), &used);
      if (used != text.size() - 5 || q.resolution < 2) throw std::invalid_argument("grid");
      return q;
    }
    if (text.rfind("mc:", 0) == 0) {
      q.kind = QuadKind::MonteCarlo;
      const std::size_t colon = text.find(':', 3);
      if (colon == std::string::npos) throw std::invalid_argument("mc");
      q.samples = std::stoll(text.substr(3, colon - 3));
      q.seed = std::stoull(text.substr(colon + 1));
      if (q.samples < 2) throw std::invalid_argument("mc");
      return q;
    }
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Parse, "quadrature must be grid:<n> or mc:<samples>:<seed>, got '" + text + "'");
}

/// Gauss–Legendre nodes and weights on [a, b].
inline void gauss_legendre(int k, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  x.assign(k, 0.0);
  w.assign(k, 0.0);
  for (int i = 0; i < (k + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= k; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = k * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    x[i] = mid - half * z;
    x[k - 1 - i] = mid + half * z;
    w[i] = w[k - 1 - i] = 2.0 * half / ((1.0 - z * z) * dp * dp);
  }
}

/// Fixed pairwise summation tree (reproducible independent of chunking).
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

inline double sphere_area(int real_dim) {
  // |S^{D-1}| = 2 pi^{D/2} / Gamma(D/2)
  return 2.0 * std::pow(std::numbers::pi, real_dim / 2.0) / std::tgamma(real_dim / 2.0);
}

/// Density evaluated at a surface point with its first-order jet of rho.
using Density = std::function<double(std::span<const cplx>, const Jet&)>;

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long long nodes = 0;
  int orientation = 1;  // sign of the raw form on the parametrization
};

namespace detail {

struct NodeValue {
  double volume = 0.0;   // |theta ^ (d theta)^n| on the normalized frame
  int sign = 1;
  std::vector<double> densities;
};

/// Evaluates the form on V_i = dt_i omega + t e_i, with e_i tangent to the unit sphere at omega.
inline NodeValue node_value(const RadialChart& rc, std::span<const double> omega,
                            const std::vector<std::vector<double>>& e, std::span<const Density> dens) {
  const int m = rc.dim();
  const double t = radial_solve(rc, omega);
  const std::vector<cplx> p = ray_point(rc, omega, t);
  const Jet jet = rc.chart->jet1(p);
  std::vector<cplx> om(m);
  for (int j = 0; j < m; ++j) om[j] = {omega[2 * j], omega[2 * j + 1]};
  const double g_omega = real_directional(jet, om);
  std::vector<std::vector<cplx>> v(e.size(), std::vector<cplx>(m));
  for (std::size_t i = 0; i < e.size(); ++i) {
    std::vector<cplx> ei(m);
    for (int j = 0; j < m; ++j) ei[j] = {e[i][2 * j], e[i][2 * j + 1]};
    const double dt = -t * real_directional(jet, ei) / g_omega;
    for (int j = 0; j < m; ++j) v[i][j] = dt * om[j] + t * ei[j];
  }
  NodeValue out;
  const double raw = contact_volume(jet, v);
  out.volume = std::abs(raw);
  out.sign = raw < 0 ? -1 : 1;
  for (const auto& d : dens) out.densities.push_back(d(p, jet));
  return out;
}

struct GridSums {
  std::vector<double> values;
  long long nodes = 0;
  int orientation = 1;
};

inline GridSums grid_integrate(const RadialChart& rc, int k, std::span<const Density> dens) {
  const int D = 2 * rc.dim();
  const int nangles = D - 1;
  std::vector<double> gx, gw;
  gauss_legendre(k, 0.0, std::numbers::pi, gx, gw);
  const long long total = static_cast<long long>(std::pow(static_cast<double>(k), nangles) + 0.5);
  std::vector<std::vector<double>> contrib(dens.size() + 1, std::vector<double>());
  for (auto& c : contrib) c.reserve(static_cast<std::size_t>(total));
  std::vector<int> idx(nangles, 0);
  std::vector<double> phi(nangles), omega(D);
  std::vector<std::vector<double>> e(nangles, std::vector<double>(D));
  int sign = 0;
  for (long long node = 0; node < total; ++node) {
    double weight = 1.0;
    for (int i = 0; i < nangles; ++i) {
      if (i < nangles - 1) {
        phi[i] = gx[idx[i]];
        weight *= gw[idx[i]];
      } else {
        phi[i] = 2.0 * std::numbers::pi * idx[i] / k;
        weight *= 2.0 * std::numbers::pi / k;
      }
    }
    std::vector<double> s(nangles), c(nangles);
    for (int i = 0; i < nangles; ++i) {
      s[i] = std::sin(phi[i]);
      c[i] = std::cos(phi[i]);
    }
    // Direction and the Jacobian factor prod_i sin^{D-2-i}(phi_i).
    double prod = 1.0;
    for (int i = 0; i < nangles; ++i) {
      omega[i] = prod * c[i];
      prod *= s[i];
    }
    omega[D - 1] = prod;
    for (int i = 0; i + 1 < nangles; ++i) weight *= std::pow(s[i], D - 2 - i);
    // Normalized coordinate tangents: d omega / d phi_i divided by prod_{k<i} sin(phi_k).
    for (int i = 0; i < nangles; ++i) {
      auto& ei = e[i];
      for (int j = 0; j < i; ++j) ei[j] = 0.0;
      ei[i] = -s[i];
      double run = c[i];
      for (int j = i + 1; j < D; ++j) {
        ei[j] = (j < D - 1) ? run * c[j] : run;
        if (j < D - 1) run *= s[j];
      }
    }
    if (weight > 0.0) {
      const NodeValue nv = node_value(rc, omega, e, dens);
      if (sign == 0) sign = nv.sign;
      contrib[0].push_back(weight * nv.volume);
      for (std::size_t d = 0; d < dens.size(); ++d) contrib[d + 1].push_back(weight * nv.volume * nv.densities[d]);
    }
    for (int i = nangles - 1; i >= 0; --i) {
      if (++idx[i] < k) break;
      idx[i] = 0;
    }
  }
  GridSums out;
  out.nodes = total;
  out.orientation = sign == 0 ? 1 : sign;
  for (const auto& c : contrib) out.values.push_back(pairwise_sum(c));
  return out;
}

}  // namespace detail

/// Integrates 1 and each density against theta ^ (d theta)^n. Entry 0 of the
/// result is the volume, entry d+1 the integral of dens[d].
inline std::vector<IntegralResult> integrate_many(const RadialChart& rc, std::span<const Density> dens,
                                                  const QuadratureRule& rule) {
  const int D = 2 * rc.dim();
  std::vector<IntegralResult> out(dens.size() + 1);
  if (rule.kind == QuadKind::Grid) {
    const detail::GridSums fine = detail::grid_integrate(rc, rule.resolution, dens);
    const detail::GridSums coarse = detail::grid_integrate(rc, (rule.resolution + 1) / 2, dens);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].value = fine.values[i];
      out[i].error_estimate = std::abs(fine.values[i] - coarse.values[i]);
      out[i].nodes = fine.nodes;
      out[i].orientation = fine.orientation;
    }
    return out;
  }
  std::mt19937_64 rng(rule.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double area = sphere_area(D);
  std::vector<std::vector<double>> contrib(dens.size() + 1);
  std::vector<double> omega(D);
  std::vector<std::vector<double>> e(D - 1, std::vector<double>(D));
  int sign = 0;
  for (long long s = 0; s < rule.samples; ++s) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& x : omega) {
        x = gauss(rng);
        norm += x * x;
      }
    } while (norm < 1e-20);
    norm = std::sqrt(norm);
    for (auto& x : omega) x /= norm;
    // Householder reflection sending e_0 to omega; its other columns span the tangent space.
    std::vector<double> u(omega);
    u[0] -= 1.0;
    const double uu = std::inner_product(u.begin(), u.end(), u.begin(), 0.0);
    for (int i = 1; i < D; ++i) {
      auto& ei = e[i - 1];
      for (int j = 0; j < D; ++j) ei[j] = (i == j ? 1.0 : 0.0) - (uu > 1e-30 ? 2.0 * u[j] * u[i] / uu : 0.0);
    }
    const detail::NodeValue nv = detail::node_value(rc, omega, e, dens);
    if (sign == 0) sign = nv.sign;
    contrib[0].push_back(nv.volume);
    for (std::size_t d = 0; d < dens.size(); ++d) contrib[d + 1].push_back(nv.volume * nv.densities[d]);
  }
  const double N = static_cast<double>(rule.samples);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double mean = pairwise_sum(contrib[i]) / N;
    std::vector<double> sq(contrib[i].size());
    for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = (contrib[i][k] - mean) * (contrib[i][k] - mean);
    const double var = pairwise_sum(sq) / (N - 1.0);
    out[i].value = area * mean;
    out[i].error_estimate = area * std::sqrt(var / N);
    out[i].nodes = rule.samples;
    out[i].orientation = sign == 0 ? 1 : sign;
  }
  return out;
}

inline IntegralResult integrate(const RadialChart& rc, const Density& density, const QuadratureRule& rule) {
  const Density d[] = {density};
  return integrate_many(rc, d, rule)[1];
}

}  // namespace crgeom
