#pragma once

// Built-in surfaces and the surface-file format.
//
//   sphere     rho = ||Z||^2 - r^2                      F = Z, psi = -r^2
//   ellipsoid  rho = ||Z||^2 + Re sum A_j z_j^2 - 1     F = Z, psi = Re sum A_j z_j^2 - 1
//   whitney    rho = ||W||^2 - 1, W = (z, z w, w^2)     sigma = log(1 + |w|^2)
//   reinhardt  rho = sum (log|z_j|^2)^2 - 1             family f_j = log|z_j|^2
//   custom     from key = value text (see parse_surface_text)

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crgeom/error.hpp"
#include "crgeom/expr.hpp"
#include "crgeom/hypersurface.hpp"
#include "crgeom/immersion.hpp"
#include "crgeom/parser.hpp"
#include "crgeom/quadrature.hpp"
#include "crgeom/spectral.hpp"

namespace crgeom {

using Params = std::map<std::string, std::string>;

/// Maps scan parameters in [0,1]^{2m-1} to a point of M.
using Parametrization = std::function<std::vector<cplx>(std::span<const double>)>;

struct SurfaceSpec {
  std::string name;
  Params params;
  int m = 0;
  HypersurfaceChart chart;
  std::optional<ImmersionSpec> immersion;
  std::optional<Expr> sigma;
  std::vector<PluriharmonicFunction> family;
  bool star_shaped = true;
  Parametrization param;

  int n() const { return m - 1; }

  /// Pseudo-random point of M drawn from the scan parametrization.
  std::vector<cplx> sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> t(2 * m - 1);
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (auto& x : t) x = u(rng);
      try {
        return param(t);
      } catch (const Error&) {
      }
    }
    throw Error(ErrorKind::NoCrossing, "could not sample a point on " + name);
  }

  std::vector<std::vector<cplx>> samples(int count, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<cplx>> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(sample(rng));
    return out;
  }
};

// ------------------------------------------------------------ parameters

namespace detail {

inline double param_double(const Params& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::BadParams, "parameter " + key + " is not a number: '" + it->second + "'");
  }
}

inline int param_int(const Params& p, const std::string& key, int fallback) {
  const double v = param_double(p, key, fallback);
  if (v != std::floor(v)) throw Error(ErrorKind::BadParams, "parameter " + key + " must be an integer");
  return static_cast<int>(v);
}

inline std::vector<double> param_list(const Params& p, const std::string& key) {
  std::vector<double> out;
  const auto it = p.find(key);
  if (it == p.end()) return out;
  std::string s = it->second;
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '(' || c == ')' || c == '[' || c == ']'; }),
          s.end());
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    Params one{{key, item}};
    out.push_back(param_double(one, key, 0.0));
  }
  return out;
}

inline void reject_unknown(const Params& p, std::initializer_list<const char*> known, const std::string& surface) {
  for (const auto& [k, v] : p) {
    if (std::find_if(known.begin(), known.end(), [&](const char* s) { return k == s; }) == known.end())
      throw Error(ErrorKind::BadParams, "unknown parameter '" + k + "' for surface " + surface);
  }
}

/// Toric coordinates: m-1 radial angles in [0, pi/2] (endpoints included) give
/// moduli on the unit sphere's positive orthant; m phases are periodic.
inline std::vector<double> toric_direction(std::span<const double> t, int m) {
  std::vector<double> mod(m);
  double prod = 1.0;
  for (int i = 0; i < m - 1; ++i) {
    const double eta = 0.5 * std::numbers::pi * t[i];
    mod[i] = prod * std::cos(eta);
    prod *= std::sin(eta);
  }
  mod[m - 1] = prod;
  std::vector<double> omega(2 * m);
  for (int j = 0; j < m; ++j) {
    const double phi = 2.0 * std::numbers::pi * t[m - 1 + j];
    omega[2 * j] = mod[j] * std::cos(phi);
    omega[2 * j + 1] = mod[j] * std::sin(phi);
  }
  return omega;
}

inline Parametrization radial_parametrization(const HypersurfaceChart& chart, int m) {
  auto held = std::make_shared<const HypersurfaceChart>(chart);
  return [held, m](std::span<const double> t) {
    const RadialChart rc{held.get()};
    const std::vector<double> omega = toric_direction(t, m);
    return ray_point(rc, omega, radial_solve(rc, omega));
  };
}

inline Expr norm2(int m) {
  std::vector<Expr> terms;
  for (int j = 0; j < m; ++j) terms.push_back(abs2(variable(j)));
  return sum(terms);
}

inline std::vector<Expr> identity_map(int m) {
  std::vector<Expr> out;
  for (int j = 0; j < m; ++j) out.push_back(variable(j));
  return out;
}

inline void wire_immersion(SurfaceSpec& s, std::vector<Expr> F, Expr psi) {
  s.immersion.emplace(std::move(F), std::move(psi), s.m);
  s.chart = s.immersion->chart();
}

inline void finish_radial(SurfaceSpec& s) {
  s.star_shaped = true;
  s.param = radial_parametrization(s.chart, s.m);
}

}  // namespace detail

// --------------------------------------------------------------- builders

inline SurfaceSpec make_sphere(const Params& p) {
  detail::reject_unknown(p, {"r", "n"}, "sphere");
  const double r = detail::param_double(p, "r", 1.0);
  const int n = detail::param_int(p, "n", 1);
  if (!(r > 0.0)) throw Error(ErrorKind::BadParams, "sphere radius must be positive");
  if (n < 1 || n > 6) throw Error(ErrorKind::BadParams, "sphere needs 1 <= n <= 6");
  SurfaceSpec s;
  s.name = "sphere";
  s.params = p;
  s.m = n + 1;
  detail::wire_immersion(s, detail::identity_map(s.m), constant(-r * r));
  for (int j = 0; j < s.m; ++j)
    s.family.emplace_back(conj(variable(j)), s.m, "conj(z" + std::to_string(j + 1) + ")");
  detail::finish_radial(s);
  return s;
}

inline SurfaceSpec make_ellipsoid(const Params& p) {
  detail::reject_unknown(p, {"A", "dim"}, "ellipsoid");
  std::vector<double> A = detail::param_list(p, "A");
  int dim = detail::param_int(p, "dim", 0);
  if (A.empty() && dim == 0) {
    A = {0.1, 0.2, 0.3};
    dim = 3;
  }
  if (A.empty()) A.assign(dim, 0.0);
  if (dim == 0) throw Error(ErrorKind::BadParams, "ellipsoid needs an explicit dim parameter");
  if (static_cast<int>(A.size()) != dim)
    throw Error(ErrorKind::BadParams, "ellipsoid A has " + std::to_string(A.size()) + " entries, dim is " +
                                          std::to_string(dim));
  if (dim < 2) throw Error(ErrorKind::BadParams, "ellipsoid needs dim >= 2");
  for (double a : A)
    if (!(std::abs(a) < 1.0)) throw Error(ErrorKind::BadParams, "ellipsoid needs |A_j| < 1");
  SurfaceSpec s;
  s.name = "ellipsoid";
  s.params = p;
  s.m = dim;
  std::vector<Expr> quad;
  for (int j = 0; j < dim; ++j)
    if (A[j] != 0.0) quad.push_back(constant(A[j]) * pow(variable(j), 2));
  const Expr psi = re(sum(quad)) - constant(1.0);
  detail::wire_immersion(s, detail::identity_map(s.m), psi);
  for (int j = 0; j < s.m; ++j)
    s.family.emplace_back(conj(variable(j)), s.m, "conj(z" + std::to_string(j + 1) + ")");
  detail::finish_radial(s);
  return s;
}

inline SurfaceSpec make_whitney(const Params& p) {
  detail::reject_unknown(p, {"n"}, "whitney");
  const int n = detail::param_int(p, "n", 1);
  if (n < 1 || n > 4) throw Error(ErrorKind::BadParams, "whitney needs 1 <= n <= 4");
  SurfaceSpec s;
  s.name = "whitney";
  s.params = p;
  s.m = n + 1;
  const Expr w = variable(n);
  std::vector<Expr> W;
  for (int j = 0; j < n; ++j) W.push_back(variable(j));
  for (int j = 0; j < n; ++j) W.push_back(variable(j) * w);
  W.push_back(pow(w, 2));
  detail::wire_immersion(s, W, constant(-1.0));
  s.sigma = log(constant(1.0) + abs2(w));
  for (std::size_t d = 0; d < W.size(); ++d)
    s.family.emplace_back(conj(W[d]), s.m, "conj(W" + std::to_string(d + 1) + ")");
  detail::finish_radial(s);
  return s;
}

inline SurfaceSpec make_reinhardt(const Params& p) {
  detail::reject_unknown(p, {"n"}, "reinhardt");
  const int n = detail::param_int(p, "n", 1);
  if (n < 1 || n > 5) throw Error(ErrorKind::BadParams, "reinhardt needs 1 <= n <= 5");
  SurfaceSpec s;
  s.name = "reinhardt";
  s.params = p;
  s.m = n + 1;
  std::vector<Expr> terms;
  for (int j = 0; j < s.m; ++j) {
    const Expr lj = log(abs2(variable(j)));
    terms.push_back(pow(lj, 2));
    s.family.emplace_back(lj, s.m, "log|z" + std::to_string(j + 1) + "|^2");
  }
  terms.push_back(constant(-1.0));
  s.chart = HypersurfaceChart(sum(terms), s.m);
  s.star_shaped = false;
  // u on the unit sphere S^{m-1} (m-1 angles), z_j = exp(u_j / 2 + i phi_j).
  const int m = s.m;
  s.param = [m](std::span<const double> t) {
    std::vector<double> u(m);
    double prod = 1.0;
    for (int i = 0; i < m - 1; ++i) {
      const double a = (i == m - 2 ? 2.0 : 1.0) * std::numbers::pi * t[i];
      u[i] = prod * std::cos(a);
      prod *= std::sin(a);
    }
    u[m - 1] = prod;
    std::vector<cplx> z(m);
    for (int j = 0; j < m; ++j) z[j] = std::polar(std::exp(0.5 * u[j]), 2.0 * std::numbers::pi * t[m - 1 + j]);
    return z;
  };
  return s;
}

// ------------------------------------------------------------ custom files

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Splits "[a, b, c]" at top-level commas.
inline std::vector<std::string> split_list(const std::string& text, const std::string& key) {
  std::string s = trim(text);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    throw Error(ErrorKind::Parse, key + " must be a bracketed list [e1, e2, ...]");
  s = s.substr(1, s.size() - 2);
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  for (const auto& e : out)
    if (e.empty()) throw Error(ErrorKind::Parse, key + " contains an empty entry");
  return out;
}

}  // namespace detail

/// Parses `key = value` lines (`#` starts a comment). Keys: rho, dim, F, psi, sigma, f.
inline Params parse_surface_text(const std::string& text) {
  Params out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key != "rho" && key != "dim" && key != "F" && key != "psi" && key != "sigma" && key != "f")
      throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (out.count(key)) throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

inline Params read_surface_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot read surface file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_surface_text(buf.str());
}

inline SurfaceSpec make_custom(const Params& p) {
  detail::reject_unknown(p, {"rho", "dim", "F", "psi", "sigma", "f"}, "custom");
  if (!p.count("dim")) throw Error(ErrorKind::BadParams, "custom surface needs dim");
  const int m = detail::param_int(p, "dim", 0);
  if (m < 2 || m > 8) throw Error(ErrorKind::BadParams, "custom surface needs 2 <= dim <= 8");
  SurfaceSpec s;
  s.name = "custom";
  s.params = p;
  s.m = m;
  if (p.count("F")) {
    std::vector<Expr> F;
    for (const auto& e : detail::split_list(p.at("F"), "F")) F.push_back(parse(e, m));
    const Expr psi = p.count("psi") ? parse(p.at("psi"), m) : constant(-1.0);
    detail::wire_immersion(s, std::move(F), psi);
    if (p.count("rho")) {
      // An explicit rho must agree with ||F||^2 + psi.
      const Expr given = parse(p.at("rho"), m);
      if (!vanishes_identically(given - s.chart.rho(), 1e-10))
        throw Error(ErrorKind::BadParams, "rho differs from ||F||^2 + psi");
    }
  } else {
    if (!p.count("rho")) throw Error(ErrorKind::BadParams, "custom surface needs rho or F");
    if (p.count("psi")) throw Error(ErrorKind::BadParams, "psi is only meaningful together with F");
    s.chart = HypersurfaceChart(parse(p.at("rho"), m), m);
  }
  if (p.count("sigma")) s.sigma = parse(p.at("sigma"), m);
  if (p.count("f")) {
    int k = 0;
    for (const auto& e : detail::split_list(p.at("f"), "f"))
      s.family.emplace_back(parse(e, m), m, "f" + std::to_string(++k));
  }
  detail::finish_radial(s);
  // Fall back to projection of the toric direction when the surface is not star-shaped.
  try {
    std::vector<double> probe(2 * m - 1, 0.37);
    (void)s.param(probe);
  } catch (const Error&) {
    s.star_shaped = false;
    const HypersurfaceChart chart = s.chart;
    s.param = [chart, m](std::span<const double> t) {
      const std::vector<double> omega = detail::toric_direction(t, m);
      std::vector<cplx> z(m);
      for (int j = 0; j < m; ++j) z[j] = {omega[2 * j], omega[2 * j + 1]};
      return project_to_surface(chart, z);
    };
  }
  return s;
}

// ---------------------------------------------------------------- gallery

struct GalleryEntry {
  std::string name;
  std::string params;
  std::string description;
};

inline std::vector<GalleryEntry> gallery_list() {
  return {
      {"sphere", "r=1 n=1", "||Z||^2 - r^2 in C^{n+1}, immersion F = Z"},
      {"ellipsoid", "A=0.1,0.2,0.3 dim=3", "||Z||^2 + Re sum A_j z_j^2 - 1, |A_j| < 1"},
      {"whitney", "n=1", "||W||^2 - 1 with W = (z, z w, w^2), sigma = log(1+|w|^2)"},
      {"reinhardt", "n=1", "sum_j (log|z_j|^2)^2 - 1, family log|z_j|^2"},
      {"custom", "rho= dim= [F=] [psi=] [sigma=] [f=]", "surface given in the key = value text format"},
  };
}

inline SurfaceSpec gallery(const std::string& name, const Params& params = {}) {
  if (name == "sphere") return make_sphere(params);
  if (name == "ellipsoid") return make_ellipsoid(params);
  if (name == "whitney") return make_whitney(params);
  if (name == "reinhardt") return make_reinhardt(params);
  if (name == "custom") return make_custom(params);
  throw Error(ErrorKind::UnknownSurface, "unknown surface '" + name + "'");
}

}  // namespace crgeom
