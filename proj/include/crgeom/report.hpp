#pragma once

// Report serialization: versioned JSON documents with every floating-point
// number written at 17 significant digits, and RFC-4180 CSV for scans.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "crgeom/analysis.hpp"
#include "crgeom/gallery.hpp"
#include "crgeom/spectral.hpp"

namespace crgeom {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.3.0";

// -------------------------------------------------------------- writing

namespace detail {

inline std::string json_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_string(std::ostream& os, const std::string& s) {
  // nlohmann's escaping is exactly what JSON needs for strings.
  os << json(s).dump();
}

inline void write_json(std::ostream& os, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad;
        write_string(os, k);
        os << sep;
        write_json(os, v, indent, depth + 1);
      }
      os << nl << close << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      if (flat || indent == 0) {
        os << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << (indent > 0 ? ", " : ",");
          write_json(os, j[i], 0, 0);
        }
        os << ']';
        return;
      }
      os << '[' << nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ',' << nl;
        os << pad;
        write_json(os, j[i], indent, depth + 1);
      }
      os << nl << close << ']';
      return;
    }
    case json::value_t::number_float:
      os << json_number(j.get<double>());
      return;
    case json::value_t::string:
      write_string(os, j.get<std::string>());
      return;
    default:
      os << j.dump();
      return;
  }
}

}  // namespace detail

/// Serializes with 17 significant digits for every float (lossless round trip).
inline std::string to_json_text(const json& j, int indent = 2) {
  std::ostringstream os;
  detail::write_json(os, j, indent, 0);
  if (indent > 0) os << '\n';
  return os.str();
}

// ------------------------------------------------------------ encoders

inline json encode(cplx z) { return json::array({z.real(), z.imag()}); }

inline json encode(std::span<const cplx> v) {
  json out = json::array();
  for (const auto& z : v) out.push_back(encode(z));
  return out;
}

inline json encode(const CVec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(encode(v(i)));
  return out;
}

inline json encode(const RVec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline json encode(const CMat& a) {
  json out = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(encode(a(i, j)));
    out.push_back(row);
  }
  return out;
}

inline cplx decode_complex(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

inline json surface_json(const SurfaceSpec& s) {
  json params = json::object();
  for (const auto& [k, v] : s.params) params[k] = v;
  return {{"name", s.name},
          {"params", params},
          {"dim", s.m},
          {"rho", to_string(s.chart.rho())},
          {"immersion", s.immersion.has_value()},
          {"star_shaped", s.star_shaped}};
}

inline json document(const std::string& command, const SurfaceSpec& s) {
  return {{"schema_version", kSchemaVersion},
          {"tool_version", kToolVersion},
          {"command", command},
          {"surface", surface_json(s)},
          {"records", json::array()},
          {"aggregates", json::object()}};
}

inline json point_record(const PointAnalysis& a) {
  const FrameData& f = a.frame;
  json rec = {{"point", encode(std::span<const cplx>(f.point))},
              {"w_index", f.w + 1},
              {"h", encode(f.levi)},
              {"r", f.r},
              {"J", f.J},
              {"xi", encode(f.xi)},
              {"ric", encode(a.ricci.ric)},
              {"scalarR", a.ricci.scalar},
              {"loghessJ_eigs", encode(a.loghess_eigs)},
              {"ricci_slack", a.ricci_slack}};
  if (a.sff) {
    rec["II0norm2"] = a.sff->IIcirc_norm2;
    rec["H"] = encode(a.sff->H);
    rec["Hnorm2"] = a.sff->Hnorm2;
    rec["torsion_norm2"] = a.torsion_norm2;
    rec["cm_norm2"] = a.curvature->cm_norm2;
    rec["is_umbilic"] = a.umbilicity->is_umbilic;
    json res = json::object();
    for (const auto& r : a.residuals) res[r.name] = r.value;
    rec["gauss_residuals"] = res;
  }
  return rec;
}

inline json bound_json(const EigenBoundReport& b) {
  // Quantities a route did not compute are null rather than zero.
  const bool quad = b.method != "constant-density";
  const bool tension = b.tension_energy > 0.0;
  auto opt = [](bool have, double v) { return have ? json(v) : json(nullptr); };
  return {{"volume", opt(quad, b.volume)},
          {"volume_error", opt(quad, b.volume_error)},
          {"mean_H2", opt(quad, b.mean_H2)},
          {"reilly_upper", opt(quad, b.reilly_upper)},
          {"tension_energy", opt(tension, b.tension_energy)},
          {"tension_total", opt(tension, b.tension_total)},
          {"tension_upper", opt(tension, b.tension_upper)},
          {"samples_used", b.samples_used},
          {"orientation", b.orientation},
          {"method", b.method}};
}

// ------------------------------------------------------------------ CSV

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace detail

/// RFC-4180 writer: CRLF line ends, quoting only where needed.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os_ << ',';
      os_ << detail::csv_field(fields[i]);
    }
    os_ << "\r\n";
  }

 private:
  std::ostream& os_;
};

inline std::vector<std::string> scan_header(int m) {
  std::vector<std::string> h;
  for (int j = 1; j <= m; ++j) {
    h.push_back("z" + std::to_string(j) + "_re");
    h.push_back("z" + std::to_string(j) + "_im");
  }
  for (const char* c : {"II0norm2", "H2", "r", "J", "scalarR", "min_eig_L", "is_umbilic"}) h.push_back(c);
  return h;
}

inline std::vector<std::string> scan_row(const PointAnalysis& a) {
  std::vector<std::string> row;
  for (const auto& z : a.frame.point) {
    row.push_back(detail::json_number(z.real()));
    row.push_back(detail::json_number(z.imag()));
  }
  const bool imm = a.sff.has_value();
  row.push_back(imm ? detail::json_number(a.sff->IIcirc_norm2) : "");
  row.push_back(imm ? detail::json_number(a.sff->Hnorm2) : "");
  row.push_back(detail::json_number(a.frame.r));
  row.push_back(detail::json_number(a.frame.J));
  row.push_back(detail::json_number(a.ricci.scalar));
  row.push_back(detail::json_number(a.min_eig_L));
  row.push_back(imm ? (a.umbilicity->is_umbilic ? "1" : "0") : "");
  return row;
}

// ----------------------------------------------------------------- scans

/// Nodes per scan parameter so that a scan has about res^3 points in any dimension.
inline int scan_nodes_per_param(int res, int m) {
  const double k = std::ceil(std::pow(static_cast<double>(res), 3.0 / (2.0 * m - 1.0)) - 1e-9);
  return std::max(2, static_cast<int>(k));
}

/// Grid of scan parameters in [0,1]^{2m-1}: the m-1 modulus parameters include
/// both endpoints, the m phase parameters are periodic.
inline std::vector<std::vector<double>> scan_parameters(int res, int m) {
  const int k = scan_nodes_per_param(res, m);
  const int d = 2 * m - 1;
  std::vector<std::vector<double>> out;
  std::vector<int> idx(d, 0);
  while (true) {
    std::vector<double> t(d);
    for (int i = 0; i < d; ++i) t[i] = i < m - 1 ? static_cast<double>(idx[i]) / (k - 1) : static_cast<double>(idx[i]) / k;
    out.push_back(std::move(t));
    int i = 0;
    while (i < d && ++idx[i] == k) idx[i++] = 0;
    if (i == d) break;
  }
  return out;
}

}  // namespace crgeom
