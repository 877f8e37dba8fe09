// Command-line driver: analyze, scan, bound, check, gallery-list.
//
// Exit codes: 0 success, 2 input/parse errors, 3 geometry errors,
// 4 invariant-suite failure, 1 anything unexpected. Errors are also written
// to stderr as a one-line JSON object.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "crgeom/crgeom.hpp"

namespace {

using namespace crgeom;

constexpr int kExitInput = 2;
constexpr int kExitGeometry = 3;
constexpr int kExitInvariant = 4;

struct SurfaceArgs {
  std::string surface = "sphere";
  std::vector<std::string> params;
  std::string surface_file;
};

void add_surface_options(CLI::App* cmd, SurfaceArgs& a) {
  cmd->add_option("--surface", a.surface, "gallery surface (see gallery-list)");
  cmd->add_option("--param", a.params, "surface parameter key=value (repeatable)");
  cmd->add_option("--surface-file", a.surface_file, "surface in key = value text format (implies custom)");
}

SurfaceSpec build_surface(const SurfaceArgs& a) {
  Params params;
  std::string name = a.surface;
  if (!a.surface_file.empty()) {
    params = read_surface_file(a.surface_file);
    name = "custom";
  }
  for (const auto& kv : a.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorKind::Parse, "--param expects key=value, got '" + kv + "'");
    params[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return gallery(name, params);
}

/// "0.6, 0.8i" -> point; each entry is a constant DSL expression.
std::vector<cplx> parse_point(const std::string& text, int m) {
  std::vector<cplx> out;
  std::string cur;
  int depth = 0;
  auto flush = [&] {
    const Expr e = parse(cur, 0);
    out.push_back(evaluate(e, std::span<const cplx>{}));
    cur.clear();
  };
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  if (static_cast<int>(out.size()) != m)
    throw Error(ErrorKind::BadParams,
                "point has " + std::to_string(out.size()) + " coordinates, surface needs " + std::to_string(m));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::BadParams, "cannot write '" + path + "'");
  out << text;
}

int report_error(const std::string& kind, const std::string& message, int code) {
  const json e = {{"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << to_json_text(e, 0) << '\n';
  return code;
}

// ------------------------------------------------------------- commands

int cmd_analyze(const SurfaceArgs& sa, const std::string& point, bool project, int points, std::uint64_t seed,
                const std::string& out) {
  const SurfaceSpec s = build_surface(sa);
  std::vector<std::vector<cplx>> pts;
  if (!point.empty()) {
    auto p = parse_point(point, s.m);
    if (project) p = project_to_surface(s.chart, p);
    pts.push_back(std::move(p));
  } else {
    pts = s.samples(points, seed);
  }
  json doc = document("analyze", s);
  for (const auto& p : pts) doc["records"].push_back(point_record(analyze_point(s, p)));
  write_text(out, to_json_text(doc));
  return 0;
}

int cmd_scan(const SurfaceArgs& sa, int grid, const std::string& out, int threads) {
  const SurfaceSpec s = build_surface(sa);
  if (grid < 2) throw Error(ErrorKind::BadParams, "--grid must be at least 2");
  const auto params = scan_parameters(grid, s.m);
  std::vector<std::optional<std::vector<std::string>>> rows(params.size());
  std::vector<double> ii0(params.size(), -1.0);
  std::vector<char> umbilic(params.size(), 0);
  const int nt = std::max(1, threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency()));
  auto work = [&](int t) {
    for (std::size_t i = t; i < params.size(); i += nt) {
      try {
        const PointAnalysis a = analyze_point(s, s.param(params[i]));
        rows[i] = scan_row(a);
        if (a.sff) {
          ii0[i] = a.sff->IIcirc_norm2;
          umbilic[i] = a.umbilicity->is_umbilic;
        }
      } catch (const Error& e) {
        if (is_input_error(e.kind())) throw;
      }
    }
  };
  if (nt == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  std::ostringstream csv;
  CsvWriter w(csv);
  w.row(scan_header(s.m));
  long long written = 0, skipped = 0, flagged = 0;
  double lo = 1e300, hi = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i]) {
      ++skipped;
      continue;
    }
    w.row(*rows[i]);
    ++written;
    flagged += umbilic[i];
    if (ii0[i] >= 0.0) {
      lo = std::min(lo, ii0[i]);
      hi = std::max(hi, ii0[i]);
    }
  }
  write_text(out, csv.str());
  if (!out.empty() && out != "-") {
    json doc = document("scan", s);
    doc["aggregates"] = {{"grid", grid},
                         {"nodes_per_parameter", scan_nodes_per_param(grid, s.m)},
                         {"rows", written},
                         {"skipped", skipped},
                         {"umbilic_rows", flagged},
                         {"min_II0norm2", written && s.immersion ? json(lo) : json(nullptr)},
                         {"max_II0norm2", written && s.immersion ? json(hi) : json(nullptr)},
                         {"csv", out}};
    std::cout << to_json_text(doc);
  }
  return 0;
}

int cmd_bound(const SurfaceArgs& sa, const std::string& quad, int points, std::uint64_t seed, const std::string& out) {
  const SurfaceSpec s = build_surface(sa);
  const QuadratureRule rule = parse_quadrature(quad);
  EigenBoundReport rep;
  if (s.star_shaped) {
    rep = reilly_bound(s.chart, rule);
    if (!s.family.empty()) {
      const EigenBoundReport t = tension_bound(s.chart, s.family, rule);
      rep.tension_energy = t.tension_energy;
      rep.tension_total = t.tension_total;
      rep.tension_upper = t.tension_upper;
    }
  } else {
    if (s.family.empty()) throw Error(ErrorKind::BadParams, "surface is not star-shaped and has no function family");
    const auto pts = s.samples(points, seed);
    rep = tension_bound_constant(s.chart, s.family, pts);
  }
  json doc = document("bound", s);
  doc["aggregates"] = bound_json(rep);
  write_text(out, to_json_text(doc));
  return 0;
}

int cmd_check(const SurfaceArgs& sa, const CheckOptions& opt, const std::string& out) {
  const SurfaceSpec s = build_surface(sa);
  const auto results = run_checks(s, opt);
  json doc = document("check", s);
  for (const auto& r : results) {
    doc["records"].push_back({{"suite", r.suite},
                              {"name", r.name},
                              {"value", r.value},
                              {"threshold", r.threshold},
                              {"bound", r.lower_bound ? "min" : "max"},
                              {"pass", r.pass}});
    std::printf("%s  %-12s %-36s %12.4e %s %.1e\n", r.pass ? "PASS" : "FAIL", r.suite.c_str(), r.name.c_str(),
                r.value, r.lower_bound ? ">=" : "<=", r.threshold);
  }
  const bool ok = all_passed(results);
  doc["aggregates"] = {{"lines", results.size()}, {"all_passed", ok}};
  if (!out.empty()) write_text(out, to_json_text(doc));
  return ok ? 0 : kExitInvariant;
}

int cmd_gallery_list() {
  json doc = {{"schema_version", kSchemaVersion}, {"tool_version", kToolVersion}, {"command", "gallery-list"}};
  json list = json::array();
  for (const auto& e : gallery_list())
    list.push_back({{"name", e.name}, {"params", e.params}, {"description", e.description}});
  doc["surfaces"] = list;
  std::cout << to_json_text(doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudohermitian invariants of real hypersurfaces and their CR immersions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  SurfaceArgs sa;
  std::string out, point, quad = "grid:32";
  int grid = 32, points = 1, threads = 0;
  std::uint64_t seed = 1;
  bool project = false;
  CheckOptions copt;

  auto* analyze = app.add_subcommand("analyze", "JSON point report");
  add_surface_options(analyze, sa);
  analyze->add_option("--point", point, "comma-separated complex coordinates, e.g. \"0.6, 0.8i\"");
  analyze->add_flag("--project", project, "project the point onto the surface first");
  analyze->add_option("--points", points, "number of sampled points when --point is absent")->check(CLI::PositiveNumber);
  analyze->add_option("--seed", seed, "sampling seed");
  analyze->add_option("--out", out, "output file (default stdout)");

  auto* scan = app.add_subcommand("scan", "umbilicity/curvature scan as CSV");
  add_surface_options(scan, sa);
  scan->add_option("--grid", grid, "resolution: about grid^3 points");
  scan->add_option("--out", out, "CSV file (default stdout)");
  scan->add_option("--threads", threads, "worker threads (default: hardware)");

  auto* bound = app.add_subcommand("bound", "eigenvalue upper bounds as JSON");
  add_surface_options(bound, sa);
  bound->add_option("--quad", quad, "grid:<n_per_angle> or mc:<samples>:<seed>");
  bound->add_option("--points", points, "sample points for the constancy certificate")->check(CLI::PositiveNumber);
  bound->add_option("--seed", seed, "sampling seed");
  bound->add_option("--out", out, "output file (default stdout)");

  auto* check = app.add_subcommand("check", "run the invariant suites");
  add_surface_options(check, sa);
  check->add_flag("--all", copt.all, "also run the oracle, quadrature and bound suites");
  check->add_option("--points", copt.points, "sample points")->check(CLI::PositiveNumber);
  check->add_option("--seed", copt.seed, "sampling seed");
  check->add_option("--out", out, "JSON report file");

  app.add_subcommand("gallery-list", "list built-in surfaces and parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("ParseError", e.what(), kExitInput);
  }

  try {
    if (*analyze) return cmd_analyze(sa, point, project, analyze->count("--points") ? points : 1, seed, out);
    if (*scan) return cmd_scan(sa, grid, out, threads);
    if (*bound) return cmd_bound(sa, quad, bound->count("--points") ? points : 20, seed, out);
    if (*check) return cmd_check(sa, copt, out);
    return cmd_gallery_list();
  } catch (const Error& e) {
    return report_error(std::string(to_string(e.kind())), e.detail(), is_input_error(e.kind()) ? kExitInput : kExitGeometry);
  } catch (const std::exception& e) {
    return report_error("InternalError", e.what(), 1);
  }
}
