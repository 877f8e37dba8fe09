#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "test_util.hpp"

using namespace crgeom;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

/// Runs the CLI with stderr folded into stdout.
CliRun cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CRGEOM_CLI + "\" " + args + " 2>&1";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string surface_file(const char* name) { return std::string(CRGEOM_SURFACES) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

// ------------------------------------------------------------------ JSON

TEST(JsonReport, NumbersRoundTripBitExactly) {
  const json j = {{"a", 0.1}, {"b", 1.0 / 3.0}, {"c", -2.5e-300}, {"d", json::array({1e308, 4.9e-324})}, {"k", 3}};
  const std::string text = to_json_text(j);
  const json back = json::parse(text);
  EXPECT_EQ(back["a"].get<double>(), 0.1);
  EXPECT_EQ(back["b"].get<double>(), 1.0 / 3.0);
  EXPECT_EQ(back["c"].get<double>(), -2.5e-300);
  EXPECT_EQ(back["d"][1].get<double>(), 4.9e-324);
  EXPECT_EQ(back["k"].get<int>(), 3);
  EXPECT_EQ(to_json_text(back), text);
  EXPECT_NE(text.find("0.10000000000000001"), std::string::npos);
}

TEST(JsonReport, NonFiniteBecomesNull) {
  const json j = {{"x", std::nan("")}};
  EXPECT_EQ(to_json_text(j, 0), "{\"x\":null}");
}

TEST(JsonReport, PointRecordFields) {
  const SurfaceSpec s = gallery("whitney");
  const PointAnalysis a = analyze_point(s, s.samples(1, 3)[0]);
  const json rec = point_record(a);
  for (const char* k : {"point", "w_index", "h", "r", "J", "xi", "ric", "scalarR", "loghessJ_eigs", "ricci_slack",
                        "II0norm2", "H", "Hnorm2", "torsion_norm2", "cm_norm2", "is_umbilic", "gauss_residuals"})
    EXPECT_TRUE(rec.contains(k)) << k;
  EXPECT_GE(rec["w_index"].get<int>(), 1);
  EXPECT_EQ(decode_complex(rec["point"][0]), a.frame.point[0]);
  const json intrinsic = point_record(analyze_point(gallery("reinhardt"), gallery("reinhardt").samples(1, 1)[0]));
  EXPECT_FALSE(intrinsic.contains("II0norm2"));
}

// ------------------------------------------------------------------- CSV

TEST(Csv, QuotesOnlyWhenNeeded) {
  std::ostringstream os;
  CsvWriter w(os);
  w.row({"plain", "a,b", "say \"hi\"", "two\nlines", ""});
  EXPECT_EQ(os.str(), "plain,\"a,b\",\"say \"\"hi\"\"\",\"two\nlines\",\r\n");
}

TEST(Csv, ScanHeaderAndRow) {
  const auto h = scan_header(2);
  ASSERT_EQ(h.size(), 11u);
  EXPECT_EQ(h[0], "z1_re");
  EXPECT_EQ(h[3], "z2_im");
  EXPECT_EQ(h.back(), "is_umbilic");
  const SurfaceSpec s = gallery("sphere");
  const auto row = scan_row(analyze_point(s, std::vector<cplx>{1.0, 0.0}));
  ASSERT_EQ(row.size(), h.size());
  EXPECT_LT(std::abs(std::stod(row[4])), 1e-12);  // II0 vanishes identically on the sphere
  EXPECT_EQ(row.back(), "1");
}

TEST(Scan, ParameterGrid) {
  EXPECT_EQ(scan_nodes_per_param(40, 2), 40);
  EXPECT_EQ(scan_nodes_per_param(40, 3), 10);  // 40^(3/5) = 9.15 -> 10
  const auto g = scan_parameters(5, 2);
  ASSERT_EQ(g.size(), 125u);
  EXPECT_EQ(g.front()[0], 0.0);
  EXPECT_EQ(g.back()[0], 1.0);   // modulus parameter reaches both ends
  EXPECT_EQ(g.back()[1], 0.8);   // phases stop short of a full turn
}

TEST(Checks, LogAggregatesAndFails) {
  CheckLog log;
  log.max("s", "a", 1e-12, 1e-10);
  log.max("s", "a", 5e-10, 1e-10);
  log.min("s", "b", 2.0, 1.0);
  log.min("s", "b", 1.5, 1.0);
  const auto r = log.finish();
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].value, 5e-10);
  EXPECT_FALSE(r[0].pass);
  EXPECT_EQ(r[1].value, 1.5);
  EXPECT_TRUE(r[1].pass);
  EXPECT_FALSE(all_passed(r));
  CheckLog nan;
  nan.max("s", "x", std::nan(""), 1.0);
  EXPECT_FALSE(nan.finish()[0].pass);
}

// ------------------------------------------------------------------- CLI

TEST(Cli, AnalyzeSpherePoint) {
  const CliRun r = cli("analyze --surface sphere --point \"0.6, 0.8i\"");
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  EXPECT_EQ(j["command"], "analyze");
  const json& rec = j["records"][0];
  EXPECT_NEAR(rec["r"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(rec["J"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(rec["II0norm2"].get<double>(), 0.0, 1e-12);
  EXPECT_EQ(rec["is_umbilic"], true);
}

TEST(Cli, ProjectAndParams) {
  const CliRun r = cli("analyze --surface sphere --param r=2 --param n=2 --point \"1, 1, 1\" --project");
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["records"][0]["r"].get<double>(), 0.25, 1e-12);
  EXPECT_EQ(j["surface"]["dim"], 3);
}

TEST(Cli, ErrorExitCodes) {
  CliRun r = cli("analyze --surface torus");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.out)["error"], "UnknownSurface");
  r = cli("analyze --surface sphere --point \"0.5, 0\"");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(json::parse(r.out)["error"], "NotOnSurface");
  r = cli("analyze --surface sphere --param q=1");
  EXPECT_EQ(r.code, 2);
  r = cli("bound --surface sphere --quad simpson:3");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.out)["error"], "ParseError");
  r = cli("frobnicate");
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, CheckAllOnSphere) {
  const CliRun r = cli("check --surface sphere --all --points 8");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("PASS  oracle"), std::string::npos);
}

TEST(Cli, BoundOnSphereIsSharp) {
  const CliRun r = cli("bound --surface sphere --quad grid:48");
  ASSERT_EQ(r.code, 0) << r.out;
  const json a = json::parse(r.out)["aggregates"];
  EXPECT_NEAR(a["reilly_upper"].get<double>(), 1.0, 1e-3);
  EXPECT_NEAR(a["tension_upper"].get<double>(), 1.0, 1e-3);
  EXPECT_EQ(a["method"], "grid:48");
}

TEST(Cli, MonteCarloBoundIsReproducible) {
  const CliRun a = cli("bound --surface whitney --quad mc:3000:11");
  const CliRun b = cli("bound --surface whitney --quad mc:3000:11");
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, ScanWritesCsvAndSummary) {
  const std::string path = (std::filesystem::temp_directory_path() / "crgeom_scan_test.csv").string();
  const CliRun r = cli("scan --surface whitney --grid 8 --threads 1 --out \"" + path + "\"");
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["aggregates"]["rows"], 512);
  EXPECT_EQ(j["aggregates"]["umbilic_rows"], 64);  // the whole circle |w| = 1 of the last modulus layer
  const std::string csv = slurp(path);
  EXPECT_EQ(csv.rfind("z1_re,z1_im,z2_re,z2_im,II0norm2", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 513);
  std::filesystem::remove(path);
}

TEST(Cli, SurfaceFilesLoadAndPassChecks) {
  for (const char* f : {"whitney.surf", "egg.surf", "complex_ellipsoid.surf"}) {
    const CliRun r = cli("check --surface-file \"" + surface_file(f) + "\" --points 6");
    EXPECT_EQ(r.code, 0) << f << "\n" << r.out;
  }
  const CliRun a = cli("analyze --surface-file \"" + surface_file("whitney.surf") + "\" --point \"1, 0\"");
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_NEAR(json::parse(a.out)["records"][0]["II0norm2"].get<double>(), 4.0, 1e-10);
}

TEST(Cli, GalleryList) {
  const CliRun r = cli("gallery-list");
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  std::vector<std::string> names;
  for (const auto& e : j["surfaces"]) names.push_back(e["name"]);
  EXPECT_EQ(names, (std::vector<std::string>{"sphere", "ellipsoid", "whitney", "reinhardt", "custom"}));
}
