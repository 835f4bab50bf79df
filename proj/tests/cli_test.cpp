#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "recur/commands.hpp"

using namespace recur;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "recur");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("recur-cli-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

std::string fixture(const std::string& name) { return std::string(RECUR_FIXTURE_DIR) + "/" + name + ".json"; }

std::string error_of(const std::string& text) {
  try {
    parse_spec(text, "t.json");
  } catch (const SpecError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(SpecJson, RoundTripsEveryBundledFixture) {
  for (const auto& s : bundled_fixtures()) {
    const json j = spec_to_json(s);
    const ProblemSpec back = spec_from_json(j);
    EXPECT_TRUE(back == s) << s.name;
    EXPECT_EQ(dump(spec_to_json(back)), dump(j)) << s.name;
  }
}

TEST(SpecJson, ShippedFixturesMatchGenerator) {
  for (const auto& s : bundled_fixtures()) EXPECT_EQ(slurp(fixture(s.name)), dump(spec_to_json(s))) << s.name;
}

TEST(SpecJson, LoadedFixtureEqualsBuilder) {
  EXPECT_TRUE(load_spec(fixture("bessel-1.5")) == bessel_spec(1.5));
  EXPECT_TRUE(load_spec(fixture("anisotropic-2d")) == anisotropic_plane_spec());
}

TEST(SpecJson, ExpressionKindsRoundTrip) {
  const std::vector<Expr> exprs = {
      Expr::piecewise({0.0, 1.0}, {Expr::constant(1.0), Expr::x(), Expr::polynomial({0.0, 0.0, 1.0})}),
      Expr::tabulated({0.0, 1.0, 2.0}, {1.0, 2.0, 1.5}),
      Expr::lattice_power({0.5, 2.0, PatternExtent::left}, 1.5),
      Expr::product({Expr::exponential(-0.5, Expr::radius()), Expr::logarithm(Expr::coordinate(1))}),
      Expr::power(1.0, -0.25, Expr::sum({Expr::x(), Expr::constant(2.0)})),
  };
  for (const auto& e : exprs) {
    const json j = expr_to_json(e);
    EXPECT_TRUE(expr_from_json(j, "") == e) << j.dump();
  }
}

TEST(SpecJson, SyntaxErrorReportsLineAndColumn) {
  // The stray comma is on line 3, column 14.
  const std::string text = "{\n  \"format\": \"recur-spec\",\n  \"version\": ,\n}";
  EXPECT_NE(error_of(text).find("t.json:3:14"), std::string::npos) << error_of(text);
}

TEST(SpecJson, SemanticErrorsNameTheField) {
  const std::string head = R"({"format":"recur-spec","version":1,"domain":"line",)";
  EXPECT_NE(error_of(head + R"("phi":{"kind":"power","exponent":"x"}})").find("/phi/exponent"), std::string::npos);
  EXPECT_NE(error_of(head + R"("phi":{"kind":"sum","terms":[1,{"kind":"nope"}]}})").find("/phi/terms/1/kind"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"format":"recur-spec","version":1,"domain":"line"})").find("/phi: missing field"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"format":"recur-spec","version":2,"domain":"line","phi":1})").find("/version"),
            std::string::npos);
  EXPECT_NE(error_of(head + R"("phi":1,"simulation":{"dt":1,"horizon":10}})").find("/simulation"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"format":"recur-spec","version":1,"domain":"euclidean","dimension":2,"phi":1,)"
                     R"("matrix":[[1,0],[2,1]]})")
                .find("/matrix/1/0"),
            std::string::npos);
}

TEST(ReportJson, VerdictRoundTrips) {
  for (const ProblemSpec& s : {brownian_spec(), bessel_spec(3.0), identity_spec(2)}) {
    const auto c = classify_spec(s);
    const json j = report_to_json(s, c.verdict, c.decomposition ? &*c.decomposition : nullptr);
    const json reparsed = json::parse(j.dump());
    EXPECT_TRUE(verdict_from_report(reparsed) == c.verdict) << s.name;
  }
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(cli({}).code, exit_spec_error);
  EXPECT_EQ(cli({"classify", "--spec", (dir.path() / "missing.json").string()}).code, exit_spec_error);
  std::ofstream(dir.path() / "bad.json") << "{\"format\": \"recur-spec\", \"version\": 1}";
  const CliRun bad = cli({"classify", "--spec", (dir.path() / "bad.json").string(), "--out", dir.str()});
  EXPECT_EQ(bad.code, exit_spec_error);
  EXPECT_NE(bad.err.find("/domain"), std::string::npos);
  EXPECT_EQ(cli({"classify", "--spec", fixture("brownian"), "--n-max", "4", "--out", dir.str()}).code,
            exit_spec_error);
  EXPECT_EQ(cli({"energy-trace", "--spec", fixture("identity-2d"), "--out", dir.str()}).code, exit_spec_error);
}

TEST(Cli, ClassifyWritesReportAndSummary) {
  TempDir dir;
  const CliRun r = cli({"classify", "--spec", fixture("bessel-1.5"), "--out", dir.str()});
  ASSERT_EQ(r.code, exit_ok) << r.err;
  EXPECT_NE(r.out.find("verdict: Recurrent"), std::string::npos);
  const json report = json::parse(slurp(dir.path() / "bessel-1.5.report.json"));
  EXPECT_EQ(report["format"], "recur-report");
  EXPECT_EQ(report["verdict"]["kind"], "Recurrent");
  EXPECT_EQ(report["verdict"]["case"], "half-i");
  EXPECT_EQ(slurp(dir.path() / "bessel-1.5.summary.txt"), r.out);

  const CliRun r3 = cli({"classify", "--spec", fixture("identity-3d"), "--out", dir.str()});
  ASSERT_EQ(r3.code, exit_ok) << r3.err;
  EXPECT_EQ(json::parse(slurp(dir.path() / "identity-3d.report.json"))["verdict"]["kind"], "Inconclusive");
}

TEST(Cli, ScaleProbeFlag) {
  TempDir dir;
  const CliRun r = cli({"classify", "--spec", fixture("bessel-3"), "--enable-scale-probe", "--out", dir.str()});
  ASSERT_EQ(r.code, exit_ok);
  EXPECT_NE(r.out.find("flag: TransientByScale"), std::string::npos);
  const CliRun plain = cli({"classify", "--spec", fixture("bessel-3"), "--out", dir.str()});
  EXPECT_EQ(plain.out.find("TransientByScale"), std::string::npos);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  TempDir dir;
  ::setenv(kOutDirEnv, dir.str().c_str(), 1);
  const CliRun r = cli({"classify", "--spec", fixture("brownian"), "--n-max", "16"});
  ::unsetenv(kOutDirEnv);
  ASSERT_EQ(r.code, exit_ok);
  EXPECT_TRUE(fs::exists(dir.path() / "brownian.report.json"));
}

TEST(Cli, EnergyTraceRows) {
  TempDir dir;
  const CliRun r = cli({"energy-trace", "--spec", fixture("brownian"), "--n-max", "8", "--out", dir.str()});
  ASSERT_EQ(r.code, exit_ok) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n,a_n,b_n,closed_form_energy,quadrature_energy,tolerance");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream row(line);
    std::vector<double> v;
    for (std::string cell; std::getline(row, cell, ',');) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 6u);
    const double n = v[0];
    // Brownian motion: a_n = b_n = n, energy 1/n.
    EXPECT_NEAR(v[1], n, 1e-9 * n);
    EXPECT_NEAR(v[2], n, 1e-9 * n);
    EXPECT_NEAR(v[3], 1.0 / n, 1e-12);
    EXPECT_NEAR(v[4], v[3], v[5]);
  }
  EXPECT_EQ(rows, 8);
  EXPECT_EQ(slurp(dir.path() / "brownian.energy.csv"), r.out);
}

TEST(Cli, SimulateIsReproducible) {
  TempDir a, b;
  const std::vector<std::string> common = {"simulate", "--spec", fixture("bessel-1.5"), "--paths", "40",
                                           "--horizon", "2", "--seed", "9"};
  auto with = [&](const TempDir& d, const std::string& threads) {
    auto args = common;
    for (const auto& s : {std::string("--out"), d.str(), std::string("--threads"), threads}) args.push_back(s);
    return cli(args);
  };
  ASSERT_EQ(with(a, "1").code, exit_ok);
  ASSERT_EQ(with(b, "3").code, exit_ok);
  const std::string csv = slurp(a.path() / "bessel-1.5.paths.csv");
  EXPECT_EQ(csv, slurp(b.path() / "bessel-1.5.paths.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 41);
  const json sim = json::parse(slurp(a.path() / "bessel-1.5.simulation.json"));
  EXPECT_EQ(sim["estimate"]["completed"], 40);
  EXPECT_EQ(sim["estimate"]["label"], "corroboration, not verification");
  EXPECT_EQ(cli({"simulate", "--spec", fixture("identity-2d"), "--out", a.str()}).code, exit_spec_error);
}

TEST(Cli, CorroborateReportsAgreement) {
  TempDir dir;
  const CliRun r = cli({"corroborate", "--spec", fixture("bessel-3"), "--paths", "200", "--horizon", "5", "--out",
                     dir.str()});
  ASSERT_EQ(r.code, exit_ok) << r.err;
  const json j = json::parse(slurp(dir.path() / "bessel-3.corroboration.json"));
  EXPECT_EQ(j["transient_by_scale"], true);
  EXPECT_NEAR(j["ever_hit_probability"].get<double>(), 0.5, 1e-8);
  EXPECT_EQ(j["agreement"], "consistent with transience flag");
}

TEST(Cli, FixturesWriteAndCheck) {
  TempDir dir;
  ASSERT_EQ(cli({"fixtures", "--out", dir.str()}).code, exit_ok);
  for (const auto& s : bundled_fixtures())
    EXPECT_EQ(slurp(dir.path() / (s.name + ".json")), slurp(fixture(s.name))) << s.name;
  EXPECT_EQ(cli({"fixtures", "--check", RECUR_FIXTURE_DIR}).code, exit_ok);
  std::ofstream(dir.path() / "brownian.json", std::ios::app) << " ";
  const CliRun r = cli({"fixtures", "--check", dir.str()});
  EXPECT_EQ(r.code, exit_mismatch);
  EXPECT_NE(r.out.find("differs: " + (dir.path() / "brownian.json").string()), std::string::npos);
}
