#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "isocurve/cli.hpp"
#include "isocurve/io.hpp"

using namespace isocurve;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("isocurve_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("surface config files load every family") {
  const fs::path dir = temp_dir("cfg");
  write_text_file((dir / "torus.cfg").string(),
                  "# square torus with injectivity radius 1\n"
                  "family = flat_torus\n"
                  "v1 = 2 0\n"
                  "v2 = 0 2\n");
  const SurfacePtr torus = load_surface_config((dir / "torus.cfg").string());
  CHECK(torus->family() == "flat_torus");
  CHECK(torus->stats().injectivity_radius == doctest::Approx(1.0));

  write_text_file((dir / "sphere.cfg").string(),
                  "family = revolution\nprofile = sphere\nradius = 1.0\n");
  const SurfacePtr sphere = load_surface_config((dir / "sphere.cfg").string());
  CHECK(sphere->stats().area == doctest::Approx(4 * kPi).epsilon(1e-6));

  write_text_file((dir / "capped.cfg").string(),
                  "family = revolution\nprofile = capped_cylinder\nlength = 7\n");
  CHECK(load_surface_config((dir / "capped.cfg").string())->stats().injectivity_radius ==
        doctest::Approx(kPi));

  write_text_file((dir / "conf.cfg").string(),
                  "family = conformal_torus\nv1 = 1 0\nv2 = 0 1\ngrid_n = 32\n"
                  "u_harmonic = 1 0 0.05\nu_harmonic = 0 1 0.03 0.7\n");
  const SurfacePtr conf = load_surface_config((dir / "conf.cfg").string());
  CHECK(conf->family() == "conformal_torus");
  CHECK(conf->total_area() > 0.9);

  CHECK_THROWS_AS(load_surface_config((dir / "missing.cfg").string()), ConfigError);
  write_text_file((dir / "bad.cfg").string(), "family = klein_bottle\n");
  CHECK_THROWS_AS(load_surface_config((dir / "bad.cfg").string()), ConfigError);
}

TEST_CASE("double formatting round-trips bit-exactly") {
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-30, 30);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::ldexp(mant(rng), expo(rng));
    const double back = std::strtod(format_double(x).c_str(), nullptr);
    CHECK(back == x);
  }
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("curve json round-trips coordinates bit-exactly") {
  auto t = std::make_shared<FlatTorus>(Vec2(4, 0), Vec2(0, 4));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(0.0, 4.0);
  std::vector<Vec2> pts(64);
  for (auto& p : pts) p = Vec2(coord(rng), coord(rng));
  const DiscreteCurve curve = DiscreteCurve::loop(t, pts);
  const DiscreteCurve back = curve_from_json(curve_to_json(curve), t);
  REQUIRE(back.size() == curve.size());
  for (int i = 0; i < curve.size(); ++i) {
    CHECK(back.vertices()[i].x() == curve.vertices()[i].x());
    CHECK(back.vertices()[i].y() == curve.vertices()[i].y());
  }
  CHECK(back.closed());
}

TEST_CASE("region-plot command emits figures and passes its regression") {
  const fs::path dir = temp_dir("plot");
  RunConfig cfg;
  cfg.command = "region-plot";
  cfg.out_dir = dir.string();
  cfg.grid = 48;
  CHECK(cmd_region_plot(cfg) == kExitOk);
  CHECK(fs::exists(dir / "figure1.csv"));
  CHECK(fs::exists(dir / "figure1.svg"));
  CHECK(fs::exists(dir / "figure2.csv"));
  CHECK(fs::exists(dir / "figure2.svg"));
  CHECK(fs::exists(dir / "manifest.json"));

  // identical configuration produces byte-identical numeric outputs
  const std::string first = slurp(dir / "figure2.csv");
  const fs::path dir2 = temp_dir("plot2");
  cfg.out_dir = dir2.string();
  CHECK(cmd_region_plot(cfg) == kExitOk);
  CHECK(slurp(dir2 / "figure2.csv") == first);
}

TEST_CASE("region-plot with zero tolerance exercises the regression failure path") {
  const fs::path dir = temp_dir("plotfail");
  RunConfig cfg;
  cfg.command = "region-plot";
  cfg.out_dir = dir.string();
  cfg.grid = 32;
  cfg.tol = 0.0;
  CHECK(cmd_region_plot(cfg) == kExitRegression);
}

TEST_CASE("solve command produces artifacts on the unit sphere") {
  const fs::path dir = temp_dir("solve");
  write_text_file((dir / "sphere.cfg").string(),
                  "family = revolution\nprofile = sphere\nradius = 1\n");
  RunConfig cfg;
  cfg.command = "solve";
  cfg.surface_path = (dir / "sphere.cfg").string();
  cfg.c = 1.0;
  cfg.out_dir = (dir / "out").string();
  cfg.grid = 32;
  CHECK(cmd_solve(cfg) == kExitOk);
  CHECK(fs::exists(dir / "out" / "solution.json"));
  CHECK(fs::exists(dir / "out" / "solution.csv"));
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  const std::string report = slurp(dir / "out" / "solution.json");
  CHECK(report.find("index_certificate") != std::string::npos);
  CHECK(report.find("\"unstable\": true") != std::string::npos);
}

TEST_CASE("solve command reports the lift obstruction below the threshold") {
  const fs::path dir = temp_dir("solvefail");
  write_text_file((dir / "torus.cfg").string(),
                  "family = flat_torus\nv1 = 2 0\nv2 = 0 2\n");
  RunConfig cfg;
  cfg.command = "solve";
  cfg.surface_path = (dir / "torus.cfg").string();
  cfg.c = 0.9;
  cfg.out_dir = (dir / "out").string();
  CHECK(cmd_solve(cfg) == kExitNumerical);
  CHECK(slurp(dir / "out" / "error.json").find("NotEmbeddable") != std::string::npos);
}

TEST_CASE("solve command rejects a missing surface file") {
  RunConfig cfg;
  cfg.command = "solve";
  cfg.surface_path = "/nonexistent/surface.cfg";
  cfg.out_dir = temp_dir("solvecfg").string();
  CHECK(cmd_solve(cfg) == kExitConfig);
}

TEST_CASE("verify command passes on a clean build") {
  RunConfig cfg;
  cfg.command = "verify";
  cfg.seed = 20240817;
  CHECK(cmd_verify(cfg) == kExitOk);
}

TEST_CASE("cli argument parsing dispatches subcommands") {
  const fs::path dir = temp_dir("cliargs");
  const std::string out = dir.string();
  const char* argv[] = {"isocurve", "region-plot", "--out", out.c_str(), "--grid", "24"};
  CHECK(run_cli(6, argv) == kExitOk);
  CHECK(fs::exists(dir / "figure1.csv"));
  const char* bad[] = {"isocurve", "unknown-command"};
  CHECK(run_cli(2, bad) == kExitConfig);
}

TEST_CASE("csv and svg writers produce well-formed output") {
  const fs::path dir = temp_dir("io");
  CsvSeries series;
  series.header = {"a", "b"};
  series.rows = {{1.5, 2.5}, {3.0, std::nan("")}};
  write_csv((dir / "t.csv").string(), series);
  CHECK(slurp(dir / "t.csv") == "a,b\n1.5,2.5\n3,\n");

  PlotSeries ps;
  ps.points = {Vec2(0, 0), Vec2(1, 1), Vec2(2, 0.5)};
  write_svg_plot((dir / "t.svg").string(), {ps});
  const std::string svg = slurp(dir / "t.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("sweepout exports include the functional profile") {
  auto t = std::make_shared<FlatTorus>(Vec2(1, 0), Vec2(0, 1));
  std::vector<Region> slices;
  for (int k = 1; k <= 4; ++k) {
    Region reg;
    std::vector<Vec2> pts(64);
    for (int i = 0; i < 64; ++i) {
      const double a = 2 * kPi * i / 64;
      pts[i] = Vec2(0.5, 0.5) + 0.1 * k * Vec2(std::cos(a), std::sin(a));
    }
    reg.boundary = {DiscreteCurve::loop(t, pts)};
    reg.witness = Vec2(0.5, 0.5);
    slices.push_back(std::move(reg));
  }
  const Sweepout sw = Sweepout::of_regions(std::move(slices));
  const fs::path dir = temp_dir("sweep");
  write_sweepout_json((dir / "sweep.json").string(), sw, 1.0);
  write_ac_profile_csv((dir / "profile.csv").string(), sw, 1.0);
  write_sweepout_svg((dir / "film.svg").string(), sw);
  CHECK(slurp(dir / "sweep.json").find("\"slices\"") != std::string::npos);
  const std::string profile = slurp(dir / "profile.csv");
  CHECK(profile.substr(0, 5) == "t,ac\n");
  CHECK(std::count(profile.begin(), profile.end(), '\n') == 5);
  CHECK(slurp(dir / "film.svg").find("polyline") != std::string::npos);
}
