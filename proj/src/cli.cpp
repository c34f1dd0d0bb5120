#include "isocurve/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "isocurve/io.hpp"

namespace isocurve {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_manifest(const RunConfig& cfg, json extra) {
  json j;
  j["tool"] = "isocurve";
  j["version"] = "0.1.0";
  j["command"] = cfg.command;
  j["surface"] = cfg.surface_path;
  j["c"] = cfg.c;
  j["grid"] = cfg.grid;
  j["tol"] = cfg.tol;
  j["seed"] = cfg.seed;
  j["format"] = cfg.format;
  j["outputs"] = std::move(extra);
  write_text_file((fs::path(cfg.out_dir) / "manifest.json").string(), j.dump(2));
}

void write_error(const RunConfig& cfg, const std::string& kind, const std::string& what) {
  json j;
  j["error"] = kind;
  j["detail"] = what;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (!ec) write_text_file((fs::path(cfg.out_dir) / "error.json").string(), j.dump(2));
  std::cerr << "error (" << kind << "): " << what << "\n";
}

Region default_seed(const SurfacePtr& surface, double c) {
  const Surface& s = *surface;
  if (const auto* torus = dynamic_cast<const FlatTorus*>(surface.get())) {
    const Vec2 center = s.wrap(0.5 * (torus->basis1() + torus->basis2()));
    const double radius =
        std::min(0.8 / c, 0.8 * s.stats().injectivity_radius);
    std::vector<Vec2> pts(96);
    for (int i = 0; i < 96; ++i) {
      const double a = 2 * kPi * i / 96;
      pts[i] = center + radius * Vec2(std::cos(a), std::sin(a));
    }
    Region seed;
    seed.boundary = {DiscreteCurve::loop(surface, pts)};
    seed.witness = center;
    return seed;
  }
  if (const auto* rev = dynamic_cast<const SurfaceOfRevolution*>(surface.get())) {
    const double rho = std::min(0.6, rev->profile().extent / 3.0);
    std::vector<Vec2> pts(96);
    for (int i = 0; i < 96; ++i) pts[i] = Vec2(rho, 2 * kPi * i / 96);
    Region seed;
    seed.boundary = {DiscreteCurve::loop(surface, pts)};
    seed.witness = Vec2(rho / 2, 0.0);
    return seed;
  }
  // conformal torus: disk at the cell center
  const auto* conf = dynamic_cast<const ConformalTorus*>(surface.get());
  const Vec2 center = s.wrap(0.5 * (conf->basis1() + conf->basis2()));
  const double radius = std::min(0.8 / c, 0.8 * s.stats().injectivity_radius);
  std::vector<Vec2> pts(96);
  for (int i = 0; i < 96; ++i) {
    const double a = 2 * kPi * i / 96;
    pts[i] = center + radius * Vec2(std::cos(a), std::sin(a));
  }
  Region seed;
  seed.boundary = {DiscreteCurve::loop(surface, pts)};
  seed.witness = center;
  return seed;
}

bool has_format(const RunConfig& cfg, const std::string& f) {
  return cfg.format.find(f) != std::string::npos;
}

}  // namespace

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

int cmd_solve(const RunConfig& cfg) {
  SurfacePtr surface;
  try {
    if (cfg.surface_path.empty()) throw ConfigError("solve requires --surface");
    if (cfg.c <= 0) throw ConfigError("solve requires --c > 0");
    surface = load_surface_config(cfg.surface_path);
    fs::create_directories(cfg.out_dir);
  } catch (const std::exception& e) {
    write_error(cfg, "config", e.what());
    return kExitConfig;
  }

  try {
    if (const auto* torus = dynamic_cast<const FlatTorus*>(surface.get())) {
      if (embedded_lift_check(*torus, cfg.c) == LiftVerdict::NotEmbeddable) {
        write_error(cfg, "NotEmbeddable",
                    "the lifted circle of radius 1/c meets a lattice translate: c <= 1/inj");
        return kExitNumerical;
      }
    }
    FlowConfig flow;
    flow.resolution = std::max(64, cfg.grid * 4);
    flow.residual = cfg.tol > 0 ? cfg.tol : 1e-6;
    const Region seed = default_seed(surface, cfg.c);
    const Region sol = solve_prescribed_curvature(surface, cfg.c, seed, flow);
    const DiscreteCurve& curve = sol.boundary.front();

    double max_residual = 0.0;
    for (double k : geodesic_curvature(curve, &sol)) {
      max_residual = std::max(max_residual, std::abs(k - cfg.c));
    }
    const double ac = ac_functional(sol, cfg.c);
    const double q_const =
        second_variation(curve, std::nullopt, TestFunction::constant(curve.size(), 1.0), cfg.c);
    const SurfaceStats& st = surface->stats();
    const bool instability_applicable = st.min_curvature + cfg.c * cfg.c > 0;

    json report;
    report["c"] = cfg.c;
    report["ac"] = ac;
    report["length"] = curve.length();
    report["area"] = area(sol);
    report["max_curvature_residual"] = max_residual;
    report["index_certificate"] = {
        {"second_variation_constant_direction", q_const},
        {"unstable", q_const < 0.0},
        {"applicable", instability_applicable},
    };
    report["curve"] = json::parse(curve_to_json(curve));
    json outputs = json::array();
    if (has_format(cfg, "json")) {
      write_text_file((fs::path(cfg.out_dir) / "solution.json").string(), report.dump(2));
      outputs.push_back("solution.json");
    }
    if (has_format(cfg, "csv")) {
      write_curve_csv((fs::path(cfg.out_dir) / "solution.csv").string(), curve);
      outputs.push_back("solution.csv");
    }
    write_manifest(cfg, outputs);
    std::cout << "solve: length " << format_double(curve.length()) << ", ac " << format_double(ac)
              << ", residual " << format_double(max_residual) << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    write_error(cfg, "config", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    write_error(cfg, "numerical", e.what());
    return kExitNumerical;
  }
}

// ---------------------------------------------------------------------------
// region-plot
// ---------------------------------------------------------------------------

namespace {

struct Regression {
  std::string name;
  double expected, got, tol;
  bool pass() const { return std::abs(got - expected) <= tol; }
};

}  // namespace

int cmd_region_plot(const RunConfig& cfg) {
  try {
    fs::create_directories(cfg.out_dir);
    const double tol_scale = cfg.tol >= 0 ? cfg.tol : 1.0;

    const RegionBoundaryTrace trace = figure1_region(std::max(cfg.grid, 16));
    const ThresholdCurves curves = figure2_curves(0.05, 10.0, std::max(cfg.grid * 4, 64));

    // figure1.csv: columns (minK, c_upper, c_lower); the lower branch only
    // exists between the axis intercept and the corner
    CsvSeries f1;
    f1.header = {"minK", "c_upper", "c_lower"};
    auto lower_c_at = [&](double m) -> double {
      const auto& lower = trace.lower;
      double best = std::nan("");
      for (size_t i = 1; i < lower.size(); ++i) {
        const double m0 = lower[i - 1].x(), m1 = lower[i].x();
        if ((m >= std::min(m0, m1)) && (m <= std::max(m0, m1)) && m1 != m0) {
          const double t = (m - m0) / (m1 - m0);
          best = lower[i - 1].y() + t * (lower[i].y() - lower[i - 1].y());
        }
      }
      return best;
    };
    for (int i = 1; i <= cfg.grid; ++i) {
      const double m = trace.corner.x() * i / cfg.grid;
      const double cu = std::sqrt(m) / std::tan(kPi * std::sqrt(m));
      f1.rows.push_back({m, cu, lower_c_at(m)});
    }
    if (has_format(cfg, "csv")) {
      write_csv((fs::path(cfg.out_dir) / "figure1.csv").string(), f1);
    }
    if (has_format(cfg, "svg")) {
      PlotSeries upper{trace.upper, "#1f6fb2"};
      PlotSeries lower{trace.lower, "#1f6fb2"};
      write_svg_plot((fs::path(cfg.out_dir) / "figure1.svg").string(), {upper, lower});
    }

    CsvSeries f2;
    f2.header = {"inj", "c_blue", "c_red"};
    for (size_t i = 0; i < curves.ours.size(); ++i) {
      f2.rows.push_back({curves.ours[i].x(), curves.ours[i].y(), curves.comparison[i].y()});
    }
    if (has_format(cfg, "csv")) {
      write_csv((fs::path(cfg.out_dir) / "figure2.csv").string(), f2);
    }
    if (has_format(cfg, "svg")) {
      PlotSeries blue{curves.ours, "#1f6fb2"};
      PlotSeries red{curves.comparison, "#b23a1f"};
      write_svg_plot((fs::path(cfg.out_dir) / "figure2.svg").string(), {blue, red});
    }

    // golden-coordinate regression
    std::vector<Regression> checks;
    auto add = [&](const std::string& name, double expected, double got, double tol) {
      checks.push_back({name, expected, got, tol * tol_scale});
    };
    add("figure2 blue at inj=0.20273", 5.0, figure2_ours(0.20273), 5e-3);
    add("figure2 blue at inj=1", 1.3130, figure2_ours(1.0), 5e-3);
    add("figure2 blue at inj=2", 1.0373, figure2_ours(2.0), 5e-3);
    add("figure2 blue at inj=5", 1.0001, figure2_ours(5.0), 5e-3);
    add("figure2 red at inj=0.88282", 2.0, figure2_comparison(0.88282), 5e-3);
    add("figure2 red at inj=2", 1.2854, figure2_comparison(2.0), 5e-3);
    add("figure2 red at inj=5", 1.56416, figure2_comparison(5.0), 5e-3);
    add("figure2 red at inj=10", 2.65708, figure2_comparison(10.0), 5e-3);
    auto upper_branch = [](double m) { return std::sqrt(m) / std::tan(kPi * std::sqrt(m)); };
    add("figure1 upper at m=0.025", 0.291689, upper_branch(0.025), 2e-3);
    add("figure1 upper at m=0.05", 0.264142, upper_branch(0.05), 2e-3);
    add("figure1 upper at m=0.075", 0.235599, upper_branch(0.075), 1e-3);
    add("figure1 upper at m=0.1", 0.205981, upper_branch(0.1), 2e-3);
    auto lower_m_at_c = [&](double c_target) {
      double best_m = std::nan(""), best_gap = 1e300;
      for (const Vec2& p : trace.lower) {
        if (std::abs(p.y() - c_target) < best_gap) {
          best_gap = std::abs(p.y() - c_target);
          best_m = p.x();
        }
      }
      return best_m;
    };
    add("figure1 lower at c=0.0875", 0.1026, lower_m_at_c(0.0875), 3e-3);
    add("figure1 lower at c=0.05", 0.0893, lower_m_at_c(0.05), 3e-3);
    add("figure1 corner m", 0.1167, trace.corner.x(), 2e-3);
    add("figure1 corner c", 0.1856, trace.corner.y(), 2e-3);
    add("figure1 lower intercept", 1.0 / 16.0, trace.lower_c_intercept_m, 1e-4);

    bool all_pass = true;
    for (const auto& ch : checks) {
      const bool ok = ch.pass();
      all_pass = all_pass && ok;
      std::cout << (ok ? "[ok]   " : "[FAIL] ") << ch.name << ": got " << format_double(ch.got)
                << ", expected " << format_double(ch.expected) << " +/- "
                << format_double(ch.tol) << "\n";
    }
    json outputs = json::array({"figure1.csv", "figure1.svg", "figure2.csv", "figure2.svg"});
    write_manifest(cfg, outputs);
    if (!all_pass) {
      std::cerr << "regression failed against the golden coordinates\n";
      return kExitRegression;
    }
    std::cout << "region-plot: all golden coordinates matched\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    write_error(cfg, "config", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    write_error(cfg, "numerical", e.what());
    return kExitNumerical;
  }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

namespace {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

DiscreteCurve make_sawtooth(SurfacePtr s, const Vec2& p, const Vec2& q, int teeth, double amp,
                            int n) {
  std::vector<Vec2> pts(n);
  const Vec2 dir = q - p;
  const Vec2 normal = Vec2(-dir.y(), dir.x()).normalized();
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    const double phase = t * teeth;
    const double tri = 2.0 * std::abs(phase - std::floor(phase) - 0.5);
    pts[i] = p + t * dir + amp * (1.0 - tri) * normal;
  }
  pts.front() = p;
  pts.back() = q;
  return DiscreteCurve::pinned(std::move(s), std::move(pts));
}

}  // namespace

int cmd_verify(const RunConfig& cfg) {
  std::vector<CheckResult> results;
  auto run_check = [&](const std::string& name, auto&& fn) {
    CheckResult r;
    r.name = name;
    try {
      r.pass = fn(r.detail);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = e.what();
    }
    results.push_back(std::move(r));
  };

  run_check("inverse pair identity (100 seeded samples)", [&](std::string& detail) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> cdist(0.05, 5.0);
    std::uniform_real_distribution<double> kdist(-1.0, 4.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double c = cdist(rng);
      double k = (i % 10 == 0) ? 0.0 : kdist(rng) * c * c;
      if (k <= -c * c) k = -0.99 * c * c;
      worst = std::max(worst, std::abs(generalized_cot(k, model_circle_radius(c, k)) - c));
    }
    detail = "max deviation " + format_double(worst);
    return worst < 1e-10;
  });

  run_check("generalized cot continuity at k=0", [&](std::string& detail) {
    double worst = 0.0;
    for (double r = 0.1; r <= 10.0; r += 0.1) {
      worst = std::max(worst, std::abs(generalized_cot(1e-8, r) - 1.0 / r));
      worst = std::max(worst, std::abs(generalized_cot(-1e-8, r) - 1.0 / r));
    }
    detail = "max deviation " + format_double(worst);
    return worst < 1e-6;
  });

  run_check("generalized cot monotone in r and k", [&](std::string&) {
    for (double k : {-1.5, 0.0, 1.5}) {
      double prev = generalized_cot(k, 0.05);
      for (double r = 0.1; r < 1.8; r += 0.05) {
        if (k > 0 && r * std::sqrt(k) >= kPi) break;
        const double v = generalized_cot(k, r);
        if (v >= prev) return false;
        prev = v;
      }
    }
    for (double r : {0.4, 1.1}) {
      double prev = generalized_cot(-2.0, r);
      for (double k = -1.9; k < 1.5; k += 0.1) {
        if (k > 0 && r * std::sqrt(k) >= kPi) break;
        const double v = generalized_cot(k, r);
        if (v >= prev) return false;
        prev = v;
      }
    }
    return true;
  });

  run_check("curvature sign flips with the region side", [&](std::string&) {
    auto t = std::make_shared<FlatTorus>(Vec2(4, 0), Vec2(0, 4));
    std::vector<Vec2> pts(128);
    for (int i = 0; i < 128; ++i) {
      const double a = 2 * kPi * i / 128;
      pts[i] = Vec2(2, 2) + Vec2(std::cos(a), std::sin(a));
    }
    const DiscreteCurve c = DiscreteCurve::loop(t, pts);
    Region inside, outside;
    inside.boundary = {c};
    inside.witness = Vec2(2, 2);
    outside.boundary = {c};
    outside.witness = Vec2(0.2, 0.2);
    const auto ki = geodesic_curvature(c, &inside);
    const auto ko = geodesic_curvature(c, &outside);
    for (int i = 0; i < c.size(); ++i) {
      if (std::abs(ki[i] + ko[i]) > 1e-12) return false;
    }
    return true;
  });

  run_check("negative control: injected sign flip is detected", [&](std::string& detail) {
    auto t = std::make_shared<FlatTorus>(Vec2(4, 0), Vec2(0, 4));
    std::vector<Vec2> pts(128);
    for (int i = 0; i < 128; ++i) {
      const double a = 2 * kPi * i / 128;
      pts[i] = Vec2(2, 2) + Vec2(std::cos(a), std::sin(a));
    }
    const DiscreteCurve c = DiscreteCurve::loop(t, pts);
    Region inside;
    inside.boundary = {c};
    inside.witness = Vec2(2, 2);
    auto sign_invariant_holds = [&](const std::vector<double>& ks) {
      for (double k : ks) {
        if (k < 0) return false;  // toward-the-disk curvature must be positive
      }
      return true;
    };
    std::vector<double> good = geodesic_curvature(c, &inside);
    std::vector<double> corrupted = good;
    for (double& k : corrupted) k = -k;  // deliberate orientation-flip bug
    const bool detected = sign_invariant_holds(good) && !sign_invariant_holds(corrupted);
    detail = detected ? "corrupted field rejected" : "corrupted field was not rejected";
    return detected;
  });

  run_check("shortening map monotone over 50 random sawtooths", [&](std::string& detail) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> amp(0.02, 0.15);
    std::uniform_int_distribution<int> teeth(2, 8);
    auto flat = std::make_shared<FlatTorus>(Vec2(4, 0), Vec2(0, 4));
    auto sphere = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
    BirkhoffConfig bc;
    bc.breaks = 10;
    int violations = 0;
    for (int i = 0; i < 50; ++i) {
      const bool on_sphere = i % 3 == 2;
      DiscreteCurve saw =
          on_sphere
              ? make_sawtooth(sphere, Vec2(kPi / 2 - 0.2, 0.3), Vec2(kPi / 2 + 0.25, 1.0),
                              teeth(rng), amp(rng), 65)
              : make_sawtooth(flat, Vec2(0.5, 0.8), Vec2(1.6, 1.3), teeth(rng), amp(rng), 65);
      const DiscreteCurve out = birkhoff_map(saw, bc);
      if (out.length() > saw.length() + 1e-10) ++violations;
    }
    detail = std::to_string(violations) + " violations";
    return violations == 0;
  });

  run_check("discrete gauss-bonnet closure", [&](std::string& detail) {
    auto t = std::make_shared<FlatTorus>(Vec2(4, 0), Vec2(0, 4));
    std::vector<Vec2> pts(256);
    for (int i = 0; i < 256; ++i) {
      const double a = 2 * kPi * i / 256;
      pts[i] = Vec2(2, 2) + Vec2(0.9 * std::cos(a), 0.6 * std::sin(a));
    }
    const DiscreteCurve c = DiscreteCurve::loop(t, pts);
    Region r;
    r.boundary = {c};
    r.witness = Vec2(2, 2);
    double turning = 0.0;
    for (int i = 0; i < c.size(); ++i) turning += c.turning_angle(i);
    const double gap = std::abs(turning - 2 * kPi);
    detail = "closure gap " + format_double(gap);
    return gap < 1e-3;
  });

  run_check("length squared bounded by parameter energy", [&](std::string&) {
    std::mt19937_64 rng(cfg.seed + 1);
    std::uniform_real_distribution<double> jitter(-0.4, 0.4);
    auto t = std::make_shared<FlatTorus>(Vec2(4, 0), Vec2(0, 4));
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Vec2> pts(48);
      for (int i = 0; i < 48; ++i) {
        const double u = 2 * kPi * (i + jitter(rng)) / 48;
        pts[i] = Vec2(2, 2) + Vec2(std::cos(u), std::sin(u));
      }
      const DiscreteCurve c = DiscreteCurve::loop(t, pts);
      if (c.length() * c.length() > c.energy() * (1 + 1e-12)) return false;
    }
    return true;
  });

  run_check("figure traces are deterministic", [&](std::string&) {
    const RegionBoundaryTrace a = figure1_region(32);
    const RegionBoundaryTrace b = figure1_region(32);
    if (a.corner != b.corner) return false;
    for (size_t i = 0; i < a.upper.size(); ++i) {
      if (a.upper[i] != b.upper[i]) return false;
    }
    for (size_t i = 0; i < a.lower.size(); ++i) {
      if (a.lower[i] != b.lower[i]) return false;
    }
    return true;
  });

  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    std::cout << (r.pass ? "[ok]   " : "[FAIL] ") << r.name;
    if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
    std::cout << "\n";
  }
  std::cout << (all ? "verify: all checks passed\n" : "verify: some checks failed\n");
  return all ? kExitOk : kExitNumerical;
}

// ---------------------------------------------------------------------------
// argument parsing
// ---------------------------------------------------------------------------

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"isocurve: constant geodesic curvature curves, widths, and criteria"};
  app.require_subcommand(1);

  RunConfig cfg;
  if (const char* env_out = std::getenv("ISOCURVE_OUT")) cfg.out_dir = env_out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--surface", cfg.surface_path, "surface config file");
    sub->add_option("--c", cfg.c, "prescribed curvature");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--grid", cfg.grid, "grid resolution");
    sub->add_option("--tol", cfg.tol, "tolerance override");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--format", cfg.format, "output formats (csv,json,svg)");
  };
  CLI::App* solve = app.add_subcommand("solve", "solve for a constant-curvature curve");
  add_common(solve);
  CLI::App* plot = app.add_subcommand("region-plot", "emit threshold figures with regression");
  add_common(plot);
  CLI::App* verify = app.add_subcommand("verify", "run the invariant suite");
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (solve->parsed()) {
    cfg.command = "solve";
    return cmd_solve(cfg);
  }
  if (plot->parsed()) {
    cfg.command = "region-plot";
    return cmd_region_plot(cfg);
  }
  cfg.command = "verify";
  return cmd_verify(cfg);
}

}  // namespace isocurve
