#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "isocurve/curve.hpp"

using namespace isocurve;

namespace {

std::shared_ptr<FlatTorus> big_torus() {
  return std::make_shared<FlatTorus>(Vec2(4, 0), Vec2(0, 4));
}

std::shared_ptr<SurfaceOfRevolution> unit_sphere() {
  return std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
}

DiscreteCurve flat_circle(SurfacePtr s, const Vec2& center, double radius, int n,
                          bool ccw = true) {
  std::vector<Vec2> pts(n);
  for (int i = 0; i < n; ++i) {
    const double a = 2 * kPi * i / n * (ccw ? 1.0 : -1.0);
    pts[i] = center + radius * Vec2(std::cos(a), std::sin(a));
  }
  return DiscreteCurve::loop(std::move(s), std::move(pts));
}

DiscreteCurve sphere_latitude(SurfacePtr s, double rho, int n, bool increasing_theta = true) {
  std::vector<Vec2> pts(n);
  for (int i = 0; i < n; ++i) {
    const double th = 2 * kPi * i / n * (increasing_theta ? 1.0 : -1.0);
    pts[i] = Vec2(rho, th);
  }
  return DiscreteCurve::loop(std::move(s), std::move(pts));
}

Region disk_region(const DiscreteCurve& boundary, const Vec2& witness) {
  Region r;
  r.boundary = {boundary};
  r.witness = witness;
  return r;
}

}  // namespace

TEST_CASE("circle length converges at second order") {
  auto t = big_torus();
  const DiscreteCurve c = flat_circle(t, Vec2(2, 2), 1.0, 256);
  // midpoint-chord rule: documented second-order error, relative 1e-4 here
  CHECK(std::abs(c.length() - 2 * kPi) / (2 * kPi) < 1e-4);
  CHECK(std::abs(c.length() - 2 * kPi) < 2e-4);
  const DiscreteCurve fine = flat_circle(t, Vec2(2, 2), 1.0, 1024);
  CHECK(std::abs(fine.length() - 2 * kPi) < 1e-5);
}

TEST_CASE("point-collapsed curve has zero length") {
  auto t = big_torus();
  std::vector<Vec2> pts(16, Vec2(1, 1));
  const DiscreteCurve c = DiscreteCurve::loop(t, pts);
  CHECK(c.length() == 0.0);
}

TEST_CASE("sphere latitude length matches the closed form") {
  auto s = unit_sphere();
  const double rho = kPi / 4;
  const DiscreteCurve lat = sphere_latitude(s, rho, 512);
  CHECK(lat.length() == doctest::Approx(2 * kPi * std::sin(rho)).epsilon(1e-4));
}

TEST_CASE("disk area in the flat chart") {
  auto t = big_torus();
  const DiscreteCurve c = flat_circle(t, Vec2(2, 2), 1.0, 1024);
  const Region disk = disk_region(c, Vec2(2, 2));
  CHECK(area(disk) == doctest::Approx(kPi).epsilon(1e-4));
}

TEST_CASE("complement region: torus minus a small disk") {
  auto t = std::make_shared<FlatTorus>(Vec2(1, 0), Vec2(0, 1));
  const double eps = 0.05;
  const DiscreteCurve c = flat_circle(t, Vec2(0.5, 0.5), eps, 256);
  const Region outside = disk_region(c, Vec2(0.01, 0.01));
  CHECK(area(outside) == doctest::Approx(1.0 - kPi * eps * eps).epsilon(1e-4));
}

TEST_CASE("spherical cap area matches the closed form") {
  auto s = unit_sphere();
  for (double rho : {0.6, kPi / 4, 1.9}) {
    const DiscreteCurve lat = sphere_latitude(s, rho, 256);
    const Region cap = disk_region(lat, Vec2(rho / 2, 0.1));
    CHECK(area(cap) == doctest::Approx(2 * kPi * (1 - std::cos(rho))).epsilon(1e-4));
  }
}

TEST_CASE("functional values: disk, empty region, spherical cap") {
  auto t = big_torus();
  const DiscreteCurve c = flat_circle(t, Vec2(2, 2), 1.0, 1024);
  const Region disk = disk_region(c, Vec2(2, 2));
  CHECK(ac_functional(disk, 1.0) == doctest::Approx(kPi).epsilon(1e-3));

  CHECK(ac_functional(Region::empty(t), 2.0) == 0.0);

  auto s = unit_sphere();
  const double rho = 0.8, cc = 1.3;
  const DiscreteCurve lat = sphere_latitude(s, rho, 512);
  const Region cap = disk_region(lat, Vec2(rho / 2, 0.0));
  const double expected = 2 * kPi * std::sin(rho) - cc * 2 * kPi * (1 - std::cos(rho));
  CHECK(ac_functional(cap, cc) == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("geodesic curvature of circles, lines, and latitudes") {
  auto t = big_torus();
  const DiscreteCurve c2 = flat_circle(t, Vec2(2, 2), 2.0, 512);
  const Region disk = disk_region(c2, Vec2(2, 2));
  for (double k : geodesic_curvature(c2, &disk)) {
    CHECK(k == doctest::Approx(0.5).epsilon(1e-4));
  }

  // closed straight loop winding the torus is a geodesic
  std::vector<Vec2> line(64);
  for (int i = 0; i < 64; ++i) line[i] = Vec2(4.0 * i / 64, 1.0);
  const DiscreteCurve straight = DiscreteCurve::loop(t, line);
  for (double k : geodesic_curvature(straight, nullptr)) {
    CHECK(std::abs(k) < 1e-6);
  }

  auto s = unit_sphere();
  for (double rho : {0.7, 1.2}) {
    const DiscreteCurve lat = sphere_latitude(s, rho, 512);
    const Region cap = disk_region(lat, Vec2(rho / 2, 0.0));
    const auto ks = geodesic_curvature(lat, &cap);
    for (int i = 0; i < lat.size(); i += 37) {
      CHECK(ks[i] == doctest::Approx(1.0 / std::tan(rho)).epsilon(1e-4));
    }
  }
}

TEST_CASE("geodesic curvature sign flips with the side selector") {
  auto t = big_torus();
  const DiscreteCurve c = flat_circle(t, Vec2(2, 2), 1.0, 128);
  const Region inside = disk_region(c, Vec2(2, 2));
  const Region outside = disk_region(c, Vec2(0.1, 0.1));
  const auto ki = geodesic_curvature(c, &inside);
  const auto ko = geodesic_curvature(c, &outside);
  for (int i = 0; i < c.size(); ++i) {
    CHECK(ki[i] == doctest::Approx(-ko[i]).epsilon(1e-12));
  }
}

TEST_CASE("degenerate stencil raises") {
  auto t = big_torus();
  std::vector<Vec2> pts(8, Vec2(1, 1));
  pts[4] = Vec2(1.5, 1);  // isolated spike between collapsed runs
  const DiscreteCurve c = DiscreteCurve::loop(t, pts);
  CHECK_THROWS_AS(geodesic_curvature(c, nullptr), DegenerateVertex);
}

TEST_CASE("first variation of the functional on circles") {
  auto t = big_torus();
  const double c_param = 1.25;
  const DiscreteCurve crit = flat_circle(t, Vec2(2, 2), 1.0 / c_param, 512);
  const Region disk = disk_region(crit, Vec2(2, 2));
  auto fam = PerturbationFamily::outward(disk, std::vector<double>(crit.size(), 1.0));
  CHECK(std::abs(first_variation(fam, c_param)) < 1e-3);

  const double radius = 1.4;
  const DiscreteCurve off = flat_circle(t, Vec2(2, 2), radius, 512);
  const Region disk2 = disk_region(off, Vec2(2, 2));
  auto fam2 = PerturbationFamily::outward(disk2, std::vector<double>(off.size(), 1.0));
  const double expected = (1.0 / radius - c_param) * 2 * kPi * radius;
  CHECK(first_variation(fam2, c_param) == doctest::Approx(expected).epsilon(1e-3));

  auto fam0 = PerturbationFamily::outward(disk2, std::vector<double>(off.size(), 0.0));
  CHECK(first_variation(fam0, c_param) == 0.0);
}

TEST_CASE("first variation matches a finite difference of length minus c mass") {
  auto t = big_torus();
  const double c_param = 0.8, radius = 1.1;
  const DiscreteCurve base = flat_circle(t, Vec2(2, 2), radius, 256);
  const Region disk = disk_region(base, Vec2(2, 2));
  std::vector<double> phi(base.size());
  for (int i = 0; i < base.size(); ++i) phi[i] = 0.5 + 0.3 * std::sin(4.0 * 2 * kPi * i / base.size());
  const double a0 = area(disk);
  auto value_at = [&](double s) {
    auto fam = PerturbationFamily::outward(disk, phi);
    for (int k = 1; k <= 8; ++k) fam.advance_to(s * k / 8);
    return fam.at(s).length() - c_param * (a0 + fam.swept_signed_area());
  };
  const double h = 1e-5;
  const double fd = (value_at(h) - value_at(-h)) / (2 * h);
  auto fam = PerturbationFamily::outward(disk, phi);
  // the sampled integrand and the exact derivative of the discrete functional
  // agree to the usual second-order resolution error
  CHECK(first_variation(fam, c_param) == doctest::Approx(fd).epsilon(1e-3));
}

TEST_CASE("swept mass accumulator agrees with direct band quadrature") {
  auto t = big_torus();
  const DiscreteCurve base = flat_circle(t, Vec2(2, 2), 1.0, 512);
  const Region disk = disk_region(base, Vec2(2, 2));
  auto fam = PerturbationFamily::outward(disk, std::vector<double>(base.size(), 1.0));
  const double s = 0.05;
  for (int k = 1; k <= 32; ++k) fam.advance_to(s * k / 32);
  // annulus between radii 1 and 1.05 (polygon chords underestimate each disk slightly,
  // but consistently); compare against the difference of enclosed polygon areas
  const Region grown = disk_region(fam.at(s), Vec2(2, 2));
  CHECK(fam.swept_signed_area() == doctest::Approx(area(grown) - area(disk)).epsilon(1e-8));
}

TEST_CASE("second variation: no-node discrete form matches a centered finite difference") {
  auto t = big_torus();
  const double c_param = 1.0;
  const DiscreteCurve crit = flat_circle(t, Vec2(2, 2), 1.0 / c_param, 512);
  const Region disk = disk_region(crit, Vec2(2, 2));
  const double a0 = area(disk);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> phi(crit.size());
    const double a1 = amp(rng), b1 = amp(rng), a2 = amp(rng);
    for (int i = 0; i < crit.size(); ++i) {
      const double th = 2 * kPi * i / crit.size();
      phi[i] = a1 * std::cos(2 * th) + b1 * std::sin(3 * th) + a2 * std::cos(5 * th);
    }
    auto value_at = [&](double s) {
      auto fam = PerturbationFamily::outward(disk, phi);
      for (int k = 1; k <= 4; ++k) fam.advance_to(s * k / 4);
      return fam.at(s).length() - c_param * (a0 + fam.swept_signed_area());
    };
    const double h = 1e-4;
    const double fd = (value_at(h) - 2 * value_at(0) + value_at(-h)) / (h * h);
    const double q = second_variation(crit, std::nullopt, TestFunction{phi}, c_param);
    CHECK(q == doctest::Approx(fd).epsilon(1e-3));
  }
}

TEST_CASE("second variation is a symmetric quadratic form (polarization)") {
  auto t = big_torus();
  const DiscreteCurve c = flat_circle(t, Vec2(2, 2), 0.9, 128);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::vector<double> phi(c.size()), psi(c.size()), sum(c.size()), dif(c.size());
  for (int i = 0; i < c.size(); ++i) {
    phi[i] = amp(rng);
    psi[i] = amp(rng);
    sum[i] = phi[i] + psi[i];
    dif[i] = phi[i] - psi[i];
  }
  const double qp = second_variation(c, std::nullopt, TestFunction{phi}, 1.0);
  const double qq = second_variation(c, std::nullopt, TestFunction{psi}, 1.0);
  const double qs = second_variation(c, std::nullopt, TestFunction{sum}, 1.0);
  const double qd = second_variation(c, std::nullopt, TestFunction{dif}, 1.0);
  CHECK(qs + qd == doctest::Approx(2 * qp + 2 * qq).epsilon(1e-10));
}

TEST_CASE("node corrections reproduce the closed forms") {
  const double c = 1.0;
  for (double alpha : {kPi / 3, kPi / 2, 2 * kPi / 3}) {
    // disconnected-region node with a constant unit test function
    const double got = node_correction(NodeConfiguration::DisconnectedRegion, alpha, 1.0, 1.0, c);
    CHECK(got == doctest::Approx(-4 * c / std::tan(alpha / 2)).epsilon(1e-12));
    // connected-region node with the test function vanishing at the node
    CHECK(node_correction(NodeConfiguration::ConnectedRegion, alpha, 0.0, 0.0, c) == 0.0);
  }
  CHECK_THROWS_AS(node_correction(NodeConfiguration::DisconnectedRegion, kPi, 1.0, 1.0, 1.0),
                  AngleDegenerate);
  CHECK(node_correction(NodeConfiguration::ConnectedRegion, kPi, 0.0, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(node_correction(NodeConfiguration::ConnectedRegion, kPi, 0.7, 0.7, 1.0),
                  AngleDegenerate);
}

TEST_CASE("node detection: embedded circle has none") {
  auto t = big_torus();
  const DiscreteCurve c = flat_circle(t, Vec2(2, 2), 1.0, 128);
  CHECK_FALSE(detect_node(c).has_value());
}

TEST_CASE("node detection: lemniscate crossing at the constructed angle") {
  auto t = big_torus();
  const int n = 2048;
  std::vector<Vec2> pts(n);
  for (int i = 0; i < n; ++i) {
    const double u = 2 * kPi * (i + 0.5) / n;
    const double den = 1 + std::sin(u) * std::sin(u);
    pts[i] = Vec2(2, 2) + 0.8 * Vec2(std::cos(u) / den, std::sin(u) * std::cos(u) / den);
  }
  const DiscreteCurve lem = DiscreteCurve::loop(t, pts);
  const auto node = detect_node(lem);
  REQUIRE(node.has_value());
  CHECK(node->configuration == NodeConfiguration::DisconnectedRegion);
  CHECK(t->short_diff(node->point, Vec2(2, 2)).norm() < 1e-3);
  CHECK(node->alpha == doctest::Approx(kPi / 2).epsilon(1e-3));
}

TEST_CASE("node detection: internally tangent circles give a flat connected-region node") {
  auto t = big_torus();
  const int n1 = 256, n2 = 128;
  std::vector<Vec2> pts;
  const Vec2 touch(2.0, 2.7);
  for (int i = 0; i < n1; ++i) {
    const double a = kPi / 2 + 2 * kPi * i / n1;  // ccw outer, starting at the touch point
    pts.push_back(Vec2(2.0, 2.0) + 0.7 * Vec2(std::cos(a), std::sin(a)));
  }
  for (int i = 0; i < n2; ++i) {
    const double a = kPi / 2 - 2 * kPi * i / n2;  // cw inner, starting at the touch point
    pts.push_back(Vec2(2.0, 2.4) + 0.3 * Vec2(std::cos(a), std::sin(a)));
  }
  pts[0] = touch;
  pts[n1] = touch;
  const DiscreteCurve two = DiscreteCurve::loop(t, pts);
  const auto node = detect_node(two);
  REQUIRE(node.has_value());
  CHECK(node->configuration == NodeConfiguration::ConnectedRegion);
  CHECK(node->alpha == doctest::Approx(kPi).epsilon(1e-6));
}

TEST_CASE("length-energy inequality with equality only at constant speed") {
  auto t = big_torus();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> jitter(-0.4, 0.4);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec2> pts(64);
    for (int i = 0; i < 64; ++i) {
      // random reparametrization of a circle
      const double u = 2 * kPi * (i + jitter(rng)) / 64;
      pts[i] = Vec2(2, 2) + Vec2(std::cos(u), std::sin(u));
    }
    const DiscreteCurve c = DiscreteCurve::loop(t, pts);
    CHECK(c.length() * c.length() <= c.energy() * (1 + 1e-12));
  }
  const DiscreteCurve uniform = flat_circle(t, Vec2(2, 2), 1.0, 64);
  CHECK(uniform.length() * uniform.length() == doctest::Approx(uniform.energy()).epsilon(1e-9));
}

TEST_CASE("discrete gauss-bonnet closure on flat, spherical, and conformal disks") {
  auto check_closure = [](const Region& region, const DiscreteCurve& boundary) {
    const auto s = boundary.surface();
    const double total_k = region_integral(region, [&](const Vec2& p) {
      return s->gauss_curvature_at(p);
    });
    double turning = 0.0;
    const double sign = region_on_left(boundary, region) ? 1.0 : -1.0;
    for (int i = 0; i < boundary.size(); ++i) turning += sign * boundary.turning_angle(i);
    CHECK(total_k + turning == doctest::Approx(2 * kPi).epsilon(1e-3));
  };

  auto t = big_torus();
  const DiscreteCurve circ = flat_circle(t, Vec2(2, 2), 0.8, 256);
  check_closure(disk_region(circ, Vec2(2, 2)), circ);

  // flat polygon with corners
  std::vector<Vec2> sq;
  for (int e = 0; e < 4; ++e) {
    const Vec2 corners[4] = {Vec2(1, 1), Vec2(3, 1), Vec2(3, 3), Vec2(1, 3)};
    for (int i = 0; i < 8; ++i) {
      sq.push_back(corners[e] + (corners[(e + 1) % 4] - corners[e]) * (i / 8.0));
    }
  }
  const DiscreteCurve square = DiscreteCurve::loop(t, sq);
  check_closure(disk_region(square, Vec2(2, 2)), square);

  auto sph = unit_sphere();
  const DiscreteCurve lat = sphere_latitude(sph, 0.9, 256);
  check_closure(disk_region(lat, Vec2(0.45, 0.0)), lat);

  auto conf = std::make_shared<ConformalTorus>(ConformalTorus::from_function(
      Vec2(1, 0), Vec2(0, 1),
      [](double a, double b) { return 0.05 * std::sin(2 * kPi * a) * std::sin(2 * kPi * b); }, 48));
  const DiscreteCurve cc = flat_circle(conf, Vec2(0.5, 0.5), 0.22, 256);
  check_closure(disk_region(cc, Vec2(0.5, 0.5)), cc);
}

TEST_CASE("ambiguous witness raises") {
  auto t = big_torus();
  const DiscreteCurve c = flat_circle(t, Vec2(2, 2), 1.0, 128);
  Region r = disk_region(c, Vec2(3.0, 2.0));  // exactly on the circle
  CHECK_THROWS_AS(area(r), AmbiguousSide);
}

TEST_CASE("multiplicity mass counts the immersed disk fully") {
  // circle of radius 0.8 on the unit torus: the enclosed disk overlaps itself,
  // the covering-multiplicity mass is still pi r^2
  auto t = std::make_shared<FlatTorus>(Vec2(1, 0), Vec2(0, 1));
  const DiscreteCurve c = flat_circle(t, Vec2(0.5, 0.5), 0.8, 512);
  Region r = disk_region(c, Vec2(0.5, 0.5));
  r.mass = Region::Mass::Multiplicity;
  CHECK(area(r) == doctest::Approx(kPi * 0.64).epsilon(1e-4));
}

TEST_CASE("json-free curve round trips through resampling endpoints") {
  auto t = big_torus();
  const DiscreteCurve c = flat_circle(t, Vec2(2, 2), 1.0, 200);
  const DiscreteCurve r = c.resampled_uniform(200);
  CHECK(r.length() == doctest::Approx(c.length()).epsilon(1e-6));
  const DiscreteCurve p = DiscreteCurve::pinned(t, {Vec2(1, 1), Vec2(1.5, 1.2), Vec2(2, 1),
                                                    Vec2(2.5, 0.8), Vec2(3, 1), Vec2(3.1, 1.1),
                                                    Vec2(3.3, 1.0), Vec2(3.5, 1.0)});
  const DiscreteCurve pr = p.resampled_uniform(32);
  CHECK(t->short_diff(pr.vertices().front(), Vec2(1, 1)).norm() < 1e-12);
  CHECK(t->short_diff(pr.vertices().back(), Vec2(3.5, 1.0)).norm() < 1e-12);
}

TEST_CASE("first variation rejects normal fields supported at a node") {
  auto t = big_torus();
  const int n = 1024;
  std::vector<Vec2> pts(n);
  for (int i = 0; i < n; ++i) {
    const double u = 2 * kPi * (i + 0.5) / n;
    const double den = 1 + std::sin(u) * std::sin(u);
    pts[i] = Vec2(2, 2) + 0.8 * Vec2(std::cos(u) / den, std::sin(u) * std::cos(u) / den);
  }
  const DiscreteCurve lem = DiscreteCurve::loop(t, pts);
  Region lobe;
  lobe.boundary = {lem};
  lobe.witness = Vec2(2.5, 2.0);
  auto fam = PerturbationFamily::outward(lobe, std::vector<double>(n, 1.0));
  CHECK_THROWS_AS(first_variation(fam, 1.0), NodeInSupport);
}

TEST_CASE("multiple self-intersections are reported, not resolved") {
  auto t = big_torus();
  // two circles crossing at two points, traversed as one curve
  std::vector<Vec2> pts;
  for (int i = 0; i < 128; ++i) {
    const double a = 2 * kPi * i / 128;
    pts.push_back(Vec2(1.7, 2.0) + 0.5 * Vec2(std::cos(a), std::sin(a)));
  }
  for (int i = 0; i < 128; ++i) {
    const double a = 2 * kPi * i / 128;
    pts.push_back(Vec2(2.3, 2.0) + 0.5 * Vec2(std::cos(a), std::sin(a)));
  }
  const DiscreteCurve two = DiscreteCurve::loop(t, pts);
  CHECK(detect_nodes(two).size() >= 2);
  CHECK_THROWS_AS(detect_node(two), MultipleNodes);
}
