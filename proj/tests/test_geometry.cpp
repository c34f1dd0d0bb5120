#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "isocurve/criteria.hpp"
#include "isocurve/geometry.hpp"

using namespace isocurve;

namespace {

std::shared_ptr<FlatTorus> unit_torus() {
  return std::make_shared<FlatTorus>(Vec2(1, 0), Vec2(0, 1));
}

std::shared_ptr<ConformalTorus> bumpy_torus(int n = 64) {
  return std::make_shared<ConformalTorus>(ConformalTorus::from_function(
      Vec2(1, 0), Vec2(0, 1),
      [](double a, double b) {
        return 0.08 * std::sin(2 * kPi * a) * std::cos(2 * kPi * b) + 0.05 * std::cos(2 * kPi * b);
      },
      n));
}

}  // namespace

TEST_CASE("flat torus metric is the identity") {
  auto t = unit_torus();
  const Mat2 g = t->metric_at(Vec2(0.37, 0.81));
  CHECK(g.isApprox(Mat2::Identity(), 1e-15));
}

TEST_CASE("sphere metric at the equator is the identity in arclength coordinates") {
  auto s = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  const Mat2 g = s->metric_at(Vec2(kPi / 2, 0.3));
  CHECK(g(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("conformal torus metric is e^{2u} times the identity") {
  auto t = bumpy_torus();
  const Vec2 p(0.31, 0.57);
  const double u = t->log_factor(p);
  const Mat2 g = t->metric_at(p);
  CHECK(g(0, 0) == doctest::Approx(std::exp(2 * u)).epsilon(1e-14));
  CHECK(g(1, 1) == doctest::Approx(std::exp(2 * u)).epsilon(1e-14));
  CHECK(g(0, 1) == 0.0);
}

TEST_CASE("metric is positive definite on all built-in families") {
  auto flat = unit_torus();
  auto sph = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.3));
  auto cap = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::capped_cylinder(7.0));
  auto conf = bumpy_torus();
  auto check_spd = [](const Surface& s, const Vec2& p) {
    const Mat2 g = s.metric_at(p);
    CHECK(g(0, 0) > 0);
    CHECK(g.determinant() > 0);
    CHECK(g(0, 1) == doctest::Approx(g(1, 0)));
  };
  for (int i = 1; i < 12; ++i) {
    const double a = i / 12.0;
    check_spd(*flat, Vec2(a, 1 - a));
    check_spd(*sph, Vec2(a * kPi * 1.3 * 0.98 + 0.01, 2 * kPi * a));
    check_spd(*cap, Vec2(a * cap->profile().extent * 0.98 + 0.01, 2 * kPi * a));
    check_spd(*conf, Vec2(a, a * 0.5));
  }
}

TEST_CASE("gauss curvature closed forms: flat zero, sphere 1/R^2") {
  auto flat = unit_torus();
  CHECK(flat->gauss_curvature_at(Vec2(0.2, 0.9)) == 0.0);
  const double R = 1.7;
  auto sph = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(R));
  CHECK(sph->gauss_curvature_at(Vec2(0.4 * kPi * R, 1.0)) ==
        doctest::Approx(1.0 / (R * R)).epsilon(1e-10));
}

TEST_CASE("revolution curvature matches -f''/f on smooth segments") {
  // torus-of-revolution-like profile, smooth everywhere in the open extent
  SurfaceOfRevolution::Profile p;
  p.f = [](double t) { return 2.0 + 0.3 * std::sin(t); };
  p.df = [](double t) { return 0.3 * std::cos(t); };
  p.ddf = [](double t) { return -0.3 * std::sin(t); };
  p.extent = 5.0;
  auto s = std::make_shared<SurfaceOfRevolution>(std::move(p));
  for (double t = 0.3; t < 4.8; t += 0.37) {
    const double expected = 0.3 * std::sin(t) / (2.0 + 0.3 * std::sin(t));
    CHECK(s->gauss_curvature_at(Vec2(t, 0.0)) == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("conformal curvature matches a finite-difference laplacian of the sampled field") {
  auto t = bumpy_torus();
  const double h = 1.0 / 512.0;
  int checked = 0;
  // cell centers of the 64x64 interpolation grid, so the finite-difference
  // stencil stays inside one polynomial cell
  for (double x : {12.5 / 64, 33.5 / 64, 54.5 / 64}) {
    for (double y : {7.5 / 64, 30.5 / 64, 59.5 / 64}) {
      const Vec2 p(x, y);
      auto u = [&](double dx, double dy) { return t->log_factor(p + Vec2(dx, dy)); };
      // fourth-order five-point laplacian, steps inside one interpolation cell
      const double lap =
          (-u(2 * h, 0) + 16 * u(h, 0) - 30 * u(0, 0) + 16 * u(-h, 0) - u(-2 * h, 0)) /
              (12 * h * h) +
          (-u(0, 2 * h) + 16 * u(0, h) - 30 * u(0, 0) + 16 * u(0, -h) - u(0, -2 * h)) /
              (12 * h * h);
      const double expected = -lap * std::exp(-2 * u(0, 0));
      const double got = t->gauss_curvature_at(p);
      CHECK(got == doctest::Approx(expected).epsilon(1e-6));
      ++checked;
    }
  }
  CHECK(checked == 9);
}

TEST_CASE("flat torus exponential map is translation modulo the lattice") {
  auto t = unit_torus();
  const Vec2 out = t->exp_map({Vec2(0.7, 0.2), Vec2(0.6, 0.45)});
  CHECK(out.x() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(out.y() == doctest::Approx(0.65).epsilon(1e-12));
}

TEST_CASE("sphere geodesic of length pi reaches the antipodal point") {
  auto s = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  // start on the equator, shoot along the equator
  const Vec2 start(kPi / 2, 0.25);
  const Vec2 v(0.0, kPi);  // |v|_g = pi since f = 1 on the equator
  const Vec2 end = s->exp_map({start, v});
  CHECK(end.x() == doctest::Approx(kPi / 2).epsilon(1e-6));
  CHECK(end.y() == doctest::Approx(0.25 + kPi).epsilon(1e-6));
}

TEST_CASE("exponential map semigroup property") {
  auto s = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  const Vec2 base(1.1, 0.4);
  const Vec2 v = 0.9 * Vec2(0.6, 0.8);
  const Vec2 direct = s->exp_map({base, v});
  auto [mid, vel] = s->exp_map_with_velocity({base, 0.4 * v});
  const Vec2 cont = s->exp_map({mid, 0.6 * vel / 0.4});
  CHECK(s->short_diff(direct, cont).norm() == doctest::Approx(0.0).epsilon(1e-8));

  // the conformal factor is only C^1 across interpolation cells, which limits
  // the integrator to ~1e-7 consistency at this scale
  auto conf = bumpy_torus();
  const Vec2 d2 = conf->exp_map({Vec2(0.2, 0.3), Vec2(0.5, 0.1)});
  auto [m2, v2] = conf->exp_map_with_velocity({Vec2(0.2, 0.3), Vec2(0.25, 0.05)});
  const Vec2 c2 = conf->exp_map({m2, v2});
  CHECK(conf->short_diff(d2, c2).norm() < 1e-6);
}

TEST_CASE("geodesic radial distance matches shooting distance") {
  auto conf = bumpy_torus();
  const Vec2 x(0.3, 0.4);
  Vec2 dir(0.8, 0.6);
  dir /= conf->norm(x, dir);
  for (double t : {0.1, 0.2, 0.3}) {
    const Vec2 y = conf->exp_map({x, t * dir});
    CHECK(conf->geodesic_distance(x, y) == doctest::Approx(t).epsilon(1e-5));
  }
}

TEST_CASE("geodesic_between endpoints and length agree with the two-point distance") {
  auto s = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  const Vec2 a(kPi / 2 - 0.2, 0.1), b(kPi / 2 + 0.3, 0.7);
  const auto pts = s->geodesic_between(a, b, 33);
  CHECK(pts.size() == 33);
  CHECK(s->short_diff(pts.front(), a).norm() < 1e-12);
  CHECK(s->short_diff(pts.back(), b).norm() < 1e-12);
  double len = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 d = s->short_diff(pts[i + 1], pts[i]);
    len += s->norm(s->wrap(pts[i] + 0.5 * d), d);
  }
  // chord sampling carries the usual second-order bias
  CHECK(len == doctest::Approx(s->geodesic_distance(a, b)).epsilon(1e-4));
}

TEST_CASE("flat torus stats: injectivity is half the shortest lattice vector") {
  FlatTorus t(Vec2(1.2, 0), Vec2(0.3, 2.9));
  const SurfaceStats st = t.stats();
  CHECK(st.injectivity_radius == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(st.injectivity_certified);
  CHECK(st.min_curvature == 0.0);
  CHECK(st.max_curvature == 0.0);
  CHECK(st.area == doctest::Approx(1.2 * 2.9).epsilon(1e-12));
}

TEST_CASE("capped cylinder stats reproduce the pinched-sphere model") {
  auto s = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::capped_cylinder(7.0));
  const SurfaceStats st = s->stats();
  CHECK(st.injectivity_radius == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(st.min_curvature == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(st.max_curvature == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(st.area == doctest::Approx(4 * kPi + 2 * kPi * 7.0).epsilon(1e-6));
  // one-sided curvature at a junction carries the flag
  const auto sample = s->gauss_curvature_sample(Vec2(kPi / 2, 0.0));
  CHECK(sample.one_sided);
}

TEST_CASE("unit sphere stats") {
  auto s = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  const SurfaceStats st = s->stats();
  CHECK(st.injectivity_radius == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(st.area == doctest::Approx(4 * kPi).epsilon(1e-6));
  CHECK(st.min_curvature == doctest::Approx(1.0));
  CHECK(st.max_curvature == doctest::Approx(1.0));
}

TEST_CASE("conformal torus stats are estimated with sane bounds") {
  auto t = bumpy_torus();
  const SurfaceStats st = t->stats();
  CHECK_FALSE(st.curvature_certified);
  CHECK_FALSE(st.injectivity_certified);
  CHECK(st.min_curvature < 0.0);
  CHECK(st.max_curvature > 0.0);
  CHECK(st.injectivity_radius > 0.25);
  CHECK(st.injectivity_radius < 0.75);
  // area = integral of e^{2u}
  CHECK(st.area > 0.9);
  CHECK(st.area < 1.3);
}

TEST_CASE("out-of-chart axial coordinates are rejected") {
  auto s = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  CHECK_THROWS_AS(s->metric_at(Vec2(-0.1, 0.0)), OutOfChart);
  CHECK_THROWS_AS(s->metric_at(Vec2(kPi + 0.1, 0.0)), OutOfChart);
}

TEST_CASE("lift check: embedded iff c exceeds the reciprocal injectivity radius") {
  FlatTorus square(Vec2(2, 0), Vec2(0, 2));  // inj = 1
  CHECK(embedded_lift_check(square, 1.5) == LiftVerdict::Embeddable);
  CHECK(embedded_lift_check(square, 1.0) == LiftVerdict::NotEmbeddable);
  FlatTorus wide(Vec2(4, 0), Vec2(0, 4));  // inj = 2
  CHECK(embedded_lift_check(wide, 0.6) == LiftVerdict::Embeddable);
}

TEST_CASE("surgery scale is positive and below the uniqueness radius") {
  auto s = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  const double rc = s->surgery_scale(1.0);
  CHECK(rc > 0.0);
  CHECK(rc <= s->uniqueness_radius());
}

TEST_CASE("geodesic integration reports step-budget exhaustion") {
  auto s = std::make_shared<SurfaceOfRevolution>(SurfaceOfRevolution::sphere(1.0));
  IntegratorConfig cfg;
  cfg.max_steps = 10;
  CHECK_THROWS_AS(s->exp_map({Vec2(kPi / 2, 0.0), Vec2(0.0, 10.0)}, cfg), StepFailure);
}
