#include "isocurve/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "isocurve/criteria.hpp"

namespace isocurve {

namespace {

struct GeodesicState {
  Vec2 q;
  Vec2 v;
};

GeodesicState derivative(const Surface& s, const GeodesicState& y) {
  const auto gamma = s.christoffel_at(y.q);
  Vec2 acc;
  for (int k = 0; k < 2; ++k) acc[k] = -y.v.dot(gamma[k] * y.v);
  return {y.v, acc};
}

GeodesicState rk4_step(const Surface& s, const GeodesicState& y, double h) {
  const GeodesicState k1 = derivative(s, y);
  const GeodesicState y2{y.q + 0.5 * h * k1.q, y.v + 0.5 * h * k1.v};
  const GeodesicState k2 = derivative(s, y2);
  const GeodesicState y3{y.q + 0.5 * h * k2.q, y.v + 0.5 * h * k2.v};
  const GeodesicState k3 = derivative(s, y3);
  const GeodesicState y4{y.q + h * k3.q, y.v + h * k3.v};
  const GeodesicState k4 = derivative(s, y4);
  return {y.q + h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
          y.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
}

// Integrates the geodesic with initial data (base, v) over unit parameter
// time. The step count is a deterministic function of the metric speed, so
// the endpoint is a smooth function of the initial data.
GeodesicState integrate_geodesic(const Surface& s, const Vec2& base, const Vec2& v,
                                 const IntegratorConfig& cfg, std::vector<Vec2>* record,
                                 int record_count) {
  GeodesicState y{base, v};
  const double speed = s.norm(base, v);
  if (speed == 0.0) {
    if (record) record->assign(std::max(record_count, 2), base);
    return y;
  }
  const double needed = speed / cfg.max_step;
  if (needed > static_cast<double>(cfg.max_steps)) {
    throw StepFailure("geodesic integration exceeds step budget (speed " +
                      std::to_string(speed) + ")");
  }
  long n = std::max<long>(cfg.min_steps, static_cast<long>(std::ceil(needed)));
  if (record) {
    // Align steps with the requested sample positions.
    const long per = std::max<long>(1, (n + record_count - 2) / (record_count - 1));
    n = per * (record_count - 1);
    record->clear();
    record->push_back(base);
    const double h = 1.0 / static_cast<double>(n);
    for (long i = 0; i < n; ++i) {
      y = rk4_step(s, y, h);
      if ((i + 1) % per == 0) record->push_back(y.q);
    }
    return y;
  }
  const double h = 1.0 / static_cast<double>(n);
  for (long i = 0; i < n; ++i) y = rk4_step(s, y, h);
  return y;
}

double positive_fmod(double x, double m) {
  double r = std::fmod(x, m);
  if (r < 0) r += m;
  return r;
}

// Model-space area of a metric ball of radius r at constant curvature k.
double model_ball_area(double k, double r) {
  if (std::abs(k) < 1e-14) return kPi * r * r;
  if (k > 0) {
    const double a = std::min(std::sqrt(k) * r, kPi);
    return 2.0 * kPi * (1.0 - std::cos(a)) / k;
  }
  return 2.0 * kPi * (std::cosh(std::sqrt(-k) * r) - 1.0) / (-k);
}

}  // namespace

// ---------------------------------------------------------------------------
// Surface base
// ---------------------------------------------------------------------------

const SurfaceStats& Surface::stats() const {
  if (!stats_cache_) stats_cache_ = compute_stats();
  return *stats_cache_;
}

double Surface::dot(const Vec2& p, const Vec2& u, const Vec2& v) const {
  return u.dot(metric_at(p) * v);
}

double Surface::norm(const Vec2& p, const Vec2& v) const {
  return std::sqrt(std::max(0.0, dot(p, v, v)));
}

double Surface::density(const Vec2& p) const {
  return std::sqrt(std::max(0.0, metric_at(p).determinant()));
}

Mat2 Surface::to_frame(const Vec2& p) const {
  const Mat2 g = metric_at(p);
  Eigen::LLT<Mat2> llt(g);
  return Mat2(llt.matrixL()).transpose();
}

Mat2 Surface::from_frame(const Vec2& p) const { return to_frame(p).inverse(); }

Vec2 Surface::left_normal(const Vec2& p, const Vec2& v) const {
  const Mat2 t = to_frame(p);
  const Vec2 w = t * v;
  return t.inverse() * Vec2(-w.y(), w.x());
}

double Surface::angle_between(const Vec2& p, const Vec2& u, const Vec2& v) const {
  const Mat2 t = to_frame(p);
  const Vec2 a = t * u, b = t * v;
  return std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
}

Vec2 Surface::exp_map(const TangentVector& v, const IntegratorConfig& cfg) const {
  return wrap(integrate_geodesic(*this, v.base, v.components, cfg, nullptr, 0).q);
}

std::pair<Vec2, Vec2> Surface::exp_map_with_velocity(const TangentVector& v,
                                                     const IntegratorConfig& cfg) const {
  const GeodesicState y = integrate_geodesic(*this, v.base, v.components, cfg, nullptr, 0);
  return {wrap(y.q), y.v};
}

namespace {

// Two-point geodesic by shooting: solve exp_a(s * dir(phi)) = b for (phi, s)
// with a damped Newton iteration on the chart miss vector.
struct Shot {
  double phi = 0.0;
  double s = 0.0;
};

Vec2 shot_velocity(const Surface& surf, const Vec2& a, const Shot& sh) {
  return surf.from_frame(a) * Vec2(sh.s * std::cos(sh.phi), sh.s * std::sin(sh.phi));
}

Shot solve_shot(const Surface& surf, const Vec2& a, const Vec2& b, const IntegratorConfig& cfg) {
  const Vec2 d = surf.short_diff(b, a);
  const Vec2 fd = surf.to_frame(a) * d;
  Shot sh{std::atan2(fd.y(), fd.x()), fd.norm()};
  if (sh.s < 1e-14) return sh;

  auto miss = [&](const Shot& t) -> Vec2 {
    const Vec2 end = integrate_geodesic(surf, a, shot_velocity(surf, a, t), cfg, nullptr, 0).q;
    return surf.short_diff(surf.wrap(end), b);
  };

  Vec2 f = miss(sh);
  const double tol = 1e-11 * (1.0 + sh.s);
  for (int it = 0; it < 60 && f.norm() > tol; ++it) {
    const double dphi = 1e-7, ds = 1e-7 * (1.0 + sh.s);
    const Vec2 fp = miss({sh.phi + dphi, sh.s});
    const Vec2 fs = miss({sh.phi, sh.s + ds});
    Mat2 jac;
    jac.col(0) = (fp - f) / dphi;
    jac.col(1) = (fs - f) / ds;
    const Vec2 step = jac.fullPivLu().solve(-f);
    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half < 25; ++half) {
      Shot trial{sh.phi + lambda * step.x(), sh.s + lambda * step.y()};
      if (trial.s > 0) {
        const Vec2 ft = miss(trial);
        if (ft.norm() < f.norm()) {
          sh = trial;
          f = ft;
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
  }
  if (f.norm() > 1e3 * tol) {
    throw GeodesicSubproblemFailure("two-point geodesic shooting did not converge (miss " +
                                    std::to_string(f.norm()) + ")");
  }
  return sh;
}

}  // namespace

std::vector<Vec2> Surface::geodesic_between(const Vec2& a, const Vec2& b, int samples,
                                            const IntegratorConfig& cfg) const {
  samples = std::max(samples, 2);
  const Shot sh = solve_shot(*this, a, b, cfg);
  if (sh.s < 1e-14) return std::vector<Vec2>(samples, wrap(a));
  std::vector<Vec2> pts;
  integrate_geodesic(*this, a, shot_velocity(*this, a, sh), cfg, &pts, samples);
  for (auto& p : pts) p = wrap(p);
  pts.back() = wrap(b);
  return pts;
}

double Surface::geodesic_distance(const Vec2& a, const Vec2& b, const IntegratorConfig& cfg) const {
  return solve_shot(*this, a, b, cfg).s;
}

double Surface::uniqueness_radius() const {
  const SurfaceStats& st = stats();
  double r = st.injectivity_radius;
  if (st.max_curvature > 0) r = std::min(r, kPi / std::sqrt(st.max_curvature));
  return 0.5 * r;
}

double Surface::surgery_scale(double c, double area_cap) const {
  const SurfaceStats& st = stats();
  double r = uniqueness_radius();
  if (c > 0) {
    // strict c-convexity radius of metric balls, from the curvature upper bound
    const double k = st.max_curvature;
    if (k > -c * c) r = std::min(r, model_circle_radius(c, k));
  }
  r *= 0.5;
  if (area_cap > 0) {
    while (model_ball_area(st.min_curvature, r) > area_cap && r > 1e-12) r /= 1.5;
  }
  return r;
}

// ---------------------------------------------------------------------------
// FlatTorus
// ---------------------------------------------------------------------------

FlatTorus::FlatTorus(const Vec2& v1, const Vec2& v2) : v1_(v1), v2_(v2) {
  basis_.col(0) = v1;
  basis_.col(1) = v2;
  const double det = basis_.determinant();
  if (std::abs(det) < 1e-14) throw ConfigError("flat torus basis vectors are linearly dependent");
  inv_basis_ = basis_.inverse();
}

Mat2 FlatTorus::metric_at(const Vec2&) const { return Mat2::Identity(); }

std::array<Mat2, 2> FlatTorus::christoffel_at(const Vec2&) const {
  return {Mat2::Zero(), Mat2::Zero()};
}

CurvatureSample FlatTorus::gauss_curvature_sample(const Vec2&) const { return {0.0, false}; }

Vec2 FlatTorus::wrap(const Vec2& p) const {
  Vec2 frac = inv_basis_ * p;
  frac.x() = positive_fmod(frac.x(), 1.0);
  frac.y() = positive_fmod(frac.y(), 1.0);
  return basis_ * frac;
}

Vec2 FlatTorus::short_diff(const Vec2& to, const Vec2& from) const {
  const Vec2 d = to - from;
  const Vec2 frac = inv_basis_ * d;
  Vec2 best = d;
  double best_norm = std::numeric_limits<double>::infinity();
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      const Vec2 cand = d - basis_ * Vec2(std::round(frac.x()) + i, std::round(frac.y()) + j);
      const double n = cand.squaredNorm();
      if (n < best_norm) {
        best_norm = n;
        best = cand;
      }
    }
  }
  return best;
}

double FlatTorus::total_area() const { return std::abs(basis_.determinant()); }

Vec2 FlatTorus::exp_map(const TangentVector& v, const IntegratorConfig&) const {
  return wrap(v.base + v.components);
}

std::pair<Vec2, Vec2> FlatTorus::exp_map_with_velocity(const TangentVector& v,
                                                       const IntegratorConfig&) const {
  return {wrap(v.base + v.components), v.components};
}

std::vector<Vec2> FlatTorus::geodesic_between(const Vec2& a, const Vec2& b, int samples,
                                              const IntegratorConfig&) const {
  samples = std::max(samples, 2);
  const Vec2 d = short_diff(b, a);
  std::vector<Vec2> pts(samples);
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / (samples - 1);
    pts[i] = wrap(a + t * d);
  }
  return pts;
}

double FlatTorus::geodesic_distance(const Vec2& a, const Vec2& b, const IntegratorConfig&) const {
  return short_diff(b, a).norm();
}

double FlatTorus::shortest_lattice_norm() const {
  // Lagrange-Gauss reduction.
  Vec2 a = v1_, b = v2_;
  if (a.squaredNorm() > b.squaredNorm()) std::swap(a, b);
  while (true) {
    const double mu = std::round(b.dot(a) / a.squaredNorm());
    b -= mu * a;
    if (a.squaredNorm() <= b.squaredNorm()) break;
    std::swap(a, b);
  }
  return a.norm();
}

std::vector<Vec2> FlatTorus::lattice_vectors_within(double radius) const {
  std::vector<Vec2> out;
  const int range = static_cast<int>(std::ceil(2.0 * radius / shortest_lattice_norm())) + 2;
  for (int i = -range; i <= range; ++i) {
    for (int j = -range; j <= range; ++j) {
      if (i == 0 && j == 0) continue;
      const Vec2 v = basis_ * Vec2(i, j);
      if (v.norm() <= radius) out.push_back(v);
    }
  }
  return out;
}

SurfaceStats FlatTorus::compute_stats() const {
  SurfaceStats st;
  st.min_curvature = 0.0;
  st.max_curvature = 0.0;
  st.curvature_certified = true;
  st.injectivity_radius = 0.5 * shortest_lattice_norm();
  st.injectivity_certified = true;
  st.area = total_area();
  return st;
}

LiftVerdict embedded_lift_check(const FlatTorus& torus, double c) {
  if (c <= 0) throw DomainError("embedded_lift_check requires c > 0");
  // The lift is a circle of radius 1/c; it misses every lattice translate of
  // itself iff every nonzero lattice vector is strictly longer than the
  // diameter 2/c. Compare squared norms so lattice data enters exactly.
  const double diam_sq = 4.0 / (c * c);
  for (const Vec2& v : torus.lattice_vectors_within(2.0 / c + 1e-9)) {
    if (v.squaredNorm() <= diam_sq + 1e-15 * diam_sq) return LiftVerdict::NotEmbeddable;
  }
  return LiftVerdict::Embeddable;
}

// ---------------------------------------------------------------------------
// SurfaceOfRevolution
// ---------------------------------------------------------------------------

SurfaceOfRevolution::SurfaceOfRevolution(Profile profile, double junction_band)
    : profile_(std::move(profile)), junction_band_(junction_band) {
  if (profile_.extent <= 0) throw ConfigError("revolution profile extent must be positive");
}

SurfaceOfRevolution SurfaceOfRevolution::sphere(double radius) {
  if (radius <= 0) throw ConfigError("sphere radius must be positive");
  Profile p;
  p.f = [radius](double t) { return radius * std::sin(t / radius); };
  p.df = [radius](double t) { return std::cos(t / radius); };
  p.ddf = [radius](double t) { return -std::sin(t / radius) / radius; };
  p.extent = kPi * radius;
  p.name = "sphere";
  return SurfaceOfRevolution(std::move(p));
}

SurfaceOfRevolution SurfaceOfRevolution::capped_cylinder(double length) {
  if (length <= 0) throw ConfigError("cylinder length must be positive");
  Profile p;
  const double a = kPi / 2.0;       // cap extent
  const double b = a + length;      // far junction
  p.f = [a, b](double t) {
    if (t < a) return std::sin(t);
    if (t <= b) return 1.0;
    return std::cos(t - b);
  };
  p.df = [a, b](double t) {
    if (t < a) return std::cos(t);
    if (t <= b) return 0.0;
    return -std::sin(t - b);
  };
  p.ddf = [a, b](double t) {
    if (t < a) return -std::sin(t);
    if (t <= b) return 0.0;
    return -std::cos(t - b);
  };
  p.extent = b + kPi / 2.0;
  p.junctions = {a, b};
  p.name = "capped_cylinder";
  return SurfaceOfRevolution(std::move(p));
}

bool SurfaceOfRevolution::near_junction(double t) const {
  for (double j : profile_.junctions) {
    if (std::abs(t - j) <= junction_band_) return true;
  }
  return false;
}

Mat2 SurfaceOfRevolution::metric_at(const Vec2& p) const {
  if (!in_chart(p)) throw OutOfChart("revolution chart: axial coordinate out of range");
  const double f = profile_.f(p.x());
  Mat2 g = Mat2::Zero();
  g(0, 0) = 1.0;
  g(1, 1) = f * f;
  return g;
}

std::array<Mat2, 2> SurfaceOfRevolution::christoffel_at(const Vec2& p) const {
  if (!in_chart(p)) throw OutOfChart("revolution chart: axial coordinate out of range");
  const double f = profile_.f(p.x());
  const double df = profile_.df(p.x());
  Mat2 gt = Mat2::Zero(), gth = Mat2::Zero();
  gt(1, 1) = -f * df;
  gth(0, 1) = gth(1, 0) = df / f;
  return {gt, gth};
}

CurvatureSample SurfaceOfRevolution::gauss_curvature_sample(const Vec2& p) const {
  if (!in_chart(p)) throw OutOfChart("revolution chart: axial coordinate out of range");
  const double t = p.x();
  if (near_junction(t)) {
    // One-sided evaluation: step off the junction toward the same side.
    double side = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (double j : profile_.junctions) {
      const double d = std::abs(t - j);
      if (d < best) {
        best = d;
        side = (t >= j) ? 1.0 : -1.0;
      }
    }
    const double ts = t + side * (junction_band_ + 1e-9);
    return {-profile_.ddf(ts) / profile_.f(ts), true};
  }
  return {-profile_.ddf(t) / profile_.f(t), false};
}

Vec2 SurfaceOfRevolution::wrap(const Vec2& p) const {
  return {p.x(), positive_fmod(p.y(), 2.0 * kPi)};
}

Vec2 SurfaceOfRevolution::short_diff(const Vec2& to, const Vec2& from) const {
  double dth = to.y() - from.y();
  dth -= 2.0 * kPi * std::round(dth / (2.0 * kPi));
  return {to.x() - from.x(), dth};
}

bool SurfaceOfRevolution::in_chart(const Vec2& p) const {
  return p.x() > 0.0 && p.x() < profile_.extent;
}

double SurfaceOfRevolution::profile_integral(double t) const {
  t = std::clamp(t, 0.0, profile_.extent);
  const int n = std::max(16, static_cast<int>(std::ceil(t / profile_.extent * 2048)) * 2);
  const double h = t / n;
  double s = profile_.f(std::min(1e-12, t)) + profile_.f(t);
  for (int i = 1; i < n; ++i) s += profile_.f(i * h) * ((i % 2) ? 4.0 : 2.0);
  return s * h / 3.0;
}

double SurfaceOfRevolution::total_area() const {
  // 2*pi * integral of f, composite Simpson.
  const int n = 4000;
  const double h = profile_.extent / n;
  double s = profile_.f(1e-12) + profile_.f(profile_.extent - 1e-12);
  for (int i = 1; i < n; ++i) s += profile_.f(i * h) * ((i % 2) ? 4.0 : 2.0);
  return 2.0 * kPi * s * h / 3.0;
}

SurfaceStats SurfaceOfRevolution::compute_stats() const {
  SurfaceStats st;
  st.area = total_area();
  if (profile_.name == "sphere") {
    const double radius = profile_.extent / kPi;
    st.min_curvature = st.max_curvature = 1.0 / (radius * radius);
    st.curvature_certified = true;
    st.injectivity_radius = kPi * radius;
    st.injectivity_certified = true;
    return st;
  }
  if (profile_.name == "capped_cylinder") {
    st.min_curvature = 0.0;
    st.max_curvature = 1.0;
    st.curvature_certified = true;
    // The waist circles of the flat band are closed geodesics of length 2*pi,
    // and K <= 1 keeps conjugate points at distance >= pi.
    st.injectivity_radius = kPi;
    st.injectivity_certified = true;
    return st;
  }
  // Sampled estimate with one refinement level and a Lipschitz margin,
  // excluding junction bands.
  const int n = 512;
  const double lo = junction_band_ * 4.0, hi = profile_.extent - junction_band_ * 4.0;
  auto curv = [&](double t) { return -profile_.ddf(t) / profile_.f(t); };
  double kmin = std::numeric_limits<double>::infinity(), kmax = -kmin;
  double tmin = lo, tmax = lo, lip = 0.0, prev = curv(lo);
  for (int i = 0; i <= n; ++i) {
    const double t = lo + (hi - lo) * i / n;
    if (near_junction(t)) continue;
    const double k = curv(t);
    lip = std::max(lip, std::abs(k - prev) / ((hi - lo) / n));
    prev = k;
    if (k < kmin) { kmin = k; tmin = t; }
    if (k > kmax) { kmax = k; tmax = t; }
  }
  const double h2 = (hi - lo) / n / 64.0;
  for (int i = -64; i <= 64; ++i) {
    for (double t0 : {tmin, tmax}) {
      const double t = std::clamp(t0 + i * h2, lo, hi);
      if (near_junction(t)) continue;
      const double k = curv(t);
      kmin = std::min(kmin, k);
      kmax = std::max(kmax, k);
    }
  }
  const double margin = lip * (hi - lo) / n;
  st.min_curvature = kmin - margin;
  st.max_curvature = kmax + margin;
  st.curvature_certified = false;
  // Injectivity estimate: waist circles at df=0 are closed geodesics; cap by
  // the conjugate-point bound and the meridian half length.
  double shortest_loop = 2.0 * profile_.extent;
  const int m = 2048;
  for (int i = 1; i < m; ++i) {
    const double t0 = profile_.extent * i / m, t1 = profile_.extent * (i + 1) / m;
    if (profile_.df(t0) * profile_.df(t1) <= 0.0) {
      shortest_loop = std::min(shortest_loop, 2.0 * kPi * profile_.f(0.5 * (t0 + t1)));
    }
  }
  double inj = 0.5 * shortest_loop;
  if (st.max_curvature > 0) inj = std::min(inj, kPi / std::sqrt(st.max_curvature));
  st.injectivity_radius = inj;
  st.injectivity_certified = false;
  return st;
}

// ---------------------------------------------------------------------------
// ConformalTorus
// ---------------------------------------------------------------------------

ConformalTorus::ConformalTorus(const Vec2& v1, const Vec2& v2, std::vector<double> samples,
                               int nx, int ny)
    : v1_(v1), v2_(v2), u_(std::move(samples)), nx_(nx), ny_(ny) {
  basis_.col(0) = v1;
  basis_.col(1) = v2;
  if (std::abs(basis_.determinant()) < 1e-14) {
    throw ConfigError("conformal torus basis vectors are linearly dependent");
  }
  inv_basis_ = basis_.inverse();
  if (nx_ < 4 || ny_ < 4 || static_cast<int>(u_.size()) != nx_ * ny_) {
    throw ConfigError("conformal torus grid must be at least 4x4 with nx*ny samples");
  }
}

ConformalTorus ConformalTorus::from_function(const Vec2& v1, const Vec2& v2,
                                             const std::function<double(double, double)>& u_of_frac,
                                             int n) {
  std::vector<double> samples(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      samples[static_cast<size_t>(j) * n + i] =
          u_of_frac(static_cast<double>(i) / n, static_cast<double>(j) / n);
    }
  }
  return ConformalTorus(v1, v2, std::move(samples), n, n);
}

double ConformalTorus::sample(int i, int j) const {
  i %= nx_;
  if (i < 0) i += nx_;
  j %= ny_;
  if (j < 0) j += ny_;
  return u_[static_cast<size_t>(j) * nx_ + i];
}

namespace {

// Catmull-Rom basis values and derivatives at local coordinate t in [0, 1].
void cr_weights(double t, double w[4], double dw[4], double ddw[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2 * t2 - t);
  w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
  w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
  dw[0] = 0.5 * (-3 * t2 + 4 * t - 1);
  dw[1] = 0.5 * (9 * t2 - 10 * t);
  dw[2] = 0.5 * (-9 * t2 + 8 * t + 1);
  dw[3] = 0.5 * (3 * t2 - 2 * t);
  ddw[0] = 0.5 * (-6 * t + 4);
  ddw[1] = 0.5 * (18 * t - 10);
  ddw[2] = 0.5 * (-18 * t + 8);
  ddw[3] = 0.5 * (6 * t - 2);
}

}  // namespace

void ConformalTorus::eval_frac(double a, double b, double* val, Vec2* grad, Mat2* hess) const {
  a = positive_fmod(a, 1.0) * nx_;
  b = positive_fmod(b, 1.0) * ny_;
  const int i0 = static_cast<int>(std::floor(a));
  const int j0 = static_cast<int>(std::floor(b));
  const double fx = a - i0, fy = b - j0;
  double wx[4], dwx[4], ddwx[4], wy[4], dwy[4], ddwy[4];
  cr_weights(fx, wx, dwx, ddwx);
  cr_weights(fy, wy, dwy, ddwy);
  double v = 0, vx = 0, vy = 0, vxx = 0, vxy = 0, vyy = 0;
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      const double s = sample(i0 - 1 + m, j0 - 1 + n);
      v += s * wx[m] * wy[n];
      vx += s * dwx[m] * wy[n];
      vy += s * wx[m] * dwy[n];
      vxx += s * ddwx[m] * wy[n];
      vxy += s * dwx[m] * dwy[n];
      vyy += s * wx[m] * ddwy[n];
    }
  }
  if (val) *val = v;
  if (grad) *grad = Vec2(vx * nx_, vy * ny_);
  if (hess) {
    Mat2 h;
    h << vxx * nx_ * nx_, vxy * nx_ * ny_, vxy * nx_ * ny_, vyy * ny_ * ny_;
    *hess = h;
  }
}

double ConformalTorus::log_factor(const Vec2& p) const {
  const Vec2 fr = inv_basis_ * p;
  double v;
  eval_frac(fr.x(), fr.y(), &v, nullptr, nullptr);
  return v;
}

Vec2 ConformalTorus::log_factor_gradient(const Vec2& p) const {
  const Vec2 fr = inv_basis_ * p;
  Vec2 g;
  eval_frac(fr.x(), fr.y(), nullptr, &g, nullptr);
  return inv_basis_.transpose() * g;
}

double ConformalTorus::log_factor_laplacian(const Vec2& p) const {
  const Vec2 fr = inv_basis_ * p;
  Mat2 h;
  eval_frac(fr.x(), fr.y(), nullptr, nullptr, &h);
  return (inv_basis_.transpose() * h * inv_basis_).trace();
}

Mat2 ConformalTorus::metric_at(const Vec2& p) const {
  return std::exp(2.0 * log_factor(p)) * Mat2::Identity();
}

std::array<Mat2, 2> ConformalTorus::christoffel_at(const Vec2& p) const {
  const Vec2 du = log_factor_gradient(p);
  Mat2 gx, gy;
  gx << du.x(), du.y(), du.y(), -du.x();
  gy << -du.y(), du.x(), du.x(), du.y();
  return {gx, gy};
}

CurvatureSample ConformalTorus::gauss_curvature_sample(const Vec2& p) const {
  return {-log_factor_laplacian(p) * std::exp(-2.0 * log_factor(p)), false};
}

Vec2 ConformalTorus::wrap(const Vec2& p) const {
  Vec2 frac = inv_basis_ * p;
  frac.x() = positive_fmod(frac.x(), 1.0);
  frac.y() = positive_fmod(frac.y(), 1.0);
  return basis_ * frac;
}

Vec2 ConformalTorus::short_diff(const Vec2& to, const Vec2& from) const {
  // Shortest chart representative; the conformal factor does not reorder
  // candidates at the scales curves use (consecutive vertices are close).
  const Vec2 d = to - from;
  const Vec2 frac = inv_basis_ * d;
  Vec2 best = d;
  double best_norm = std::numeric_limits<double>::infinity();
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      const Vec2 cand = d - basis_ * Vec2(std::round(frac.x()) + i, std::round(frac.y()) + j);
      const double n = cand.squaredNorm();
      if (n < best_norm) {
        best_norm = n;
        best = cand;
      }
    }
  }
  return best;
}

double ConformalTorus::total_area() const {
  double s = 0.0;
  for (double u : u_) s += std::exp(2.0 * u);
  return std::abs(basis_.determinant()) * s / static_cast<double>(nx_ * ny_);
}

SurfaceStats ConformalTorus::compute_stats() const {
  SurfaceStats st;
  st.area = total_area();
  // Curvature extrema: sample 3x3 per cell, refine around extrema, add a
  // sampled-gradient Lipschitz margin.
  double kmin = std::numeric_limits<double>::infinity(), kmax = -kmin;
  Vec2 amin = Vec2::Zero(), amax = Vec2::Zero();
  double lip = 0.0, prev = 0.0;
  bool first = true;
  const int n1x = 3 * nx_, n1y = 3 * ny_;
  for (int j = 0; j < n1y; ++j) {
    for (int i = 0; i < n1x; ++i) {
      const Vec2 p = basis_ * Vec2((i + 0.5) / n1x, (j + 0.5) / n1y);
      const double k = gauss_curvature_sample(p).value;
      if (!first) lip = std::max(lip, std::abs(k - prev) * n1x);
      prev = k;
      first = false;
      if (k < kmin) { kmin = k; amin = inv_basis_ * p; }
      if (k > kmax) { kmax = k; amax = inv_basis_ * p; }
    }
  }
  const double h = 1.0 / n1x;
  for (int j = -8; j <= 8; ++j) {
    for (int i = -8; i <= 8; ++i) {
      const Vec2 d(i * h / 8.0, j * h / 8.0);
      kmin = std::min(kmin, gauss_curvature_sample(basis_ * (amin + d)).value);
      kmax = std::max(kmax, gauss_curvature_sample(basis_ * (amax + d)).value);
    }
  }
  const double margin = lip * h;
  st.min_curvature = kmin - margin;
  st.max_curvature = kmax + margin;
  st.curvature_certified = false;
  // Injectivity estimate: relax straight representatives of short lattice
  // classes to geodesic loops and halve the shortest length found.
  auto loop_length = [&](std::vector<Vec2>& pts) {
    double len = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      const Vec2 mid = 0.5 * (pts[i] + pts[i + 1]);
      len += std::exp(log_factor(mid)) * (pts[i + 1] - pts[i]).norm();
    }
    return len;
  };
  double shortest = std::numeric_limits<double>::infinity();
  const std::vector<Vec2> classes = {v1_, v2_, v1_ + v2_, v1_ - v2_};
  for (const Vec2& lambda : classes) {
    for (int bx = 0; bx < 3; ++bx) {
      for (int by = 0; by < 3; ++by) {
        const Vec2 base = basis_ * Vec2(bx / 3.0, by / 3.0);
        const int m = 48;
        std::vector<Vec2> pts(m + 1);
        for (int i = 0; i <= m; ++i) pts[i] = base + lambda * (static_cast<double>(i) / m);
        const double step = 0.05 * lambda.norm() / m;
        for (int it = 0; it < 200; ++it) {
          for (int i = 1; i < m; ++i) {
            // descend the discrete length by central differences
            Vec2 grad;
            for (int d = 0; d < 2; ++d) {
              Vec2 e = Vec2::Zero();
              e[d] = 1e-6;
              std::vector<Vec2> loc{pts[i - 1], pts[i] + e, pts[i + 1]};
              std::vector<Vec2> loc2{pts[i - 1], pts[i] - e, pts[i + 1]};
              grad[d] = (loop_length(loc) - loop_length(loc2)) / 2e-6;
            }
            pts[i] -= step * grad;
          }
        }
        shortest = std::min(shortest, loop_length(pts));
      }
    }
  }
  double inj = 0.5 * shortest;
  if (st.max_curvature > 0) inj = std::min(inj, kPi / std::sqrt(st.max_curvature));
  st.injectivity_radius = inj;
  st.injectivity_certified = false;
  return st;
}

}  // namespace isocurve
