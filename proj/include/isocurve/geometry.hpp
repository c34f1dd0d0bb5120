// Charted Riemannian surfaces: flat tori, surfaces of revolution, conformal tori.
// Supplies metric, curvature, geodesic and injectivity-radius primitives.
#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "isocurve/common.hpp"

namespace isocurve {

struct SurfaceStats {
  double min_curvature = 0.0;
  double max_curvature = 0.0;
  double injectivity_radius = 0.0;
  double area = 0.0;
  bool curvature_certified = false;
  bool injectivity_certified = false;
};

// Geodesic integrator settings. Steps are classical RK4 with a deterministic
// count chosen from the metric norm of the initial velocity; max_step caps the
// arclength advanced per step.
struct IntegratorConfig {
  double max_step = 0.005;
  int min_steps = 8;
  long max_steps = 4000000;
};

struct TangentVector {
  Vec2 base;
  Vec2 components;
};

struct CurvatureSample {
  double value = 0.0;
  bool one_sided = false;  // set at junctions where the profile is below C^2
};

class Surface {
 public:
  virtual ~Surface() = default;

  virtual std::string family() const = 0;

  virtual Mat2 metric_at(const Vec2& p) const = 0;
  // Christoffel symbols of the metric: christoffel_at(p)[k](i,j) = Γ^k_{ij}.
  virtual std::array<Mat2, 2> christoffel_at(const Vec2& p) const = 0;
  virtual CurvatureSample gauss_curvature_sample(const Vec2& p) const = 0;
  double gauss_curvature_at(const Vec2& p) const { return gauss_curvature_sample(p).value; }

  virtual Vec2 wrap(const Vec2& p) const = 0;
  // Shortest-representative difference to - from, as a vector in the cover.
  virtual Vec2 short_diff(const Vec2& to, const Vec2& from) const = 0;
  virtual bool in_chart(const Vec2& p) const = 0;
  virtual double total_area() const = 0;
  // Generators of the covering translations acting on the chart.
  virtual std::vector<Vec2> deck_generators() const { return {}; }
  // True when the chart metric is identically the identity matrix.
  virtual bool flat_chart() const { return false; }

  const SurfaceStats& stats() const;

  // --- metric helpers ---
  double dot(const Vec2& p, const Vec2& u, const Vec2& v) const;
  double norm(const Vec2& p, const Vec2& v) const;
  double density(const Vec2& p) const;  // sqrt(det g)
  // Chart->orthonormal-frame change of coordinates at p (positively oriented).
  Mat2 to_frame(const Vec2& p) const;
  Mat2 from_frame(const Vec2& p) const;
  // +90 degree metric rotation of v at p.
  Vec2 left_normal(const Vec2& p, const Vec2& v) const;
  // Signed angle from u to v at p, in (-pi, pi].
  double angle_between(const Vec2& p, const Vec2& u, const Vec2& v) const;

  // --- geodesics ---
  virtual Vec2 exp_map(const TangentVector& v, const IntegratorConfig& cfg = {}) const;
  // Endpoint and arriving velocity of the unit-time geodesic.
  virtual std::pair<Vec2, Vec2> exp_map_with_velocity(const TangentVector& v,
                                                      const IntegratorConfig& cfg = {}) const;
  // Minimizing geodesic polyline from a to b (both within the uniqueness
  // radius); returns `samples` points including both endpoints.
  virtual std::vector<Vec2> geodesic_between(const Vec2& a, const Vec2& b, int samples,
                                             const IntegratorConfig& cfg = {}) const;
  virtual double geodesic_distance(const Vec2& a, const Vec2& b,
                                   const IntegratorConfig& cfg = {}) const;

  // Scale below which two-point geodesic problems are uniquely solvable.
  double uniqueness_radius() const;
  // Surgery scale: min(uniqueness radius, strict c-convexity radius) / 2,
  // further reduced until a metric ball of that radius has area <= area_cap.
  double surgery_scale(double c, double area_cap = -1.0) const;

 protected:
  virtual SurfaceStats compute_stats() const = 0;

 private:
  mutable std::optional<SurfaceStats> stats_cache_;
};

using SurfacePtr = std::shared_ptr<const Surface>;

class FlatTorus final : public Surface {
 public:
  FlatTorus(const Vec2& v1, const Vec2& v2);

  std::string family() const override { return "flat_torus"; }
  Mat2 metric_at(const Vec2& p) const override;
  std::array<Mat2, 2> christoffel_at(const Vec2& p) const override;
  CurvatureSample gauss_curvature_sample(const Vec2& p) const override;
  Vec2 wrap(const Vec2& p) const override;
  Vec2 short_diff(const Vec2& to, const Vec2& from) const override;
  bool in_chart(const Vec2&) const override { return true; }
  double total_area() const override;
  std::vector<Vec2> deck_generators() const override { return {v1_, v2_}; }
  bool flat_chart() const override { return true; }

  Vec2 exp_map(const TangentVector& v, const IntegratorConfig& cfg = {}) const override;
  std::pair<Vec2, Vec2> exp_map_with_velocity(const TangentVector& v,
                                              const IntegratorConfig& cfg = {}) const override;
  std::vector<Vec2> geodesic_between(const Vec2& a, const Vec2& b, int samples,
                                     const IntegratorConfig& cfg = {}) const override;
  double geodesic_distance(const Vec2& a, const Vec2& b,
                           const IntegratorConfig& cfg = {}) const override;

  const Vec2& basis1() const { return v1_; }
  const Vec2& basis2() const { return v2_; }
  // Nonzero lattice vectors of norm <= radius (one per +/- pair excluded: all listed).
  std::vector<Vec2> lattice_vectors_within(double radius) const;
  double shortest_lattice_norm() const;

 protected:
  SurfaceStats compute_stats() const override;

 private:
  Vec2 v1_, v2_;
  Mat2 basis_, inv_basis_;
};

class SurfaceOfRevolution final : public Surface {
 public:
  // Chart (t, theta): t is arclength along the profile curve, theta in [0, 2pi).
  // Metric dt^2 + f(t)^2 dtheta^2; requires |f'| <= 1 away from the caps.
  struct Profile {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> ddf;
    double extent = 0.0;
    std::vector<double> junctions;  // parameters where f'' jumps
    std::string name = "custom";
  };

  explicit SurfaceOfRevolution(Profile profile, double junction_band = 1e-3);

  static SurfaceOfRevolution sphere(double radius);
  // Unit-radius hemispherical caps joined to a cylinder of the given length.
  static SurfaceOfRevolution capped_cylinder(double length);

  std::string family() const override { return "revolution"; }
  Mat2 metric_at(const Vec2& p) const override;
  std::array<Mat2, 2> christoffel_at(const Vec2& p) const override;
  CurvatureSample gauss_curvature_sample(const Vec2& p) const override;
  Vec2 wrap(const Vec2& p) const override;
  Vec2 short_diff(const Vec2& to, const Vec2& from) const override;
  bool in_chart(const Vec2& p) const override;
  double total_area() const override;
  std::vector<Vec2> deck_generators() const override { return {Vec2(0.0, 2.0 * kPi)}; }

  const Profile& profile() const { return profile_; }
  double junction_band() const { return junction_band_; }
  // Integral of the profile radius from 0 to t (area of the cap below t is
  // 2*pi times this value).
  double profile_integral(double t) const;

 protected:
  SurfaceStats compute_stats() const override;

 private:
  Profile profile_;
  double junction_band_;
  bool near_junction(double t) const;
};

class ConformalTorus final : public Surface {
 public:
  // Metric e^{2u} * (dx^2 + dy^2) on R^2 / (Z v1 + Z v2); u is sampled on an
  // nx x ny grid over the lattice cell and evaluated by periodic bicubic
  // (Catmull-Rom) interpolation, which is C^1 with piecewise-polynomial cells.
  ConformalTorus(const Vec2& v1, const Vec2& v2, std::vector<double> samples, int nx, int ny);
  static ConformalTorus from_function(const Vec2& v1, const Vec2& v2,
                                      const std::function<double(double, double)>& u_of_frac,
                                      int n);

  std::string family() const override { return "conformal_torus"; }
  Mat2 metric_at(const Vec2& p) const override;
  std::array<Mat2, 2> christoffel_at(const Vec2& p) const override;
  CurvatureSample gauss_curvature_sample(const Vec2& p) const override;
  Vec2 wrap(const Vec2& p) const override;
  Vec2 short_diff(const Vec2& to, const Vec2& from) const override;
  bool in_chart(const Vec2&) const override { return true; }
  double total_area() const override;
  std::vector<Vec2> deck_generators() const override { return {v1_, v2_}; }

  double log_factor(const Vec2& p) const;          // u
  Vec2 log_factor_gradient(const Vec2& p) const;   // du (chart coordinates)
  double log_factor_laplacian(const Vec2& p) const;
  const Vec2& basis1() const { return v1_; }
  const Vec2& basis2() const { return v2_; }

 protected:
  SurfaceStats compute_stats() const override;

 private:
  Vec2 v1_, v2_;
  Mat2 basis_, inv_basis_;
  std::vector<double> u_;
  int nx_, ny_;

  double sample(int i, int j) const;
  // value, gradient and Hessian of u in fractional coordinates
  void eval_frac(double a, double b, double* val, Vec2* grad, Mat2* hess) const;
};

// Flat-torus embeddability of the lifted circle of radius 1/c: embedded iff
// every nonzero lattice vector is strictly longer than 2/c.
enum class LiftVerdict { Embeddable, NotEmbeddable };
LiftVerdict embedded_lift_check(const FlatTorus& torus, double c);

}  // namespace isocurve
