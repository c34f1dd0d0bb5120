// Discrete curves and regions, the boundary-length-minus-c-area functional,
// and its first/second variation including the crossing-node corrections.
#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "isocurve/geometry.hpp"

namespace isocurve {

class DiscreteCurve {
 public:
  DiscreteCurve(SurfacePtr surface, std::vector<Vec2> vertices, bool closed,
                std::optional<std::pair<Vec2, Vec2>> pins = std::nullopt);

  static DiscreteCurve loop(SurfacePtr surface, std::vector<Vec2> vertices);
  // Endpoint-pinned curve; the pins are the first and last vertices.
  static DiscreteCurve pinned(SurfacePtr surface, std::vector<Vec2> vertices);

  const SurfacePtr& surface() const { return surface_; }
  const std::vector<Vec2>& vertices() const { return verts_; }
  std::vector<Vec2>& mutable_vertices() { return verts_; }
  bool closed() const { return closed_; }
  const std::optional<std::pair<Vec2, Vec2>>& pins() const { return pins_; }
  int size() const { return static_cast<int>(verts_.size()); }
  int segment_count() const { return closed_ ? size() : size() - 1; }

  int next(int i) const { return (i + 1) % size(); }
  int prev(int i) const { return (i + size() - 1) % size(); }

  // Shortest-representative difference from vertex i to its successor.
  Vec2 segment_diff(int i) const;
  Vec2 segment_mid(int i) const;
  double segment_length(int i) const;  // chord through the midpoint metric
  // Mean of the two adjacent segment lengths (one-sided at pinned ends).
  double vertex_weight(int i) const;
  double length() const;
  // Parameter-uniform Dirichlet energy: n * sum of squared segment lengths.
  double energy() const;

  // Cover polyline starting at vertex 0 (closed curves get size()+1 points,
  // the last being vertex 0 shifted by the closure defect).
  std::vector<Vec2> unwrap() const;
  // Deck transformation picked up by one traversal; zero for null-homotopic.
  Vec2 closure_defect() const;

  // Signed metric turning angle at vertex i; positive = left turn.
  double turning_angle(int i) const;

  DiscreteCurve resampled_uniform(int n) const;
  DiscreteCurve reversed() const;

 private:
  SurfacePtr surface_;
  std::vector<Vec2> verts_;
  bool closed_;
  std::optional<std::pair<Vec2, Vec2>> pins_;
};

// A region is selected by a witness point relative to one or two closed
// boundary curves. Mass policy Support counts overlapping sheets once;
// Multiplicity counts the unwrapped sheets with their covering multiplicity.
struct Region {
  enum class Mass { Support, Multiplicity };

  std::vector<DiscreteCurve> boundary;
  Vec2 witness = Vec2::Zero();
  Mass mass = Mass::Support;

  static Region empty(SurfacePtr surface);
  bool is_empty() const { return boundary.empty(); }
  const SurfacePtr& surface() const;
};

double area(const Region& region);
double boundary_length(const Region& region);
double ac_functional(const Region& region, double c);
// Integral of a scalar chart field against the metric area element.
double region_integral(const Region& region, const std::function<double(const Vec2&)>& field);

// True if traversal order of `curve` keeps the region on its left.
bool region_on_left(const DiscreteCurve& curve, const Region& region);
// Containment of a point (any periodic representative) in the curve interior.
bool curve_contains(const DiscreteCurve& curve, const Vec2& point);
// Whether the point lies in the same region component structure as the witness.
bool region_contains(const Region& region, const Vec2& point);

// Area of the smaller of the two sides a closed embedded curve bounds
// (winding curves on revolution charts use the pole-side cap).
double curve_min_side_area(const DiscreteCurve& curve);

// Signed geodesic curvature per vertex, positive when bending toward the
// region side; without a region, positive means bending left along traversal.
std::vector<double> geodesic_curvature(const DiscreteCurve& curve,
                                       const Region* region = nullptr);

struct TestFunction {
  std::vector<double> values;  // per vertex, piecewise linear in between
  static TestFunction constant(int n, double value);
  // sin(pi * t / L) over the arc of vertices [from, to] (inclusive), zero
  // elsewhere; t is arclength measured from `from`.
  static TestFunction half_sine_on_arc(const DiscreteCurve& curve, int from, int to);
};

enum class NodeConfiguration {
  DisconnectedRegion,  // the two sub-loops bound disjoint lobes
  ConnectedRegion,     // the sub-loops are nested; the region is connected
};

struct NodeData {
  Vec2 point = Vec2::Zero();
  int t0 = 0;  // vertex index of the first branch passage
  int t1 = 0;  // vertex index of the second branch passage
  double alpha = 0.0;
  NodeConfiguration configuration = NodeConfiguration::DisconnectedRegion;
};

// All transverse self-crossings and tangential touches of the curve.
std::vector<NodeData> detect_nodes(const DiscreteCurve& curve, double touch_tol = 1e-9);
// Exactly-one-node variant; throws MultipleNodes when several are present.
std::optional<NodeData> detect_node(const DiscreteCurve& curve, double touch_tol = 1e-9);

// Normal perturbation family gamma_s = exp(s * phi * nu) with the signed
// swept-mass accumulator of the associated 2-current.
class PerturbationFamily {
 public:
  // region_on_left records on which side of the traversal the region lies;
  // the mass bookkeeping of the swept 2-current depends on it.
  PerturbationFamily(DiscreteCurve base, std::vector<double> phi, std::vector<Vec2> nu,
                     bool region_on_left = true);
  // nu = outward normal of the region along its (single) boundary curve.
  static PerturbationFamily outward(const Region& region, std::vector<double> phi);

  const DiscreteCurve& base() const { return base_; }
  const std::vector<double>& phi() const { return phi_; }
  const std::vector<Vec2>& nu() const { return nu_; }
  bool region_on_left() const { return region_on_left_; }

  DiscreteCurve at(double s) const;
  // Advance the accumulator to parameter s (chart quadrature of the swept
  // band between the current and the new state, signed by sweep direction).
  void advance_to(double s);
  double step() const { return s_; }
  double swept_signed_area() const { return swept_; }

 private:
  DiscreteCurve base_;
  std::vector<double> phi_;
  std::vector<Vec2> nu_;
  DiscreteCurve current_;
  double s_ = 0.0;
  double swept_ = 0.0;
  bool region_on_left_ = true;
};

// d/ds of (length - c * mass) at s = 0 for the family; the curvature is
// measured against the side nu points away from.
double first_variation(const PerturbationFamily& family, double c);

// d^2/ds^2 of (length - c * mass) for X = phi * nu on a constant-curvature-c
// curve: integral of |phi'|^2 - (K + c^2) phi^2 plus the node correction.
double second_variation(const DiscreteCurve& curve, const std::optional<NodeData>& node,
                        const TestFunction& phi, double c);

// The node correction term alone (used by the closed-form checks).
double node_correction(NodeConfiguration configuration, double alpha, double phi0, double phi1,
                       double c);

}  // namespace isocurve
