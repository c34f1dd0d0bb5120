// Curve evolution: the fixed-endpoint Birkhoff shortening map, discrete curve
// shortening flow, corner rounding, and the prescribed-curvature solver.
#pragma once

#include "isocurve/curve.hpp"

namespace isocurve {

struct BirkhoffConfig {
  int breaks = 0;             // L: interior break pairs; 0 = size from length/r0
  double max_segment = 0.0;   // r0 cap on replaced arcs; 0 = uniqueness radius
  int samples_per_arc = 8;    // polyline resolution of each replaced geodesic
  IntegratorConfig integrator;
};

// Alternating even/odd replacement of curve pieces by minimizing geodesics
// with constant-speed reparametrization; length never increases and discrete
// geodesics are fixed points.
DiscreteCurve birkhoff_map(const DiscreteCurve& curve, const BirkhoffConfig& cfg);

struct FlowConfig {
  double dt_factor = 0.4;         // explicit step: dt <= factor * (min segment)^2
  double area_floor = 1e-4;       // collapse threshold for flows to a point
  int max_iterations = 200000;
  int resample_every = 10;
  int record_every = 25;          // slice recording cadence for flow paths
  int resolution = 256;           // working vertex count
  double residual = 1e-6;         // solver target max|kappa - c|
  int newton_max_iterations = 60;
  IntegratorConfig integrator;
};

// One explicit curve-shortening step (normal speed = geodesic curvature).
// With area_floor > 0 the enclosed area is monitored and CollapseDetected is
// thrown below the floor.
DiscreteCurve csf_step(const DiscreteCurve& curve, double dt, double area_floor = 0.0);

struct FlowTraceRow {
  int step = 0;
  double length = 0.0;
  double area = 0.0;
  double ac = 0.0;
  double max_residual = 0.0;
};

struct CsfPath {
  std::vector<DiscreteCurve> slices;  // from the input curve to a point curve
  std::vector<FlowTraceRow> trace;
  double max_length = 0.0;
  Vec2 collapse_point = Vec2::Zero();
};

// Run curve shortening until the enclosed area drops below the floor, then
// append the point-collapsed final slice.
CsfPath csf_path_to_point(const DiscreteCurve& curve, const FlowConfig& cfg, double c_for_trace = 1.0);

enum class CornerMode { Geodesic, CurvatureAtLeastC };

// Replace the corner of a loop inside the metric ball B_r(node.point) by a
// minimizing geodesic or by a constant-curvature-c arc bending into the
// corner; the result agrees with the input outside the ball and is shorter.
DiscreteCurve round_corner(const DiscreteCurve& curve, const NodeData& node, double r,
                           CornerMode mode, double c = 0.0,
                           const IntegratorConfig& integrator = {});

// Constant-curvature-c arc between nearby points (samples >= 2), bending left
// or right of the chord direction.
std::vector<Vec2> constant_curvature_arc(const Surface& surface, const Vec2& a, const Vec2& b,
                                         double c, bool bend_left, int samples,
                                         const IntegratorConfig& integrator = {});

// Damped Newton solve for a closed embedded curve of constant geodesic
// curvature c, parametrized as a normal graph over the current iterate.
Region solve_prescribed_curvature(const SurfacePtr& surface, double c, const Region& seed,
                                  const FlowConfig& cfg);

}  // namespace isocurve
