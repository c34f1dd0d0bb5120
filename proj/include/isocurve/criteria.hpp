// Closed-form comparison functions, existence thresholds and condition-region
// traces, including the data behind the two summary figures.
#pragma once

#include <vector>

#include "isocurve/geometry.hpp"

namespace isocurve {

// Geodesic curvature of the circle of radius r in the constant-curvature-k
// model plane: sqrt(k) cot(r sqrt(k)) for k > 0, 1/r for k = 0, and
// sqrt(-k) coth(r sqrt(-k)) for k < 0. Continuous in k at 0.
double generalized_cot(double k, double r);

// Radius of the circle of geodesic curvature c in the constant-curvature-k
// model plane; inverse of generalized_cot in r. Requires k > -c^2.
double model_circle_radius(double c, double k);

struct Criterion {
  bool satisfied = false;
  double margin = 0.0;  // satisfied iff margin > 0
};

struct CriteriaReport {
  double min_curvature = 0.0;
  double max_curvature = 0.0;
  double injectivity_radius = 0.0;
  double c = 0.0;

  // c > ct_{minK}(inj): general existence condition.
  Criterion general_existence;
  // c^2 + minK >= 0: excludes the disconnected-region node configuration.
  Criterion disconnected_node_excluded;
  // c^2 >= pi^2/(4 inj^2) - minK: excludes the connected-region configuration
  // via the second variation alone.
  Criterion connected_node_excluded_2v;
  // inj > R0(c, minK): geodesic-loop length window 2 inj <= L <= 2 R0 is empty.
  Criterion loop_window_empty;
  // Positive-curvature pair (either suffices), stated for maxK normalized to 1.
  Criterion positive_condition_1;  // c > sqrt(m) cot(pi sqrt(m)), m = minK/maxK
  Criterion positive_condition_2;  // 2pi >= max{2pi c(1-2c)/m, pi c(1-2c)/m + acot(c/sqrt(m))/sqrt(m)}
  bool positive_conditions_apply = false;  // requires minK > 0
  // Gauss-Bonnet area bound and width lower bound (minK > 0, c < 1/2).
  double area_upper_bound = 0.0;
  double width_lower_bound = 0.0;
};

CriteriaReport evaluate_criteria(const SurfaceStats& stats, double c);

// Boundary of the positive-curvature condition region in the (m, c) plane,
// m = min curvature with max curvature normalized to 1.
struct RegionBoundaryTrace {
  std::vector<Vec2> upper;   // (m, c) with c = sqrt(m) cot(pi sqrt(m))
  std::vector<Vec2> lower;   // (m, c) root of the second condition
  Vec2 corner = Vec2::Zero();
  double lower_c_intercept_m = 0.0;  // m at which the lower branch meets c = 0
};

RegionBoundaryTrace figure1_region(int grid = 64);

// Threshold curves in the (inj, c) plane for min curvature -1: this method's
// coth(inj) curve and the degree-theory comparison curve.
struct ThresholdCurves {
  std::vector<Vec2> ours;        // c = coth(inj)
  std::vector<Vec2> comparison;  // c = (pi/2) inj^{-1} (1 + inj^2/(2 pi))
};

ThresholdCurves figure2_curves(double inj_min = 0.05, double inj_max = 10.0, int grid = 256);

double figure2_ours(double inj);
double figure2_comparison(double inj);

struct GaussBonnetBounds {
  double area_upper = 0.0;   // 2 pi (1 - 2c) / minK
  double width_lower = 0.0;  // 4 pi - 2 pi c (1 - 2c) / minK
  bool area_violated = false;
};

GaussBonnetBounds gauss_bonnet_bounds(double area, double boundary_length, double alpha,
                                      double min_curvature, double c);

// Pocket-size threshold eta = min{c1^2/c^2, area/2}, with the isoperimetric
// constant c1 estimated from small-area profiles of the given surface.
struct EtaEstimate {
  double eta = 0.0;
  double c1 = 0.0;
  bool certified = false;
};

EtaEstimate isoperimetric_eta(const Surface& surface, double c);

}  // namespace isocurve
