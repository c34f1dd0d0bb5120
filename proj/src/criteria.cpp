#include "isocurve/criteria.hpp"

#include <algorithm>
#include <cmath>

namespace isocurve {

namespace {

// Bracketed bisection; f must change sign on [lo, hi].
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0) throw RootBracketFailure("bisection bracket does not change sign");
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (flo * fm < 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

constexpr double kClampedThreshold = -1e9;

}  // namespace

double generalized_cot(double k, double r) {
  if (r <= 0) throw DomainError("generalized_cot requires r > 0");
  if (std::abs(k) < 1e-300) return 1.0 / r;
  if (k > 0) {
    const double a = r * std::sqrt(k);
    if (a >= kPi) throw DomainError("generalized_cot: r sqrt(k) must be below pi");
    return std::sqrt(k) / std::tan(a);
  }
  const double s = std::sqrt(-k);
  return s / std::tanh(r * s);
}

double model_circle_radius(double c, double k) {
  if (c <= 0) throw DomainError("model_circle_radius requires c > 0");
  if (std::abs(k) < 1e-300) return 1.0 / c;
  if (k > 0) {
    const double s = std::sqrt(k);
    return std::atan(s / c) / s;
  }
  const double s = std::sqrt(-k);
  if (k <= -c * c) throw DomainError("model_circle_radius requires k > -c^2");
  return std::atanh(s / c) / s;
}

namespace {

// Second positive-curvature condition, normalized to max curvature 1:
// value = max{2 pi c(1-2c)/m, pi c(1-2c)/m + acot(c/sqrt(m))/sqrt(m)}.
double positive_condition2_value(double m, double c) {
  const double sm = std::sqrt(m);
  const double t1 = 2.0 * kPi * c * (1.0 - 2.0 * c) / m;
  const double t2 = kPi * c * (1.0 - 2.0 * c) / m + std::atan(sm / c) / sm;
  return std::max(t1, t2);
}

// Branch value sqrt(m) cot(pi sqrt(m)); nonpositive past m = 1/4.
double upper_branch_c(double m) {
  if (m >= 1.0) return kClampedThreshold;
  return std::sqrt(m) / std::tan(kPi * std::sqrt(m));
}

}  // namespace

CriteriaReport evaluate_criteria(const SurfaceStats& stats, double c) {
  if (c <= 0) throw DomainError("evaluate_criteria requires c > 0");
  CriteriaReport rep;
  rep.min_curvature = stats.min_curvature;
  rep.max_curvature = stats.max_curvature;
  rep.injectivity_radius = stats.injectivity_radius;
  rep.c = c;
  const double minK = stats.min_curvature;
  const double maxK = stats.max_curvature;
  const double inj = stats.injectivity_radius;

  // General existence: c > ct_{minK}(inj). Past the conjugate bound the
  // threshold diverges to -inf; clamp so margins stay finite.
  double thr;
  if (minK > 0 && inj * std::sqrt(minK) >= kPi) {
    thr = kClampedThreshold;
  } else {
    thr = generalized_cot(minK, inj);
  }
  rep.general_existence = {c > thr, c - std::max(thr, kClampedThreshold)};

  rep.disconnected_node_excluded = {c * c + minK >= 0.0, c * c + minK};

  const double v2_thr = kPi * kPi / (4.0 * inj * inj) - minK;
  rep.connected_node_excluded_2v = {c * c >= v2_thr, c * c - v2_thr};

  if (minK > -c * c) {
    const double r0 = model_circle_radius(c, minK);
    rep.loop_window_empty = {inj > r0, inj - r0};
  } else {
    rep.loop_window_empty = {false, minK + c * c};
  }

  rep.positive_conditions_apply = minK > 0;
  if (rep.positive_conditions_apply) {
    const double m = minK / maxK;
    const double cn = c / std::sqrt(maxK);
    const double up = upper_branch_c(m);
    rep.positive_condition_1 = {cn > up, cn - std::max(up, kClampedThreshold)};
    const double v2 = positive_condition2_value(m, cn);
    rep.positive_condition_2 = {2.0 * kPi >= v2, 2.0 * kPi - v2};
    const GaussBonnetBounds gb = gauss_bonnet_bounds(0.0, 0.0, 0.0, m, cn);
    rep.area_upper_bound = gb.area_upper;
    rep.width_lower_bound = gb.width_lower;
  }
  return rep;
}

RegionBoundaryTrace figure1_region(int grid) {
  RegionBoundaryTrace trace;
  // Corner: simultaneous root of m = c(1-2c) and c = sqrt(m) cot(pi sqrt(m)).
  const double corner_m = bisect(
      [](double m) {
        const double c = upper_branch_c(m);
        return c * (1.0 - 2.0 * c) - m;
      },
      0.05, 0.2);
  const double corner_c = upper_branch_c(corner_m);
  trace.corner = Vec2(corner_m, corner_c);

  for (int i = 0; i <= grid; ++i) {
    const double m = 1e-6 + (corner_m - 1e-6) * i / grid;
    trace.upper.emplace_back(m, upper_branch_c(m));
  }

  auto lower_root_m = [](double c) {
    return bisect([c](double m) { return positive_condition2_value(m, c) - 2.0 * kPi; }, 1e-8,
                  1.0);
  };
  for (int i = 0; i <= grid; ++i) {
    const double c = 1e-6 + (corner_c - 1e-6) * i / grid;
    trace.lower.emplace_back(lower_root_m(c), c);
  }
  trace.lower_c_intercept_m = lower_root_m(1e-9);
  return trace;
}

double figure2_ours(double inj) { return 1.0 / std::tanh(inj); }

double figure2_comparison(double inj) {
  return 0.5 * kPi / inj * (1.0 + inj * inj / (2.0 * kPi));
}

ThresholdCurves figure2_curves(double inj_min, double inj_max, int grid) {
  ThresholdCurves curves;
  for (int i = 0; i <= grid; ++i) {
    const double inj = inj_min + (inj_max - inj_min) * i / grid;
    curves.ours.emplace_back(inj, figure2_ours(inj));
    curves.comparison.emplace_back(inj, figure2_comparison(inj));
  }
  return curves;
}

GaussBonnetBounds gauss_bonnet_bounds(double area, double boundary_length, double alpha,
                                      double min_curvature, double c) {
  (void)boundary_length;
  (void)alpha;
  if (min_curvature <= 0) throw DomainError("gauss_bonnet_bounds requires minK > 0");
  GaussBonnetBounds b;
  b.area_upper = 2.0 * kPi * (1.0 - 2.0 * c) / min_curvature;
  b.width_lower = 4.0 * kPi - 2.0 * kPi * c * (1.0 - 2.0 * c) / min_curvature;
  b.area_violated = area > b.area_upper;
  return b;
}

EtaEstimate isoperimetric_eta(const Surface& surface, double c) {
  if (c <= 0) throw DomainError("isoperimetric_eta requires c > 0");
  const SurfaceStats& st = surface.stats();
  EtaEstimate est;
  // Small-area profile constant from ball comparison at the curvature upper
  // bound: L_model(A)/sqrt(A) is minimized at the largest admissible area.
  const double half = 0.5 * st.area;
  double c1;
  if (st.max_curvature <= 0) {
    c1 = 2.0 * std::sqrt(kPi);
  } else {
    const double k = st.max_curvature;
    const double a_max = std::min(half, 2.0 * kPi / k);  // half the model sphere
    // Model cap: L^2 = A (4 pi - k A).
    c1 = std::sqrt(std::max(0.0, 4.0 * kPi - k * a_max));
  }
  const bool builtin = surface.family() == "flat_torus" ||
                       (surface.family() == "revolution" && st.curvature_certified);
  if (!builtin) c1 *= 0.5;  // conservative safety factor for generic surfaces
  est.c1 = c1;
  est.eta = std::min(c1 * c1 / (c * c), half);
  est.certified = false;
  return est;
}

}  // namespace isocurve
