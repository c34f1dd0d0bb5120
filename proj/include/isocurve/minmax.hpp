// Sweepouts, pulled-tight width estimation, cut-and-paste surgeries, and the
// competitor constructions they assemble into.
#pragma once

#include "isocurve/criteria.hpp"
#include "isocurve/shortening.hpp"

namespace isocurve {

struct Sweepout {
  enum class Kind { Regions, PinnedPaths };

  Kind kind = Kind::Regions;
  std::vector<Region> regions;
  std::vector<DiscreteCurve> paths;
  std::vector<double> params;  // in [0, 1], one per slice

  int slice_count() const {
    return static_cast<int>(kind == Kind::Regions ? regions.size() : paths.size());
  }
  static Sweepout of_regions(std::vector<Region> slices);
  static Sweepout of_paths(std::vector<DiscreteCurve> slices);
};

// Discrete continuity check: adjacent slices differ in area (regions) or in
// vertex positions (paths) by less than the bound.
bool sweepout_is_continuous(const Sweepout& sw, double bound);

struct WidthEstimate {
  double value = 0.0;             // max of the functional over the family
  int achieving_slice = -1;
  double achieving_residual = 0.0;  // max |geodesic curvature| of that slice
  bool upper_bound = true;
  bool lower_bound = false;
  // pull-tight extras
  double tight_value = 0.0;       // max over the pulled-tight family alone
  bool degenerate_endpoint = false;  // value realized by an input endpoint curve
  bool nonconvex_boundary = false;   // region boundary failed the convexity check
};

// Max of A^c over region slices, or of length over path slices (c ignored).
WidthEstimate sweepout_max(const Sweepout& sw, double c);

struct PullTightConfig {
  BirkhoffConfig birkhoff;
  int slices = 64;
  int resolution = 96;
  int max_rounds = 600;
  double tolerance = 1e-7;        // stop when the max-length decrease per round is below
  double residual_target = 1e-3;  // and the widest slice is this close to geodesic
  bool require_convex = true;
};

// Width of the path family from end1 to end2 (both pinned at p, q) through
// the region: every slice is repeatedly Birkhoff-shortened until the longest
// slice stops decreasing. `value` is max{len(end1), tight, len(end2)}.
WidthEstimate pull_tight_width(const Vec2& p, const Vec2& q, const Region& region,
                               const DiscreteCurve& end1, const DiscreteCurve& end2,
                               const PullTightConfig& cfg);

enum class SurgerySign { Plus, Minus };

struct SurgeryResult {
  Region modified;
  double ac_before = 0.0;
  double ac_after = 0.0;
  double step = 0.0;   // s bookkeeping
  double scale = 0.0;  // r
};

// Cut-and-paste at the node: Plus replaces the two wedges of the complement
// by minimizing geodesic chords; Minus replaces the two region wedges by
// constant-curvature-c arcs bending into them, deleting overlap once.
SurgeryResult cut_and_paste(const Region& region, const NodeData& node, double s, double r,
                            SurgerySign sign, double c,
                            const IntegratorConfig& integrator = {});

struct CompetitorConfig {
  double epsilon = 0.05;   // perturbation extent
  int s_steps = 8;
  int r_steps = 8;
  double surgery_scale = 0.0;  // 0 = derive from the surface
  IntegratorConfig integrator;
};

struct CompetitorSweepout {
  Sweepout sweepout;
  double base_ac = 0.0;
  double max_ac = 0.0;
  double margin = 0.0;  // base_ac - max_ac, positive on success
};

// Competitor family for a disconnected-region node: perturb along phi, apply
// the minus surgery inward and the plus surgery outward, and report how far
// the family stays below the starting value. phi is given per boundary curve.
CompetitorSweepout competitor_sweepout_config1(const Region& region, const NodeData& node,
                                               const std::vector<TestFunction>& phi, double c,
                                               const CompetitorConfig& cfg);

struct PositiveCurvatureBound {
  double bound = 0.0;  // max{len(loop1), width, len(loop2)}
  double loop1_length = 0.0;
  double loop2_length = 0.0;
  double tight_width = 0.0;
  bool degenerate_width = false;
  // consistency against the closed-form width lower bound, when applicable
  bool lower_bound_consistent = true;
  double width_lower_bound = 0.0;
};

struct PositiveBoundConfig {
  FlowConfig flow;
  PullTightConfig pull_tight;
  double corner_scale = 0.0;  // 0 = derive
};

// Upper bound for the first min-max width built from a connected-region node:
// split the boundary at the node, take the shortening-flow path of one loop,
// the pulled-tight path family between the loops, and a monotone contraction
// of the other side.
PositiveCurvatureBound competitor_bound_positive(const Region& region, const NodeData& node,
                                                 double c, const PositiveBoundConfig& cfg);

// Monotone contraction helper: flows the curve with inward normal speed
// max(kappa, c), asserting per-step monotonicity of A^c of the growing disk;
// throws with a diagnostic when monotonicity fails.
std::vector<DiscreteCurve> monotone_contraction(const DiscreteCurve& curve, const Region& disk,
                                                double c, const FlowConfig& cfg);

}  // namespace isocurve
