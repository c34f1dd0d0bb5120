#include "isocurve/minmax.hpp"

#include <algorithm>
#include <cmath>

namespace isocurve {

// ---------------------------------------------------------------------------
// Sweepouts
// ---------------------------------------------------------------------------

Sweepout Sweepout::of_regions(std::vector<Region> slices) {
  Sweepout sw;
  sw.kind = Kind::Regions;
  sw.regions = std::move(slices);
  const int n = sw.slice_count();
  sw.params.resize(n);
  for (int i = 0; i < n; ++i) sw.params[i] = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
  return sw;
}

Sweepout Sweepout::of_paths(std::vector<DiscreteCurve> slices) {
  Sweepout sw;
  sw.kind = Kind::PinnedPaths;
  sw.paths = std::move(slices);
  const int n = sw.slice_count();
  sw.params.resize(n);
  for (int i = 0; i < n; ++i) sw.params[i] = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
  return sw;
}

bool sweepout_is_continuous(const Sweepout& sw, double bound) {
  if (sw.kind == Sweepout::Kind::Regions) {
    for (size_t i = 1; i < sw.regions.size(); ++i) {
      const double a0 = sw.regions[i - 1].is_empty() ? 0.0 : area(sw.regions[i - 1]);
      const double a1 = sw.regions[i].is_empty() ? 0.0 : area(sw.regions[i]);
      if (std::abs(a1 - a0) > bound) return false;
    }
    return true;
  }
  for (size_t i = 1; i < sw.paths.size(); ++i) {
    const DiscreteCurve& a = sw.paths[i - 1];
    const DiscreteCurve b = sw.paths[i].resampled_uniform(a.size());
    for (int k = 0; k < a.size(); ++k) {
      if (a.surface()->short_diff(b.vertices()[k], a.vertices()[k]).norm() > bound) return false;
    }
  }
  return true;
}

namespace {

double interior_geodesic_residual(const DiscreteCurve& c) {
  double worst = 0.0;
  const auto ks = geodesic_curvature(c, nullptr);
  for (int i = 0; i < c.size(); ++i) {
    if (!c.closed() && (i == 0 || i == c.size() - 1)) continue;
    worst = std::max(worst, std::abs(ks[i]));
  }
  return worst;
}

}  // namespace

WidthEstimate sweepout_max(const Sweepout& sw, double c) {
  WidthEstimate est;
  est.value = -std::numeric_limits<double>::infinity();
  const int n = sw.slice_count();
  if (n == 0) {
    est.value = 0.0;
    return est;
  }
  for (int i = 0; i < n; ++i) {
    double v;
    if (sw.kind == Sweepout::Kind::Regions) {
      const Region& r = sw.regions[i];
      v = r.is_empty() ? 0.0 : boundary_length(r) - (c != 0.0 ? c * area(r) : 0.0);
    } else {
      v = sw.paths[i].length();
    }
    if (v > est.value) {
      est.value = v;
      est.achieving_slice = i;
    }
  }
  if (sw.kind == Sweepout::Kind::Regions) {
    const Region& r = sw.regions[est.achieving_slice];
    if (!r.is_empty()) {
      double worst = 0.0;
      for (const auto& curve : r.boundary) {
        for (double k : geodesic_curvature(curve, &r)) worst = std::max(worst, std::abs(k - c));
      }
      est.achieving_residual = worst;
    }
  } else {
    est.achieving_residual = interior_geodesic_residual(sw.paths[est.achieving_slice]);
  }
  est.tight_value = est.value;
  return est;
}

// ---------------------------------------------------------------------------
// Pull-tight width
// ---------------------------------------------------------------------------

WidthEstimate pull_tight_width(const Vec2& p, const Vec2& q, const Region& region,
                               const DiscreteCurve& end1, const DiscreteCurve& end2,
                               const PullTightConfig& cfg) {
  const SurfacePtr surface = end1.surface();
  const Surface& s = *surface;
  WidthEstimate est;

  // convexity-to-inside check on the region boundary
  double min_inward = std::numeric_limits<double>::infinity();
  for (const auto& b : region.boundary) {
    for (double k : geodesic_curvature(b, &region)) min_inward = std::min(min_inward, k);
  }
  if (min_inward < -1e-6) {
    est.nonconvex_boundary = true;
    if (cfg.require_convex) {
      throw DomainError("region boundary is not convex toward the inside (min curvature " +
                        std::to_string(min_inward) + ")");
    }
  }

  const DiscreteCurve a = end1.resampled_uniform(cfg.resolution);
  const DiscreteCurve b = end2.resampled_uniform(cfg.resolution);
  if (s.short_diff(a.vertices().front(), p).norm() > 1e-6 ||
      s.short_diff(a.vertices().back(), q).norm() > 1e-6 ||
      s.short_diff(b.vertices().front(), p).norm() > 1e-6 ||
      s.short_diff(b.vertices().back(), q).norm() > 1e-6) {
    throw ConfigError("endpoint curves must run from p to q");
  }

  // initial family: vertexwise interpolation of the unwrapped coordinates
  std::vector<Vec2> ca{a.vertices().front()};
  for (int i = 0; i + 1 < a.size(); ++i) ca.push_back(ca.back() + a.segment_diff(i));
  std::vector<Vec2> cb{ca.front()};
  for (int i = 0; i + 1 < b.size(); ++i) cb.push_back(cb.back() + b.segment_diff(i));

  std::vector<DiscreteCurve> slices;
  slices.reserve(cfg.slices);
  for (int t = 0; t < cfg.slices; ++t) {
    const double u = cfg.slices > 1 ? static_cast<double>(t) / (cfg.slices - 1) : 0.0;
    std::vector<Vec2> verts(cfg.resolution);
    for (int i = 0; i < cfg.resolution; ++i) {
      verts[i] = s.wrap((1.0 - u) * ca[i] + u * cb[i]);
    }
    verts.front() = p;
    verts.back() = q;
    slices.emplace_back(DiscreteCurve::pinned(surface, std::move(verts)));
  }

  auto family_argmax = [&]() {
    int arg = 0;
    double m = -1.0;
    for (size_t i = 0; i < slices.size(); ++i) {
      const double len = slices[i].length();
      if (len > m) {
        m = len;
        arg = static_cast<int>(i);
      }
    }
    return std::make_pair(arg, m);
  };

  double prev_max = family_argmax().second;
  bool converged = false;
  for (int round = 0; round < cfg.max_rounds; ++round) {
    for (auto& sl : slices) sl = birkhoff_map(sl, cfg.birkhoff);
    const auto [arg, now] = family_argmax();
    if (prev_max - now < cfg.tolerance * (1.0 + now) &&
        interior_geodesic_residual(slices[arg]) < cfg.residual_target) {
      converged = true;
      break;
    }
    prev_max = now;
  }
  if (!converged) throw IterationBudget("pull-tight rounds exhausted before convergence");

  est.tight_value = 0.0;
  for (size_t i = 0; i < slices.size(); ++i) {
    const double len = slices[i].length();
    if (len > est.tight_value) {
      est.tight_value = len;
      est.achieving_slice = static_cast<int>(i);
    }
  }
  est.achieving_residual = interior_geodesic_residual(slices[est.achieving_slice]);
  const double end_max = std::max(end1.length(), end2.length());
  est.value = std::max(est.tight_value, end_max);
  est.degenerate_endpoint = end_max >= est.tight_value - 1e-9;
  est.upper_bound = true;
  return est;
}

// ---------------------------------------------------------------------------
// Cut-and-paste surgery
// ---------------------------------------------------------------------------

namespace {

struct BallCrossing {
  Vec2 point = Vec2::Zero();  // wrapped
  double angle = 0.0;         // around the node
  int arc_start = -1;         // outside arc leaving this crossing
  int arc_end = -1;           // outside arc arriving here
};

struct OutsideArc {
  std::vector<Vec2> pts;  // wrapped, from exit crossing to entry crossing
  int from = -1;          // crossing indices
  int to = -1;
};

double ball_distance(const Surface& s, const Vec2& p, const Vec2& center) {
  const Vec2 d = s.short_diff(p, center);
  return s.norm(s.wrap(center + 0.5 * d), d);
}

}  // namespace

SurgeryResult cut_and_paste(const Region& region, const NodeData& node, double step, double r,
                            SurgerySign sign, double c, const IntegratorConfig& integrator) {
  SurgeryResult result;
  result.step = step;
  result.scale = r;
  result.ac_before = ac_functional(region, c);
  if (r <= 1e-12) {
    result.modified = region;
    result.ac_after = result.ac_before;
    return result;
  }
  const Surface& s = *region.surface();
  const double rc = s.surgery_scale(c);
  if (r > rc * 1.0000001) {
    throw ScaleTooLarge("surgery radius " + std::to_string(r) + " exceeds the surgery scale " +
                        std::to_string(rc));
  }

  // 1. collect the four ball-boundary crossings and the outside arcs
  std::vector<BallCrossing> crossings;
  std::vector<OutsideArc> arcs;
  for (const auto& curve : region.boundary) {
    const int n = curve.size();
    std::vector<double> dist(n);
    for (int i = 0; i < n; ++i) dist[i] = ball_distance(s, curve.vertices()[i], node.point);
    std::vector<std::pair<int, Vec2>> cuts;  // (segment index, crossing point)
    for (int i = 0; i < n; ++i) {
      const int j = curve.next(i);
      if ((dist[i] < r) != (dist[j] < r)) {
        const double t = (r - dist[i]) / (dist[j] - dist[i]);
        cuts.emplace_back(i, s.wrap(curve.vertices()[i] + t * curve.segment_diff(i)));
      }
    }
    if (cuts.empty()) continue;
    if (cuts.size() % 2 != 0) throw OrderingAmbiguous("odd number of ball crossings");
    // walk between consecutive cuts; keep the arcs whose interior is outside
    for (size_t k = 0; k < cuts.size(); ++k) {
      const auto& [i0, p0] = cuts[k];
      const auto& [i1, p1] = cuts[(k + 1) % cuts.size()];
      // does this arc run outside? test the first vertex after the cut
      const int probe = curve.next(i0);
      const bool outside = dist[probe] >= r;
      if (!outside) continue;
      OutsideArc arc;
      arc.pts.push_back(p0);
      for (int i = curve.next(i0); i != curve.next(i1); i = curve.next(i)) {
        arc.pts.push_back(curve.vertices()[i]);
      }
      arc.pts.push_back(p1);
      const int ci = static_cast<int>(crossings.size());
      crossings.push_back({p0, 0.0, -1, -1});
      crossings.push_back({p1, 0.0, -1, -1});
      arc.from = ci;
      arc.to = ci + 1;
      arcs.push_back(std::move(arc));
    }
  }
  if (crossings.size() != 4 || arcs.size() != 2) {
    throw OrderingAmbiguous("expected four ball crossings and two outside arcs, found " +
                            std::to_string(crossings.size()) + "/" + std::to_string(arcs.size()));
  }
  for (size_t i = 0; i < arcs.size(); ++i) {
    crossings[arcs[i].from].arc_start = static_cast<int>(i);
    crossings[arcs[i].to].arc_end = static_cast<int>(i);
  }

  // 2. angular order of the crossings around the node
  const Mat2 frame = s.to_frame(node.point);
  for (auto& cr : crossings) {
    const Vec2 f = frame * s.short_diff(cr.point, node.point);
    cr.angle = std::atan2(f.y(), f.x());
  }
  std::vector<int> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return crossings[a].angle < crossings[b].angle; });

  // 3. wedge membership; expect alternation in/out/in/out
  std::vector<bool> wedge_in(4);
  for (int w = 0; w < 4; ++w) {
    const double a0 = crossings[order[w]].angle;
    double a1 = crossings[order[(w + 1) % 4]].angle;
    if (a1 <= a0) a1 += 2 * kPi;
    const double mid = 0.5 * (a0 + a1);
    const Vec2 dir = frame.inverse() * Vec2(std::cos(mid), std::sin(mid));
    const Vec2 probe = s.wrap(node.point + 0.5 * r * dir / std::max(s.norm(node.point, dir), 1e-300));
    wedge_in[w] = region_contains(region, probe);
  }
  if (wedge_in[0] == wedge_in[1] || wedge_in[1] == wedge_in[2] || wedge_in[2] == wedge_in[3]) {
    throw OrderingAmbiguous("wedges around the node do not alternate");
  }

  // 4. connectors across the two selected wedges
  const bool want_in = (sign == SurgerySign::Minus);
  std::vector<std::pair<int, int>> pairs;  // crossing index pairs
  for (int w = 0; w < 4; ++w) {
    if (wedge_in[w] == want_in) pairs.emplace_back(order[w], order[(w + 1) % 4]);
  }

  auto connector_between = [&](const Vec2& from, const Vec2& to) -> std::vector<Vec2> {
    if (sign == SurgerySign::Plus) {
      return s.geodesic_between(from, to, 17, integrator);
    }
    const auto left = constant_curvature_arc(s, from, to, c, true, 17, integrator);
    const auto right = constant_curvature_arc(s, from, to, c, false, 17, integrator);
    const double dl = ball_distance(s, left[left.size() / 2], node.point);
    const double dr = ball_distance(s, right[right.size() / 2], node.point);
    return (dl < dr) ? left : right;  // the trimming arc bows toward the node
  };

  // 5. assemble closed loops, alternating outside arcs and connectors; an
  // arc is traversed in reverse when the fused boundary flips its lobe
  std::vector<std::vector<Vec2>> loops;
  std::vector<bool> arc_used(2, false);
  for (int start = 0; start < 2; ++start) {
    if (arc_used[start]) continue;
    std::vector<Vec2> loop;
    int arc = start;
    bool forward = true;
    bool closed = false;
    for (int guard = 0; guard < 4 && !closed; ++guard) {
      arc_used[arc] = true;
      if (forward) {
        loop.insert(loop.end(), arcs[arc].pts.begin(), arcs[arc].pts.end() - 1);
      } else {
        loop.insert(loop.end(), arcs[arc].pts.rbegin(), arcs[arc].pts.rend() - 1);
      }
      const int at = forward ? arcs[arc].to : arcs[arc].from;
      int other = -1;
      for (const auto& [u, v] : pairs) {
        if (u == at) other = v;
        if (v == at) other = u;
      }
      if (other < 0) throw OrderingAmbiguous("crossing is not matched by a connector");
      const auto conn = connector_between(crossings[at].point, crossings[other].point);
      loop.insert(loop.end(), conn.begin(), conn.end() - 1);
      int next_arc, next_forward;
      if (crossings[other].arc_start >= 0) {
        next_arc = crossings[other].arc_start;
        next_forward = true;
      } else {
        next_arc = crossings[other].arc_end;
        next_forward = false;
      }
      if (next_arc < 0) throw OrderingAmbiguous("connector endpoint has no continuing arc");
      if (next_arc == start && next_forward) {
        closed = true;
      } else {
        arc = next_arc;
        forward = next_forward;
      }
    }
    if (!closed) throw OrderingAmbiguous("surgery loop did not close");
    loops.push_back(std::move(loop));
  }

  Region out;
  for (auto& loop : loops) {
    if (static_cast<int>(loop.size()) < 8) throw Error("surgery produced a degenerate loop");
    out.boundary.emplace_back(DiscreteCurve::loop(region.surface(), std::move(loop)));
  }
  out.witness = region.witness;
  out.mass = Region::Mass::Support;
  result.modified = std::move(out);
  result.ac_after = ac_functional(result.modified, c);
  return result;
}

// ---------------------------------------------------------------------------
// Competitor family for a disconnected-region node
// ---------------------------------------------------------------------------

namespace {

Vec2 lobe_interior_probe(const DiscreteCurve& curve) {
  const Surface& s = *curve.surface();
  std::vector<Vec2> cover{curve.vertices()[0]};
  for (int i = 0; i + 1 < curve.size(); ++i) cover.push_back(cover.back() + curve.segment_diff(i));
  Vec2 centroid = Vec2::Zero();
  for (const Vec2& p : cover) centroid += p;
  centroid /= static_cast<double>(cover.size());
  Vec2 probe = s.wrap(centroid);
  if (curve_contains(curve, probe)) return probe;
  // fall back to nudging toward the densest vertex cluster
  for (int i = 0; i < curve.size(); ++i) {
    const Vec2 inward = s.short_diff(probe, curve.vertices()[i]);
    const Vec2 q = s.wrap(curve.vertices()[i] + 0.1 * inward);
    if (curve_contains(curve, q)) return q;
  }
  throw Error("could not find an interior probe for the lobe");
}

}  // namespace

CompetitorSweepout competitor_sweepout_config1(const Region& region, const NodeData& node,
                                               const std::vector<TestFunction>& phi, double c,
                                               const CompetitorConfig& cfg) {
  if (node.configuration != NodeConfiguration::DisconnectedRegion) {
    throw ConfigError("this competitor construction expects a disconnected-region node");
  }
  if (phi.size() != region.boundary.size()) {
    throw ConfigError("one test function per boundary curve is required");
  }
  const Surface& s = *region.surface();

  // precondition: the assembled quadratic form must be negative
  double q_total = 0.0;
  for (size_t k = 0; k < region.boundary.size(); ++k) {
    q_total += second_variation(region.boundary[k], std::nullopt, phi[k], c);
  }
  {
    const double phi0 = phi.front().values[node.t0];
    const double phi1 = phi.back().values[node.t1];
    q_total += node_correction(node.configuration, node.alpha, phi0, phi1, c);
  }
  if (q_total >= 0.0) {
    throw NoNegativeDirection("second variation is nonnegative for the supplied test function");
  }

  // Families per lobe. phi is given against the Lipschitz normal that equals
  // the outward normal on the first lobe and its negative on the second, so
  // the second lobe's outward coefficients flip sign.
  std::vector<PerturbationFamily> families;
  for (size_t k = 0; k < region.boundary.size(); ++k) {
    Region lobe;
    lobe.boundary = {region.boundary[k]};
    lobe.witness = lobe_interior_probe(region.boundary[k]);
    std::vector<double> coeff = phi[k].values;
    if (k == 1) {
      for (double& v : coeff) v = -v;
    }
    families.push_back(PerturbationFamily::outward(lobe, std::move(coeff)));
  }

  const double rc = cfg.surgery_scale > 0 ? cfg.surgery_scale : s.surgery_scale(c);
  auto region_at = [&](double sv) {
    Region out;
    for (auto& fam : families) out.boundary.push_back(fam.at(sv));
    out.witness = region.witness;
    out.mass = Region::Mass::Support;
    return out;
  };

  CompetitorSweepout comp;
  comp.base_ac = ac_functional(region, c);
  std::vector<Region> slices;
  // (2) grow the perturbation at full surgery scale, trimming inward
  for (int i = 0; i <= cfg.s_steps; ++i) {
    const double sv = cfg.epsilon * i / cfg.s_steps;
    slices.push_back(cut_and_paste(region_at(sv), node, sv, rc, SurgerySign::Minus, c,
                                   cfg.integrator)
                         .modified);
  }
  // (3) shrink the inward trim back to the perturbed region
  const Region at_eps = region_at(cfg.epsilon);
  for (int i = cfg.r_steps - 1; i >= 0; --i) {
    const double r = rc * i / cfg.r_steps;
    slices.push_back(
        cut_and_paste(at_eps, node, cfg.epsilon, r, SurgerySign::Minus, c, cfg.integrator)
            .modified);
  }
  // (4) open the outward trim
  for (int i = 1; i <= cfg.r_steps; ++i) {
    const double r = rc * i / cfg.r_steps;
    slices.push_back(
        cut_and_paste(at_eps, node, cfg.epsilon, r, SurgerySign::Plus, c, cfg.integrator)
            .modified);
  }
  // (5) relax the perturbation at full outward trim
  for (int i = cfg.s_steps - 1; i >= 0; --i) {
    const double sv = cfg.epsilon * i / cfg.s_steps;
    slices.push_back(cut_and_paste(region_at(sv), node, sv, rc, SurgerySign::Plus, c,
                                   cfg.integrator)
                         .modified);
  }
  comp.sweepout = Sweepout::of_regions(std::move(slices));
  comp.max_ac = sweepout_max(comp.sweepout, c).value;
  comp.margin = comp.base_ac - comp.max_ac;
  return comp;
}

// ---------------------------------------------------------------------------
// Positive-curvature competitor bound
// ---------------------------------------------------------------------------

std::vector<DiscreteCurve> monotone_contraction(const DiscreteCurve& curve, const Region& disk,
                                                double c, const FlowConfig& cfg) {
  std::vector<DiscreteCurve> slices;
  DiscreteCurve current = curve.resampled_uniform(cfg.resolution);
  const Surface& s = *current.surface();
  const double total = s.total_area();

  auto disk_region_of = [&](const DiscreteCurve& cv) {
    Region r;
    r.boundary = {cv};
    r.witness = disk.witness;
    r.mass = Region::Mass::Support;
    return r;
  };
  auto ac_of = [&](const DiscreteCurve& cv) {
    const Region r = disk_region_of(cv);
    return cv.length() - c * area(r);
  };

  slices.push_back(current);
  double prev_ac = ac_of(current);
  for (int step = 1; step <= cfg.max_iterations; ++step) {
    const Region reg = disk_region_of(current);
    const auto kappa = geodesic_curvature(current, &reg);
    const bool left = region_on_left(current, reg);
    double min_len = std::numeric_limits<double>::infinity();
    for (int i = 0; i < current.segment_count(); ++i) {
      min_len = std::min(min_len, current.segment_length(i));
    }
    double fmax = c;
    for (int i = 0; i < current.size(); ++i) fmax = std::max(fmax, -kappa[i]);
    const double dt = cfg.dt_factor * min_len * min_len / std::max(fmax, 1e-12);
    std::vector<Vec2> next(current.size());
    for (int i = 0; i < current.size(); ++i) {
      const Vec2 tangent = current.segment_diff(current.prev(i)) + current.segment_diff(i);
      Vec2 nrm = s.left_normal(current.vertices()[i], tangent);
      nrm /= std::max(s.norm(current.vertices()[i], nrm), 1e-300);
      if (left) nrm = -nrm;  // outward of the disk
      const double speed = std::max(-kappa[i], c);
      const Vec2 v = dt * speed * nrm;
      next[i] = s.exp_map({current.vertices()[i], v});
    }
    DiscreteCurve moved(current.surface(), std::move(next), true);
    if (step % cfg.resample_every == 0) moved = moved.resampled_uniform(cfg.resolution);
    const double now_ac = ac_of(moved);
    if (now_ac > prev_ac + 1e-6) {
      throw Error("monotone contraction violated the functional decrease at step " +
                  std::to_string(step) + " (" + std::to_string(prev_ac) + " -> " +
                  std::to_string(now_ac) + ")");
    }
    prev_ac = now_ac;
    current = moved;
    if (step % cfg.record_every == 0) slices.push_back(current);
    if (total - area(disk_region_of(current)) < cfg.area_floor) {
      slices.push_back(current);
      return slices;
    }
    if (!detect_nodes(current).empty()) {
      throw EmbeddednessLost("contraction slice developed a self-intersection");
    }
  }
  throw NoCollapse("contraction budget exhausted before covering the surface");
}

PositiveCurvatureBound competitor_bound_positive(const Region& region, const NodeData& node,
                                                 double c, const PositiveBoundConfig& cfg) {
  if (node.configuration != NodeConfiguration::ConnectedRegion) {
    throw ConfigError("the positive-curvature bound expects a connected-region node");
  }
  if (region.boundary.size() != 1) {
    throw ConfigError("the positive-curvature bound expects a single immersed boundary curve");
  }
  const DiscreteCurve& gamma = region.boundary.front();
  const SurfacePtr surface = gamma.surface();
  const Surface& s = *surface;

  // split the boundary at the node into the two based loops; the closed loops
  // take the basepoint once, the pinned paths carry it at both ends
  auto build_arc = [&](int from, int to, bool include_end) {
    std::vector<Vec2> pts;
    for (int i = from; i != to; i = gamma.next(i)) pts.push_back(gamma.vertices()[i]);
    if (include_end) pts.push_back(gamma.vertices()[to]);
    return pts;
  };
  const std::vector<Vec2> loop1 = build_arc(node.t0, node.t1, false);
  const std::vector<Vec2> loop2 = build_arc(node.t1, node.t0, false);

  PositiveCurvatureBound out;
  const DiscreteCurve gamma1 = DiscreteCurve::loop(surface, loop1);
  const DiscreteCurve gamma2 = DiscreteCurve::loop(surface, loop2);
  out.loop1_length = gamma1.length();
  out.loop2_length = gamma2.length();

  // path 1: round the corner and flow the first loop to a point (reversal is
  // the sweepout's opening segment; only the length bound matters here)
  const double r = cfg.corner_scale > 0 ? cfg.corner_scale : 0.5 * s.surgery_scale(c);
  NodeData corner = node;
  const DiscreteCurve rounded = round_corner(gamma1, corner, r, CornerMode::Geodesic);
  const CsfPath path1 = csf_path_to_point(rounded, cfg.flow, c);
  if (path1.max_length > out.loop1_length * (1 + 1e-6)) {
    throw Error("shortening-flow path exceeded the loop length bound");
  }

  // path 2: pulled-tight family between the loops, pinned at the node point
  const DiscreteCurve pinned1 =
      DiscreteCurve::pinned(surface, build_arc(node.t0, node.t1, true));
  const DiscreteCurve pinned2 =
      DiscreteCurve::pinned(surface, build_arc(node.t1, node.t0, true));
  PullTightConfig pt = cfg.pull_tight;
  pt.require_convex = false;  // the node corner always breaks strict convexity
  const WidthEstimate width = pull_tight_width(node.point, node.point, region, pinned1, pinned2, pt);
  out.tight_width = width.tight_value;
  out.degenerate_width = width.degenerate_endpoint;

  // path 3: monotone contraction of the second loop across the complement
  Region disk2;
  disk2.boundary = {gamma2};
  disk2.witness = region.witness;
  disk2.mass = Region::Mass::Support;
  (void)monotone_contraction(gamma2, disk2, c, cfg.flow);

  out.bound = std::max({out.loop1_length, width.value, out.loop2_length});

  const SurfaceStats& st = s.stats();
  if (st.min_curvature > 0) {
    const double scale = std::sqrt(st.max_curvature);
    const GaussBonnetBounds gb =
        gauss_bonnet_bounds(0.0, 0.0, 0.0, st.min_curvature / st.max_curvature, c / scale);
    out.width_lower_bound = gb.width_lower / scale;
    out.lower_bound_consistent = out.bound >= out.width_lower_bound;
  }
  return out;
}

}  // namespace isocurve
