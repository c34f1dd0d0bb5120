#include "isocurve/shortening.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace isocurve {

namespace {

// Cover-space polyline assembly: chain wrapped points into one sheet.
std::vector<Vec2> chain_to_cover(const Surface& s, const std::vector<Vec2>& wrapped) {
  std::vector<Vec2> out;
  out.reserve(wrapped.size());
  out.push_back(wrapped.front());
  for (size_t i = 1; i < wrapped.size(); ++i) {
    out.push_back(out.back() + s.short_diff(wrapped[i], wrapped[i - 1]));
  }
  return out;
}

double polyline_length(const Surface& s, const std::vector<Vec2>& cover) {
  double len = 0.0;
  for (size_t i = 0; i + 1 < cover.size(); ++i) {
    const Vec2 d = cover[i + 1] - cover[i];
    len += s.norm(s.wrap(cover[i] + 0.5 * d), d);
  }
  return len;
}

// Point at a fraction of total arclength along a cover polyline.
Vec2 polyline_at(const Surface& s, const std::vector<Vec2>& cover, double frac) {
  std::vector<double> cum(cover.size(), 0.0);
  for (size_t i = 0; i + 1 < cover.size(); ++i) {
    const Vec2 d = cover[i + 1] - cover[i];
    cum[i + 1] = cum[i] + s.norm(s.wrap(cover[i] + 0.5 * d), d);
  }
  const double target = frac * cum.back();
  size_t seg = 0;
  while (seg + 2 < cum.size() && cum[seg + 1] < target) ++seg;
  const double span = cum[seg + 1] - cum[seg];
  const double t = span > 0 ? (target - cum[seg]) / span : 0.0;
  return cover[seg] + t * (cover[seg + 1] - cover[seg]);
}

// Prefix of a cover polyline up to a fraction of its arclength.
std::vector<Vec2> polyline_prefix(const Surface& s, const std::vector<Vec2>& cover, double frac) {
  std::vector<Vec2> out{cover.front()};
  const double target = frac * polyline_length(s, cover);
  double acc = 0.0;
  for (size_t i = 0; i + 1 < cover.size(); ++i) {
    const Vec2 d = cover[i + 1] - cover[i];
    const double l = s.norm(s.wrap(cover[i] + 0.5 * d), d);
    if (acc + l >= target) {
      const double t = l > 0 ? (target - acc) / l : 0.0;
      out.push_back(cover[i] + t * d);
      return out;
    }
    acc += l;
    out.push_back(cover[i + 1]);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Birkhoff curve shortening map
// ---------------------------------------------------------------------------

DiscreteCurve birkhoff_map(const DiscreteCurve& curve, const BirkhoffConfig& cfg) {
  if (curve.closed() || !curve.pins()) {
    throw ConfigError("birkhoff_map operates on endpoint-pinned curves");
  }
  const Surface& s = *curve.surface();
  const double r0 = cfg.max_segment > 0 ? cfg.max_segment : s.uniqueness_radius();
  int breaks = cfg.breaks;
  if (breaks <= 0) breaks = std::max(2, static_cast<int>(std::ceil(curve.length() / (0.8 * r0))));

  // Step 0: equal parameter breaks on the input parametrization.
  const std::vector<Vec2> cover = curve.unwrap();
  const int pieces = 2 * breaks + 2;
  std::vector<Vec2> bp(pieces + 1);
  for (int i = 0; i <= pieces; ++i) {
    const double idx = static_cast<double>(i) / pieces * (cover.size() - 1);
    const size_t j = std::min(static_cast<size_t>(idx), cover.size() - 2);
    bp[i] = cover[j] + (idx - j) * (cover[j + 1] - cover[j]);
  }

  auto replace_arc = [&](const Vec2& a, const Vec2& b) -> std::vector<Vec2> {
    const Vec2 d = s.short_diff(s.wrap(b), s.wrap(a));
    const double chord = s.norm(s.wrap(a + 0.5 * d), d);
    if (chord > r0 * 1.0000001) {
      throw SegmentTooLong("replacement span " + std::to_string(chord) +
                           " exceeds the segment cap " + std::to_string(r0));
    }
    const auto arc =
        s.geodesic_between(s.wrap(a), s.wrap(b), cfg.samples_per_arc + 1, cfg.integrator);
    // re-anchor the wrapped arc next to a in the cover
    std::vector<Vec2> out = chain_to_cover(s, arc);
    const Vec2 shift = a - out.front();
    for (auto& p : out) p += shift;
    return out;
  };

  // Step 1: even replacement. The image of each odd break under the affine
  // geodesic parametrization is the arclength midpoint of its arc.
  std::vector<std::vector<Vec2>> arcs(breaks + 1);
  for (int j = 0; j <= breaks; ++j) arcs[j] = replace_arc(bp[2 * j], bp[2 * j + 2]);

  // Steps 2+3: odd replacement between consecutive arc midpoints, keeping the
  // outer halves of the first and last arcs.
  std::vector<Vec2> result = polyline_prefix(s, arcs[0], 0.5);
  for (int j = 1; j <= breaks; ++j) {
    const Vec2 prev_mid = result.back();
    const Vec2 mid = polyline_at(s, arcs[j], 0.5);
    std::vector<Vec2> odd_arc = replace_arc(prev_mid, mid);
    result.insert(result.end(), odd_arc.begin() + 1, odd_arc.end());
  }
  {
    // trailing half of the last arc, reversed prefix trick
    std::vector<Vec2> rev(arcs[breaks].rbegin(), arcs[breaks].rend());
    std::vector<Vec2> tail = polyline_prefix(s, rev, 0.5);
    for (auto it = tail.rbegin(); it != tail.rend(); ++it) {
      if ((*it - result.back()).norm() > 1e-15) result.push_back(*it);
    }
  }

  // Step 4: constant-speed reparametrization at the original resolution.
  std::vector<Vec2> wrapped(result.size());
  for (size_t i = 0; i < result.size(); ++i) wrapped[i] = s.wrap(result[i]);
  DiscreteCurve dense = DiscreteCurve::pinned(curve.surface(), std::move(wrapped));
  DiscreteCurve out = dense.resampled_uniform(curve.size());
  // monotone projection: within two-point-solver noise of a fixed point the
  // resampled candidate can come out marginally longer; keep the input then
  if (out.length() > curve.length()) return curve;
  return out;
}

// ---------------------------------------------------------------------------
// Curve shortening flow
// ---------------------------------------------------------------------------

DiscreteCurve csf_step(const DiscreteCurve& curve, double dt, double area_floor) {
  if (!curve.closed()) throw ConfigError("curve shortening flow expects closed curves");
  const Surface& s = *curve.surface();
  double min_len = std::numeric_limits<double>::infinity();
  for (int i = 0; i < curve.segment_count(); ++i) {
    min_len = std::min(min_len, curve.segment_length(i));
  }
  if (dt > 0.4000001 * min_len * min_len) {
    throw StabilityViolation("time step exceeds the parabolic bound for this resolution");
  }
  if (area_floor > 0 && curve_min_side_area(curve) < area_floor) {
    throw CollapseDetected("enclosed area fell below the collapse floor");
  }
  const std::vector<double> kappa = geodesic_curvature(curve, nullptr);
  std::vector<Vec2> next(curve.size());
  for (int i = 0; i < curve.size(); ++i) {
    const Vec2 tangent = curve.segment_diff(curve.prev(i)) + curve.segment_diff(i);
    Vec2 n = s.left_normal(curve.vertices()[i], tangent);
    n /= std::max(s.norm(curve.vertices()[i], n), 1e-300);
    const Vec2 v = dt * kappa[i] * n;
    next[i] = (v.norm() < 1e-300) ? curve.vertices()[i] : s.exp_map({curve.vertices()[i], v});
  }
  return DiscreteCurve(curve.surface(), std::move(next), true);
}

CsfPath csf_path_to_point(const DiscreteCurve& curve, const FlowConfig& cfg, double c_for_trace) {
  CsfPath path;
  DiscreteCurve current = curve.resampled_uniform(cfg.resolution);
  path.slices.push_back(current);
  path.max_length = current.length();

  auto record_trace = [&](int step) {
    FlowTraceRow row;
    row.step = step;
    row.length = current.length();
    row.area = curve_min_side_area(current);
    row.ac = row.length - c_for_trace * row.area;
    double worst = 0.0;
    try {
      for (double k : geodesic_curvature(current, nullptr)) {
        worst = std::max(worst, std::abs(k - c_for_trace));
      }
    } catch (const DegenerateVertex&) {
      worst = 0.0;
    }
    row.max_residual = worst;
    path.trace.push_back(row);
  };
  record_trace(0);

  auto finish = [&](int step) {
    path.slices.push_back(current);
    record_trace(step);
    const std::vector<Vec2> cover = current.unwrap();
    Vec2 centroid = Vec2::Zero();
    for (size_t i = 0; i + 1 < cover.size(); ++i) centroid += cover[i];
    centroid /= static_cast<double>(cover.size() - 1);
    path.collapse_point = current.surface()->wrap(centroid);
    std::vector<Vec2> pt(static_cast<size_t>(current.size()), path.collapse_point);
    path.slices.push_back(DiscreteCurve(current.surface(), std::move(pt), true));
  };

  for (int step = 1; step <= cfg.max_iterations; ++step) {
    double min_len = std::numeric_limits<double>::infinity();
    for (int i = 0; i < current.segment_count(); ++i) {
      min_len = std::min(min_len, current.segment_length(i));
    }
    const double dt = cfg.dt_factor * min_len * min_len;
    try {
      current = csf_step(current, dt, 0.0);
    } catch (const DegenerateVertex&) {
      finish(step);  // collapsed to the resolution scale
      return path;
    }
    if (step % cfg.resample_every == 0) current = current.resampled_uniform(cfg.resolution);
    path.max_length = std::max(path.max_length, current.length());
    if (step % cfg.record_every == 0) {
      path.slices.push_back(current);
      record_trace(step);
    }
    if (curve_min_side_area(current) < cfg.area_floor) {
      finish(step);
      return path;
    }
  }
  throw NoCollapse("iteration budget exhausted before the area floor was reached");
}

// ---------------------------------------------------------------------------
// Constant-curvature arcs and corner rounding
// ---------------------------------------------------------------------------

namespace {

struct ArcState {
  Vec2 q;
  Vec2 v;
};

ArcState arc_derivative(const Surface& s, const ArcState& y, double c, double bend) {
  const auto gamma = s.christoffel_at(s.wrap(y.q));
  Vec2 acc;
  for (int k = 0; k < 2; ++k) acc[k] = -y.v.dot(gamma[k] * y.v);
  const Vec2 jn = s.left_normal(s.wrap(y.q), y.v);
  acc += bend * c * s.norm(s.wrap(y.q), y.v) * jn;
  return {y.v, acc};
}

ArcState arc_rk4(const Surface& s, const ArcState& y, double h, double c, double bend) {
  const ArcState k1 = arc_derivative(s, y, c, bend);
  const ArcState y2{y.q + 0.5 * h * k1.q, y.v + 0.5 * h * k1.v};
  const ArcState k2 = arc_derivative(s, y2, c, bend);
  const ArcState y3{y.q + 0.5 * h * k2.q, y.v + 0.5 * h * k2.v};
  const ArcState k3 = arc_derivative(s, y3, c, bend);
  const ArcState y4{y.q + h * k3.q, y.v + h * k3.v};
  const ArcState k4 = arc_derivative(s, y4, c, bend);
  return {y.q + h / 6.0 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q),
          y.v + h / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
}

std::vector<Vec2> integrate_arc(const Surface& s, const Vec2& base, const Vec2& v, double c,
                                double bend, const IntegratorConfig& cfg, int samples) {
  const double speed = s.norm(base, v);
  long n = std::max<long>(cfg.min_steps, static_cast<long>(std::ceil(speed / cfg.max_step)));
  const long per = std::max<long>(1, (n + samples - 2) / (samples - 1));
  n = per * (samples - 1);
  ArcState y{base, v};
  std::vector<Vec2> pts{base};
  const double h = 1.0 / static_cast<double>(n);
  for (long i = 0; i < n; ++i) {
    y = arc_rk4(s, y, h, c, bend);
    if ((i + 1) % per == 0) pts.push_back(y.q);
  }
  return pts;
}

}  // namespace

std::vector<Vec2> constant_curvature_arc(const Surface& surface, const Vec2& a, const Vec2& b,
                                         double c, bool bend_left, int samples,
                                         const IntegratorConfig& integrator) {
  samples = std::max(samples, 2);
  const double bend = bend_left ? 1.0 : -1.0;
  const Vec2 d = surface.short_diff(b, a);
  const Vec2 fd = surface.to_frame(a) * d;
  double phi = std::atan2(fd.y(), fd.x());
  double len = fd.norm();
  if (len < 1e-14) return std::vector<Vec2>(samples, a);
  // initial guess from the flat circular arc over the chord
  if (0.5 * c * len < 1.0) {
    const double half_angle = std::asin(0.5 * c * len);
    phi -= bend * half_angle;
    if (half_angle > 1e-12) len = 2.0 * half_angle / c;
  }
  auto endpoint = [&](double p, double l) {
    const Vec2 v = surface.from_frame(a) * Vec2(l * std::cos(p), l * std::sin(p));
    const auto pts = integrate_arc(surface, a, v, c, bend, integrator, 2);
    return surface.short_diff(surface.wrap(pts.back()), b);
  };
  Vec2 f = endpoint(phi, len);
  const double tol = 1e-11 * (1.0 + len);
  for (int it = 0; it < 60 && f.norm() > tol; ++it) {
    const double dp = 1e-7, dl = 1e-7 * (1.0 + len);
    const Vec2 fp = endpoint(phi + dp, len);
    const Vec2 fl = endpoint(phi, len + dl);
    Mat2 jac;
    jac.col(0) = (fp - f) / dp;
    jac.col(1) = (fl - f) / dl;
    const Vec2 step = jac.fullPivLu().solve(Vec2(-f));
    double lambda = 1.0;
    bool ok = false;
    for (int half = 0; half < 25; ++half) {
      const double p2 = phi + lambda * step.x(), l2 = len + lambda * step.y();
      if (l2 > 0) {
        const Vec2 f2 = endpoint(p2, l2);
        if (f2.norm() < f.norm()) {
          phi = p2;
          len = l2;
          f = f2;
          ok = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!ok) break;
  }
  if (f.norm() > 1e3 * tol) {
    throw GeodesicSubproblemFailure("constant-curvature arc shooting did not converge");
  }
  const Vec2 v = surface.from_frame(a) * Vec2(len * std::cos(phi), len * std::sin(phi));
  auto pts = integrate_arc(surface, a, v, c, bend, integrator, samples);
  for (auto& p : pts) p = surface.wrap(p);
  pts.back() = surface.wrap(b);
  return pts;
}

DiscreteCurve round_corner(const DiscreteCurve& curve, const NodeData& node, double r,
                           CornerMode mode, double c, const IntegratorConfig& integrator) {
  if (!curve.closed()) throw ConfigError("round_corner expects a closed curve");
  const Surface& s = *curve.surface();
  const double rc = s.surgery_scale(mode == CornerMode::CurvatureAtLeastC ? c : 0.0);
  if (r > rc * 1.0000001) {
    throw ScaleTooLarge("rounding radius " + std::to_string(r) + " exceeds the surgery scale " +
                        std::to_string(rc));
  }
  const int n = curve.size();
  std::vector<bool> inside(n);
  int outside_count = 0;
  for (int i = 0; i < n; ++i) {
    const Vec2 d = s.short_diff(curve.vertices()[i], node.point);
    inside[i] = s.norm(s.wrap(node.point + 0.5 * d), d) < r;
    if (!inside[i]) ++outside_count;
  }
  if (outside_count < 4) throw ScaleTooLarge("rounding ball swallows the curve");
  int runs = 0, first_outside = -1;
  for (int i = 0; i < n; ++i) {
    if (!inside[i]) first_outside = i;
    if (inside[i] && !inside[curve.prev(i)]) ++runs;
  }
  if (runs == 0) return curve;  // nothing to round at this radius
  if (runs > 1) {
    throw Error("round_corner expects a single strand through the ball (use cut_and_paste)");
  }
  std::vector<Vec2> out;
  int i = first_outside;
  do {
    out.push_back(curve.vertices()[i]);
    const int j = curve.next(i);
    if (!inside[j]) {
      i = j;
      continue;
    }
    int k = j;
    while (inside[k]) k = curve.next(k);
    const Vec2 pa = curve.vertices()[i];
    const Vec2 pb = curve.vertices()[k];
    std::vector<Vec2> splice;
    if (mode == CornerMode::Geodesic) {
      splice = s.geodesic_between(pa, pb, 17, integrator);
    } else {
      const auto left = constant_curvature_arc(s, pa, pb, c, true, 17, integrator);
      const auto right = constant_curvature_arc(s, pa, pb, c, false, 17, integrator);
      const double dl = s.short_diff(left[left.size() / 2], node.point).norm();
      const double dr = s.short_diff(right[right.size() / 2], node.point).norm();
      splice = (dl < dr) ? left : right;
    }
    for (size_t m = 1; m + 1 < splice.size(); ++m) out.push_back(splice[m]);
    i = k;
  } while (i != first_outside);
  // no reparametrization: the result agrees with the input outside the ball
  return DiscreteCurve::loop(curve.surface(), std::move(out));
}

// ---------------------------------------------------------------------------
// Prescribed-curvature solver
// ---------------------------------------------------------------------------

namespace {

struct SolverFrame {
  DiscreteCurve curve;
  std::vector<Vec2> normals;  // frozen outward normals of the normal graph
  double sign = 1.0;          // curvature sign toward the region
};

std::vector<double> residual_of(const SolverFrame& frame, const std::vector<double>& u, double c,
                                DiscreteCurve* out_curve) {
  const Surface& s = *frame.curve.surface();
  std::vector<Vec2> verts(frame.curve.size());
  for (int i = 0; i < frame.curve.size(); ++i) {
    const Vec2 v = u[i] * frame.normals[i];
    verts[i] =
        (v.norm() < 1e-300) ? frame.curve.vertices()[i] : s.exp_map({frame.curve.vertices()[i], v});
  }
  DiscreteCurve moved(frame.curve.surface(), std::move(verts), true);
  std::vector<double> res(moved.size());
  for (int i = 0; i < moved.size(); ++i) {
    res[i] = frame.sign * moved.turning_angle(i) / moved.vertex_weight(i) - c;
  }
  if (out_curve) *out_curve = std::move(moved);
  return res;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

Region solve_prescribed_curvature(const SurfacePtr& surface, double c, const Region& seed,
                                  const FlowConfig& cfg) {
  if (c <= 0) throw DomainError("prescribed curvature must be positive");
  if (seed.boundary.size() != 1) throw ConfigError("solver expects a single seed boundary curve");
  const Surface& s = *surface;
  int n = cfg.resolution;
  n += (4 - n % 4) % 4;  // banded Jacobian coloring wants a multiple of 4

  SolverFrame frame{seed.boundary.front().resampled_uniform(n), {}, 1.0};
  frame.sign = region_on_left(frame.curve, seed) ? 1.0 : -1.0;

  auto refresh_normals = [&]() {
    frame.normals.assign(n, Vec2::Zero());
    const bool left = frame.sign > 0;
    for (int i = 0; i < n; ++i) {
      const Vec2 tangent =
          frame.curve.segment_diff(frame.curve.prev(i)) + frame.curve.segment_diff(i);
      const Vec2 ln = s.left_normal(frame.curve.vertices()[i], tangent);
      Vec2 nv = left ? Vec2(-ln) : ln;
      frame.normals[i] = nv / std::max(s.norm(frame.curve.vertices()[i], nv), 1e-300);
    }
  };

  const std::vector<double> zero(n, 0.0);
  for (int iter = 0; iter < cfg.newton_max_iterations; ++iter) {
    refresh_normals();
    const std::vector<double> res = residual_of(frame, zero, c, nullptr);
    const double rnorm = inf_norm(res);
    if (rnorm < cfg.residual) break;

    // banded FD Jacobian by 4-coloring (vertex j only influences rows j-1..j+1)
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    const double delta = 1e-7;
    for (int color = 0; color < 4; ++color) {
      std::vector<double> u(n, 0.0);
      for (int j = color; j < n; j += 4) u[j] = delta;
      const std::vector<double> pert = residual_of(frame, u, c, nullptr);
      for (int j = color; j < n; j += 4) {
        for (int row = j - 1; row <= j + 1; ++row) {
          const int rr = (row + n) % n;
          jac(rr, j) = (pert[rr] - res[rr]) / delta;
        }
      }
    }
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) rhs(i) = -res[i];
    const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(rhs);

    double lambda = 1.0;
    bool ok = false;
    for (int half = 0; half < 14; ++half) {
      std::vector<double> u(n);
      for (int i = 0; i < n; ++i) u[i] = lambda * step(i);
      DiscreteCurve moved = frame.curve;
      const std::vector<double> res2 = residual_of(frame, u, c, &moved);
      if (inf_norm(res2) < rnorm) {
        frame.curve = moved.resampled_uniform(n);
        ok = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!ok) throw NoConvergence("newton damping stalled at residual " + std::to_string(rnorm));
    if (!detect_nodes(frame.curve).empty()) {
      throw EmbeddednessLost("iterate developed a self-intersection");
    }
  }
  {
    refresh_normals();
    const std::vector<double> res = residual_of(frame, zero, c, nullptr);
    if (inf_norm(res) >= cfg.residual) {
      throw NoConvergence("newton iteration budget exhausted at residual " +
                          std::to_string(inf_norm(res)));
    }
  }
  Region out;
  out.boundary = {frame.curve};
  out.witness = seed.witness;
  out.mass = seed.mass;
  return out;
}

}  // namespace isocurve
