#include "isocurve/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace isocurve {

// ---------------------------------------------------------------------------
// DiscreteCurve
// ---------------------------------------------------------------------------

DiscreteCurve::DiscreteCurve(SurfacePtr surface, std::vector<Vec2> vertices, bool closed,
                             std::optional<std::pair<Vec2, Vec2>> pins)
    : surface_(std::move(surface)), verts_(std::move(vertices)), closed_(closed),
      pins_(std::move(pins)) {
  if (static_cast<int>(verts_.size()) < 8) {
    throw ConfigError("discrete curves need at least 8 vertices");
  }
  if (closed_ && pins_) throw ConfigError("a curve cannot be both closed and pinned");
  for (auto& v : verts_) v = surface_->wrap(v);
  if (pins_) {
    pins_->first = surface_->wrap(pins_->first);
    pins_->second = surface_->wrap(pins_->second);
    verts_.front() = pins_->first;
    verts_.back() = pins_->second;
  }
}

DiscreteCurve DiscreteCurve::loop(SurfacePtr surface, std::vector<Vec2> vertices) {
  return DiscreteCurve(std::move(surface), std::move(vertices), true);
}

DiscreteCurve DiscreteCurve::pinned(SurfacePtr surface, std::vector<Vec2> vertices) {
  if (vertices.size() < 2) throw ConfigError("pinned curve needs endpoints");
  auto pins = std::make_pair(vertices.front(), vertices.back());
  return DiscreteCurve(std::move(surface), std::move(vertices), false, pins);
}

Vec2 DiscreteCurve::segment_diff(int i) const {
  return surface_->short_diff(verts_[next(i)], verts_[i]);
}

Vec2 DiscreteCurve::segment_mid(int i) const {
  return surface_->wrap(verts_[i] + 0.5 * segment_diff(i));
}

double DiscreteCurve::segment_length(int i) const {
  const Vec2 d = segment_diff(i);
  return surface_->norm(segment_mid(i), d);
}

double DiscreteCurve::vertex_weight(int i) const {
  if (closed_) return 0.5 * (segment_length(prev(i)) + segment_length(i));
  if (i == 0) return 0.5 * segment_length(0);
  if (i == size() - 1) return 0.5 * segment_length(size() - 2);
  return 0.5 * (segment_length(i - 1) + segment_length(i));
}

double DiscreteCurve::length() const {
  double len = 0.0;
  for (int i = 0; i < segment_count(); ++i) len += segment_length(i);
  return len;
}

double DiscreteCurve::energy() const {
  double e = 0.0;
  for (int i = 0; i < segment_count(); ++i) {
    const double l = segment_length(i);
    e += l * l;
  }
  return e * segment_count();
}

std::vector<Vec2> DiscreteCurve::unwrap() const {
  std::vector<Vec2> out;
  out.reserve(verts_.size() + 1);
  out.push_back(verts_[0]);
  for (int i = 0; i < segment_count(); ++i) out.push_back(out.back() + segment_diff(i));
  return out;
}

Vec2 DiscreteCurve::closure_defect() const {
  if (!closed_) return Vec2::Zero();
  Vec2 acc = Vec2::Zero();
  for (int i = 0; i < size(); ++i) acc += segment_diff(i);
  return acc;
}

double DiscreteCurve::turning_angle(int i) const {
  if (!closed_ && (i == 0 || i == size() - 1)) return 0.0;
  const Vec2 din = segment_diff(prev(i));
  const Vec2 dout = segment_diff(i);
  // The secants approximate tangents at the segment midpoints; parallel
  // transport both to the vertex before comparing (midpoint transport rule).
  auto transport = [&](const Vec2& w, const Vec2& path, const Vec2& gamma_at) -> Vec2 {
    const auto gamma = surface_->christoffel_at(surface_->wrap(gamma_at));
    Vec2 out;
    for (int k = 0; k < 2; ++k) out[k] = w[k] - w.dot(gamma[k] * path);
    return out;
  };
  const Vec2 u = transport(din, 0.5 * din, verts_[i] - 0.25 * din);
  const Vec2 w = transport(dout, -0.5 * dout, verts_[i] + 0.25 * dout);
  return surface_->angle_between(verts_[i], u, w);
}

DiscreteCurve DiscreteCurve::resampled_uniform(int n) const {
  const std::vector<Vec2> cover = unwrap();
  std::vector<double> cum(cover.size(), 0.0);
  for (size_t i = 0; i + 1 < cover.size(); ++i) {
    const Vec2 d = cover[i + 1] - cover[i];
    cum[i + 1] = cum[i] + surface_->norm(surface_->wrap(cover[i] + 0.5 * d), d);
  }
  const double total = cum.back();
  const int pieces = closed_ ? n : n - 1;
  std::vector<Vec2> out;
  out.reserve(n);
  size_t seg = 0;
  for (int k = 0; k < n; ++k) {
    const double target = total * k / pieces;
    while (seg + 2 < cum.size() && cum[seg + 1] < target) ++seg;
    const double span = cum[seg + 1] - cum[seg];
    const double t = span > 0 ? (target - cum[seg]) / span : 0.0;
    out.push_back(surface_->wrap(cover[seg] + t * (cover[seg + 1] - cover[seg])));
  }
  if (!closed_) out.back() = surface_->wrap(cover.back());
  return DiscreteCurve(surface_, std::move(out), closed_, pins_);
}

DiscreteCurve DiscreteCurve::reversed() const {
  std::vector<Vec2> out(verts_.rbegin(), verts_.rend());
  auto pins = pins_;
  if (pins) std::swap(pins->first, pins->second);
  return DiscreteCurve(surface_, std::move(out), closed_, pins);
}

// ---------------------------------------------------------------------------
// Polygon helpers (cover polylines)
// ---------------------------------------------------------------------------

namespace {

double shoelace(const std::vector<Vec2>& poly) {
  double a = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

int winding_number(const std::vector<Vec2>& poly, const Vec2& q) {
  int w = 0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const double cross = (b.x() - a.x()) * (q.y() - a.y()) - (q.x() - a.x()) * (b.y() - a.y());
    if (a.y() <= q.y()) {
      if (b.y() > q.y() && cross > 0) ++w;
    } else if (b.y() <= q.y() && cross < 0) {
      --w;
    }
  }
  return w;
}

// Signed integral of `field` over a chart triangle, subdivided until small.
double tri_integral(const Surface& s, const std::function<double(const Vec2&)>& field,
                    const Vec2& a, const Vec2& b, const Vec2& c, int depth) {
  const double area = 0.5 * ((b - a).x() * (c - a).y() - (c - a).x() * (b - a).y());
  if (area == 0.0) return 0.0;
  const double diam = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
  const Vec2 mab = 0.5 * (a + b), mbc = 0.5 * (b + c), mca = 0.5 * (c + a);
  if (diam < 0.05 || depth >= 7) {
    return area * (field(s.wrap(mab)) + field(s.wrap(mbc)) + field(s.wrap(mca))) / 3.0;
  }
  return tri_integral(s, field, a, mab, mca, depth + 1) +
         tri_integral(s, field, mab, b, mbc, depth + 1) +
         tri_integral(s, field, mca, mbc, c, depth + 1) +
         tri_integral(s, field, mab, mbc, mca, depth + 1);
}

// Signed metric integral over a (possibly self-overlapping) chart polygon,
// winding multiplicities included, via a signed fan decomposition.
double polygon_metric_integral(const Surface& s, const std::vector<Vec2>& poly,
                               const std::function<double(const Vec2&)>& integrand,
                               bool unit_integrand) {
  if (poly.size() < 3) return 0.0;
  if (unit_integrand && s.flat_chart()) return shoelace(poly);
  Vec2 anchor = Vec2::Zero();
  for (const Vec2& p : poly) anchor += p;
  anchor /= static_cast<double>(poly.size());
  double total = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    total += tri_integral(s, integrand, anchor, poly[i], poly[(i + 1) % n], 0);
  }
  return total;
}

struct CoverPolygon {
  std::vector<Vec2> pts;  // open polygon (first vertex not repeated)
  Vec2 defect = Vec2::Zero();
  bool winds = false;
};

CoverPolygon cover_polygon(const DiscreteCurve& curve) {
  CoverPolygon cp;
  std::vector<Vec2> unwrapped = curve.unwrap();
  cp.defect = unwrapped.back() - unwrapped.front();
  cp.winds = cp.defect.norm() > 1e-9;
  unwrapped.pop_back();
  cp.pts = std::move(unwrapped);
  return cp;
}

std::vector<Vec2> representatives(const Surface& s, const Vec2& q) {
  std::vector<Vec2> out{q};
  const auto gens = s.deck_generators();
  if (gens.empty()) return out;
  if (gens.size() == 1) {
    for (int i = -2; i <= 2; ++i) {
      if (i != 0) out.push_back(q + i * gens[0]);
    }
    return out;
  }
  for (int i = -2; i <= 2; ++i) {
    for (int j = -2; j <= 2; ++j) {
      if (i || j) out.push_back(q + i * gens[0] + j * gens[1]);
    }
  }
  return out;
}

bool polygon_contains(const Surface& s, const std::vector<Vec2>& poly, const Vec2& q) {
  for (const Vec2& rep : representatives(s, q)) {
    if (winding_number(poly, rep) != 0) return true;
  }
  return false;
}

double min_distance_to_polygon(const Surface& s, const std::vector<Vec2>& poly, const Vec2& q) {
  double best = std::numeric_limits<double>::infinity();
  const size_t n = poly.size();
  for (const Vec2& rep : representatives(s, q)) {
    for (size_t i = 0; i < n; ++i) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[(i + 1) % n];
      const Vec2 d = b - a;
      const double t =
          d.squaredNorm() > 0 ? std::clamp((rep - a).dot(d) / d.squaredNorm(), 0.0, 1.0) : 0.0;
      best = std::min(best, (rep - (a + t * d)).norm());
    }
  }
  return best;
}

int polygons_cross(const std::vector<Vec2>& p1, const std::vector<Vec2>& p2) {
  int crossings = 0;
  for (size_t i = 0; i < p1.size(); ++i) {
    const Vec2 a1 = p1[i], a2 = p1[(i + 1) % p1.size()];
    for (size_t j = 0; j < p2.size(); ++j) {
      const Vec2 b1 = p2[j], b2 = p2[(j + 1) % p2.size()];
      const Vec2 r = a2 - a1, q = b2 - b1;
      const double den = r.x() * q.y() - r.y() * q.x();
      if (std::abs(den) < 1e-16) continue;
      const Vec2 d = b1 - a1;
      const double t = (d.x() * q.y() - d.y() * q.x()) / den;
      const double u = (d.x() * r.y() - d.y() * r.x()) / den;
      if (t > 1e-10 && t < 1 - 1e-10 && u > 1e-10 && u < 1 - 1e-10) ++crossings;
    }
  }
  return crossings;
}

// Overlap area of two crossing polygons by grid sampling over the shared
// bounding box; used for the small slivers surgery can create.
double overlap_area_estimate(const Surface& s, const std::vector<Vec2>& p1,
                             const std::vector<Vec2>& p2) {
  Vec2 lo1 = p1[0], hi1 = p1[0], lo2 = p2[0], hi2 = p2[0];
  for (const Vec2& p : p1) {
    lo1 = lo1.cwiseMin(p);
    hi1 = hi1.cwiseMax(p);
  }
  for (const Vec2& p : p2) {
    lo2 = lo2.cwiseMin(p);
    hi2 = hi2.cwiseMax(p);
  }
  const Vec2 lo = lo1.cwiseMax(lo2), hi = hi1.cwiseMin(hi2);
  if ((hi - lo).minCoeff() <= 0) return 0.0;
  const int n = 200;
  const Vec2 cell = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 q = lo + Vec2((i + 0.5) * cell.x(), (j + 0.5) * cell.y());
      if (winding_number(p1, q) != 0 && winding_number(p2, q) != 0) {
        acc += s.density(s.wrap(q)) * cell.x() * cell.y();
      }
    }
  }
  return acc;
}

const SurfaceOfRevolution* as_revolution(const Surface& s) {
  return dynamic_cast<const SurfaceOfRevolution*>(&s);
}

// Integral over the pole side {t < curve} of a theta-winding curve.
double winding_cap_integral(const SurfaceOfRevolution& rev, const CoverPolygon& cp,
                            const std::function<double(const Vec2&)>* field) {
  double total = 0.0;
  const size_t n = cp.pts.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 a = cp.pts[i];
    const Vec2 b = (i + 1 < n) ? cp.pts[i + 1] : cp.pts[0] + cp.defect;
    const double dth = b.y() - a.y();
    if (dth == 0.0) continue;
    for (double gauss : {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)}) {
      const double tcap = a.x() + gauss * (b.x() - a.x());
      const double th = a.y() + gauss * dth;
      double inner;
      if (!field) {
        inner = rev.profile_integral(tcap);
      } else {
        const int m = 32;
        const double h = tcap / m;
        auto f = [&](double t) {
          t = std::max(t, 1e-9);
          return rev.profile().f(t) * (*field)(rev.wrap(Vec2(t, th)));
        };
        inner = f(0) + f(tcap);
        for (int k = 1; k < m; ++k) inner += f(k * h) * ((k % 2) ? 4.0 : 2.0);
        inner *= h / 3.0;
      }
      total += 0.5 * dth * inner;
    }
  }
  // orientation-corrected: the sign of the theta winding is not part of the value
  return cp.defect.y() >= 0 ? total : -total;
}

double winding_curve_t_at(const CoverPolygon& cp, double theta) {
  const size_t n = cp.pts.size();
  const double period = std::abs(cp.defect.y());
  for (size_t i = 0; i < n; ++i) {
    const Vec2 a = cp.pts[i];
    const Vec2 b = (i + 1 < n) ? cp.pts[i + 1] : cp.pts[0] + cp.defect;
    for (int k = -2; k <= 2; ++k) {
      const double th = theta + k * period;
      const double lo = std::min(a.y(), b.y()), hi = std::max(a.y(), b.y());
      if (th >= lo && th <= hi && hi > lo) {
        const double u = (th - a.y()) / (b.y() - a.y());
        return a.x() + u * (b.x() - a.x());
      }
    }
  }
  throw Error("winding curve does not cover the requested angle");
}

}  // namespace

// ---------------------------------------------------------------------------
// Region
// ---------------------------------------------------------------------------

Region Region::empty(SurfacePtr surface) {
  (void)surface;
  return Region{};
}

const SurfacePtr& Region::surface() const {
  if (boundary.empty()) throw Error("empty region has no surface");
  return boundary.front().surface();
}

double boundary_length(const Region& region) {
  double len = 0.0;
  for (const auto& c : region.boundary) len += c.length();
  return len;
}

namespace {

double region_measure(const Region& region, const std::function<double(const Vec2&)>* field) {
  if (region.is_empty()) return 0.0;
  const Surface& s = *region.surface();
  const std::function<double(const Vec2&)> integrand = [&s, field](const Vec2& p) {
    return field ? s.density(p) * (*field)(p) : s.density(p);
  };

  std::vector<CoverPolygon> polys;
  for (const auto& c : region.boundary) {
    if (!c.closed()) throw Error("region boundaries must be closed curves");
    polys.push_back(cover_polygon(c));
  }
  for (const auto& cp : polys) {
    if (cp.winds) {
      if (std::abs(region.witness.x() - winding_curve_t_at(cp, region.witness.y())) < 1e-9) {
        throw AmbiguousSide("witness point lies on a boundary curve");
      }
    } else if (min_distance_to_polygon(s, cp.pts, region.witness) < 1e-9) {
      throw AmbiguousSide("witness point lies on a boundary curve");
    }
  }

  std::optional<double> total_field_cache;
  auto total_over_surface = [&]() {
    if (!field) return s.total_area();
    if (!total_field_cache) {
      double acc = 0.0;
      if (const auto* rev = as_revolution(s)) {
        const int m = 512, mth = 128;
        for (int i = 0; i < m; ++i) {
          const double t = (i + 0.5) / m * rev->profile().extent;
          for (int j = 0; j < mth; ++j) {
            const double th = (j + 0.5) / mth * 2.0 * kPi;
            acc += (*field)(Vec2(t, th)) * rev->profile().f(t) * (rev->profile().extent / m) *
                   (2.0 * kPi / mth);
          }
        }
      } else {
        const auto gens = s.deck_generators();
        const int m = 256;
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < m; ++j) {
            const Vec2 p = gens[0] * ((i + 0.5) / m) + gens[1] * ((j + 0.5) / m);
            acc += integrand(s.wrap(p)) / (m * m);
          }
        }
        acc *= std::abs(gens[0].x() * gens[1].y() - gens[0].y() * gens[1].x());
      }
      total_field_cache = acc;
    }
    return *total_field_cache;
  };

  const bool any_winds =
      std::any_of(polys.begin(), polys.end(), [](const CoverPolygon& p) { return p.winds; });

  if (any_winds) {
    const auto* rev = as_revolution(s);
    if (!rev) throw Error("winding region boundaries are only supported on revolution charts");
    std::vector<double> cap(polys.size());
    std::vector<bool> pole_side(polys.size());
    for (size_t k = 0; k < polys.size(); ++k) {
      if (!polys[k].winds) throw Error("mixed winding and closed boundaries are unsupported");
      cap[k] = winding_cap_integral(*rev, polys[k], field);
      pole_side[k] = region.witness.x() < winding_curve_t_at(polys[k], region.witness.y());
    }
    if (polys.size() == 1) return pole_side[0] ? cap[0] : total_over_surface() - cap[0];
    if (polys.size() == 2) {
      if (pole_side[0] != pole_side[1]) return std::abs(cap[0] - cap[1]);
      if (pole_side[0]) return std::min(cap[0], cap[1]);
      return total_over_surface() - std::max(cap[0], cap[1]);
    }
    throw Error("more than two boundary curves are unsupported");
  }

  std::vector<double> mass(polys.size());
  std::vector<bool> contains(polys.size());
  for (size_t k = 0; k < polys.size(); ++k) {
    // orientation-corrected so signed integrands keep their sign
    const double orient = shoelace(polys[k].pts) >= 0 ? 1.0 : -1.0;
    mass[k] = orient * polygon_metric_integral(s, polys[k].pts, integrand, field == nullptr);
    contains[k] = polygon_contains(s, polys[k].pts, region.witness);
  }
  if (polys.size() == 1) {
    if (region.mass == Region::Mass::Multiplicity || contains[0]) return mass[0];
    return total_over_surface() - mass[0];
  }
  if (polys.size() == 2) {
    // probe mid-curve vertices: the two curves may share a node point
    const bool nested01 =
        polygon_contains(s, polys[0].pts, s.wrap(polys[1].pts[polys[1].pts.size() / 2]));
    const bool nested10 =
        polygon_contains(s, polys[1].pts, s.wrap(polys[0].pts[polys[0].pts.size() / 2]));
    if (nested01 || nested10) {
      const size_t outer = nested01 ? 0 : 1, inner = nested01 ? 1 : 0;
      if (contains[outer] && !contains[inner]) return mass[outer] - mass[inner];
      if (contains[inner]) return mass[inner];
      return total_over_surface() - mass[outer];
    }
    double a = mass[0] + mass[1];
    if (region.mass == Region::Mass::Support && polygons_cross(polys[0].pts, polys[1].pts) > 0) {
      a -= overlap_area_estimate(s, polys[0].pts, polys[1].pts);
    }
    if (!contains[0] && !contains[1]) return total_over_surface() - a;
    return a;
  }
  throw Error("more than two boundary curves are unsupported");
}

}  // namespace

double area(const Region& region) { return region_measure(region, nullptr); }

double region_integral(const Region& region, const std::function<double(const Vec2&)>& field) {
  return region_measure(region, &field);
}

double ac_functional(const Region& region, double c) {
  if (c <= 0) throw DomainError("ac_functional requires c > 0");
  if (region.is_empty()) return 0.0;
  return boundary_length(region) - c * area(region);
}

bool curve_contains(const DiscreteCurve& curve, const Vec2& point) {
  const CoverPolygon cp = cover_polygon(curve);
  if (cp.winds) return point.x() < winding_curve_t_at(cp, point.y());
  return polygon_contains(*curve.surface(), cp.pts, point);
}

double curve_min_side_area(const DiscreteCurve& curve) {
  const Surface& s = *curve.surface();
  const CoverPolygon cp = cover_polygon(curve);
  double one_side;
  if (cp.winds) {
    const auto* rev = as_revolution(s);
    if (!rev) throw Error("winding curves are only supported on revolution charts");
    one_side = winding_cap_integral(*rev, cp, nullptr);
  } else {
    const std::function<double(const Vec2&)> dens = [&s](const Vec2& p) { return s.density(p); };
    one_side = std::abs(polygon_metric_integral(s, cp.pts, dens, true));
  }
  return std::min(one_side, std::max(0.0, s.total_area() - one_side));
}

bool region_contains(const Region& region, const Vec2& point) {
  if (region.is_empty()) return false;
  if (region.boundary.size() == 1) {
    const DiscreteCurve& c = region.boundary.front();
    return curve_contains(c, point) == curve_contains(c, region.witness);
  }
  if (region.boundary.size() == 2) {
    const auto classify = [&](const Vec2& q) {
      return (curve_contains(region.boundary[0], q) ? 1 : 0) +
             (curve_contains(region.boundary[1], q) ? 2 : 0);
    };
    const int pc = classify(point), wc = classify(region.witness);
    if (pc == wc) return true;
    // side-by-side lobes (probe mid-curve vertices: curves may share a node)
    const DiscreteCurve& b0 = region.boundary[0];
    const DiscreteCurve& b1 = region.boundary[1];
    const bool nested = curve_contains(b0, b1.vertices()[b1.size() / 2]) ||
                        curve_contains(b1, b0.vertices()[b0.size() / 2]);
    if (!nested && wc != 0 && pc != 0) return true;
    return false;
  }
  throw Error("more than two boundary curves are unsupported");
}

bool region_on_left(const DiscreteCurve& curve, const Region& region) {
  const CoverPolygon cp = cover_polygon(curve);
  if (cp.winds) {
    // traversal with increasing theta keeps the pole side (t -> 0) on its left
    const bool increasing = cp.defect.y() > 0;
    const bool witness_pole = region.witness.x() < winding_curve_t_at(cp, region.witness.y());
    return increasing == witness_pole;
  }
  const bool ccw = shoelace(cp.pts) > 0;
  const bool inside = polygon_contains(*curve.surface(), cp.pts, region.witness);
  return ccw == inside;
}

std::vector<double> geodesic_curvature(const DiscreteCurve& curve, const Region* region) {
  const int n = curve.size();
  std::vector<double> kappa(n, 0.0);
  double sign = 1.0;
  if (region) sign = region_on_left(curve, *region) ? 1.0 : -1.0;
  for (int i = 0; i < n; ++i) {
    if (!curve.closed() && (i == 0 || i == n - 1)) continue;
    const double w = curve.vertex_weight(i);
    if (w < 1e-13) throw DegenerateVertex("zero-length stencil at vertex " + std::to_string(i));
    kappa[i] = sign * curve.turning_angle(i) / w;
  }
  return kappa;
}

// ---------------------------------------------------------------------------
// Test functions
// ---------------------------------------------------------------------------

TestFunction TestFunction::constant(int n, double value) {
  return TestFunction{std::vector<double>(n, value)};
}

TestFunction TestFunction::half_sine_on_arc(const DiscreteCurve& curve, int from, int to) {
  const int n = curve.size();
  TestFunction phi{std::vector<double>(n, 0.0)};
  double arc = 0.0;
  for (int i = from; i != to; i = curve.next(i)) arc += curve.segment_length(i);
  double t = 0.0;
  for (int i = from; i != to; i = curve.next(i)) {
    phi.values[i] = std::sin(kPi * t / arc);
    t += curve.segment_length(i);
  }
  phi.values[to] = 0.0;
  return phi;
}

// ---------------------------------------------------------------------------
// Node detection
// ---------------------------------------------------------------------------

namespace {

struct Passage {
  int index = 0;
  Vec2 out = Vec2::Zero();
  Vec2 in = Vec2::Zero();
};

// Oriented branch tangents at a node, pairing the four rays of the crossing
// into two geometric branches by anti-parallelism.
std::pair<Vec2, Vec2> branch_tangents(const Surface& s, const Vec2& at, const Passage& p0,
                                      const Passage& p1) {
  auto gap_from_pi = [&](const Vec2& u, const Vec2& v) {
    return kPi - std::abs(s.angle_between(at, u, -v));
  };
  const double score_a = gap_from_pi(p0.out, p0.in) + gap_from_pi(p1.out, p1.in);
  const double score_b = gap_from_pi(p0.out, p1.in) + gap_from_pi(p1.out, p0.in);
  Vec2 d0, d1;
  if (score_a <= score_b) {
    d0 = p0.out + p0.in;
    d1 = p1.out + p1.in;
  } else {
    d0 = p0.out + p1.in;
    d1 = p1.out + p0.in;
  }
  auto unit = [&](const Vec2& v) { return Vec2(v / std::max(s.norm(at, v), 1e-300)); };
  return {unit(d0), unit(d1)};
}

NodeConfiguration classify_by_subloops(const DiscreteCurve& curve, int i0, int i1) {
  const Surface& s = *curve.surface();
  auto build = [&](int from, int to) {
    std::vector<Vec2> pts;
    Vec2 cur = curve.vertices()[from];
    pts.push_back(cur);
    for (int i = from; i != to; i = curve.next(i)) {
      cur += curve.segment_diff(i);
      pts.push_back(cur);
    }
    return pts;
  };
  const std::vector<Vec2> loop_a = build(i0, i1);
  const std::vector<Vec2> loop_b = build(i1, i0);
  auto centroid = [](const std::vector<Vec2>& loop) {
    Vec2 c = Vec2::Zero();
    for (const Vec2& p : loop) c += p;
    return Vec2(c / static_cast<double>(loop.size()));
  };
  const bool a_in_b = polygon_contains(s, loop_b, s.wrap(centroid(loop_a)));
  const bool b_in_a = polygon_contains(s, loop_a, s.wrap(centroid(loop_b)));
  if (a_in_b || b_in_a) return NodeConfiguration::ConnectedRegion;
  return NodeConfiguration::DisconnectedRegion;
}

}  // namespace

std::vector<NodeData> detect_nodes(const DiscreteCurve& curve, double touch_tol) {
  const Surface& s = *curve.surface();
  const int n = curve.size();
  const int nseg = curve.segment_count();
  std::vector<NodeData> nodes;
  auto already_known = [&](const Vec2& p) {
    for (const auto& nd : nodes) {
      if (s.short_diff(p, nd.point).norm() < 1e-6) return true;
    }
    return false;
  };
  auto push_node = [&](const Vec2& at, const Passage& p0, const Passage& p1) {
    if (already_known(s.wrap(at))) return;
    NodeData nd;
    nd.point = s.wrap(at);
    nd.t0 = p0.index;
    nd.t1 = p1.index;
    nd.configuration = classify_by_subloops(curve, p0.index, p1.index);
    const auto [d0, d1] = branch_tangents(s, nd.point, p0, p1);
    const double theta = std::abs(s.angle_between(nd.point, d0, d1));
    nd.alpha = (nd.configuration == NodeConfiguration::DisconnectedRegion) ? kPi - theta : theta;
    nd.alpha = std::clamp(nd.alpha, 1e-12, kPi);
    nodes.push_back(nd);
  };

  for (int i = 0; i < nseg; ++i) {
    const Vec2 a1 = curve.vertices()[i];
    const Vec2 a2 = a1 + curve.segment_diff(i);
    for (int j = i + 2; j < nseg; ++j) {
      if (curve.closed() && i == 0 && j == nseg - 1) continue;
      const Vec2 b1 = a1 + s.short_diff(curve.vertices()[j], a1);
      const Vec2 b2 = b1 + curve.segment_diff(j);
      const Vec2 r = a2 - a1, q = b2 - b1;
      const double den = r.x() * q.y() - r.y() * q.x();
      if (std::abs(den) < 1e-16) continue;
      const Vec2 d = b1 - a1;
      const double t = (d.x() * q.y() - d.y() * q.x()) / den;
      const double u = (d.x() * r.y() - d.y() * r.x()) / den;
      if (t <= 1e-9 || t >= 1 - 1e-9 || u <= 1e-9 || u >= 1 - 1e-9) continue;
      Passage p0, p1;
      p0.index = (t < 0.5) ? i : curve.next(i);
      p0.out = p0.in = r / r.norm();
      p1.index = (u < 0.5) ? j : curve.next(j);
      p1.out = p1.in = q / q.norm();
      push_node(a1 + t * r, p0, p1);
    }
  }

  auto passage = [&](int idx) {
    Passage p;
    p.index = idx;
    const int out_seg = (!curve.closed() && idx == n - 1) ? idx - 1 : idx;
    const int in_seg = (!curve.closed() && idx == 0) ? 0 : curve.prev(idx);
    p.out = curve.segment_diff(out_seg);
    p.in = curve.segment_diff(in_seg);
    p.out /= std::max(p.out.norm(), 1e-300);
    p.in /= std::max(p.in.norm(), 1e-300);
    return p;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 2; j < n; ++j) {
      if (curve.closed() && i == 0 && j == n - 1) continue;
      if (s.short_diff(curve.vertices()[j], curve.vertices()[i]).norm() < touch_tol) {
        push_node(curve.vertices()[i], passage(i), passage(j));
      }
    }
  }
  return nodes;
}

std::optional<NodeData> detect_node(const DiscreteCurve& curve, double touch_tol) {
  const std::vector<NodeData> nodes = detect_nodes(curve, touch_tol);
  if (nodes.empty()) return std::nullopt;
  if (nodes.size() > 1) {
    throw MultipleNodes("found " + std::to_string(nodes.size()) + " self-intersections");
  }
  return nodes.front();
}

// ---------------------------------------------------------------------------
// Perturbation family and variations
// ---------------------------------------------------------------------------

PerturbationFamily::PerturbationFamily(DiscreteCurve base, std::vector<double> phi,
                                       std::vector<Vec2> nu, bool region_on_left)
    : base_(std::move(base)), phi_(std::move(phi)), nu_(std::move(nu)), current_(base_),
      region_on_left_(region_on_left) {
  if (static_cast<int>(phi_.size()) != base_.size() ||
      static_cast<int>(nu_.size()) != base_.size()) {
    throw ConfigError("perturbation family fields must match the vertex count");
  }
}

namespace {

Vec2 vertex_tangent(const DiscreteCurve& c, int i) {
  if (c.closed()) return c.segment_diff(c.prev(i)) + c.segment_diff(i);
  if (i == 0) return c.segment_diff(0);
  if (i == c.size() - 1) return c.segment_diff(i - 1);
  return c.segment_diff(i - 1) + c.segment_diff(i);
}

}  // namespace

PerturbationFamily PerturbationFamily::outward(const Region& region, std::vector<double> phi) {
  if (region.boundary.size() != 1) {
    throw ConfigError("outward perturbation family needs a single boundary curve");
  }
  const DiscreteCurve& c = region.boundary.front();
  const Surface& s = *c.surface();
  const bool left = isocurve::region_on_left(c, region);
  std::vector<Vec2> nu(c.size());
  for (int i = 0; i < c.size(); ++i) {
    const Vec2 ln = s.left_normal(c.vertices()[i], vertex_tangent(c, i));
    Vec2 nvec = left ? Vec2(-ln) : ln;
    nu[i] = nvec / std::max(s.norm(c.vertices()[i], nvec), 1e-300);
  }
  return PerturbationFamily(c, std::move(phi), std::move(nu), left);
}

DiscreteCurve PerturbationFamily::at(double s) const {
  const Surface& surf = *base_.surface();
  std::vector<Vec2> verts(base_.size());
  for (int i = 0; i < base_.size(); ++i) {
    const Vec2 v = s * phi_[i] * nu_[i];
    verts[i] = (v.norm() < 1e-300) ? base_.vertices()[i] : surf.exp_map({base_.vertices()[i], v});
  }
  return DiscreteCurve(base_.surface(), std::move(verts), base_.closed(), base_.pins());
}

void PerturbationFamily::advance_to(double s) {
  const Surface& surf = *base_.surface();
  const DiscreteCurve next_state = at(s);
  // Signed swept band between the states: quad orientation is positive for a
  // sweep toward the left of the traversal, and mass grows when the sweep
  // points away from the region.
  double band = 0.0;
  for (int i = 0; i < base_.segment_count(); ++i) {
    const Vec2 a1 = current_.vertices()[i];
    const Vec2 a2 = a1 + current_.segment_diff(i);
    const Vec2 b1 = a1 + surf.short_diff(next_state.vertices()[i], a1);
    const Vec2 b2 = b1 + next_state.segment_diff(i);
    const std::vector<Vec2> quad{a1, a2, b2, b1};
    band += shoelace(quad) * surf.density(surf.wrap(0.25 * (a1 + a2 + b1 + b2)));
  }
  swept_ += region_on_left_ ? -band : band;
  current_ = next_state;
  s_ = s;
}

double first_variation(const PerturbationFamily& family, double c) {
  const DiscreteCurve& base = family.base();
  const Surface& s = *base.surface();
  for (const NodeData& nd : detect_nodes(base)) {
    if (std::abs(family.phi()[nd.t0]) > 1e-12 || std::abs(family.phi()[nd.t1]) > 1e-12) {
      throw NodeInSupport("normal field is nonzero at a node vertex");
    }
  }
  const std::vector<double> kappa_left = geodesic_curvature(base, nullptr);
  const double rho = family.region_on_left() ? 1.0 : -1.0;
  double acc = 0.0;
  for (int i = 0; i < base.size(); ++i) {
    if (family.phi()[i] == 0.0) continue;
    Vec2 ln = s.left_normal(base.vertices()[i], vertex_tangent(base, i));
    ln /= std::max(s.norm(base.vertices()[i], ln), 1e-300);
    const double side = s.dot(base.vertices()[i], family.nu()[i], ln);
    // d(length) = -phi * side * kappa_left; d(mass) = -rho * phi * side
    acc += family.phi()[i] * side * (c * rho - kappa_left[i]) * base.vertex_weight(i);
  }
  return acc;
}

double node_correction(NodeConfiguration configuration, double alpha, double phi0, double phi1,
                       double c) {
  const double sa = std::sin(alpha);
  const double cross = (configuration == NodeConfiguration::DisconnectedRegion) ? 2.0 : -2.0;
  const double num = (phi0 * phi0 + phi1 * phi1) * std::cos(alpha) + cross * phi0 * phi1;
  if (sa < 1e-8) {
    if (configuration == NodeConfiguration::DisconnectedRegion) {
      throw AngleDegenerate("angle pi is not admitted for a disconnected-region node");
    }
    if (std::abs(num) < 1e-10 * (phi0 * phi0 + phi1 * phi1 + 1e-30)) return 0.0;
    throw AngleDegenerate("tangential node correction diverges for this test function");
  }
  return -(2.0 * c / sa) * num;
}

double second_variation(const DiscreteCurve& curve, const std::optional<NodeData>& node,
                        const TestFunction& phi, double c) {
  if (static_cast<int>(phi.values.size()) != curve.size()) {
    throw ConfigError("test function must have one value per vertex");
  }
  const Surface& s = *curve.surface();
  double q = 0.0;
  for (int i = 0; i < curve.segment_count(); ++i) {
    const double dphi = phi.values[curve.next(i)] - phi.values[i];
    const double l = curve.segment_length(i);
    if (l > 1e-14) q += dphi * dphi / l;
  }
  for (int i = 0; i < curve.size(); ++i) {
    const double k = s.gauss_curvature_at(curve.vertices()[i]);
    q -= (k + c * c) * phi.values[i] * phi.values[i] * curve.vertex_weight(i);
  }
  if (node) {
    q += node_correction(node->configuration, node->alpha, phi.values[node->t0],
                         phi.values[node->t1], c);
  }
  return q;
}

}  // namespace isocurve
