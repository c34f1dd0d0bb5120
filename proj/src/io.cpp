#include "isocurve/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace isocurve {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Surface config files
// ---------------------------------------------------------------------------

namespace {

Vec2 parse_vec2(const std::string& text) {
  std::istringstream in(text);
  Vec2 v;
  if (!(in >> v.x() >> v.y())) throw ConfigError("expected two numbers, got '" + text + "'");
  return v;
}

double parse_num(const std::map<std::string, std::string>& kv, const std::string& key,
                 double fallback = std::nan("")) {
  const auto it = kv.find(key);
  if (it == kv.end()) {
    if (std::isnan(fallback)) throw ConfigError("missing key '" + key + "'");
    return fallback;
  }
  return std::stod(it->second);
}

}  // namespace

SurfacePtr surface_from_keyvalues(const std::map<std::string, std::string>& kv) {
  const auto fam_it = kv.find("family");
  if (fam_it == kv.end()) throw ConfigError("surface config needs a 'family' key");
  const std::string& family = fam_it->second;

  if (family == "flat_torus") {
    const Vec2 v1 = parse_vec2(kv.count("v1") ? kv.at("v1") : "1 0");
    const Vec2 v2 = parse_vec2(kv.count("v2") ? kv.at("v2") : "0 1");
    return std::make_shared<FlatTorus>(v1, v2);
  }
  if (family == "revolution") {
    const auto prof_it = kv.find("profile");
    if (prof_it == kv.end()) throw ConfigError("revolution surface needs a 'profile' key");
    if (prof_it->second == "sphere") {
      return std::make_shared<SurfaceOfRevolution>(
          SurfaceOfRevolution::sphere(parse_num(kv, "radius", 1.0)));
    }
    if (prof_it->second == "capped_cylinder") {
      return std::make_shared<SurfaceOfRevolution>(
          SurfaceOfRevolution::capped_cylinder(parse_num(kv, "length")));
    }
    throw ConfigError("unknown revolution profile '" + prof_it->second + "'");
  }
  if (family == "conformal_torus") {
    const Vec2 v1 = parse_vec2(kv.count("v1") ? kv.at("v1") : "1 0");
    const Vec2 v2 = parse_vec2(kv.count("v2") ? kv.at("v2") : "0 1");
    const int n = static_cast<int>(parse_num(kv, "grid_n", 64));
    // u(a,b) = sum of amp * cos(2 pi (kx a + ky b) + phase) harmonics
    struct Harmonic {
      double kx, ky, amp, phase;
    };
    std::vector<Harmonic> harmonics;
    for (const auto& [key, value] : kv) {
      if (key.rfind("u_harmonic", 0) != 0) continue;
      std::istringstream in(value);
      Harmonic h{};
      if (!(in >> h.kx >> h.ky >> h.amp)) {
        throw ConfigError("u_harmonic needs 'kx ky amp [phase]'");
      }
      if (!(in >> h.phase)) h.phase = 0.0;
      harmonics.push_back(h);
    }
    return std::make_shared<ConformalTorus>(ConformalTorus::from_function(
        v1, v2,
        [harmonics](double a, double b) {
          double u = 0.0;
          for (const auto& h : harmonics) {
            u += h.amp * std::cos(2 * kPi * (h.kx * a + h.ky * b) + h.phase);
          }
          return u;
        },
        n));
  }
  throw ConfigError("unknown surface family '" + family + "'");
}

SurfacePtr load_surface_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open surface config '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int harmonic_count = 0;
  while (std::getline(in, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string t) {
      const auto b = t.find_first_not_of(" \t\r");
      const auto e = t.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    if (key == "u_harmonic") key += "_" + std::to_string(harmonic_count++);
    kv[key] = value;
  }
  return surface_from_keyvalues(kv);
}

// ---------------------------------------------------------------------------
// Curve serialization
// ---------------------------------------------------------------------------

std::string curve_to_json(const DiscreteCurve& curve) {
  json j;
  j["surface"] = curve.surface()->family();
  j["closed"] = curve.closed();
  json verts = json::array();
  for (const Vec2& v : curve.vertices()) verts.push_back({v.x(), v.y()});
  j["vertices"] = std::move(verts);
  if (curve.pins()) {
    j["pins"] = {{curve.pins()->first.x(), curve.pins()->first.y()},
                 {curve.pins()->second.x(), curve.pins()->second.y()}};
  }
  j["length"] = curve.length();
  return j.dump(2);
}

DiscreteCurve curve_from_json(const std::string& text, SurfacePtr surface) {
  const json j = json::parse(text);
  std::vector<Vec2> verts;
  for (const auto& v : j.at("vertices")) verts.emplace_back(v.at(0).get<double>(),
                                                            v.at(1).get<double>());
  const bool closed = j.at("closed").get<bool>();
  if (closed) return DiscreteCurve::loop(std::move(surface), std::move(verts));
  return DiscreteCurve::pinned(std::move(surface), std::move(verts));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
}

void write_curve_csv(const std::string& path, const DiscreteCurve& curve) {
  std::ostringstream out;
  out << "x,y\n";
  for (const Vec2& v : curve.vertices()) {
    out << format_double(v.x()) << "," << format_double(v.y()) << "\n";
  }
  write_text_file(path, out.str());
}

void write_csv(const std::string& path, const CsvSeries& series) {
  std::ostringstream out;
  for (size_t i = 0; i < series.header.size(); ++i) {
    out << (i ? "," : "") << series.header[i];
  }
  out << "\n";
  for (const auto& row : series.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "");
      if (!std::isnan(row[i])) out << format_double(row[i]);
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

// ---------------------------------------------------------------------------
// SVG output
// ---------------------------------------------------------------------------

void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series, int width,
                    int height) {
  Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto& s : series) {
    for (const Vec2& p : s.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  if (lo.x() > hi.x()) {
    lo = Vec2(0, 0);
    hi = Vec2(1, 1);
  }
  const Vec2 span = (hi - lo).cwiseMax(Vec2(1e-12, 1e-12));
  const double margin = 40.0;
  auto sx = [&](double x) { return margin + (x - lo.x()) / span.x() * (width - 2 * margin); };
  auto sy = [&](double y) { return height - margin - (y - lo.y()) / span.y() * (height - 2 * margin); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
      << "\" y2=\"" << height - margin << "\" stroke=\"#444\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"#444\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"" << height - margin + 16 << "\" font-size=\"10\">"
      << format_double(lo.x()) << "</text>\n";
  out << "<text x=\"" << width - margin - 20 << "\" y=\"" << height - margin + 16
      << "\" font-size=\"10\">" << format_double(hi.x()) << "</text>\n";
  out << "<text x=\"4\" y=\"" << height - margin << "\" font-size=\"10\">" << format_double(lo.y())
      << "</text>\n";
  out << "<text x=\"4\" y=\"" << margin << "\" font-size=\"10\">" << format_double(hi.y())
      << "</text>\n";
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (const Vec2& p : s.points) out << sx(p.x()) << "," << sy(p.y()) << " ";
    out << "\"/>\n";
  }
  out << "</svg>\n";
  write_text_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Sweepout exports
// ---------------------------------------------------------------------------

void write_sweepout_json(const std::string& path, const Sweepout& sw, double c) {
  json j;
  j["kind"] = sw.kind == Sweepout::Kind::Regions ? "regions" : "pinned_paths";
  j["params"] = sw.params;
  json slices = json::array();
  for (int i = 0; i < sw.slice_count(); ++i) {
    json slice;
    if (sw.kind == Sweepout::Kind::Regions) {
      const Region& r = sw.regions[i];
      slice["ac"] = r.is_empty() ? 0.0 : ac_functional(r, c);
      slice["length"] = r.is_empty() ? 0.0 : boundary_length(r);
      json curves = json::array();
      for (const auto& curve : r.boundary) curves.push_back(json::parse(curve_to_json(curve)));
      slice["boundary"] = std::move(curves);
    } else {
      slice["length"] = sw.paths[i].length();
      slice["curve"] = json::parse(curve_to_json(sw.paths[i]));
    }
    slices.push_back(std::move(slice));
  }
  j["slices"] = std::move(slices);
  write_text_file(path, j.dump(2));
}

void write_ac_profile_csv(const std::string& path, const Sweepout& sw, double c) {
  CsvSeries series;
  series.header = {"t", "ac"};
  for (int i = 0; i < sw.slice_count(); ++i) {
    double value;
    if (sw.kind == Sweepout::Kind::Regions) {
      value = sw.regions[i].is_empty() ? 0.0 : ac_functional(sw.regions[i], c);
    } else {
      value = sw.paths[i].length();
    }
    series.rows.push_back({sw.params[i], value});
  }
  write_csv(path, series);
}

void write_sweepout_svg(const std::string& path, const Sweepout& sw, int columns) {
  const int n = sw.slice_count();
  if (n == 0) {
    write_text_file(path, "<svg xmlns=\"http://www.w3.org/2000/svg\"/>\n");
    return;
  }
  const int rows = (n + columns - 1) / columns;
  const double cell = 120.0;
  Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
  auto each_curve = [&](int i, auto&& fn) {
    if (sw.kind == Sweepout::Kind::Regions) {
      for (const auto& c : sw.regions[i].boundary) fn(c);
    } else {
      fn(sw.paths[i]);
    }
  };
  for (int i = 0; i < n; ++i) {
    each_curve(i, [&](const DiscreteCurve& c) {
      for (const Vec2& v : c.vertices()) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
      }
    });
  }
  const Vec2 span = (hi - lo).cwiseMax(Vec2(1e-12, 1e-12));
  const double scale = (cell - 10.0) / std::max(span.x(), span.y());
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << columns * cell << "\" height=\""
      << rows * cell << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int i = 0; i < n; ++i) {
    const double ox = (i % columns) * cell + 5.0;
    const double oy = (i / columns) * cell + 5.0;
    out << "<rect x=\"" << ox - 2 << "\" y=\"" << oy - 2 << "\" width=\"" << cell - 6
        << "\" height=\"" << cell - 6 << "\" fill=\"none\" stroke=\"#ddd\"/>\n";
    each_curve(i, [&](const DiscreteCurve& c) {
      out << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1\" points=\"";
      for (const Vec2& v : c.vertices()) {
        out << ox + (v.x() - lo.x()) * scale << "," << oy + (hi.y() - v.y()) * scale << " ";
      }
      out << "\"/>\n";
    });
  }
  out << "</svg>\n";
  write_text_file(path, out.str());
}

void write_flow_trace_csv(const std::string& path, const std::vector<FlowTraceRow>& trace) {
  CsvSeries series;
  series.header = {"step", "length", "area", "ac", "max_curvature_residual"};
  for (const auto& row : trace) {
    series.rows.push_back({static_cast<double>(row.step), row.length, row.area, row.ac,
                           row.max_residual});
  }
  write_csv(path, series);
}

}  // namespace isocurve
