// Surface config files, JSON/CSV curve serialization, CSV series and SVG plots.
#pragma once

#include <map>
#include <string>

#include "isocurve/minmax.hpp"

namespace isocurve {

// Plain-text key-value surface description (see README for the schema).
SurfacePtr load_surface_config(const std::string& path);
SurfacePtr surface_from_keyvalues(const std::map<std::string, std::string>& kv);

// Shortest round-trip decimal formatting (bit-exact through parse).
std::string format_double(double x);

std::string curve_to_json(const DiscreteCurve& curve);
DiscreteCurve curve_from_json(const std::string& text, SurfacePtr surface);

void write_text_file(const std::string& path, const std::string& content);

void write_curve_csv(const std::string& path, const DiscreteCurve& curve);

struct CsvSeries {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
void write_csv(const std::string& path, const CsvSeries& series);

// Minimal SVG polyline plot; one polyline per series.
struct PlotSeries {
  std::vector<Vec2> points;
  std::string color = "#1f6fb2";
};
void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series, int width = 640,
                    int height = 480);

// Sweepout exports: JSON bundle, per-slice functional profile, SVG filmstrip.
void write_sweepout_json(const std::string& path, const Sweepout& sw, double c);
void write_ac_profile_csv(const std::string& path, const Sweepout& sw, double c);
void write_sweepout_svg(const std::string& path, const Sweepout& sw, int columns = 8);

void write_flow_trace_csv(const std::string& path, const std::vector<FlowTraceRow>& trace);

}  // namespace isocurve
