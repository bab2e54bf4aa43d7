#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "redreg/telemetry.hpp"

namespace redreg {

// Fixed chart geometry. Data ranges map onto the plot area with no padding,
// so the extremes of a series land exactly on the plot-area edges.
inline constexpr double kChartWidth = 1000.0;
inline constexpr double kChartHeight = 600.0;
inline constexpr double kPlotLeft = 90.0;
inline constexpr double kPlotRight = 960.0;
inline constexpr double kPlotTop = 50.0;
inline constexpr double kPlotBottom = 530.0;
inline constexpr int kAxisDivisions = 10;

inline constexpr const char* kColorA = "#1f77b4";
inline constexpr const char* kColorV = "#ff7f0e";
inline constexpr const char* kColorNeutral = "#7f7f7f";

struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

// Standalone SVG document (viewBox 0 0 1000 600) with grid, tick labels,
// legend and one polyline per non-empty series.
std::string render_chart(const LineChart& chart);

struct NamedChart {
  std::string stem;  // file name without extension
  LineChart chart;
};

// The five standard charts drawn from a run's epoch records: coupling, growth
// rate, redundancy, gate timeline, and branch accuracies. Undefined early
// values are simply absent from their series.
std::vector<NamedChart> run_charts(std::span<const TelemetryRecord> records);

}  // namespace redreg
