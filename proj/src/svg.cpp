#include "redreg/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace redreg {

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v, const char* fmt = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

struct Bounds {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
};

Bounds data_bounds(const LineChart& chart) {
  Bounds b;
  b.xmin = b.ymin = std::numeric_limits<double>::infinity();
  b.xmax = b.ymax = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& s : chart.series) {
    for (const auto& [x, y] : s.points) {
      b.xmin = std::min(b.xmin, x);
      b.xmax = std::max(b.xmax, x);
      b.ymin = std::min(b.ymin, y);
      b.ymax = std::max(b.ymax, y);
      any = true;
    }
  }
  if (!any) return Bounds{};
  // a flat range still needs a nonzero span to map through
  if (b.xmin == b.xmax) {
    b.xmin -= 0.5;
    b.xmax += 0.5;
  }
  if (b.ymin == b.ymax) {
    b.ymin -= 0.5;
    b.ymax += 0.5;
  }
  return b;
}

double px(double x, const Bounds& b) {
  return kPlotLeft + (x - b.xmin) / (b.xmax - b.xmin) * (kPlotRight - kPlotLeft);
}

double py(double y, const Bounds& b) {
  return kPlotBottom - (y - b.ymin) / (b.ymax - b.ymin) * (kPlotBottom - kPlotTop);
}

}  // namespace

std::string render_chart(const LineChart& chart) {
  const Bounds b = data_bounds(chart);
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << num(kChartWidth, "%.0f")
      << " " << num(kChartHeight, "%.0f") << "\">\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"" << num(kChartWidth, "%.0f") << "\" height=\""
      << num(kChartHeight, "%.0f") << "\" fill=\"white\"/>\n";
  svg << "  <text x=\"" << num(kChartWidth / 2, "%.0f")
      << "\" y=\"28\" font-family=\"sans-serif\" font-size=\"20\" text-anchor=\"middle\">"
      << xml_escape(chart.title) << "</text>\n";

  for (int i = 0; i <= kAxisDivisions; ++i) {
    const double t = static_cast<double>(i) / kAxisDivisions;
    const double gx = kPlotLeft + t * (kPlotRight - kPlotLeft);
    const double gy = kPlotBottom - t * (kPlotBottom - kPlotTop);
    svg << "  <line x1=\"" << num(gx) << "\" y1=\"" << num(kPlotTop) << "\" x2=\"" << num(gx)
        << "\" y2=\"" << num(kPlotBottom) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "  <line x1=\"" << num(kPlotLeft) << "\" y1=\"" << num(gy) << "\" x2=\""
        << num(kPlotRight) << "\" y2=\"" << num(gy)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "  <text x=\"" << num(gx) << "\" y=\"" << num(kPlotBottom + 22)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
        << num(b.xmin + t * (b.xmax - b.xmin), "%.4g") << "</text>\n";
    svg << "  <text x=\"" << num(kPlotLeft - 8) << "\" y=\"" << num(gy + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">"
        << num(b.ymin + t * (b.ymax - b.ymin), "%.4g") << "</text>\n";
  }

  svg << "  <rect x=\"" << num(kPlotLeft) << "\" y=\"" << num(kPlotTop) << "\" width=\""
      << num(kPlotRight - kPlotLeft) << "\" height=\"" << num(kPlotBottom - kPlotTop)
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "  <text x=\"" << num((kPlotLeft + kPlotRight) / 2) << "\" y=\""
      << num(kChartHeight - 14)
      << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">"
      << xml_escape(chart.x_label) << "</text>\n";
  svg << "  <text x=\"24\" y=\"" << num((kPlotTop + kPlotBottom) / 2)
      << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 24 "
      << num((kPlotTop + kPlotBottom) / 2) << ")\">" << xml_escape(chart.y_label) << "</text>\n";

  for (const auto& s : chart.series) {
    if (s.points.empty()) continue;
    svg << "  <polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& [x, y] : s.points) {
      if (!first) svg << " ";
      svg << num(px(x, b)) << "," << num(py(y, b));
      first = false;
    }
    svg << "\"/>\n";
  }

  double ly = kPlotTop + 18;
  for (const auto& s : chart.series) {
    const double lx = kPlotRight - 150;
    svg << "  <line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 26)
        << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n";
    svg << "  <text x=\"" << num(lx + 32) << "\" y=\"" << num(ly)
        << "\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(s.name)
        << "</text>\n";
    ly += 18;
  }

  svg << "</svg>\n";
  return svg.str();
}

std::vector<NamedChart> run_charts(std::span<const TelemetryRecord> records) {
  auto add = [](Series& s, long long epoch, const std::optional<double>& v) {
    if (v) s.points.emplace_back(static_cast<double>(epoch), *v);
  };

  Series rlc_a{"rlc_a", kColorA, {}}, rlc_v{"rlc_v", kColorV, {}};
  Series s_a{"S_a", kColorA, {}}, s_v{"S_v", kColorV, {}};
  Series red_a{"red_a", kColorA, {}}, red_v{"red_v", kColorV, {}};
  Series gate_a{"gate_a", kColorA, {}}, gate_v{"gate_v", kColorV, {}};
  Series acc_a{"acc_a", kColorA, {}}, acc_v{"acc_v", kColorV, {}};
  Series acc{"acc", kColorNeutral, {}};

  for (const auto& r : records) {
    if (r.kind != TelemetryRecord::Kind::epoch) continue;
    add(rlc_a, r.epoch, r.rlc[0]);
    add(rlc_v, r.epoch, r.rlc[1]);
    add(s_a, r.epoch, r.growth[0]);
    add(s_v, r.epoch, r.growth[1]);
    add(red_a, r.epoch, r.red[0]);
    add(red_v, r.epoch, r.red[1]);
    gate_a.points.emplace_back(static_cast<double>(r.epoch), static_cast<double>(r.gate[0]));
    gate_v.points.emplace_back(static_cast<double>(r.epoch), static_cast<double>(r.gate[1]));
    add(acc_a, r.epoch, r.acc_a);
    add(acc_v, r.epoch, r.acc_v);
    add(acc, r.epoch, r.acc);
  }

  std::vector<NamedChart> charts;
  charts.push_back({"rlc", {"Representation-logit coupling", "epoch", "rlc", {rlc_a, rlc_v}}});
  charts.push_back({"growth", {"Window-mean growth rate", "epoch", "S", {s_a, s_v}}});
  charts.push_back({"redundancy", {"Noise-pair redundancy", "epoch", "red", {red_a, red_v}}});
  charts.push_back({"gates", {"Gate timeline", "epoch", "gate", {gate_a, gate_v}}});
  charts.push_back(
      {"accuracy", {"Held-out accuracy", "epoch", "accuracy", {acc_a, acc_v, acc}}});
  return charts;
}

}  // namespace redreg
