#include "gtsrep/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace gtsrep {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 160, kTop = 30, kBottom = 55;
constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
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

}  // namespace

std::string render_plot(const std::vector<PlotSeries>& series, const std::string& x_label,
                        const std::string& y_label) {
  if (series.empty()) throw Error("emit_plot: no series");
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series) {
    if (s.points.size() < 2) throw Error("emit_plot: series \"" + s.name + "\" has fewer than 2 points");
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) throw Error("emit_plot: non-finite point in \"" + s.name + "\"");
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y_min) / (y_max - y_min)) * ph; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
         "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\" data-x-min=\"" + fmt(x_min) +
         "\" data-x-max=\"" + fmt(x_max) + "\" data-y-min=\"" + fmt(y_min) + "\" data-y-max=\"" + fmt(y_max) +
         "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) + "\" fill=\"white\"/>\n";

  // Axes and ticks.
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + ph) + "\" x2=\"" + fmt(kLeft + pw) + "\" y2=\"" +
         fmt(kTop + ph) + "\"/>\n";
  svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" + fmt(kTop + ph) +
         "\"/>\n";
  svg += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  constexpr int kTicks = 5;
  for (int k = 0; k < kTicks; ++k) {
    const double fx = x_min + (x_max - x_min) * k / (kTicks - 1);
    const double fy = y_min + (y_max - y_min) * k / (kTicks - 1);
    svg += "<text x=\"" + fmt(px(fx)) + "\" y=\"" + fmt(kTop + ph + 16) + "\" text-anchor=\"middle\">" + fmt(fx) +
           "</text>\n";
    svg += "<text x=\"" + fmt(kLeft - 6) + "\" y=\"" + fmt(py(fy) + 4) + "\" text-anchor=\"end\">" + fmt(fy) +
           "</text>\n";
  }
  svg += "<text x=\"" + fmt(kLeft + pw / 2) + "\" y=\"" + fmt(kHeight - 12) + "\" text-anchor=\"middle\">" +
         escape(x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fmt(kTop + ph / 2) + ")\">" + escape(y_label) + "</text>\n";
  svg += "</g>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % kColors.size()];
    std::string pts;
    for (auto [x, y] : series[s].points) {
      if (!pts.empty()) pts += ' ';
      pts += fmt(px(x)) + "," + fmt(py(y));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + pts +
           "\"/>\n";
    const double ly = kTop + 10 + 18 * static_cast<double>(s);
    svg += "<line x1=\"" + fmt(kLeft + pw + 15) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(kLeft + pw + 40) +
           "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(kLeft + pw + 46) + "\" y=\"" + fmt(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(series[s].name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plot(const std::vector<PlotSeries>& series, const std::filesystem::path& path, const std::string& x_label,
               const std::string& y_label) {
  const auto svg = render_plot(series, x_label, y_label);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("emit_plot: cannot open " + path.string());
  os << svg;
  if (!os) throw Error("emit_plot: write failed for " + path.string());
}

}  // namespace gtsrep
