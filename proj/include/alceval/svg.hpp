#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace alceval {

// Minimal hand-rolled line charts: axes, ticks, polylines, legend. A CSV is
// always emitted alongside by the callers, so anything fancier belongs in an
// external plotter.

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string svg_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace detail

inline void write_line_svg(const std::filesystem::path& path, const std::string& title,
                           const std::string& x_label, const std::string& y_label,
                           std::span<const SvgSeries> series) {
  if (series.empty()) throw std::invalid_argument("write_line_svg: no series");

  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  bool first = true;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (first) {
        x_min = x_max = x;
        y_min = y_max = y;
        first = false;
      } else {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    }
  }
  if (first) throw std::invalid_argument("write_line_svg: no points");
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;

  constexpr double width = 800.0, height = 500.0;
  constexpr double left = 70.0, right = 760.0, top = 50.0, bottom = 440.0;
  auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (right - left); };
  auto sy = [&](double y) { return bottom - (y - y_min) / (y_max - y_min) * (bottom - top); };

  static constexpr std::array<const char*, 6> palette = {"#1f77b4", "#d62728", "#2ca02c",
                                                         "#9467bd", "#ff7f0e", "#8c564b"};

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << (width / 2) << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";

  out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
      << bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
      << "\" stroke=\"black\"/>\n";

  constexpr int ticks = 5;
  for (int i = 0; i < ticks; ++i) {
    const double fx = x_min + (x_max - x_min) * i / (ticks - 1);
    const double fy = y_min + (y_max - y_min) * i / (ticks - 1);
    const double px = sx(fx);
    const double py = sy(fy);
    out << "<line x1=\"" << detail::svg_num(px) << "\" y1=\"" << bottom << "\" x2=\""
        << detail::svg_num(px) << "\" y2=\"" << (bottom + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << detail::svg_num(px) << "\" y=\"" << (bottom + 20)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << detail::svg_tick(fx) << "</text>\n";
    out << "<line x1=\"" << (left - 5) << "\" y1=\"" << detail::svg_num(py) << "\" x2=\"" << left
        << "\" y2=\"" << detail::svg_num(py) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (left - 8) << "\" y=\"" << detail::svg_num(py + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << detail::svg_tick(fy) << "</text>\n";
  }
  out << "<text x=\"" << (width / 2) << "\" y=\"" << (height - 20)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
  out << "<text x=\"20\" y=\"" << ((top + bottom) / 2)
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 20 "
      << ((top + bottom) / 2) << ")\">" << y_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % palette.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[s].points)
      out << detail::svg_num(sx(x)) << ',' << detail::svg_num(sy(y)) << ' ';
    out << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(s);
    out << "<line x1=\"" << (right - 120) << "\" y1=\"" << detail::svg_num(ly) << "\" x2=\""
        << (right - 95) << "\" y2=\"" << detail::svg_num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << (right - 90) << "\" y=\"" << detail::svg_num(ly + 4)
        << "\" font-size=\"12\">" << series[s].label << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace alceval
