#pragma once

// Minimal deterministic SVG charts: line charts with optional std bands, and
// per-target distribution summaries for the transfer study.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace crl {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y_std;  // optional band, empty or same length as y
  std::string color;
};

namespace svg_detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                 "#bcbd22", "#17becf"};
  return colors[i % 10];
}

}  // namespace svg_detail

inline void write_line_chart(const std::vector<SvgSeries>& series,
                             const std::string& title,
                             const std::string& x_label,
                             const std::string& y_label,
                             const std::string& path) {
  if (series.empty()) throw std::invalid_argument("svg: no series");
  const double W = 800, H = 500, ML = 70, MR = 20, MT = 40, MB = 50;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      const double sd = i < s.y_std.size() ? s.y_std[i] : 0.0;
      ymin = std::min(ymin, s.y[i] - sd);
      ymax = std::max(ymax, s.y[i] + sd);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1;
  if (!(ymax > ymin)) ymax = ymin + 1;
  auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
  auto py = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "'");
  using svg_detail::fmt;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  // axes
  os << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR
     << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML
     << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    os << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << H - MB + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << fmt(xv) << "</text>\n";
    os << "<text x=\"" << ML - 8 << "\" y=\"" << fmt(py(yv) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << fmt(yv) << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
     << x_label << "</text>\n";
  os << "<text x=\"18\" y=\"" << H / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
     << "transform=\"rotate(-90 18 " << H / 2 << ")\">" << y_label
     << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const std::string color =
        s.color.empty() ? svg_detail::palette(si) : s.color;
    if (s.y_std.size() == s.y.size() && !s.y.empty()) {
      os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" "
         << "stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        os << fmt(px(s.x[i])) << "," << fmt(py(s.y[i] + s.y_std[i])) << " ";
      for (std::size_t i = s.x.size(); i-- > 0;)
        os << fmt(px(s.x[i])) << "," << fmt(py(s.y[i] - s.y_std[i])) << " ";
      os << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << fmt(px(s.x[i])) << "," << fmt(py(s.y[i])) << " ";
    os << "\"/>\n";
    // legend
    const double ly = MT + 16.0 * si;
    os << "<line x1=\"" << W - MR - 150 << "\" y1=\"" << ly << "\" x2=\""
       << W - MR - 130 << "\" y2=\"" << ly << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - MR - 125 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label
       << "</text>\n";
  }
  os << "</svg>\n";
}

struct SvgDistribution {
  std::string label;
  std::vector<double> values;
  bool highlighted = false;  // e.g. in-distribution targets
};

// One column per target: min-max whisker, mean marker, value dots.
inline void write_distribution_chart(const std::vector<SvgDistribution>& dists,
                                     const std::string& title,
                                     const std::string& y_label,
                                     const std::string& path) {
  if (dists.empty()) throw std::invalid_argument("svg: no distributions");
  const double W = 800, H = 500, ML = 70, MR = 20, MT = 40, MB = 60;
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const auto& d : dists)
    for (double v : d.values) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  if (!(ymax > ymin)) ymax = ymin + 1;
  auto py = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };
  const double slot = (W - ML - MR) / dists.size();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "'");
  using svg_detail::fmt;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  os << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML
     << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    os << "<text x=\"" << ML - 8 << "\" y=\"" << fmt(py(yv) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << fmt(yv) << "</text>\n";
  }
  os << "<text x=\"18\" y=\"" << H / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
     << "transform=\"rotate(-90 18 " << H / 2 << ")\">" << y_label
     << "</text>\n";
  for (std::size_t i = 0; i < dists.size(); ++i) {
    const auto& d = dists[i];
    const double cx = ML + slot * (i + 0.5);
    const char* color = d.highlighted ? "#2ca02c" : "#1f77b4";
    if (!d.values.empty()) {
      double lo = *std::min_element(d.values.begin(), d.values.end());
      double hi = *std::max_element(d.values.begin(), d.values.end());
      double mean = 0;
      for (double v : d.values) mean += v;
      mean /= d.values.size();
      os << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(py(lo)) << "\" x2=\""
         << fmt(cx) << "\" y2=\"" << fmt(py(hi)) << "\" stroke=\"" << color
         << "\"/>\n";
      for (double v : d.values)
        os << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(py(v))
           << "\" r=\"1.5\" fill=\"" << color << "\" fill-opacity=\"0.3\"/>\n";
      os << "<line x1=\"" << fmt(cx - 12) << "\" y1=\"" << fmt(py(mean))
         << "\" x2=\"" << fmt(cx + 12) << "\" y2=\"" << fmt(py(mean))
         << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
    os << "<text x=\"" << fmt(cx) << "\" y=\"" << H - MB + 20
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"12\">"
       << d.label << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace crl
