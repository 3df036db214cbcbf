// plot.hpp
//
// Static SVG line plots of the experiment CSVs. Layout depends only on the
// data, so the same CSV always renders to the same bytes.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sdtest/csv.hpp"
#include "sdtest/error.hpp"

namespace sdtest {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

namespace detail {

inline constexpr int kPlotWidth = 720;
inline constexpr int kPlotHeight = 440;
inline constexpr int kMarginLeft = 70;
inline constexpr int kMarginRight = 170;
inline constexpr int kMarginTop = 40;
inline constexpr int kMarginBottom = 55;
inline constexpr const char* kPalette[] = {"#8c510a", "#2166ac", "#1b7837", "#b2182b", "#762a83", "#e08214",
                                            "#4d4d4d", "#35978f"};

inline std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  if (std::fabs(v) < 1e-12) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string escape_xml(const std::string& s) {
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

struct Range {
  double lo;
  double hi;
};

inline Range padded_range(double lo, double hi) {
  if (hi - lo < 1e-12) {
    const double pad = std::max(std::fabs(lo) * 0.1, 0.5);
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace detail

/// Renders a plot; throws DomainError when no series has a point.
inline std::string render_svg(const PlotSpec& spec) {
  using namespace detail;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  std::size_t points = 0;
  for (const auto& s : spec.series)
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
      ++points;
    }
  if (points == 0) throw DomainError("plot: no data points");
  const Range xr = padded_range(xmin, xmax);
  const Range yr = padded_range(ymin, ymax);
  const double pw = kPlotWidth - kMarginLeft - kMarginRight;
  const double ph = kPlotHeight - kMarginTop - kMarginBottom;
  auto px = [&](double x) { return kMarginLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kMarginTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kPlotWidth) + "\" height=\"" +
         std::to_string(kPlotHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fixed(kMarginLeft + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         escape_xml(spec.title) + "</text>\n";
  out += "<rect x=\"" + fixed(kMarginLeft) + "\" y=\"" + fixed(kMarginTop) + "\" width=\"" + fixed(pw) +
         "\" height=\"" + fixed(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = xmin + (xmax - xmin) * i / kTicks;
    const double yv = ymin + (ymax - ymin) * i / kTicks;
    out += "<line x1=\"" + fixed(px(xv)) + "\" y1=\"" + fixed(kMarginTop + ph) + "\" x2=\"" + fixed(px(xv)) +
           "\" y2=\"" + fixed(kMarginTop + ph + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fixed(px(xv)) + "\" y=\"" + fixed(kMarginTop + ph + 19) + "\" text-anchor=\"middle\">" +
           tick_label(xv) + "</text>\n";
    out += "<line x1=\"" + fixed(kMarginLeft - 5) + "\" y1=\"" + fixed(py(yv)) + "\" x2=\"" + fixed(kMarginLeft) +
           "\" y2=\"" + fixed(py(yv)) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fixed(kMarginLeft - 8) + "\" y=\"" + fixed(py(yv) + 4) + "\" text-anchor=\"end\">" +
           tick_label(yv) + "</text>\n";
    if (xmax == xmin || ymax == ymin) break;
  }
  out += "<text x=\"" + fixed(kMarginLeft + pw / 2) + "\" y=\"" + fixed(kPlotHeight - 12) +
         "\" text-anchor=\"middle\">" + escape_xml(spec.x_label) + "</text>\n";
  out += "<text x=\"16\" y=\"" + fixed(kMarginTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fixed(kMarginTop + ph / 2) + ")\">" + escape_xml(spec.y_label) + "</text>\n";

  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const auto& series = spec.series[s];
    const std::string colour = kPalette[s % std::size(kPalette)];
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : series.points)
      if (std::isfinite(p.first) && std::isfinite(p.second)) pts.push_back(p);
    if (pts.size() >= 2) {
      out += "<polyline fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.5\"";
      if (series.dashed) out += " stroke-dasharray=\"4 3\"";
      out += " points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) out += ' ';
        out += fixed(px(pts[i].first)) + "," + fixed(py(pts[i].second));
      }
      out += "\"/>\n";
    }
    for (const auto& [x, y] : pts)
      out += "<circle cx=\"" + fixed(px(x)) + "\" cy=\"" + fixed(py(y)) + "\" r=\"2.5\" fill=\"" + colour + "\"/>\n";
    const double ly = kMarginTop + 14 + 18.0 * static_cast<double>(s);
    const double lx = kPlotWidth - kMarginRight + 14;
    out += "<line x1=\"" + fixed(lx) + "\" y1=\"" + fixed(ly - 4) + "\" x2=\"" + fixed(lx + 22) + "\" y2=\"" +
           fixed(ly - 4) + "\" stroke=\"" + colour + "\" stroke-width=\"2\"" +
           (series.dashed ? " stroke-dasharray=\"4 3\"" : "") + "/>\n";
    out += "<text x=\"" + fixed(lx + 28) + "\" y=\"" + fixed(ly) + "\">" + escape_xml(series.label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

/// Builds a plot from an efficiency or power CSV written by this tool.
/// x_column empty: eta for efficiency files, eta_n for unbalanced power,
/// and whichever of N or alpha varies for balanced power.
inline PlotSpec plot_spec_from_csv(const CsvTable& table, const std::string& path, std::string x_column = {}) {
  if (table.rows.empty()) throw ParseError(path + ":2: empty data section");
  const bool efficiency = table.column("e_tv") >= 0 && table.column("eta") >= 0;
  std::vector<std::pair<std::string, std::string>> ys;  // (column, label)
  PlotSpec spec;
  if (efficiency) {
    ys = {{"e_tv", "e_TV"}, {"argmax_astar", "argmax A*"}};
    if (x_column.empty()) x_column = "eta";
    spec.y_label = "efficiency";
  } else {
    for (const auto& h : table.header)
      if (h.rfind("power_", 0) == 0) ys.emplace_back(h, h.substr(6));
    if (ys.empty()) throw ParseError(path + ":1: no e_tv or power_ columns");
    spec.y_label = "empirical power";
    if (x_column.empty()) {
      const int sec = table.column("section");
      const bool unbalanced = sec >= 0 && table.rows.front()[sec] == "unbalanced";
      if (unbalanced) {
        x_column = "eta_n";
      } else {
        auto distinct = [&](const std::string& c) {
          const int i = table.column(c);
          std::set<std::string> v;
          if (i >= 0)
            for (const auto& r : table.rows) v.insert(r[i]);
          return v.size();
        };
        x_column = distinct("alpha") > distinct("N") ? "alpha" : "N";
      }
    }
  }
  const int xi = table.column(x_column);
  if (xi < 0) throw ParseError(path + ":1: no column '" + x_column + "'");
  spec.x_label = x_column;
  spec.title = std::filesystem::path(path).stem().string();
  for (std::size_t k = 0; k < ys.size(); ++k) {
    const int yi = table.column(ys[k].first);
    if (yi < 0) continue;
    PlotSeries s;
    s.label = ys[k].second;
    s.dashed = efficiency && k == 1;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const std::string where = path + ":" + std::to_string(r + 2);
      s.points.emplace_back(csv_number(table.rows[r][xi], where), csv_number(table.rows[r][yi], where));
    }
    spec.series.push_back(std::move(s));
  }
  return spec;
}

/// Renders one CSV into an SVG file. Nothing is written on error.
inline void render_plot(const std::string& csv_path, const std::string& svg_path, const std::string& x_column = {}) {
  const CsvTable table = read_csv(csv_path);
  const std::string svg = render_svg(plot_spec_from_csv(table, csv_path, x_column));
  std::ofstream out(svg_path, std::ios::binary);
  if (!out) throw ConfigError("plot: cannot write " + svg_path);
  out << svg;
}

/// One SVG per CSV, next to it with the extension replaced.
inline std::vector<std::string> render_plots(const std::vector<std::string>& csv_paths) {
  std::vector<std::string> written;
  for (const auto& csv : csv_paths) {
    const std::string svg = std::filesystem::path(csv).replace_extension(".svg").string();
    render_plot(csv, svg);
    written.push_back(svg);
  }
  return written;
}

}  // namespace sdtest
