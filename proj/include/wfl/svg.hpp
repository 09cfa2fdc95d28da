#pragma once
// Self-contained SVG figures: error boxplots, estimate scatter maps
// and loss-landscape heatmaps. Output depends only on the inputs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "wfl/errors.hpp"
#include "wfl/geometry.hpp"
#include "wfl/harness.hpp"

namespace wfl::svg {

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string num(double v) { return fmt("%.2f", v); }

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string header(int w, int h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline std::string line(double x1, double y1, double x2, double y2, const std::string& style) {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
         "\" " + style + "/>\n";
}

inline std::string text(double x, double y, const std::string& s, const std::string& extra = "") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" " + extra + ">" + escape(s) + "</text>\n";
}

/// Viridis-like ramp from 5 anchors, t in [0, 1].
inline std::string ramp(double t) {
  static const double c[5][3] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double f = t - i;
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(c[i][0] + f * (c[i + 1][0] - c[i][0]))),
                static_cast<int>(std::lround(c[i][1] + f * (c[i + 1][1] - c[i][1]))),
                static_cast<int>(std::lround(c[i][2] + f * (c[i + 1][2] - c[i][2]))));
  return buf;
}

}  // namespace detail

struct BoxGroup {
  std::string label;
  ErrorSummary summary;
};

/// Log-scale boxplot: box q25..q75, median bar, whiskers at q10 and q90, and a
/// dashed red reference line at `reference` (normally lambda0).
inline std::string boxplot(const std::vector<BoxGroup>& groups, const std::string& title,
                           std::optional<double> reference = std::nullopt) {
  if (groups.empty()) throw InvalidArgument("svg::boxplot: no groups");
  const int w = 120 + 90 * static_cast<int>(groups.size());
  const int h = 420;
  const double top = 40, bottom = h - 60.0, left = 80;
  double lo = 1e300, hi = -1e300;
  for (const auto& g : groups) {
    lo = std::min(lo, std::max(g.summary.q10, 1e-15));
    hi = std::max(hi, std::max(g.summary.q90, 1e-15));
  }
  if (reference) {
    lo = std::min(lo, *reference);
    hi = std::max(hi, *reference);
  }
  double dlo = std::floor(std::log10(lo));
  double dhi = std::ceil(std::log10(hi));
  if (dhi <= dlo) dhi = dlo + 1;
  auto ypos = [&](double v) {
    const double l = std::log10(std::max(v, 1e-15));
    return bottom - (l - dlo) / (dhi - dlo) * (bottom - top);
  };

  std::string s = detail::header(w, h);
  s += detail::text(w / 2.0, 24, title, "text-anchor=\"middle\" font-size=\"14\"");
  s += detail::line(left, top, left, bottom, "stroke=\"black\"");
  s += detail::line(left, bottom, w - 20.0, bottom, "stroke=\"black\"");
  for (int d = static_cast<int>(dlo); d <= static_cast<int>(dhi); ++d) {
    const double y = ypos(std::pow(10.0, d));
    s += detail::line(left - 5, y, left, y, "stroke=\"black\"");
    s += detail::line(left, y, w - 20.0, y, "stroke=\"#dddddd\"");
    s += detail::text(left - 8, y + 4, "1e" + std::to_string(d), "text-anchor=\"end\"");
  }
  s += detail::text(18, (top + bottom) / 2, "error (m)",
                    "text-anchor=\"middle\" transform=\"rotate(-90 18 " + detail::num((top + bottom) / 2) + ")\"");
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& q = groups[i].summary;
    const double cx = left + 60 + 90.0 * static_cast<double>(i);
    const double bw = 40;
    s += "<g class=\"box\" data-q10=\"" + detail::fmt("%.6g", q.q10) + "\" data-q90=\"" +
         detail::fmt("%.6g", q.q90) + "\">\n";
    s += detail::line(cx, ypos(q.q10), cx, ypos(q.q25), "stroke=\"black\"");
    s += detail::line(cx, ypos(q.q75), cx, ypos(q.q90), "stroke=\"black\"");
    s += detail::line(cx - bw / 4, ypos(q.q10), cx + bw / 4, ypos(q.q10), "stroke=\"black\"");
    s += detail::line(cx - bw / 4, ypos(q.q90), cx + bw / 4, ypos(q.q90), "stroke=\"black\"");
    s += "<rect x=\"" + detail::num(cx - bw / 2) + "\" y=\"" + detail::num(ypos(q.q75)) + "\" width=\"" +
         detail::num(bw) + "\" height=\"" + detail::num(std::max(0.0, ypos(q.q25) - ypos(q.q75))) +
         "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    s += detail::line(cx - bw / 2, ypos(q.median), cx + bw / 2, ypos(q.median),
                      "stroke=\"black\" stroke-width=\"2\"");
    s += "</g>\n";
    s += detail::text(cx, bottom + 18, groups[i].label, "text-anchor=\"middle\"");
  }
  if (reference) {
    const double y = ypos(*reference);
    s += "<g class=\"reference\" data-value=\"" + detail::fmt("%.4f", *reference) + "\">\n";
    s += detail::line(left, y, w - 20.0, y, "stroke=\"red\" stroke-dasharray=\"6 4\"");
    s += detail::text(w - 22.0, y - 4, "lambda0 = " + detail::fmt("%.4f", *reference) + " m",
                      "text-anchor=\"end\" fill=\"red\"");
    s += "</g>\n";
  }
  s += "</svg>\n";
  return s;
}

/// True locations (dots) joined to their estimates (crosses) over the scene rectangle.
inline std::string scatter(const std::vector<Vec2>& truth, const std::vector<Vec2>& estimate,
                           const Rect& bounds, const std::string& title) {
  if (truth.empty() || truth.size() != estimate.size())
    throw InvalidArgument("svg::scatter: need matching nonempty point sets");
  const int w = 520, h = 540;
  const double pad = 40, side = 440;
  const double scale = side / std::max(bounds.width(), bounds.height());
  auto px = [&](const Vec2& p) { return pad + (p.x - bounds.min.x) * scale; };
  auto py = [&](const Vec2& p) { return pad + 20 + (bounds.max.y - p.y) * scale; };
  std::string s = detail::header(w, h);
  s += detail::text(w / 2.0, 24, title, "text-anchor=\"middle\" font-size=\"14\"");
  s += "<rect x=\"" + detail::num(pad) + "\" y=\"" + detail::num(pad + 20) + "\" width=\"" +
       detail::num(bounds.width() * scale) + "\" height=\"" + detail::num(bounds.height() * scale) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const Vec2 e{std::clamp(estimate[i].x, bounds.min.x, bounds.max.x),
                 std::clamp(estimate[i].y, bounds.min.y, bounds.max.y)};
    s += detail::line(px(truth[i]), py(truth[i]), px(e), py(e), "stroke=\"#fc9272\"");
    s += "<circle cx=\"" + detail::num(px(truth[i])) + "\" cy=\"" + detail::num(py(truth[i])) +
         "\" r=\"2\" fill=\"#3182bd\"/>\n";
    s += detail::line(px(e) - 2, py(e) - 2, px(e) + 2, py(e) + 2, "stroke=\"#de2d26\"");
    s += detail::line(px(e) - 2, py(e) + 2, px(e) + 2, py(e) - 2, "stroke=\"#de2d26\"");
  }
  s += "</svg>\n";
  return s;
}

/// Row-major values[iy * nx + ix] over `bounds`, iy = 0 at the bottom edge.
inline std::string heatmap(const std::vector<double>& values, std::size_t nx, std::size_t ny,
                           const Rect& bounds, const std::string& title) {
  if (nx == 0 || ny == 0 || values.size() != nx * ny)
    throw InvalidArgument("svg::heatmap: values must hold nx * ny entries");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn, span = std::max(*mx - *mn, 1e-300);
  const int w = 560, h = 540;
  const double pad = 40, side = 440;
  const double scale = side / std::max(bounds.width(), bounds.height());
  const double cw = bounds.width() * scale / static_cast<double>(nx);
  const double ch = bounds.height() * scale / static_cast<double>(ny);
  std::string s = detail::header(w, h);
  s += detail::text(w / 2.0, 24, title, "text-anchor=\"middle\" font-size=\"14\"");
  for (std::size_t iy = 0; iy < ny; ++iy)
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double v = values[iy * nx + ix];
      s += "<rect x=\"" + detail::num(pad + static_cast<double>(ix) * cw) + "\" y=\"" +
           detail::num(pad + 20 + static_cast<double>(ny - 1 - iy) * ch) + "\" width=\"" +
           detail::num(cw + 0.3) + "\" height=\"" + detail::num(ch + 0.3) + "\" fill=\"" +
           detail::ramp((v - lo) / span) + "\"/>\n";
    }
  const double bx = pad + side + 20;
  for (int i = 0; i < 50; ++i)
    s += "<rect x=\"" + detail::num(bx) + "\" y=\"" + detail::num(pad + 20 + side * (49 - i) / 50.0) +
         "\" width=\"14\" height=\"" + detail::num(side / 50.0 + 0.3) + "\" fill=\"" +
         detail::ramp(i / 49.0) + "\"/>\n";
  s += detail::text(bx + 18, pad + 30, detail::fmt("%.3g", *mx));
  s += detail::text(bx + 18, pad + 20 + side, detail::fmt("%.3g", lo));
  s += "</svg>\n";
  return s;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os << content;
  if (!os) throw FormatError("write failed: " + path);
}

/// Boxplot of final and on-grid errors plus a scatter map for one experiment.
/// Returns the written paths; nothing is written for an empty result.
inline std::vector<std::string> emit_figures(const ExperimentResult& r, const Rect& bounds, double lambda0,
                                             const std::string& dir) {
  if (r.rows.empty()) throw InvalidArgument("emit_figures: no results to plot");
  std::vector<Vec2> truth, est;
  for (const auto& row : r.rows) {
    truth.push_back(row.truth);
    est.push_back(row.loc.estimate);
  }
  const std::string box = dir + "/errors_boxplot.svg";
  const std::string sc = dir + "/estimates_scatter.svg";
  write_file(box, boxplot({{"on-grid", r.grid_summary}, {"final", r.summary}}, "Localization error", lambda0));
  write_file(sc, scatter(truth, est, bounds, "Estimates"));
  return {box, sc};
}

}  // namespace wfl::svg
