#pragma once

// Minimal SVG 1.1 line charts: linear or log axes, error bars, legend.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace safegen::cli {

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
  std::vector<double> lo, hi;  // error bar ends; empty for none
  bool dashed = false;
  bool markers = true;
};

struct SvgPlot {
  std::string title, xlabel, ylabel;
  bool log_x = false, log_y = false;
  std::vector<SvgSeries> series;
  std::optional<double> hline;  // horizontal reference line
};

namespace detail {

inline std::string num4(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

inline std::string px(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

inline std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '&') o += "&amp;";
    else if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else o += c;
  }
  return o;
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;
  double map(double v, double a, double b) const {
    const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo)) : (v - lo) / (hi - lo);
    return a + t * (b - a);
  }
  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1) {
        const double v = std::pow(10.0, e);
        if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) t.push_back(v);
      }
      if (t.size() < 2) t = {lo, hi};
      return t;
    }
    const double span = hi - lo;
    const double raw = span / 5;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (raw <= m * mag) {
        step = m * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return t;
  }
};

inline Axis fit_axis(const std::vector<double>& vals, bool log) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : vals) {
    if (!std::isfinite(v) || (log && v <= 0)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) lo = log ? 1 : 0, hi = log ? 10 : 1;
  if (log) {
    a.lo = std::pow(10.0, std::floor(std::log10(lo)));
    a.hi = std::pow(10.0, std::ceil(std::log10(hi)));
    if (a.hi <= a.lo) a.hi = a.lo * 10;
  } else {
    const double pad = hi > lo ? 0.05 * (hi - lo) : std::max(1.0, std::abs(hi)) * 0.5;
    a.lo = lo - pad;
    a.hi = hi + pad;
  }
  return a;
}

}  // namespace detail

inline std::string render_svg(const SvgPlot& p) {
  using detail::px;
  constexpr double W = 640, H = 420, L = 70, R = 170, T = 40, B = 55;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  std::vector<double> xs, ys;
  for (const auto& s : p.series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
    ys.insert(ys.end(), s.lo.begin(), s.lo.end());
    ys.insert(ys.end(), s.hi.begin(), s.hi.end());
  }
  if (p.hline) ys.push_back(*p.hline);
  const detail::Axis ax = detail::fit_axis(xs, p.log_x), ay = detail::fit_axis(ys, p.log_y);
  auto X = [&](double v) { return ax.map(v, L, W - R); };
  auto Y = [&](double v) { return ay.map(v, H - B, T); };
  auto ok = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!p.log_x || x > 0) && (!p.log_y || y > 0);
  };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + px(W) + "\" height=\"" + px(H) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + px(W) + "\" height=\"" + px(H) + "\" fill=\"white\"/>\n";
  s += "<text x=\"" + px((L + W - R) / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
       detail::escape(p.title) + "</text>\n";
  // Frame, ticks and grid.
  s += "<rect x=\"" + px(L) + "\" y=\"" + px(T) + "\" width=\"" + px(W - R - L) + "\" height=\"" + px(H - B - T) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    s += "<line x1=\"" + px(X(t)) + "\" y1=\"" + px(H - B) + "\" x2=\"" + px(X(t)) + "\" y2=\"" + px(T) +
         "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + px(X(t)) + "\" y=\"" + px(H - B + 16) + "\" text-anchor=\"middle\">" + detail::num4(t) +
         "</text>\n";
  }
  for (double t : ay.ticks()) {
    s += "<line x1=\"" + px(L) + "\" y1=\"" + px(Y(t)) + "\" x2=\"" + px(W - R) + "\" y2=\"" + px(Y(t)) +
         "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + px(L - 6) + "\" y=\"" + px(Y(t) + 4) + "\" text-anchor=\"end\">" + detail::num4(t) +
         "</text>\n";
  }
  s += "<text x=\"" + px((L + W - R) / 2) + "\" y=\"" + px(H - 15) + "\" text-anchor=\"middle\">" +
       detail::escape(p.xlabel) + "</text>\n";
  s += "<text x=\"18\" y=\"" + px((T + H - B) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       px((T + H - B) / 2) + ")\">" + detail::escape(p.ylabel) + "</text>\n";
  if (p.hline && (!p.log_y || *p.hline > 0))
    s += "<line x1=\"" + px(L) + "\" y1=\"" + px(Y(*p.hline)) + "\" x2=\"" + px(W - R) + "\" y2=\"" +
         px(Y(*p.hline)) + "\" stroke=\"gray\" stroke-dasharray=\"2,3\"/>\n";

  for (size_t k = 0; k < p.series.size(); ++k) {
    const SvgSeries& sr = p.series[k];
    const std::string c = colors[k % 8];
    std::string pts;
    for (size_t i = 0; i < sr.x.size(); ++i)
      if (ok(sr.x[i], sr.y[i])) pts += (pts.empty() ? "" : " ") + px(X(sr.x[i])) + "," + px(Y(sr.y[i]));
    if (!pts.empty())
      s += "<polyline fill=\"none\" stroke=\"" + c + "\" stroke-width=\"1.5\"" +
           (sr.dashed ? " stroke-dasharray=\"6,4\"" : "") + " points=\"" + pts + "\"/>\n";
    for (size_t i = 0; i < sr.x.size(); ++i) {
      if (!ok(sr.x[i], sr.y[i])) continue;
      if (i < sr.lo.size() && i < sr.hi.size() && ok(sr.x[i], sr.lo[i]) && ok(sr.x[i], sr.hi[i])) {
        const std::string x = px(X(sr.x[i]));
        s += "<line x1=\"" + x + "\" y1=\"" + px(Y(sr.lo[i])) + "\" x2=\"" + x + "\" y2=\"" + px(Y(sr.hi[i])) +
             "\" stroke=\"" + c + "\"/>\n";
        for (double e : {sr.lo[i], sr.hi[i]})
          s += "<line x1=\"" + px(X(sr.x[i]) - 4) + "\" y1=\"" + px(Y(e)) + "\" x2=\"" + px(X(sr.x[i]) + 4) +
               "\" y2=\"" + px(Y(e)) + "\" stroke=\"" + c + "\"/>\n";
      }
      if (sr.markers)
        s += "<circle cx=\"" + px(X(sr.x[i])) + "\" cy=\"" + px(Y(sr.y[i])) + "\" r=\"3\" fill=\"" + c + "\"/>\n";
    }
    const double ly = T + 14 + 18 * static_cast<double>(k);
    s += "<line x1=\"" + px(W - R + 12) + "\" y1=\"" + px(ly - 4) + "\" x2=\"" + px(W - R + 36) + "\" y2=\"" +
         px(ly - 4) + "\" stroke=\"" + c + "\" stroke-width=\"1.5\"" + (sr.dashed ? " stroke-dasharray=\"6,4\"" : "") +
         "/>\n";
    s += "<text x=\"" + px(W - R + 42) + "\" y=\"" + px(ly) + "\">" + detail::escape(sr.label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace safegen::cli
