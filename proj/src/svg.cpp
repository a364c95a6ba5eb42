#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace weibayes::svg {
namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 180.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void pad(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
    return;
  }
  const double m = 0.05 * (hi - lo);
  lo -= m;
  hi += m;
}

std::string header(const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
                  "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
       "</text>\n";
  return s;
}

std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label, bool y_ticks = true) {
  std::string s;
  const double left = kLeft, right = kWidth - kRight, top = kTop, bottom = kHeight - kBottom;
  s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(right - left) + "\" height=\"" +
       num(bottom - top) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(bottom + 16) + "\" text-anchor=\"middle\">" + tick(xv) +
         "</text>\n";
    if (y_ticks) {
      const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
      s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(f.py(yv) + 4) + "\" text-anchor=\"end\">" + tick(yv) +
           "</text>\n";
      s += "<line x1=\"" + num(left) + "\" y1=\"" + num(f.py(yv)) + "\" x2=\"" + num(right) + "\" y2=\"" +
           num(f.py(yv)) + "\" stroke=\"#eee\"/>\n";
    }
  }
  s += "<text x=\"" + num((left + right) / 2) + "\" y=\"" + num(kHeight - 12) + "\" text-anchor=\"middle\">" +
       escape(x_label) + "</text>\n";
  s += "<text x=\"16\" y=\"" + num((top + bottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num((top + bottom) / 2) + ")\">" + escape(y_label) + "</text>\n";
  return s;
}

std::string legend_entry(std::size_t i, const std::string& name, const char* color) {
  const double y = kTop + 14.0 + 16.0 * static_cast<double>(i);
  const double x = kWidth - kRight + 12.0;
  return "<line x1=\"" + num(x) + "\" y1=\"" + num(y - 4) + "\" x2=\"" + num(x + 18) + "\" y2=\"" + num(y - 4) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n<text x=\"" + num(x + 24) + "\" y=\"" + num(y) + "\">" +
         escape(name) + "</text>\n";
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series, std::optional<double> y_reference) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const double x : s.x) x0 = std::min(x0, x), x1 = std::max(x1, x);
    for (const double y : s.y) y0 = std::min(y0, y), y1 = std::max(y1, y);
  }
  if (y_reference) y0 = std::min(y0, *y_reference), y1 = std::max(y1, *y_reference);
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  pad(y0, y1);
  if (!(x1 > x0)) pad(x0, x1);
  const Frame f{x0, x1, y0, y1};
  std::string out = header(title) + axes(f, x_label, y_label);
  if (y_reference) {
    out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(f.py(*y_reference)) + "\" x2=\"" + num(kWidth - kRight) +
           "\" y2=\"" + num(f.py(*y_reference)) + "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (std::size_t k = 0; k < series[i].x.size(); ++k) {
      pts += (k ? " " : "") + num(f.px(series[i].x[k])) + "," + num(f.py(series[i].y[k]));
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    for (std::size_t k = 0; k < series[i].x.size(); ++k) {
      out += "<circle cx=\"" + num(f.px(series[i].x[k])) + "\" cy=\"" + num(f.py(series[i].y[k])) +
             "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    out += legend_entry(i, series[i].name, color);
  }
  return out + "</svg>\n";
}

std::string interval_chart(const std::string& title, const std::string& x_label, const std::vector<Interval>& rows,
                           std::optional<double> reference) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  for (const auto& r : rows) x0 = std::min(x0, r.lo), x1 = std::max(x1, r.hi);
  if (reference) x0 = std::min(x0, *reference), x1 = std::max(x1, *reference);
  if (!std::isfinite(x0)) x0 = 0, x1 = 1;
  pad(x0, x1);
  const double n = static_cast<double>(std::max<std::size_t>(rows.size(), 1));
  const Frame f{x0, x1, 0.0, n + 1.0};
  std::string out = header(title) + axes(f, x_label, "", false);
  if (reference) {
    out += "<line x1=\"" + num(f.px(*reference)) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(f.px(*reference)) +
           "\" y2=\"" + num(kHeight - kBottom) + "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double y = f.py(n - static_cast<double>(i));
    const char* color = kPalette[i % std::size(kPalette)];
    out += "<line x1=\"" + num(f.px(rows[i].lo)) + "\" y1=\"" + num(y) + "\" x2=\"" + num(f.px(rows[i].hi)) +
           "\" y2=\"" + num(y) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<circle cx=\"" + num(f.px(rows[i].center)) + "\" cy=\"" + num(y) + "\" r=\"4\" fill=\"" + color + "\"/>\n";
    out += "<text x=\"" + num(kWidth - kRight + 10) + "\" y=\"" + num(y + 4) + "\">" + escape(rows[i].label) +
           "</text>\n";
  }
  return out + "</svg>\n";
}

std::string band_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<double>& x, const std::vector<double>& lo, const std::vector<double>& mid,
                       const std::vector<double>& hi, const std::vector<double>& observed) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const double v : x) x0 = std::min(x0, v), x1 = std::max(x1, v);
  for (const auto* ys : {&lo, &hi, &observed})
    for (const double v : *ys) y0 = std::min(y0, v), y1 = std::max(y1, v);
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  pad(x0, x1);
  pad(y0, y1);
  const Frame f{x0, x1, y0, y1};
  std::string out = header(title) + axes(f, x_label, y_label);
  std::string poly;
  for (std::size_t k = 0; k < x.size(); ++k) poly += num(f.px(x[k])) + "," + num(f.py(hi[k])) + " ";
  for (std::size_t k = x.size(); k-- > 0;) poly += num(f.px(x[k])) + "," + num(f.py(lo[k])) + " ";
  out += "<polygon fill=\"#1f77b4\" fill-opacity=\"0.25\" stroke=\"none\" points=\"" + poly + "\"/>\n";
  std::string line;
  for (std::size_t k = 0; k < x.size(); ++k) line += (k ? " " : "") + num(f.px(x[k])) + "," + num(f.py(mid[k]));
  out += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"" + line + "\"/>\n";
  for (std::size_t k = 0; k < x.size(); ++k) {
    out += "<circle cx=\"" + num(f.px(x[k])) + "\" cy=\"" + num(f.py(observed[k])) + "\" r=\"4\" fill=\"#d62728\"/>\n";
  }
  out += legend_entry(0, "predictive median", "#1f77b4");
  out += legend_entry(1, "observed", "#d62728");
  return out + "</svg>\n";
}

}  // namespace weibayes::svg
