#pragma once

// Minimal static SVG charts for the report figures.

#include <optional>
#include <string>
#include <vector>

namespace weibayes::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series, std::optional<double> y_reference = std::nullopt);

struct Interval {
  std::string label;
  double center = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Horizontal error bars, one row per interval.
std::string interval_chart(const std::string& title, const std::string& x_label, const std::vector<Interval>& rows,
                           std::optional<double> reference = std::nullopt);

/// Shaded band with a median line and observed points.
std::string band_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<double>& x, const std::vector<double>& lo, const std::vector<double>& mid,
                       const std::vector<double>& hi, const std::vector<double>& observed);

}  // namespace weibayes::svg
