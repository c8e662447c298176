#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qlab/experiments.hpp"

namespace qlab {

/// Minimal static SVG chart: one pair of linear axes, data-space primitives.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label, double width = 800, double height = 500);

  /// Data range; degenerate ranges are widened so the axes stay drawable.
  void set_range(double x_min, double x_max, double y_min, double y_max);

  void polyline(std::span<const double> xs, std::span<const double> ys, const std::string& color, double stroke = 1.0);
  void dots(std::span<const double> xs, std::span<const double> ys, const std::string& color, double radius = 1.0);
  void crosses(std::span<const double> xs, std::span<const double> ys, const std::string& color, double size = 4.0);
  void box(double x, const BoxSummary& s, double half_width, const std::string& color);
  void legend(const std::string& label, const std::string& color);

  std::string render() const;

 private:
  double px(double x) const;
  double py(double y) const;

  std::string title_, x_label_, y_label_;
  double width_, height_;
  double x_min_ = 0.0, x_max_ = 1.0, y_min_ = 0.0, y_max_ = 1.0;
  std::vector<std::string> body_;
  std::vector<std::pair<std::string, std::string>> legend_;
};

/// Value slice: dots per grid angle plus a connecting line.
void emit_plot(const SliceResult& r, const std::filesystem::path& path);
/// Seed study: one box per group.
void emit_plot(const GroupedReturns& g, const std::filesystem::path& path);
/// Iteration history: average return line with markers, success-rate crosses,
/// successful iterations highlighted.
void emit_plot(std::span<const HistoryRow> rows, const std::filesystem::path& path);

}  // namespace qlab
