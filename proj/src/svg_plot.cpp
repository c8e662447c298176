#include "qlab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "qlab/csv.hpp"

namespace qlab {

namespace {

constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
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

std::vector<double> nice_ticks(double lo, double hi) {
  const double raw = (hi - lo) / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = (norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0) * mag;
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void require_same_size(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("plot series need equally many x and y values");
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label, double width, double height)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)), width_(width), height_(height) {}

void SvgPlot::set_range(double x_min, double x_max, double y_min, double y_max) {
  if (!(x_max > x_min)) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (!(y_max > y_min)) {
    const double pad = std::max(1.0, std::abs(y_min) * 0.1);
    y_min -= pad;
    y_max += pad;
  } else {
    const double pad = (y_max - y_min) * 0.05;
    y_min -= pad;
    y_max += pad;
  }
  x_min_ = x_min;
  x_max_ = x_max;
  y_min_ = y_min;
  y_max_ = y_max;
}

double SvgPlot::px(double x) const { return kLeft + (x - x_min_) / (x_max_ - x_min_) * (width_ - kLeft - kRight); }
double SvgPlot::py(double y) const { return height_ - kBottom - (y - y_min_) / (y_max_ - y_min_) * (height_ - kTop - kBottom); }

void SvgPlot::polyline(std::span<const double> xs, std::span<const double> ys, const std::string& color, double stroke) {
  require_same_size(xs, ys);
  std::string pts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) pts += ' ';
    pts += num(px(xs[i])) + ',' + num(py(ys[i]));
  }
  body_.push_back("<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + num(stroke) + "\" points=\"" +
                  pts + "\"/>");
}

void SvgPlot::dots(std::span<const double> xs, std::span<const double> ys, const std::string& color, double radius) {
  require_same_size(xs, ys);
  std::string g = "<g fill=\"" + color + "\">";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    g += "<circle cx=\"" + num(px(xs[i])) + "\" cy=\"" + num(py(ys[i])) + "\" r=\"" + num(radius) + "\"/>";
  }
  body_.push_back(g + "</g>");
}

void SvgPlot::crosses(std::span<const double> xs, std::span<const double> ys, const std::string& color, double size) {
  require_same_size(xs, ys);
  std::string g = "<g stroke=\"" + color + "\" stroke-width=\"1.5\">";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = px(xs[i]), y = py(ys[i]);
    g += "<line x1=\"" + num(x - size) + "\" y1=\"" + num(y - size) + "\" x2=\"" + num(x + size) + "\" y2=\"" +
         num(y + size) + "\"/>";
    g += "<line x1=\"" + num(x - size) + "\" y1=\"" + num(y + size) + "\" x2=\"" + num(x + size) + "\" y2=\"" +
         num(y - size) + "\"/>";
  }
  body_.push_back(g + "</g>");
}

void SvgPlot::box(double x, const BoxSummary& s, double half_width, const std::string& color) {
  const double l = px(x - half_width), r = px(x + half_width), c = px(x);
  std::string g = "<g stroke=\"" + color + "\" fill=\"none\">";
  g += "<line x1=\"" + num(c) + "\" y1=\"" + num(py(s.min)) + "\" x2=\"" + num(c) + "\" y2=\"" + num(py(s.q1)) + "\"/>";
  g += "<line x1=\"" + num(c) + "\" y1=\"" + num(py(s.q3)) + "\" x2=\"" + num(c) + "\" y2=\"" + num(py(s.max)) + "\"/>";
  g += "<rect x=\"" + num(l) + "\" y=\"" + num(py(s.q3)) + "\" width=\"" + num(r - l) + "\" height=\"" +
       num(py(s.q1) - py(s.q3)) + "\"/>";
  g += "<line x1=\"" + num(l) + "\" y1=\"" + num(py(s.median)) + "\" x2=\"" + num(r) + "\" y2=\"" +
       num(py(s.median)) + "\" stroke-width=\"2\"/>";
  for (double w : {s.min, s.max}) {
    g += "<line x1=\"" + num((l + c) / 2) + "\" y1=\"" + num(py(w)) + "\" x2=\"" + num((r + c) / 2) + "\" y2=\"" +
         num(py(w)) + "\"/>";
  }
  body_.push_back(g + "</g>");
}

void SvgPlot::legend(const std::string& label, const std::string& color) { legend_.emplace_back(label, color); }

std::string SvgPlot::render() const {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" + num(height_) +
         "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(width_ / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title_) +
         "</text>\n";

  const double x0 = kLeft, x1 = width_ - kRight, y0 = height_ - kBottom, y1 = kTop;
  out += "<g stroke=\"#ddd\">\n";
  for (double t : nice_ticks(x_min_, x_max_)) {
    out += "<line x1=\"" + num(px(t)) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(px(t)) + "\" y2=\"" + num(y1) + "\"/>\n";
  }
  for (double t : nice_ticks(y_min_, y_max_)) {
    out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(py(t)) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(py(t)) + "\"/>\n";
  }
  out += "</g>\n<g fill=\"#333\">\n";
  for (double t : nice_ticks(x_min_, x_max_)) {
    out += "<text x=\"" + num(px(t)) + "\" y=\"" + num(y0 + 16) + "\" text-anchor=\"middle\">" + tick_label(t) +
           "</text>\n";
  }
  for (double t : nice_ticks(y_min_, y_max_)) {
    out += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(py(t) + 4) + "\" text-anchor=\"end\">" + tick_label(t) +
           "</text>\n";
  }
  out += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(height_ - 12) + "\" text-anchor=\"middle\">" +
         escape(x_label_) + "</text>\n";
  out += "<text transform=\"translate(16," + num((y0 + y1) / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         escape(y_label_) + "</text>\n</g>\n";
  out += "<rect x=\"" + num(x0) + "\" y=\"" + num(y1) + "\" width=\"" + num(x1 - x0) + "\" height=\"" + num(y0 - y1) +
         "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (const auto& item : body_) out += item + "\n";

  double ly = y1 + 16;
  for (const auto& [label, color] : legend_) {
    out += "<rect x=\"" + num(x1 - 150) + "\" y=\"" + num(ly - 9) + "\" width=\"10\" height=\"10\" fill=\"" + color +
           "\"/><text x=\"" + num(x1 - 135) + "\" y=\"" + num(ly) + "\">" + escape(label) + "</text>\n";
    ly += 16;
  }
  out += "</svg>\n";
  return out;
}

namespace {

std::pair<double, double> min_max(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

}  // namespace

void emit_plot(const SliceResult& r, const std::filesystem::path& path) {
  if (r.values.empty() || r.values.size() != r.thetas.size()) throw std::invalid_argument("cannot plot an empty slice");
  SvgPlot plot("Rollout value along the pole angle (" + r.policy + ")", "pole angle theta (rad)", "value");
  auto [y_lo, y_hi] = min_max(r.values);
  if (!r.left_values.empty()) {
    const auto [l_lo, l_hi] = min_max(r.left_values);
    const auto [r_lo, r_hi] = min_max(r.right_values);
    y_lo = std::min({y_lo, l_lo, r_lo});
    y_hi = std::max({y_hi, l_hi, r_hi});
  }
  plot.set_range(r.thetas.front(), r.thetas.back(), y_lo, y_hi);
  if (!r.left_values.empty()) {
    plot.dots(r.thetas, r.left_values, "#d62728", 0.6);
    plot.dots(r.thetas, r.right_values, "#2ca02c", 0.6);
    plot.legend("left", "#d62728");
    plot.legend("right", "#2ca02c");
  }
  plot.polyline(r.thetas, r.values, "#9ecae1", 0.5);
  plot.dots(r.thetas, r.values, "#1f77b4", 0.8);
  plot.legend("policy value", "#1f77b4");
  csv::write_file(path, plot.render());
}

void emit_plot(const GroupedReturns& g, const std::filesystem::path& path) {
  if (g.groups.empty()) throw std::invalid_argument("cannot plot an empty seed study");
  SvgPlot plot("Average return after refitting saved targets", "iteration", "average return");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  double g_lo = lo, g_hi = hi;
  for (std::size_t k = 0; k < g.groups.size(); ++k) {
    if (g.returns[k].empty()) throw std::invalid_argument("seed study group without results");
    const auto [a, b] = min_max(g.returns[k]);
    lo = std::min(lo, a);
    hi = std::max(hi, b);
    g_lo = std::min(g_lo, static_cast<double>(g.groups[k]));
    g_hi = std::max(g_hi, static_cast<double>(g.groups[k]));
  }
  plot.set_range(g_lo - 1.0, g_hi + 1.0, lo, hi);
  for (std::size_t k = 0; k < g.groups.size(); ++k) {
    plot.box(static_cast<double>(g.groups[k]), summarize(g.returns[k]), 0.3, "#1f77b4");
  }
  csv::write_file(path, plot.render());
}

void emit_plot(std::span<const HistoryRow> rows, const std::filesystem::path& path) {
  if (rows.empty()) throw std::invalid_argument("cannot plot an empty history");
  SvgPlot plot("Iteration-wise policy performance", "iteration", "average return / success rate (scaled)");
  std::vector<double> it, ret, rate, ok_it, ok_ret;
  double hi = 0.0;
  for (const auto& r : rows) hi = std::max(hi, r.avg_return);
  const double scale = hi > 0.0 ? hi : 1.0;
  for (const auto& r : rows) {
    it.push_back(static_cast<double>(r.iteration));
    ret.push_back(r.avg_return);
    rate.push_back(r.success_rate * scale);
    if (r.successful) {
      ok_it.push_back(static_cast<double>(r.iteration));
      ok_ret.push_back(r.avg_return);
    }
  }
  const auto [lo, top] = min_max(ret);
  plot.set_range(it.front(), it.back(), std::min(lo, 0.0), std::max(top, scale));
  plot.polyline(it, ret, "#1f77b4", 1.5);
  plot.dots(it, ret, "#1f77b4", 2.5);
  plot.crosses(it, rate, "#555", 4.0);
  plot.dots(ok_it, ok_ret, "#2ca02c", 5.0);
  plot.legend("average return", "#1f77b4");
  plot.legend("success rate x max", "#555");
  plot.legend("successful", "#2ca02c");
  csv::write_file(path, plot.render());
}

}  // namespace qlab
