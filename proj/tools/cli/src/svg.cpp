#include "fluxspin/cli/svg.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace fluxspin::cli {

namespace {

constexpr double kWidth = 760;
constexpr double kPanelHeight = 440;
constexpr double kLeft = 90;
constexpr double kRight = 90;
constexpr double kTop = 80;
constexpr double kBottom = 60;

constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f"};

std::string num(double v, int precision = 6) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, precision);
  return std::string(buf.data(), end);
}

std::string tick_label(double v) {
  if (v == 0.0) return "0";
  return num(v, 3);
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0;
  double hi = 1;
  bool log = false;

  double fraction(double v) const {
    if (log) return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
    return (v - lo) / (hi - lo);
  }
};

Range fit_range(const std::vector<double>& values, bool log) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v) || (log && v <= 0.0)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) return {log ? 0.1 : 0.0, log ? 10.0 : 1.0, log};
  if (log) {
    double a = std::log10(lo), b = std::log10(hi);
    if (b - a < 1e-9) {
      a -= 0.5;
      b += 0.5;
    }
    const double pad = 0.04 * (b - a);
    return {std::pow(10.0, a - pad), std::pow(10.0, b + pad), true};
  }
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    lo -= 0.5 * std::max(1.0, std::abs(lo));
    hi += 0.5 * std::max(1.0, std::abs(hi));
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad, false};
}

std::vector<double> ticks(double lo, double hi, bool log) {
  std::vector<double> out;
  if (log) {
    const int a = static_cast<int>(std::floor(std::log10(lo)));
    const int b = static_cast<int>(std::ceil(std::log10(hi)));
    const bool fine = std::log10(hi) - std::log10(lo) < 2.0;
    for (int k = a; k <= b; ++k)
      for (double m : {1.0, 2.0, 5.0}) {
        if (m != 1.0 && !fine) continue;
        const double v = m * std::pow(10.0, k);
        if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) out.push_back(v);
      }
    return out;
  }
  const double raw = (hi - lo) / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return out;
}

void draw_panel(std::ostringstream& svg, const PlotPanel& p, double y0) {
  const double x_left = kLeft, x_right = kWidth - kRight;
  const double top = y0 + kTop, bottom = y0 + kPanelHeight - kBottom;

  std::vector<double> xs, ys;
  for (const auto& s : p.series) {
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (p.x.log && s.x[k] <= 0.0) continue;
      xs.push_back(s.x[k]);
      ys.push_back(s.y[k]);
      if (k < s.error.size()) {
        ys.push_back(s.y[k] + s.error[k]);
        if (!p.y.log || s.y[k] - s.error[k] > 0) ys.push_back(s.y[k] - s.error[k]);
      }
    }
  }
  const Range rx = fit_range(xs, p.x.log);
  const Range ry = fit_range(ys, p.y.log);
  auto px = [&](double v) { return x_left + rx.fraction(v) * (x_right - x_left); };
  auto py = [&](double v) { return bottom - ry.fraction(v) * (bottom - top); };

  svg << "<g>\n";
  svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(y0 + 22) << "\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(p.title) << "</text>\n";
  svg << "<rect x=\"" << num(x_left) << "\" y=\"" << num(top) << "\" width=\"" << num(x_right - x_left) << "\" height=\""
      << num(bottom - top) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : ticks(rx.lo, rx.hi, rx.log)) {
    const double x = px(t);
    svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(x) << "\" y2=\"" << num(bottom - 5)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(x) << "\" y=\"" << num(bottom + 16) << "\" text-anchor=\"middle\" font-size=\"11\">"
        << tick_label(t) << "</text>\n";
  }
  for (double t : ticks(ry.lo, ry.hi, ry.log)) {
    const double y = py(t);
    svg << "<line x1=\"" << num(x_left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x_left + 5) << "\" y2=\"" << num(y)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(x_left - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
        << tick_label(t) << "</text>\n";
  }
  svg << "<text x=\"" << num((x_left + x_right) / 2) << "\" y=\"" << num(bottom + 40)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(p.x.label) << "</text>\n";
  svg << "<text transform=\"translate(" << num(x_left - 62) << "," << num((top + bottom) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">" << escape(p.y.label) << "</text>\n";

  if (p.x.scale > 0) {
    for (double t : ticks(rx.lo / p.x.scale, rx.hi / p.x.scale, rx.log)) {
      const double x = px(t * p.x.scale);
      svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(top) << "\" x2=\"" << num(x) << "\" y2=\"" << num(top + 5)
          << "\" stroke=\"black\"/>\n";
      svg << "<text x=\"" << num(x) << "\" y=\"" << num(top - 6) << "\" text-anchor=\"middle\" font-size=\"11\">"
          << tick_label(t) << "</text>\n";
    }
    svg << "<text x=\"" << num((x_left + x_right) / 2) << "\" y=\"" << num(top - 26)
        << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(p.x.scaled_label) << "</text>\n";
  }
  if (p.y.scale > 0) {
    for (double t : ticks(ry.lo / p.y.scale, ry.hi / p.y.scale, ry.log)) {
      const double y = py(t * p.y.scale);
      svg << "<line x1=\"" << num(x_right) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x_right - 5) << "\" y2=\"" << num(y)
          << "\" stroke=\"black\"/>\n";
      svg << "<text x=\"" << num(x_right + 6) << "\" y=\"" << num(y + 4) << "\" font-size=\"11\">" << tick_label(t) << "</text>\n";
    }
    svg << "<text transform=\"translate(" << num(x_right + 66) << "," << num((top + bottom) / 2)
        << ") rotate(90)\" text-anchor=\"middle\" font-size=\"13\">" << escape(p.y.scaled_label) << "</text>\n";
  }

  for (std::size_t s = 0; s < p.series.size(); ++s) {
    const PlotSeries& series = p.series[s];
    const char* color = kColors[s % kColors.size()];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < series.x.size() && k < series.y.size(); ++k) {
      if ((rx.log && series.x[k] <= 0) || (ry.log && series.y[k] <= 0)) continue;
      if (!std::isfinite(series.x[k]) || !std::isfinite(series.y[k])) continue;
      pts.emplace_back(px(series.x[k]), py(series.y[k]));
      if (k < series.error.size() && series.error[k] > 0) {
        const double hi = py(series.y[k] + series.error[k]);
        const double lo_v = series.y[k] - series.error[k];
        const double lo = ry.log && lo_v <= 0 ? bottom : py(lo_v);
        svg << "<line x1=\"" << num(pts.back().first) << "\" y1=\"" << num(std::min(lo, bottom)) << "\" x2=\""
            << num(pts.back().first) << "\" y2=\"" << num(std::max(hi, top)) << "\" stroke=\"" << color << "\"/>\n";
      }
    }
    if (series.line && pts.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
      if (series.dashed) svg << " stroke-dasharray=\"6,4\"";
      svg << " points=\"";
      for (const auto& [x, y] : pts) svg << num(x) << ',' << num(y) << ' ';
      svg << "\"/>\n";
    }
    if (series.markers)
      for (const auto& [x, y] : pts)
        svg << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = top + 18 + 18 * static_cast<double>(s);
    svg << "<line x1=\"" << num(x_left + 12) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(x_left + 36) << "\" y2=\""
        << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << num(x_left + 42) << "\" y=\"" << num(ly) << "\" font-size=\"12\">" << escape(series.label)
        << "</text>\n";
  }
  svg << "</g>\n";
}

}  // namespace

std::string render_svg(const std::vector<PlotPanel>& panels) {
  std::ostringstream svg;
  svg.imbue(std::locale::classic());
  const double height = kPanelHeight * static_cast<double>(std::max<std::size_t>(panels.size(), 1));
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(height) << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t k = 0; k < panels.size(); ++k) draw_panel(svg, panels[k], kPanelHeight * static_cast<double>(k));
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace fluxspin::cli
