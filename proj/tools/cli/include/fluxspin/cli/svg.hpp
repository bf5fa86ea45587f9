#pragma once

#include <string>
#include <vector>

namespace fluxspin::cli {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> error;  // symmetric y error bars, optional
  bool line = true;
  bool markers = true;
  bool dashed = false;
};

struct PlotAxis {
  std::string label;
  bool log = false;
  // When positive, a second axis shows value / scale under `scaled_label`
  // (top for x, right for y).
  double scale = 0.0;
  std::string scaled_label;
};

struct PlotPanel {
  std::string title;
  PlotAxis x;
  PlotAxis y;
  std::vector<PlotSeries> series;
};

// Panels are stacked vertically. Non-positive values are dropped on log axes.
std::string render_svg(const std::vector<PlotPanel>& panels);

}  // namespace fluxspin::cli
