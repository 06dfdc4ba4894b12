#pragma once

#include <string>
#include <vector>

namespace amrl::svg {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> spread;  // +/- band half-width; empty for no band
  bool dashed = false;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

// Side-by-side line charts with shaded bands and a legend per panel.
std::string render(const std::vector<Panel>& panels, double panel_width = 520.0,
                   double panel_height = 360.0);

}  // namespace amrl::svg
