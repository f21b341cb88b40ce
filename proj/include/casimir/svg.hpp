#pragma once

// Minimal standalone SVG charts. Each file carries its data provenance in a leading comment.

#include <string>
#include <vector>

namespace casimir::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Line chart. On log axes non-positive values are plotted by magnitude and zeros dropped.
std::string line_plot(const Axes& axes, const std::vector<Series>& series, const std::string& provenance);

std::string histogram(const Axes& axes, const std::vector<double>& edges, const std::vector<int>& counts,
                      const std::string& provenance);

}  // namespace casimir::svg
