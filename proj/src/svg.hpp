#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace adp::svg {

struct Series {
  std::string name;
  Eigen::VectorXd values;
};

/// One panel of a line chart: shared x grid, several named series.
struct Panel {
  std::string title;
  Eigen::VectorXd x;
  std::vector<Series> series;
};

/// Writes a grid of line-chart panels as a self-contained SVG file.
void write_panels(const std::string& path, const std::vector<Panel>& panels, int columns);

}  // namespace adp::svg
