#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace adp::svg {

namespace {

constexpr int kPanelW = 360;
constexpr int kPanelH = 260;
constexpr int kMargin = 42;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_panels(const std::string& path, const std::vector<Panel>& panels, int columns) {
  if (panels.empty() || columns < 1) throw std::invalid_argument("write_panels: empty plot");
  const int rows = (static_cast<int>(panels.size()) + columns - 1) / columns;
  const int width = columns * kPanelW;
  const int height = rows * kPanelH;

  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_panels: cannot open " + path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& panel = panels[p];
    const int px = static_cast<int>(p) % columns * kPanelW;
    const int py = static_cast<int>(p) / columns * kPanelH;
    const double x0 = px + kMargin, x1 = px + kPanelW - 12;
    const double y0 = py + kPanelH - kMargin, y1 = py + 24;

    double lo = 0.0, hi = 1.0, vlo = 0.0, vhi = 1.0;
    if (panel.x.size() > 0) {
      lo = panel.x.minCoeff();
      hi = panel.x.maxCoeff();
    }
    bool first = true;
    for (const Series& s : panel.series) {
      if (s.values.size() == 0) continue;
      const double a = s.values.minCoeff(), b = s.values.maxCoeff();
      vlo = first ? a : std::min(vlo, a);
      vhi = first ? b : std::max(vhi, b);
      first = false;
    }
    if (hi <= lo) hi = lo + 1.0;
    if (vhi <= vlo) vhi = vlo + 1.0;
    const double pad = 0.05 * (vhi - vlo);
    vlo -= pad;
    vhi += pad;

    auto sx = [&](double v) { return x0 + (v - lo) / (hi - lo) * (x1 - x0); };
    auto sy = [&](double v) { return y0 - (v - vlo) / (vhi - vlo) * (y0 - y1); };

    os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0)
       << "\" height=\"" << num(y0 - y1) << "\" fill=\"none\" stroke=\"#888\"/>\n";
    os << "<text x=\"" << num(x0) << "\" y=\"" << num(y1 - 8.0) << "\">" << panel.title
       << "</text>\n";
    os << "<text x=\"" << num(x0 - 36.0) << "\" y=\"" << num(sy(vlo)) << "\">" << num(vlo)
       << "</text>\n";
    os << "<text x=\"" << num(x0 - 36.0) << "\" y=\"" << num(sy(vhi) + 10.0) << "\">" << num(vhi)
       << "</text>\n";
    os << "<text x=\"" << num(x0) << "\" y=\"" << num(y0 + 14.0) << "\">" << num(lo)
       << "</text>\n";
    os << "<text x=\"" << num(x1 - 30.0) << "\" y=\"" << num(y0 + 14.0) << "\">" << num(hi)
       << "</text>\n";

    for (std::size_t s = 0; s < panel.series.size(); ++s) {
      const Series& series = panel.series[s];
      const char* color = kPalette[s % std::size(kPalette)];
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.4\" points=\"";
      for (Eigen::Index i = 0; i < series.values.size() && i < panel.x.size(); ++i) {
        if (i) os << ' ';
        os << num(sx(panel.x[i])) << ',' << num(sy(series.values[i]));
      }
      os << "\"/>\n";
      os << "<text x=\"" << num(x1 - 110.0) << "\" y=\"" << num(y1 + 14.0 + 13.0 * s)
         << "\" fill=\"" << color << "\">" << series.name << "</text>\n";
    }
  }
  os << "</svg>\n";
}

}  // namespace adp::svg
