#include "walltopo/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "walltopo/errors.hpp"

namespace walltopo {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::vector<DesignRow> read_design_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open design file: " + path.string());
  std::string line;
  if (!std::getline(f, line) || strip_cr(line) != "wall_id,thickness_mm,alive")
    throw ValidationError(path.string() + ": expected header 'wall_id,thickness_mm,alive'");

  std::vector<DesignRow> rows;
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    DesignRow row;
    int alive = 0;
    char trailing = 0;
    const int n =
        std::sscanf(line.c_str(), "%d,%lf,%d%c", &row.wall_id, &row.thickness_mm, &alive, &trailing);
    if (n != 3 || alive < 0 || alive > 1)
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                            ": malformed design row");
    if (row.wall_id != static_cast<int>(rows.size()))
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                            ": expected wall id " + std::to_string(rows.size()) + ", got " +
                            std::to_string(row.wall_id));
    row.alive = alive == 1;
    rows.push_back(row);
  }
  if (rows.empty()) throw ValidationError(path.string() + ": no design rows");
  return rows;
}

std::string thickness_color(double t_mm, double t_min_mm, double t_max_mm) {
  double u = 0.0;
  const double span = t_max_mm - t_min_mm;
  if (span > 0.0) u = std::clamp((t_mm - t_min_mm) / span, 0.0, 1.0);
  // Cool blue at t_min, warm red at t_max.
  const int r = static_cast<int>(std::lround(33.0 + u * (178.0 - 33.0)));
  const int g = static_cast<int>(std::lround(102.0 + u * (24.0 - 102.0)));
  const int b = static_cast<int>(std::lround(172.0 + u * (43.0 - 172.0)));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string render_svg(const DesignSpace& design_space, const std::vector<DesignRow>& rows,
                       double t_min_mm, double t_max_mm, const RenderOptions& options) {
  if (static_cast<int>(rows.size()) != design_space.wall_count())
    throw ValidationError("design has " + std::to_string(rows.size()) +
                          " rows but the geometry defines " +
                          std::to_string(design_space.wall_count()) + " walls");

  const double L = design_space.length_mm;
  const double W = design_space.width_mm;
  const double s = options.px_per_mm > 0.0 ? options.px_per_mm : 600.0 / std::max(L, W);
  const double margin = 20.0;
  const double legend_h = 46.0;
  const double width = L * s + 2.0 * margin;
  const double height = W * s + 2.0 * margin + legend_h;

  const auto px = [&](double x) { return margin + x * s; };
  const auto py = [&](double y) { return margin + (W - y) * s; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height) << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" fill=\"#ffffff\"/>\n";

  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (!rows[j].alive) continue;
    const auto [a, b] = wall_endpoints(design_space, design_space.walls[j]);
    const std::string color = design_space.walls[j].designable
                                  ? thickness_color(rows[j].thickness_mm, t_min_mm, t_max_mm)
                                  : "#000000";
    svg << "<line x1=\"" << fmt(px(a[0])) << "\" y1=\"" << fmt(py(a[1])) << "\" x2=\""
        << fmt(px(b[0])) << "\" y2=\"" << fmt(py(b[1])) << "\" stroke=\"" << color
        << "\" stroke-width=\"" << fmt(rows[j].thickness_mm * options.stroke_px_per_mm)
        << "\" stroke-linecap=\"square\"/>\n";
  }

  // Legend: sampled colour ramp with the thickness range underneath.
  const double ly = W * s + 2.0 * margin + 6.0;
  const int samples = 32;
  const double bar_w = 160.0;
  for (int i = 0; i < samples; ++i) {
    const double u = samples == 1 ? 0.0 : static_cast<double>(i) / (samples - 1);
    svg << "<rect x=\"" << fmt(margin + u * (bar_w - bar_w / samples)) << "\" y=\"" << fmt(ly)
        << "\" width=\"" << fmt(bar_w / samples + 0.5) << "\" height=\"12\" fill=\""
        << thickness_color(t_min_mm + u * (t_max_mm - t_min_mm), t_min_mm, t_max_mm) << "\"/>\n";
  }
  svg << "<text x=\"" << fmt(margin) << "\" y=\"" << fmt(ly + 26.0)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t_min_mm) << " mm</text>\n";
  svg << "<text x=\"" << fmt(margin + bar_w) << "\" y=\"" << fmt(ly + 26.0)
      << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt(t_max_mm)
      << " mm</text>\n";
  svg << "<rect x=\"" << fmt(margin + bar_w + 24.0) << "\" y=\"" << fmt(ly)
      << "\" width=\"12\" height=\"12\" fill=\"#000000\"/>\n";
  svg << "<text x=\"" << fmt(margin + bar_w + 40.0) << "\" y=\"" << fmt(ly + 10.0)
      << "\" font-family=\"sans-serif\" font-size=\"11\">fixed</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace walltopo
