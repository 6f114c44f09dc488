#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "walltopo/lattice.hpp"

namespace walltopo {

/// One row of a design CSV as written by the run driver.
struct DesignRow {
  int wall_id = 0;
  double thickness_mm = 0.0;
  bool alive = true;
};

/// Reads `wall_id,thickness_mm,alive` rows. Throws ValidationError on a bad
/// header or a malformed row.
std::vector<DesignRow> read_design_csv(const std::filesystem::path& path);

struct RenderOptions {
  /// Stroke width per mm of wall thickness.
  double stroke_px_per_mm = 4.0;
  /// Drawing scale. 0 picks a scale that fits the longer plan dimension
  /// into 600 px.
  double px_per_mm = 0.0;
};

/// Maps a thickness to a hex colour on a blue-to-red ramp over
/// [t_min_mm, t_max_mm]. Values outside the range clamp to the endpoints.
std::string thickness_color(double t_mm, double t_min_mm, double t_max_mm);

/// Renders the design as an SVG document. Walls are drawn as line segments
/// in the plan view; killed walls are omitted and non-designable walls are
/// drawn black. Output is byte deterministic for identical inputs.
///
/// Throws ValidationError when the row count does not match the wall count.
std::string render_svg(const DesignSpace& design_space, const std::vector<DesignRow>& rows,
                       double t_min_mm, double t_max_mm, const RenderOptions& options = {});

}  // namespace walltopo
