#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace walltopo {

enum class WallOrientation { horizontal, vertical };

/// One candidate wall of the ground structure. Horizontal walls run along X
/// (length L/N_x), vertical walls along Y (length W/N_y).
struct Wall {
  int id = 0;
  WallOrientation orientation = WallOrientation::horizontal;
  int ix = 0;  ///< horizontal: cell column in [0, N_x); vertical: grid line in [0, N_x]
  int iy = 0;  ///< horizontal: grid line in [0, N_y]; vertical: cell row in [0, N_y)
  double length_mm = 0.0;
  bool designable = true;
  std::array<double, 2> midpoint_mm{};
};

struct LatticeConfig {
  double length_mm = 0.0;  ///< L, in-plane X extent
  double width_mm = 0.0;   ///< W, in-plane Y extent
  double height_mm = 0.0;  ///< H, extrusion depth in Z
  int cells_x = 0;         ///< N_x
  int cells_y = 0;         ///< N_y
  int layers_z = 1;        ///< N_z, element layers through the height
  /// When set, perimeter walls are pinned at this thickness and excluded
  /// from the design variables.
  std::optional<double> boundary_thickness_mm;
};

/// Ground-structure design space over a rectangular cell partition.
///
/// Wall ordering is deterministic: all horizontal walls row-major by
/// (iy, ix), then all vertical walls row-major by (iy, ix). Wall ids are
/// dense 0..n-1 in that order. Total wall count is
/// N_x*(N_y+1) + (N_x+1)*N_y.
struct DesignSpace {
  double length_mm = 0.0;
  double width_mm = 0.0;
  double height_mm = 0.0;
  int cells_x = 0;
  int cells_y = 0;
  int layers_z = 1;
  std::optional<double> boundary_thickness_mm;
  std::vector<Wall> walls;

  double cell_dx() const { return length_mm / cells_x; }
  double cell_dy() const { return width_mm / cells_y; }
  int wall_count() const { return static_cast<int>(walls.size()); }
  int designable_count() const;
  std::vector<double> wall_lengths() const;
  std::vector<bool> designable_mask() const;
};

/// Builds the design space. Throws ValidationError naming the offending
/// field for non-positive dimensions or counts.
DesignSpace build_design_space(const LatticeConfig& config);

/// In-plane wall endpoints, {start, end} in mm. Shared corners of adjacent
/// walls evaluate to bitwise-identical coordinates.
std::pair<std::array<double, 2>, std::array<double, 2>> wall_endpoints(const DesignSpace& ds,
                                                                       const Wall& w);

/// Per-wall projection areas A_j = L_j * t_j in mm^2.
std::vector<double> wall_areas(const DesignSpace& ds, std::span<const double> t_mm);

struct MeshNode {
  int id = 0;
  double x = 0.0, y = 0.0, z = 0.0;
};

struct ShellElement {
  int id = 0;
  int wall_id = 0;
  std::array<int, 4> nodes{};
};

/// Extruded shell mesh of the ground structure. Each wall owns
/// elems_per_wall_inplane * N_z quad elements; walls share corner nodes
/// (watertight connectivity).
struct MeshSpec {
  std::vector<MeshNode> nodes;
  std::vector<ShellElement> shells;
  std::map<int, double> sections;  ///< wall_id -> thickness mm
  int elems_per_wall_inplane = 2;
};

MeshSpec generate_mesh(const DesignSpace& ds, int elems_per_wall_inplane);

/// Copies a per-wall thickness vector into the mesh section table.
void apply_thickness(MeshSpec& mesh, std::span<const double> t_mm);

}  // namespace walltopo
