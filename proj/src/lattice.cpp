#include "walltopo/lattice.hpp"

#include <cmath>
#include <string>
#include <tuple>

#include "walltopo/errors.hpp"

namespace walltopo {

int DesignSpace::designable_count() const {
  int n = 0;
  for (const Wall& w : walls) n += w.designable ? 1 : 0;
  return n;
}

std::vector<double> DesignSpace::wall_lengths() const {
  std::vector<double> out(walls.size());
  for (size_t j = 0; j < walls.size(); ++j) out[j] = walls[j].length_mm;
  return out;
}

std::vector<bool> DesignSpace::designable_mask() const {
  std::vector<bool> out(walls.size());
  for (size_t j = 0; j < walls.size(); ++j) out[j] = walls[j].designable;
  return out;
}

DesignSpace build_design_space(const LatticeConfig& config) {
  auto require_positive = [](double v, const char* name) {
    if (!(v > 0.0))
      throw ValidationError(std::string(name) + " must be positive, got " + std::to_string(v));
  };
  require_positive(config.length_mm, "length_mm");
  require_positive(config.width_mm, "width_mm");
  require_positive(config.height_mm, "height_mm");
  if (config.cells_x < 1)
    throw ValidationError("cells_x must be >= 1, got " + std::to_string(config.cells_x));
  if (config.cells_y < 1)
    throw ValidationError("cells_y must be >= 1, got " + std::to_string(config.cells_y));
  if (config.layers_z < 1)
    throw ValidationError("layers_z must be >= 1, got " + std::to_string(config.layers_z));
  if (config.boundary_thickness_mm && !(*config.boundary_thickness_mm > 0.0))
    throw ValidationError("boundary_thickness_mm must be positive, got " +
                          std::to_string(*config.boundary_thickness_mm));

  DesignSpace ds;
  ds.length_mm = config.length_mm;
  ds.width_mm = config.width_mm;
  ds.height_mm = config.height_mm;
  ds.cells_x = config.cells_x;
  ds.cells_y = config.cells_y;
  ds.layers_z = config.layers_z;
  ds.boundary_thickness_mm = config.boundary_thickness_mm;

  const int nx = config.cells_x;
  const int ny = config.cells_y;
  const double dx = config.length_mm / nx;
  const double dy = config.width_mm / ny;
  const bool has_fixed_boundary = config.boundary_thickness_mm.has_value();
  ds.walls.reserve(static_cast<size_t>(nx) * (ny + 1) + static_cast<size_t>(nx + 1) * ny);

  int id = 0;
  for (int iy = 0; iy <= ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      Wall w;
      w.id = id++;
      w.orientation = WallOrientation::horizontal;
      w.ix = ix;
      w.iy = iy;
      w.length_mm = dx;
      const bool perimeter = (iy == 0 || iy == ny);
      w.designable = !(perimeter && has_fixed_boundary);
      w.midpoint_mm = {(ix + 0.5) * dx, iy * dy};
      ds.walls.push_back(w);
    }
  }
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix <= nx; ++ix) {
      Wall w;
      w.id = id++;
      w.orientation = WallOrientation::vertical;
      w.ix = ix;
      w.iy = iy;
      w.length_mm = dy;
      const bool perimeter = (ix == 0 || ix == nx);
      w.designable = !(perimeter && has_fixed_boundary);
      w.midpoint_mm = {ix * dx, (iy + 0.5) * dy};
      ds.walls.push_back(w);
    }
  }
  return ds;
}

std::pair<std::array<double, 2>, std::array<double, 2>> wall_endpoints(const DesignSpace& ds,
                                                                       const Wall& w) {
  const double dx = ds.cell_dx();
  const double dy = ds.cell_dy();
  if (w.orientation == WallOrientation::horizontal) {
    return {{w.ix * dx, w.iy * dy}, {(w.ix + 1) * dx, w.iy * dy}};
  }
  return {{w.ix * dx, w.iy * dy}, {w.ix * dx, (w.iy + 1) * dy}};
}

std::vector<double> wall_areas(const DesignSpace& ds, std::span<const double> t_mm) {
  if (t_mm.size() != ds.walls.size())
    throw ValidationError("thickness vector has " + std::to_string(t_mm.size()) +
                          " entries, expected " + std::to_string(ds.walls.size()));
  std::vector<double> areas(ds.walls.size());
  for (size_t j = 0; j < ds.walls.size(); ++j) areas[j] = ds.walls[j].length_mm * t_mm[j];
  return areas;
}

namespace {

// Quantized coordinate key so shared wall corners and edges deduplicate to
// the same node regardless of which wall emits them first.
using NodeKey = std::tuple<long long, long long, long long>;

NodeKey make_key(double x, double y, double z) {
  return {llround(x * 1e9), llround(y * 1e9), llround(z * 1e9)};
}

}  // namespace

MeshSpec generate_mesh(const DesignSpace& ds, int elems_per_wall_inplane) {
  if (elems_per_wall_inplane < 1)
    throw ValidationError("elems_per_wall_inplane must be >= 1, got " +
                          std::to_string(elems_per_wall_inplane));
  MeshSpec mesh;
  mesh.elems_per_wall_inplane = elems_per_wall_inplane;

  const int elems = elems_per_wall_inplane;
  const int nz = ds.layers_z;
  const double dx = ds.cell_dx();
  const double dy = ds.cell_dy();

  std::map<NodeKey, int> node_ids;
  auto node_at = [&](double x, double y, double z) {
    const NodeKey key = make_key(x, y, z);
    auto it = node_ids.find(key);
    if (it != node_ids.end()) return it->second;
    const int id = static_cast<int>(mesh.nodes.size());
    node_ids.emplace(key, id);
    mesh.nodes.push_back({id, x, y, z});
    return id;
  };

  int elem_id = 0;
  for (const Wall& w : ds.walls) {
    // grid[s][k]: s along the wall, k through the height. Coordinates are
    // computed from the grid-line indices so shared corners are bitwise equal.
    std::vector<std::vector<int>> grid(elems + 1, std::vector<int>(nz + 1));
    for (int s = 0; s <= elems; ++s) {
      const double f = static_cast<double>(s) / elems;
      double x, y;
      if (w.orientation == WallOrientation::horizontal) {
        x = (w.ix + f) * dx;
        y = w.iy * dy;
      } else {
        x = w.ix * dx;
        y = (w.iy + f) * dy;
      }
      for (int k = 0; k <= nz; ++k) {
        const double z = ds.height_mm * (static_cast<double>(k) / nz);
        grid[s][k] = node_at(x, y, z);
      }
    }
    for (int s = 0; s < elems; ++s) {
      for (int k = 0; k < nz; ++k) {
        ShellElement e;
        e.id = elem_id++;
        e.wall_id = w.id;
        e.nodes = {grid[s][k], grid[s + 1][k], grid[s + 1][k + 1], grid[s][k + 1]};
        mesh.shells.push_back(e);
      }
    }
    mesh.sections[w.id] = 0.0;
  }
  return mesh;
}

void apply_thickness(MeshSpec& mesh, std::span<const double> t_mm) {
  if (t_mm.size() != mesh.sections.size())
    throw ValidationError("thickness vector has " + std::to_string(t_mm.size()) +
                          " entries, expected " + std::to_string(mesh.sections.size()));
  for (auto& [wall_id, thickness] : mesh.sections) thickness = t_mm[wall_id];
}

}  // namespace walltopo
