#pragma once

#include <span>
#include <vector>

#include "walltopo/lattice.hpp"

namespace walltopo {

/// Congruence-class map for a lattice tiled by units_x * units_y copies of
/// a P_x * P_y unit cell (P_x = N_x / units_x, P_y = N_y / units_y). Walls
/// whose unit-cell coordinates coincide share one design variable.
///
/// Class ids: horizontal classes are (iy mod P_y) * P_x + (ix mod P_x),
/// vertical classes follow at offset P_x * P_y. Total class count is
/// 2 * P_x * P_y. A class is designable only when every wall image in it is
/// designable.
struct PeriodicMap {
  int units_x = 1;
  int units_y = 1;
  std::vector<int> class_of;                ///< wall id -> class id
  std::vector<std::vector<int>> images;     ///< class id -> wall ids, ascending
  std::vector<bool> class_designable;
  std::vector<double> class_length_mm;      ///< length of one image

  int class_count() const { return static_cast<int>(images.size()); }
  int designable_class_count() const;
};

/// Builds the map. Throws ValidationError when N_x or N_y is not divisible
/// by the unit count.
PeriodicMap build_periodic_map(const DesignSpace& ds, int units_x, int units_y);

/// Sums a per-wall quantity into per-class totals, accumulating images in
/// ascending wall order.
std::vector<double> aggregate(const PeriodicMap& map, std::span<const double> per_wall);

/// Per-class arithmetic mean of a per-wall quantity.
std::vector<double> aggregate_mean(const PeriodicMap& map, std::span<const double> per_wall);

/// Broadcasts per-class values back to walls.
std::vector<double> scatter(const PeriodicMap& map, std::span<const double> per_class);

/// Constraint weights for class-level volume solves: image count times the
/// image length, so H * sum_k weight_k * t_k equals the full-lattice volume.
std::vector<double> class_volume_weights(const PeriodicMap& map);

}  // namespace walltopo
