#pragma once

#include <optional>
#include <span>
#include <vector>

namespace walltopo {

struct PerformanceRecord {
  double sea_per_volume = 0.0;          ///< J/mm^3
  std::optional<double> sea_per_mass;   ///< kJ/kg, requires a density
  double mwc = 0.0;                     ///< mean wall connectedness, in [0, 1]
  double total_energy_j = 0.0;
  double external_work_j = 0.0;
  double damage_dissipation_j = 0.0;
};

struct SeaResult {
  double per_volume = 0.0;
  std::optional<double> per_mass_kj_per_kg;
};

/// Specific energy absorption: total energy over the target volume, plus the
/// per-mass variant when a density (kg/mm^3) is supplied.
SeaResult compute_sea(std::span<const double> energy_j, double target_volume_mm3,
                      std::optional<double> density_kg_mm3 = {});

/// Mean wall connectedness: the mean over walls of the fraction of
/// through-height layers that are undamaged.
double compute_mwc(std::span<const int> undamaged_layers, int layers_z);

/// Restricted to walls where subset[j] is true. Throws on an empty subset.
double compute_mwc(std::span<const int> undamaged_layers, int layers_z,
                   const std::vector<bool>& subset);

}  // namespace walltopo
