#include "walltopo/metrics.hpp"

#include <string>

#include "walltopo/errors.hpp"
#include "walltopo/numeric.hpp"

namespace walltopo {

SeaResult compute_sea(std::span<const double> energy_j, double target_volume_mm3,
                      std::optional<double> density_kg_mm3) {
  if (!(target_volume_mm3 > 0.0))
    throw ValidationError("target volume must be positive, got " +
                          std::to_string(target_volume_mm3));
  const double total = sum_compensated(energy_j);
  SeaResult r;
  r.per_volume = total / target_volume_mm3;
  if (density_kg_mm3) {
    if (!(*density_kg_mm3 > 0.0))
      throw ValidationError("density must be positive, got " + std::to_string(*density_kg_mm3));
    r.per_mass_kj_per_kg = total / (*density_kg_mm3 * target_volume_mm3) / 1000.0;
  }
  return r;
}

namespace {

double mwc_impl(std::span<const int> undamaged_layers, int layers_z,
                const std::vector<bool>* subset) {
  if (layers_z < 1)
    throw ValidationError("layers_z must be >= 1, got " + std::to_string(layers_z));
  double sum = 0.0;
  size_t count = 0;
  for (size_t j = 0; j < undamaged_layers.size(); ++j) {
    if (subset && !(*subset)[j]) continue;
    const int c = undamaged_layers[j];
    if (c < 0 || c > layers_z)
      throw ValidationError("undamaged layer count " + std::to_string(c) + " for wall " +
                            std::to_string(j) + " outside [0, " + std::to_string(layers_z) + "]");
    sum += static_cast<double>(c) / layers_z;
    ++count;
  }
  if (count == 0) throw ValidationError("mean wall connectedness over an empty wall set");
  return sum / static_cast<double>(count);
}

}  // namespace

double compute_mwc(std::span<const int> undamaged_layers, int layers_z) {
  return mwc_impl(undamaged_layers, layers_z, nullptr);
}

double compute_mwc(std::span<const int> undamaged_layers, int layers_z,
                   const std::vector<bool>& subset) {
  if (subset.size() != undamaged_layers.size())
    throw ValidationError("subset mask size " + std::to_string(subset.size()) +
                          " does not match wall count " +
                          std::to_string(undamaged_layers.size()));
  return mwc_impl(undamaged_layers, layers_z, &subset);
}

}  // namespace walltopo
