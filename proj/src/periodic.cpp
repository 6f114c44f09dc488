#include "walltopo/periodic.hpp"

#include <string>

#include "walltopo/errors.hpp"

namespace walltopo {

int PeriodicMap::designable_class_count() const {
  int n = 0;
  for (bool d : class_designable) n += d ? 1 : 0;
  return n;
}

PeriodicMap build_periodic_map(const DesignSpace& ds, int units_x, int units_y) {
  if (units_x < 1 || units_y < 1)
    throw ValidationError("periodic unit counts must be >= 1, got " + std::to_string(units_x) +
                          " x " + std::to_string(units_y));
  if (ds.cells_x % units_x != 0)
    throw ValidationError("cells_x = " + std::to_string(ds.cells_x) +
                          " is not divisible by units_x = " + std::to_string(units_x));
  if (ds.cells_y % units_y != 0)
    throw ValidationError("cells_y = " + std::to_string(ds.cells_y) +
                          " is not divisible by units_y = " + std::to_string(units_y));

  const int px = ds.cells_x / units_x;
  const int py = ds.cells_y / units_y;
  const int n_classes = 2 * px * py;

  PeriodicMap map;
  map.units_x = units_x;
  map.units_y = units_y;
  map.class_of.resize(ds.walls.size());
  map.images.resize(n_classes);
  map.class_designable.assign(n_classes, true);
  map.class_length_mm.assign(n_classes, 0.0);

  for (const Wall& w : ds.walls) {
    int cls;
    if (w.orientation == WallOrientation::horizontal)
      cls = (w.iy % py) * px + (w.ix % px);
    else
      cls = px * py + (w.iy % py) * px + (w.ix % px);
    map.class_of[w.id] = cls;
    map.images[cls].push_back(w.id);
    map.class_length_mm[cls] = w.length_mm;
    if (!w.designable) map.class_designable[cls] = false;
  }
  return map;
}

std::vector<double> aggregate(const PeriodicMap& map, std::span<const double> per_wall) {
  if (per_wall.size() != map.class_of.size())
    throw ValidationError("aggregate: expected " + std::to_string(map.class_of.size()) +
                          " wall values, got " + std::to_string(per_wall.size()));
  std::vector<double> totals(map.images.size(), 0.0);
  for (size_t k = 0; k < map.images.size(); ++k)
    for (int wall_id : map.images[k]) totals[k] += per_wall[wall_id];
  return totals;
}

std::vector<double> aggregate_mean(const PeriodicMap& map, std::span<const double> per_wall) {
  std::vector<double> totals = aggregate(map, per_wall);
  for (size_t k = 0; k < totals.size(); ++k)
    totals[k] /= static_cast<double>(map.images[k].size());
  return totals;
}

std::vector<double> scatter(const PeriodicMap& map, std::span<const double> per_class) {
  if (per_class.size() != map.images.size())
    throw ValidationError("scatter: expected " + std::to_string(map.images.size()) +
                          " class values, got " + std::to_string(per_class.size()));
  std::vector<double> out(map.class_of.size());
  for (size_t j = 0; j < map.class_of.size(); ++j) out[j] = per_class[map.class_of[j]];
  return out;
}

std::vector<double> class_volume_weights(const PeriodicMap& map) {
  std::vector<double> w(map.images.size());
  for (size_t k = 0; k < map.images.size(); ++k)
    w[k] = map.class_length_mm[k] * static_cast<double>(map.images[k].size());
  return w;
}

}  // namespace walltopo
