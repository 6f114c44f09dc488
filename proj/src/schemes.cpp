#include "walltopo/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "walltopo/errors.hpp"
#include "walltopo/numeric.hpp"

namespace walltopo {

namespace {

void check_sizes(std::span<const double> energy_j, std::span<const double> lengths_mm,
                 std::span<const double> t_mm) {
  if (energy_j.size() != t_mm.size() || lengths_mm.size() != t_mm.size())
    throw ValidationError("scheme inputs disagree in size: energy " +
                          std::to_string(energy_j.size()) + ", lengths " +
                          std::to_string(lengths_mm.size()) + ", thickness " +
                          std::to_string(t_mm.size()));
  if (t_mm.empty()) throw ValidationError("scheme inputs must be non-empty");
}

std::vector<double> scheme1_densities(std::span<const double> energy_j,
                                      std::span<const double> lengths_mm,
                                      std::span<const double> t_mm) {
  std::vector<double> x(t_mm.size());
  for (size_t j = 0; j < t_mm.size(); ++j) {
    if (t_mm[j] < 0.0)
      throw std::domain_error("thickness must be non-negative, wall " + std::to_string(j) +
                              " has t = " + std::to_string(t_mm[j]));
    x[j] = energy_j[j] / (lengths_mm[j] * std::max(t_mm[j], kThicknessFloorMm));
  }
  return x;
}

struct Scheme2State {
  std::vector<double> alpha;  // A_j / S - e_j
  std::vector<double> areas;
  double total_area = 0.0;
};

Scheme2State scheme2_state(std::span<const double> energy_j, std::span<const double> lengths_mm,
                           std::span<const double> t_mm) {
  const size_t n = t_mm.size();
  Scheme2State st;
  st.areas.resize(n);
  for (size_t j = 0; j < n; ++j) {
    if (t_mm[j] < 0.0)
      throw std::domain_error("thickness must be non-negative, wall " + std::to_string(j) +
                              " has t = " + std::to_string(t_mm[j]));
    st.areas[j] = lengths_mm[j] * t_mm[j];
  }
  st.total_area = sum_compensated(st.areas);
  if (!(st.total_area > 0.0))
    throw std::domain_error("total wall area must be positive, got " +
                            std::to_string(st.total_area));
  const double e_total = sum_compensated(energy_j);
  st.alpha.resize(n);
  for (size_t j = 0; j < n; ++j) {
    const double share = e_total > 0.0 ? energy_j[j] / e_total : 1.0 / static_cast<double>(n);
    st.alpha[j] = st.areas[j] / st.total_area - share;
  }
  return st;
}

}  // namespace

double scheme1_objective(std::span<const double> energy_j, std::span<const double> lengths_mm,
                         std::span<const double> t_mm) {
  check_sizes(energy_j, lengths_mm, t_mm);
  const std::vector<double> x = scheme1_densities(energy_j, lengths_mm, t_mm);
  return population_std(x);
}

std::vector<double> scheme1_gradient(std::span<const double> energy_j,
                                     std::span<const double> lengths_mm,
                                     std::span<const double> t_mm) {
  check_sizes(energy_j, lengths_mm, t_mm);
  const size_t n = t_mm.size();
  const std::vector<double> x = scheme1_densities(energy_j, lengths_mm, t_mm);
  const double mean = sum_compensated(x) / static_cast<double>(n);
  const double sigma = population_std(x);
  std::vector<double> g(n, 0.0);
  if (sigma == 0.0) return g;
  for (size_t j = 0; j < n; ++j) {
    if (t_mm[j] < kThicknessFloorMm) continue;
    // d sigma / d t_j = (x_j - mean) / (n sigma) * dx_j/dt_j, with
    // dx_j/dt_j = -x_j / t_j.
    g[j] = (x[j] - mean) / (static_cast<double>(n) * sigma) * (-x[j] / t_mm[j]);
  }
  return g;
}

double scheme2_objective(std::span<const double> energy_j, std::span<const double> lengths_mm,
                         std::span<const double> t_mm) {
  check_sizes(energy_j, lengths_mm, t_mm);
  const Scheme2State st = scheme2_state(energy_j, lengths_mm, t_mm);
  return population_std(st.alpha);
}

std::vector<double> scheme2_gradient(std::span<const double> energy_j,
                                     std::span<const double> lengths_mm,
                                     std::span<const double> t_mm) {
  check_sizes(energy_j, lengths_mm, t_mm);
  const size_t n = t_mm.size();
  const Scheme2State st = scheme2_state(energy_j, lengths_mm, t_mm);
  const double sigma = population_std(st.alpha);
  std::vector<double> g(n, 0.0);
  if (sigma == 0.0) return g;
  const double alpha_mean = sum_compensated(st.alpha) / static_cast<double>(n);
  // B accumulates sum_k (alpha_k - mean) A_k, the coupling through the
  // shared normalization by total area.
  std::vector<double> coupling(n);
  for (size_t k = 0; k < n; ++k) coupling[k] = (st.alpha[k] - alpha_mean) * st.areas[k];
  const double b = sum_compensated(coupling);
  for (size_t j = 0; j < n; ++j) {
    g[j] = lengths_mm[j] / (static_cast<double>(n) * sigma * st.total_area) *
           ((st.alpha[j] - alpha_mean) - b / st.total_area);
  }
  return g;
}

double scheme_objective(UpdateScheme scheme, std::span<const double> energy_j,
                        std::span<const double> lengths_mm, std::span<const double> t_mm) {
  return scheme == UpdateScheme::energy_density ? scheme1_objective(energy_j, lengths_mm, t_mm)
                                                : scheme2_objective(energy_j, lengths_mm, t_mm);
}

std::vector<double> scheme_gradient(UpdateScheme scheme, std::span<const double> energy_j,
                                    std::span<const double> lengths_mm,
                                    std::span<const double> t_mm) {
  return scheme == UpdateScheme::energy_density ? scheme1_gradient(energy_j, lengths_mm, t_mm)
                                                : scheme2_gradient(energy_j, lengths_mm, t_mm);
}

Bounds build_bounds(std::span<const double> t_mm, double delta_t_max_mm, double t_max_mm) {
  if (!(delta_t_max_mm > 0.0))
    throw ValidationError("delta_t_max_mm must be positive, got " +
                          std::to_string(delta_t_max_mm));
  if (!(t_max_mm > 0.0))
    throw ValidationError("t_max_mm must be positive, got " + std::to_string(t_max_mm));
  Bounds b;
  b.lower_mm.resize(t_mm.size());
  b.upper_mm.resize(t_mm.size());
  for (size_t j = 0; j < t_mm.size(); ++j) {
    b.lower_mm[j] = std::max(0.0, t_mm[j] - delta_t_max_mm);
    b.upper_mm[j] = std::min(t_mm[j] + delta_t_max_mm, t_max_mm);
  }
  return b;
}

double volume_residual(std::span<const double> t_mm, std::span<const double> lengths_mm,
                       double height_mm, double target_volume_mm3) {
  if (t_mm.size() != lengths_mm.size())
    throw ValidationError("volume_residual: thickness and length sizes disagree");
  std::vector<double> areas(t_mm.size());
  for (size_t j = 0; j < t_mm.size(); ++j) areas[j] = lengths_mm[j] * t_mm[j];
  return height_mm * sum_compensated(areas) - target_volume_mm3;
}

void UpdateProblem::validate() const {
  const size_t n = t_start_mm.size();
  if (n == 0) throw ValidationError("update problem has no variables");
  if (energy_prev_j.size() != n || lengths_mm.size() != n || lower_mm.size() != n ||
      upper_mm.size() != n)
    throw ValidationError("update problem arrays disagree in size");
  if (!(height_mm > 0.0))
    throw ValidationError("height_mm must be positive, got " + std::to_string(height_mm));
  if (!(target_volume_mm3 > 0.0))
    throw ValidationError("target_volume_mm3 must be positive, got " +
                          std::to_string(target_volume_mm3));
  std::vector<double> lo(n), hi(n);
  for (size_t j = 0; j < n; ++j) {
    if (!(lengths_mm[j] > 0.0))
      throw ValidationError("wall " + std::to_string(j) + " has non-positive length");
    if (lower_mm[j] > upper_mm[j])
      throw ValidationError("wall " + std::to_string(j) + " has inverted bounds [" +
                            std::to_string(lower_mm[j]) + ", " + std::to_string(upper_mm[j]) +
                            "]");
    lo[j] = height_mm * lengths_mm[j] * lower_mm[j];
    hi[j] = height_mm * lengths_mm[j] * upper_mm[j];
  }
  const double vmin = sum_compensated(lo);
  const double vmax = sum_compensated(hi);
  const double slack = 1e-9 * std::max(1.0, std::abs(target_volume_mm3));
  if (target_volume_mm3 < vmin - slack || target_volume_mm3 > vmax + slack)
    throw InfeasibleError("volume target " + std::to_string(target_volume_mm3) +
                          " mm^3 outside attainable range [" + std::to_string(vmin) + ", " +
                          std::to_string(vmax) + "]");
}

}  // namespace walltopo
