#pragma once

#include <span>
#include <vector>

namespace walltopo {

/// Thickness floor used when forming energy densities, so a wall driven to
/// zero thickness does not produce an infinite density.
inline constexpr double kThicknessFloorMm = 1e-9;

/// Sentinel thickness assigned to soft-killed walls.
inline constexpr double kKilledThicknessMm = 1e-6;

enum class UpdateScheme { energy_density = 1, beso_transfer = 2 };

/// Per-wall thickness state. `alive[j]` is false once wall j has been
/// soft-killed; killed walls keep the sentinel thickness and never return.
struct ThicknessField {
  std::vector<double> values_mm;
  std::vector<bool> alive;

  explicit ThicknessField(size_t n = 0) : values_mm(n, 0.0), alive(n, true) {}
  size_t size() const { return values_mm.size(); }
};

/// Objective f(t) = popstd_j(E_j / (L_j * t_j)), the spread of absorbed
/// energy per unit wall area of the candidate design. Thicknesses below
/// kThicknessFloorMm are floored; negative thickness throws
/// std::domain_error.
double scheme1_objective(std::span<const double> energy_j, std::span<const double> lengths_mm,
                         std::span<const double> t_mm);

/// Analytic gradient of scheme1_objective with respect to t. Zero vector
/// when the std is zero; entries for floored thicknesses are zero.
std::vector<double> scheme1_gradient(std::span<const double> energy_j,
                                     std::span<const double> lengths_mm,
                                     std::span<const double> t_mm);

/// Objective f(t) = popstd_j(A_j/sum(A) - E_j/sum(E)), the mismatch between
/// each wall's share of material and its share of absorbed energy. When the
/// total energy is zero every wall is assigned the uniform share 1/n.
/// Throws std::domain_error for negative thickness or zero total area.
double scheme2_objective(std::span<const double> energy_j, std::span<const double> lengths_mm,
                         std::span<const double> t_mm);

std::vector<double> scheme2_gradient(std::span<const double> energy_j,
                                     std::span<const double> lengths_mm,
                                     std::span<const double> t_mm);

double scheme_objective(UpdateScheme scheme, std::span<const double> energy_j,
                        std::span<const double> lengths_mm, std::span<const double> t_mm);

std::vector<double> scheme_gradient(UpdateScheme scheme, std::span<const double> energy_j,
                                    std::span<const double> lengths_mm,
                                    std::span<const double> t_mm);

/// Per-iteration moving bounds: lower = max(0, t - delta), upper =
/// min(t + delta, t_max).
struct Bounds {
  std::vector<double> lower_mm;
  std::vector<double> upper_mm;
};

Bounds build_bounds(std::span<const double> t_mm, double delta_t_max_mm, double t_max_mm);

/// Signed volume constraint residual H * sum(L_j t_j) - V_target in mm^3.
double volume_residual(std::span<const double> t_mm, std::span<const double> lengths_mm,
                       double height_mm, double target_volume_mm3);

/// One thickness-update subproblem: minimize the scheme objective over the
/// moving box subject to the exact volume constraint.
struct UpdateProblem {
  UpdateScheme scheme = UpdateScheme::energy_density;
  std::vector<double> energy_prev_j;
  std::vector<double> lengths_mm;
  double height_mm = 0.0;
  double target_volume_mm3 = 0.0;
  std::vector<double> lower_mm;
  std::vector<double> upper_mm;
  std::vector<double> t_start_mm;

  size_t size() const { return t_start_mm.size(); }
  /// Throws ValidationError on size mismatches, bound inversions, or an
  /// infeasible volume target.
  void validate() const;
};

}  // namespace walltopo
