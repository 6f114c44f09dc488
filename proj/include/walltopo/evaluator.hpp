#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "walltopo/lattice.hpp"
#include "walltopo/schemes.hpp"

namespace walltopo {

/// Loading regime of the evaluation: under a prescribed displacement a
/// stiffer wall absorbs more energy, under a prescribed load a more
/// compliant wall does.
enum class LoadMode { fixed_displacement, fixed_load };

struct SurrogateParams {
  std::array<double, 2> load_center_mm{0.0, 0.0};
  double kernel_sigma_mm = 1.0;
  double t_ref_mm = 1.0;
  double damage_kappa_mm = 1.0;
  LoadMode mode = LoadMode::fixed_displacement;
  double amplitude_j_per_mm2 = 1.0;

  void validate() const;  ///< sigma, t_ref, amplitude must be positive
};

struct EnergyReport {
  std::vector<double> wall_energy_j;
  std::vector<int> undamaged_layers;
  double external_work_j = 0.0;
  double damage_dissipation_j = 0.0;
  bool completed = true;
};

/// Closed-form stand-in for a shell FE run. Per wall j with midpoint
/// distance d_j to the load center:
///   phi_j = exp(-d_j^2 / (2 sigma^2))        spatial intensity
///   psi_j = t_j / (t_j + t_ref)              thickness saturation
///   E_j   = amplitude * L_j * phi_j * psi_j            (fixed_displacement)
///   E_j   = amplitude * L_j * phi_j * (1 - psi_j)      (fixed_load)
/// Damage: delta_j = clamp(kappa * phi_j / t_j - 1, 0, 1) for alive walls;
/// killed walls take delta = 1 inside the 3 sigma radius, 0 outside.
/// undamaged_layers_j = round((1 - delta_j) * N_z),
/// damage_dissipation = 0.1 * amplitude * sum L_j phi_j delta_j,
/// external_work = sum E_j + damage_dissipation.
EnergyReport evaluate_surrogate(const DesignSpace& ds, const ThicknessField& t,
                                const SurrogateParams& params);

/// Writes the neutral keyword input deck: *NODE block, *ELEMENT block, then
/// one *SECTION block per wall listing its element ids. Deterministic,
/// 9 significant digits, LF line endings.
void write_solver_input(const MeshSpec& mesh, const std::filesystem::path& path);

/// Parses the solver output CSV (header `wall_id,energy,undamaged_layers`,
/// optional `#TOTALS,external_work,damage_dissipation,completed` trailer).
/// A malformed final line is treated as a truncated run: the partial rows
/// are kept and completed becomes false. Malformed interior lines throw
/// ValidationError with the line number. When expected_walls is given,
/// missing trailing rows are zero-padded with completed=false.
EnergyReport parse_energy_csv(const std::filesystem::path& path,
                              std::optional<int> expected_walls = {});

/// Substitutes {input}/{output} into the template, launches the command
/// without a shell, and parses the output CSV. A nonzero exit flips
/// completed to false; a missing output file or a timeout throws.
EnergyReport run_external(const std::string& command_template,
                          const std::filesystem::path& input_path,
                          const std::filesystem::path& output_path, double timeout_s,
                          std::optional<int> expected_walls = {});

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual EnergyReport evaluate(const DesignSpace& ds, const ThicknessField& t, int iteration) = 0;
};

class SurrogateEvaluator : public Evaluator {
 public:
  explicit SurrogateEvaluator(SurrogateParams params);
  EnergyReport evaluate(const DesignSpace& ds, const ThicknessField& t, int iteration) override;

 private:
  SurrogateParams params_;
};

/// Round-trips each evaluation through the external solver protocol:
/// writes work_dir/solver_input_iter<k>.txt, runs the command, parses
/// work_dir/solver_output_iter<k>.csv.
class ExternalEvaluator : public Evaluator {
 public:
  ExternalEvaluator(std::string command_template, std::filesystem::path work_dir,
                    double timeout_s, int elems_per_wall_inplane);
  EnergyReport evaluate(const DesignSpace& ds, const ThicknessField& t, int iteration) override;

 private:
  std::string command_template_;
  std::filesystem::path work_dir_;
  double timeout_s_;
  int elems_per_wall_inplane_;
  std::optional<MeshSpec> mesh_;
};

}  // namespace walltopo
