#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "walltopo/evaluator.hpp"
#include "walltopo/lattice.hpp"
#include "walltopo/metrics.hpp"
#include "walltopo/optimizer.hpp"
#include "walltopo/periodic.hpp"
#include "walltopo/schemes.hpp"

namespace walltopo {

struct PeriodicUnits {
  int units_x = 1;
  int units_y = 1;
};

struct EvaluatorConfig {
  enum class Type { surrogate, external };
  Type type = Type::surrogate;
  SurrogateParams surrogate;
  std::string external_command_template;
  double external_timeout_s = 60.0;
};

struct RunConfig {
  LatticeConfig geometry;
  int elems_per_wall_inplane = 2;
  UpdateScheme scheme = UpdateScheme::energy_density;
  /// Initial thickness: one entry = uniform, otherwise one per wall.
  std::vector<double> t0_mm{1.0};
  double t_min_mm = 0.1;
  double t_max_mm = 1.0;
  double target_volume_mm3 = 0.0;  ///< V*, budget over designable walls
  double delta_t_max_mm = 0.1;
  int max_design_iterations = 1;
  double convergence_tol_mm = 1e-2;
  std::optional<PeriodicUnits> periodic;
  SolverSettings solver;
  EvaluatorConfig evaluator;
  std::optional<double> density_kg_mm3;
  std::optional<std::string> output_directory;

  void validate() const;
};

struct SolverSummary {
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double max_step_mm = 0.0;  ///< largest per-wall move the solver made
};

struct IterationRecord {
  int iteration = 0;  ///< zero-based; iteration 0 evaluates the initial design
  std::vector<double> t_before_mm;
  std::vector<double> t_after_mm;
  std::vector<double> energy_raw_j;
  std::vector<double> energy_averaged_j;
  PerformanceRecord metrics;
  SolverSummary solver;
  std::vector<int> walls_killed;
  double max_thickness_change_mm = 0.0;
  bool evaluation_completed = true;
};

enum class Termination { converged, max_iterations };

struct RunHistory {
  RunConfig config;
  std::vector<IterationRecord> records;
  int best_iteration_by_sea = 0;
  int best_iteration_by_damage = 0;
  Termination terminated_by = Termination::max_iterations;
};

/// Scales t0 so the volume H * sum(L t) hits v_star exactly, clipping at
/// t_max and re-scaling the remainder (at most 10 rounds). Operates on the
/// designable slice only.
std::vector<double> initial_scale(std::span<const double> t0_mm, std::span<const double> lengths_mm,
                                  double height_mm, double v_star_mm3, double t_max_mm);

/// Soft kill: optimization walls whose thickness fell below t_min are set
/// to the sentinel and marked dead. Returns the ids killed this call.
/// Killed walls never revive.
std::vector<int> threshold_and_kill(ThicknessField& t, double t_min_mm,
                                    const std::vector<bool>& opt_mask);

/// Scales alive optimization walls so their volume returns to v_star
/// (fixed-point with t_max clipping, tolerance 1e-9 relative). Killed and
/// fixed walls are untouched.
void rescale_to_volume(ThicknessField& t, const std::vector<bool>& opt_mask,
                       std::span<const double> lengths_mm, double height_mm, double v_star_mm3,
                       double t_max_mm);

/// Strict comparison: the loop stops only when the largest absolute
/// thickness change drops below the tolerance.
bool convergence_reached(double max_change_mm, double tol_mm);

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Runs the full design loop: evaluate, average energies with the previous
/// iteration, aggregate periodically if configured, solve the bounded
/// volume-constrained update, threshold, rescale, repeat until the
/// thickness field settles or the iteration budget runs out. When
/// config.output_directory is set, history.jsonl, metrics.csv and
/// design_iter_<k>.csv are flushed as the run progresses. on_iteration,
/// when given, fires once per completed iteration.
RunHistory run(const RunConfig& config, Evaluator& evaluator,
               const IterationCallback& on_iteration = {});

/// Builds the evaluator named by the config (surrogate or external).
std::unique_ptr<Evaluator> make_evaluator(const RunConfig& config);

/// Serialization used by the history writer and the report command.
std::string iteration_record_to_json(const IterationRecord& rec);
IterationRecord iteration_record_from_json(const std::string& line);

}  // namespace walltopo
