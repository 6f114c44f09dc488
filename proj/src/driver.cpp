#include "walltopo/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "walltopo/errors.hpp"
#include "walltopo/numeric.hpp"

namespace walltopo {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
  build_design_space(geometry);  // geometry field checks
  if (elems_per_wall_inplane < 1)
    throw ValidationError("elems_per_wall_inplane must be >= 1, got " +
                          std::to_string(elems_per_wall_inplane));
  if (t0_mm.empty()) throw ValidationError("t0_mm must not be empty");
  for (double v : t0_mm)
    if (!(v >= 0.0)) throw ValidationError("t0_mm entries must be non-negative");
  if (!(t_min_mm > 0.0))
    throw ValidationError("t_min_mm must be positive, got " + std::to_string(t_min_mm));
  if (!(t_min_mm < t_max_mm))
    throw ValidationError("t_min_mm (" + std::to_string(t_min_mm) +
                          ") must be smaller than t_max_mm (" + std::to_string(t_max_mm) + ")");
  if (!(target_volume_mm3 > 0.0))
    throw ValidationError("target_volume_mm3 must be positive, got " +
                          std::to_string(target_volume_mm3));
  if (!(delta_t_max_mm > 0.0))
    throw ValidationError("delta_t_max_mm must be positive, got " +
                          std::to_string(delta_t_max_mm));
  if (max_design_iterations < 1)
    throw ValidationError("max_design_iterations must be >= 1, got " +
                          std::to_string(max_design_iterations));
  if (!(convergence_tol_mm >= 0.0))
    throw ValidationError("convergence_tol_mm must be non-negative, got " +
                          std::to_string(convergence_tol_mm));
  if (periodic && (periodic->units_x < 1 || periodic->units_y < 1))
    throw ValidationError("periodic unit counts must be >= 1");
  if (solver.max_iterations < 0)
    throw ValidationError("solver.max_iterations must be non-negative");
  if (!(solver.initial_step > 0.0)) throw ValidationError("solver.initial_step must be positive");
  if (!(solver.backtrack_factor > 0.0 && solver.backtrack_factor < 1.0))
    throw ValidationError("solver.backtrack_factor must lie in (0, 1)");
  if (!(solver.armijo_c > 0.0 && solver.armijo_c < 1.0))
    throw ValidationError("solver.armijo_c must lie in (0, 1)");
  if (evaluator.type == EvaluatorConfig::Type::surrogate) {
    evaluator.surrogate.validate();
  } else {
    if (evaluator.external_command_template.empty())
      throw ValidationError("external evaluator requires a command template");
    if (!(evaluator.external_timeout_s > 0.0))
      throw ValidationError("external timeout must be positive");
  }
  if (density_kg_mm3 && !(*density_kg_mm3 > 0.0))
    throw ValidationError("density_kg_mm3 must be positive, got " +
                          std::to_string(*density_kg_mm3));
}

std::vector<double> initial_scale(std::span<const double> t0_mm,
                                  std::span<const double> lengths_mm, double height_mm,
                                  double v_star_mm3, double t_max_mm) {
  const size_t n = t0_mm.size();
  if (n == 0 || lengths_mm.size() != n)
    throw ValidationError("initial_scale: bad input sizes");
  std::vector<double> cap(n);
  for (size_t j = 0; j < n; ++j) cap[j] = lengths_mm[j] * t_max_mm;
  if (v_star_mm3 > height_mm * sum_compensated(cap) * (1.0 + 1e-12))
    throw InfeasibleError("volume target " + std::to_string(v_star_mm3) +
                          " mm^3 exceeds the capacity at t_max");

  std::vector<double> t(t0_mm.begin(), t0_mm.end());
  const double tol = 1e-9 * std::max(1.0, std::abs(v_star_mm3));
  for (int round = 0; round < 10; ++round) {
    std::vector<double> areas(n);
    for (size_t j = 0; j < n; ++j) areas[j] = lengths_mm[j] * t[j];
    const double volume = height_mm * sum_compensated(areas);
    if (std::abs(volume - v_star_mm3) <= tol) return t;
    // Scale only what is still below the cap; clipped walls stay put.
    std::vector<double> free_areas;
    double clipped_volume = 0.0;
    for (size_t j = 0; j < n; ++j) {
      if (t[j] >= t_max_mm)
        clipped_volume += height_mm * lengths_mm[j] * t[j];
      else
        free_areas.push_back(lengths_mm[j] * t[j]);
    }
    const double free_volume = height_mm * sum_compensated(free_areas);
    if (!(free_volume > 0.0))
      throw InfeasibleError("initial thickness has no scalable volume (all walls zero or at "
                            "t_max)");
    const double r = (v_star_mm3 - clipped_volume) / free_volume;
    if (!(r > 0.0))
      throw InfeasibleError("volume target is below the clipped walls' volume");
    for (size_t j = 0; j < n; ++j)
      if (t[j] < t_max_mm) t[j] = std::min(t[j] * r, t_max_mm);
  }
  std::vector<double> areas(n);
  for (size_t j = 0; j < n; ++j) areas[j] = lengths_mm[j] * t[j];
  if (std::abs(height_mm * sum_compensated(areas) - v_star_mm3) <= tol) return t;
  throw InfeasibleError("initial volume scaling did not settle within 10 rounds");
}

std::vector<int> threshold_and_kill(ThicknessField& t, double t_min_mm,
                                    const std::vector<bool>& opt_mask) {
  if (opt_mask.size() != t.size())
    throw ValidationError("threshold_and_kill: mask size mismatch");
  std::vector<int> killed;
  for (size_t j = 0; j < t.size(); ++j) {
    if (!opt_mask[j] || !t.alive[j]) continue;
    if (t.values_mm[j] < t_min_mm) {
      t.values_mm[j] = kKilledThicknessMm;
      t.alive[j] = false;
      killed.push_back(static_cast<int>(j));
    }
  }
  return killed;
}

void rescale_to_volume(ThicknessField& t, const std::vector<bool>& opt_mask,
                       std::span<const double> lengths_mm, double height_mm, double v_star_mm3,
                       double t_max_mm) {
  if (opt_mask.size() != t.size() || lengths_mm.size() != t.size())
    throw ValidationError("rescale_to_volume: size mismatch");
  std::vector<size_t> active;
  for (size_t j = 0; j < t.size(); ++j)
    if (opt_mask[j] && t.alive[j]) active.push_back(j);
  if (active.empty())
    throw InfeasibleError("no alive designable walls left to carry the volume budget");

  std::vector<double> cap(active.size());
  for (size_t i = 0; i < active.size(); ++i) cap[i] = lengths_mm[active[i]] * t_max_mm;
  if (v_star_mm3 > height_mm * sum_compensated(cap) * (1.0 + 1e-12))
    throw InfeasibleError("remaining walls cannot hold the volume budget even at t_max");

  const double tol = 1e-9 * std::max(1.0, std::abs(v_star_mm3));
  for (int round = 0; round < 10; ++round) {
    std::vector<double> areas(active.size());
    for (size_t i = 0; i < active.size(); ++i)
      areas[i] = lengths_mm[active[i]] * t.values_mm[active[i]];
    const double volume = height_mm * sum_compensated(areas);
    if (std::abs(volume - v_star_mm3) <= tol) return;
    double clipped_volume = 0.0;
    std::vector<double> free_areas;
    for (size_t i = 0; i < active.size(); ++i) {
      const size_t j = active[i];
      if (t.values_mm[j] >= t_max_mm)
        clipped_volume += height_mm * lengths_mm[j] * t.values_mm[j];
      else
        free_areas.push_back(lengths_mm[j] * t.values_mm[j]);
    }
    const double free_volume = height_mm * sum_compensated(free_areas);
    if (!(free_volume > 0.0))
      throw InfeasibleError("rescale has no scalable volume left");
    const double r = (v_star_mm3 - clipped_volume) / free_volume;
    if (!(r > 0.0)) throw InfeasibleError("volume budget below the clipped walls' volume");
    for (size_t j : active)
      if (t.values_mm[j] < t_max_mm) t.values_mm[j] = std::min(t.values_mm[j] * r, t_max_mm);
  }
  std::vector<double> areas(active.size());
  for (size_t i = 0; i < active.size(); ++i)
    areas[i] = lengths_mm[active[i]] * t.values_mm[active[i]];
  if (std::abs(height_mm * sum_compensated(areas) - v_star_mm3) > tol)
    throw InfeasibleError("volume rescaling did not settle within 10 rounds");
}

bool convergence_reached(double max_change_mm, double tol_mm) {
  return max_change_mm < tol_mm;
}

namespace {

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json metrics_to_json(const PerformanceRecord& m) {
  json j;
  j["sea_per_volume"] = m.sea_per_volume;
  if (m.sea_per_mass)
    j["sea_per_mass"] = *m.sea_per_mass;
  else
    j["sea_per_mass"] = nullptr;
  j["mwc"] = m.mwc;
  j["total_energy_j"] = m.total_energy_j;
  j["external_work_j"] = m.external_work_j;
  j["damage_dissipation_j"] = m.damage_dissipation_j;
  return j;
}

PerformanceRecord metrics_from_json(const json& j) {
  PerformanceRecord m;
  m.sea_per_volume = j.at("sea_per_volume").get<double>();
  if (!j.at("sea_per_mass").is_null()) m.sea_per_mass = j.at("sea_per_mass").get<double>();
  m.mwc = j.at("mwc").get<double>();
  m.total_energy_j = j.at("total_energy_j").get<double>();
  m.external_work_j = j.at("external_work_j").get<double>();
  m.damage_dissipation_j = j.at("damage_dissipation_j").get<double>();
  return m;
}

/// Streams run artifacts to the output directory as soon as each record is
/// final, so an aborted run leaves a usable history behind.
class HistoryWriter {
 public:
  explicit HistoryWriter(const std::optional<std::string>& directory) {
    if (!directory) return;
    dir_ = *directory;
    fs::create_directories(dir_);
    history_.open(dir_ / "history.jsonl", std::ios::binary | std::ios::trunc);
    metrics_.open(dir_ / "metrics.csv", std::ios::binary | std::ios::trunc);
    if (!history_ || !metrics_)
      throw std::runtime_error("cannot open run outputs under " + dir_.string());
    metrics_ << "iteration,sea_per_volume,sea_per_mass,mwc,external_work,damage_dissipation\n";
    enabled_ = true;
  }

  void append(const IterationRecord& rec) {
    if (!enabled_) return;
    history_ << iteration_record_to_json(rec) << "\n";
    history_.flush();
    const PerformanceRecord& m = rec.metrics;
    metrics_ << rec.iteration << "," << fmt_g17(m.sea_per_volume) << ","
             << (m.sea_per_mass ? fmt_g17(*m.sea_per_mass) : std::string()) << ","
             << fmt_g17(m.mwc) << "," << fmt_g17(m.external_work_j) << ","
             << fmt_g17(m.damage_dissipation_j) << "\n";
    metrics_.flush();

    std::ofstream design(dir_ / ("design_iter_" + std::to_string(rec.iteration) + ".csv"),
                         std::ios::binary | std::ios::trunc);
    design << "wall_id,thickness_mm,alive\n";
    for (size_t j = 0; j < rec.t_before_mm.size(); ++j)
      design << j << "," << fmt_g17(rec.t_before_mm[j]) << ","
             << (rec.t_before_mm[j] > kKilledThicknessMm ? 1 : 0) << "\n";
  }

 private:
  bool enabled_ = false;
  fs::path dir_;
  std::ofstream history_;
  std::ofstream metrics_;
};

}  // namespace

std::string iteration_record_to_json(const IterationRecord& rec) {
  json j;
  j["iteration"] = rec.iteration;
  j["t_before_mm"] = rec.t_before_mm;
  j["t_after_mm"] = rec.t_after_mm;
  j["energy_raw_j"] = rec.energy_raw_j;
  j["energy_averaged_j"] = rec.energy_averaged_j;
  j["metrics"] = metrics_to_json(rec.metrics);
  j["solver"] = {{"objective", rec.solver.objective},
                 {"iterations", rec.solver.iterations},
                 {"converged", rec.solver.converged},
                 {"max_step_mm", rec.solver.max_step_mm}};
  j["walls_killed"] = rec.walls_killed;
  j["max_thickness_change_mm"] = rec.max_thickness_change_mm;
  j["evaluation_completed"] = rec.evaluation_completed;
  return j.dump();
}

IterationRecord iteration_record_from_json(const std::string& line) {
  const json j = json::parse(line);
  IterationRecord rec;
  rec.iteration = j.at("iteration").get<int>();
  rec.t_before_mm = j.at("t_before_mm").get<std::vector<double>>();
  rec.t_after_mm = j.at("t_after_mm").get<std::vector<double>>();
  rec.energy_raw_j = j.at("energy_raw_j").get<std::vector<double>>();
  rec.energy_averaged_j = j.at("energy_averaged_j").get<std::vector<double>>();
  rec.metrics = metrics_from_json(j.at("metrics"));
  rec.solver.objective = j.at("solver").at("objective").get<double>();
  rec.solver.iterations = j.at("solver").at("iterations").get<int>();
  rec.solver.converged = j.at("solver").at("converged").get<bool>();
  rec.solver.max_step_mm = j.at("solver").at("max_step_mm").get<double>();
  rec.walls_killed = j.at("walls_killed").get<std::vector<int>>();
  rec.max_thickness_change_mm = j.at("max_thickness_change_mm").get<double>();
  rec.evaluation_completed = j.at("evaluation_completed").get<bool>();
  return rec;
}

std::unique_ptr<Evaluator> make_evaluator(const RunConfig& config) {
  if (config.evaluator.type == EvaluatorConfig::Type::surrogate)
    return std::make_unique<SurrogateEvaluator>(config.evaluator.surrogate);
  const fs::path work = config.output_directory
                            ? fs::path(*config.output_directory) / "solver_io"
                            : fs::temp_directory_path() / "walltopo_solver_io";
  return std::make_unique<ExternalEvaluator>(config.evaluator.external_command_template, work,
                                             config.evaluator.external_timeout_s,
                                             config.elems_per_wall_inplane);
}

RunHistory run(const RunConfig& config, Evaluator& evaluator,
               const IterationCallback& on_iteration) {
  config.validate();
  const DesignSpace ds = build_design_space(config.geometry);
  const int n = ds.wall_count();
  const std::vector<double> lengths = ds.wall_lengths();

  std::optional<PeriodicMap> pmap;
  std::vector<bool> opt_mask(n);
  if (config.periodic) {
    pmap = build_periodic_map(ds, config.periodic->units_x, config.periodic->units_y);
    for (int j = 0; j < n; ++j) opt_mask[j] = pmap->class_designable[pmap->class_of[j]];
  } else {
    opt_mask = ds.designable_mask();
  }

  std::vector<double> t0(n);
  if (config.t0_mm.size() == 1) {
    std::fill(t0.begin(), t0.end(), config.t0_mm[0]);
  } else if (static_cast<int>(config.t0_mm.size()) == n) {
    t0 = config.t0_mm;
  } else {
    throw ValidationError("t0_mm must have 1 or " + std::to_string(n) + " entries, got " +
                          std::to_string(config.t0_mm.size()));
  }
  if (pmap) {
    // A periodic run starts from a class-constant field: average within
    // classes before scaling.
    t0 = scatter(*pmap, aggregate_mean(*pmap, t0));
  }

  std::vector<int> design_idx;
  for (int j = 0; j < n; ++j)
    if (opt_mask[j]) design_idx.push_back(j);
  if (design_idx.empty()) throw ValidationError("design space has no designable walls");

  std::vector<double> t0_slice, len_slice;
  for (int j : design_idx) {
    t0_slice.push_back(t0[j]);
    len_slice.push_back(lengths[j]);
  }
  const std::vector<double> scaled = initial_scale(t0_slice, len_slice, ds.height_mm,
                                                   config.target_volume_mm3, config.t_max_mm);

  ThicknessField field(n);
  for (int j = 0; j < n; ++j)
    field.values_mm[j] =
        opt_mask[j] ? 0.0 : (ds.boundary_thickness_mm ? *ds.boundary_thickness_mm : 0.0);
  for (size_t i = 0; i < design_idx.size(); ++i) field.values_mm[design_idx[i]] = scaled[i];

  HistoryWriter writer(config.output_directory);
  RunHistory history;
  history.config = config;

  std::vector<double> e_avg;
  for (int iter = 0; iter < config.max_design_iterations; ++iter) {
    EnergyReport report;
    try {
      report = evaluator.evaluate(ds, field, iter);
    } catch (const std::exception&) {
      // One retry; evaluators are pure in (ds, t), so this is safe.
      report = evaluator.evaluate(ds, field, iter);
    }
    if (static_cast<int>(report.wall_energy_j.size()) != n ||
        static_cast<int>(report.undamaged_layers.size()) != n)
      throw ValidationError("evaluator returned " + std::to_string(report.wall_energy_j.size()) +
                            " wall energies, expected " + std::to_string(n));

    IterationRecord rec;
    rec.iteration = iter;
    rec.t_before_mm = field.values_mm;
    rec.energy_raw_j = report.wall_energy_j;
    rec.evaluation_completed = report.completed;

    const SeaResult sea =
        compute_sea(report.wall_energy_j, config.target_volume_mm3, config.density_kg_mm3);
    rec.metrics.sea_per_volume = sea.per_volume;
    rec.metrics.sea_per_mass = sea.per_mass_kj_per_kg;
    rec.metrics.mwc = compute_mwc(report.undamaged_layers, ds.layers_z);
    rec.metrics.total_energy_j = sum_compensated(report.wall_energy_j);
    rec.metrics.external_work_j = report.external_work_j;
    rec.metrics.damage_dissipation_j = report.damage_dissipation_j;

    if (iter == 0)
      e_avg = report.wall_energy_j;
    else
      for (int j = 0; j < n; ++j) e_avg[j] = 0.5 * (e_avg[j] + report.wall_energy_j[j]);
    rec.energy_averaged_j = e_avg;

    UpdateProblem problem;
    problem.scheme = config.scheme;
    problem.height_mm = ds.height_mm;
    problem.target_volume_mm3 = config.target_volume_mm3;
    std::vector<int> active_walls;       // plain mode
    std::vector<int> active_classes;     // periodic mode
    if (pmap) {
      const std::vector<double> e_cls = aggregate(*pmap, e_avg);
      const std::vector<double> weights = class_volume_weights(*pmap);
      for (int k = 0; k < pmap->class_count(); ++k) {
        if (!pmap->class_designable[k]) continue;
        const int rep_wall = pmap->images[k].front();
        if (!field.alive[rep_wall]) continue;
        active_classes.push_back(k);
        problem.energy_prev_j.push_back(e_cls[k]);
        problem.lengths_mm.push_back(weights[k]);
        problem.t_start_mm.push_back(field.values_mm[rep_wall]);
      }
      if (problem.t_start_mm.empty())
        throw InfeasibleError("no alive designable classes left");
    } else {
      for (int j : design_idx) {
        if (!field.alive[j]) continue;
        active_walls.push_back(j);
        problem.energy_prev_j.push_back(e_avg[j]);
        problem.lengths_mm.push_back(lengths[j]);
        problem.t_start_mm.push_back(field.values_mm[j]);
      }
      if (problem.t_start_mm.empty())
        throw InfeasibleError("no alive designable walls left");
    }
    const Bounds bounds =
        build_bounds(problem.t_start_mm, config.delta_t_max_mm, config.t_max_mm);
    problem.lower_mm = bounds.lower_mm;
    problem.upper_mm = bounds.upper_mm;

    const SolverResult solved = solve_update(problem, config.solver);
    rec.solver.objective = solved.objective;
    rec.solver.iterations = solved.iterations;
    rec.solver.converged = solved.converged;

    if (pmap) {
      for (size_t i = 0; i < active_classes.size(); ++i)
        for (int wall_id : pmap->images[active_classes[i]])
          field.values_mm[wall_id] = solved.t_mm[i];
    } else {
      for (size_t i = 0; i < active_walls.size(); ++i)
        field.values_mm[active_walls[i]] = solved.t_mm[i];
    }
    double max_step = 0.0;
    for (int j = 0; j < n; ++j)
      max_step = std::max(max_step, std::abs(field.values_mm[j] - rec.t_before_mm[j]));
    rec.solver.max_step_mm = max_step;

    rec.walls_killed = threshold_and_kill(field, config.t_min_mm, opt_mask);
    rescale_to_volume(field, opt_mask, lengths, ds.height_mm, config.target_volume_mm3,
                      config.t_max_mm);

    rec.t_after_mm = field.values_mm;
    double max_change = 0.0;
    for (int j = 0; j < n; ++j)
      max_change = std::max(max_change, std::abs(rec.t_after_mm[j] - rec.t_before_mm[j]));
    rec.max_thickness_change_mm = max_change;

    writer.append(rec);
    if (on_iteration) on_iteration(rec);
    history.records.push_back(std::move(rec));

    if (convergence_reached(max_change, config.convergence_tol_mm)) {
      history.terminated_by = Termination::converged;
      break;
    }
    history.terminated_by = Termination::max_iterations;
  }

  for (size_t i = 0; i < history.records.size(); ++i) {
    const PerformanceRecord& m = history.records[i].metrics;
    const PerformanceRecord& best_sea =
        history.records[history.best_iteration_by_sea].metrics;
    const PerformanceRecord& best_dmg =
        history.records[history.best_iteration_by_damage].metrics;
    if (m.sea_per_volume > best_sea.sea_per_volume)
      history.best_iteration_by_sea = static_cast<int>(i);
    if (m.damage_dissipation_j < best_dmg.damage_dissipation_j)
      history.best_iteration_by_damage = static_cast<int>(i);
  }
  return history;
}

}  // namespace walltopo
