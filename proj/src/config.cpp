#include "walltopo/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "walltopo/errors.hpp"

namespace walltopo {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key))
      fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

double get_double(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(join(path, key), "missing required value");
  if (!it->is_number()) fail(join(path, key), "expected a number");
  return it->get<double>();
}

double get_double_or(const json& obj, const std::string& path, const char* key, double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) fail(join(path, key), "expected a number");
  return it->get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(join(path, key), "missing required value");
  if (!it->is_number_integer()) fail(join(path, key), "expected an integer");
  return it->get<int>();
}

int get_int_or(const json& obj, const std::string& path, const char* key, int fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) fail(join(path, key), "expected an integer");
  return it->get<int>();
}

std::string get_string(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(join(path, key), "missing required value");
  if (!it->is_string()) fail(join(path, key), "expected a string");
  return it->get<std::string>();
}

LatticeConfig parse_geometry(const json& j) {
  require_object(j, "geometry");
  check_keys(j, "geometry",
             {"length_mm", "width_mm", "height_mm", "cells_x", "cells_y", "layers_z",
              "boundary_thickness_mm"});
  LatticeConfig g;
  g.length_mm = get_double(j, "geometry", "length_mm");
  g.width_mm = get_double(j, "geometry", "width_mm");
  g.height_mm = get_double(j, "geometry", "height_mm");
  g.cells_x = get_int(j, "geometry", "cells_x");
  g.cells_y = get_int(j, "geometry", "cells_y");
  g.layers_z = get_int_or(j, "geometry", "layers_z", 1);
  if (j.contains("boundary_thickness_mm"))
    g.boundary_thickness_mm = get_double(j, "geometry", "boundary_thickness_mm");
  return g;
}

SurrogateParams parse_surrogate(const json& j) {
  require_object(j, "evaluator.surrogate");
  check_keys(j, "evaluator.surrogate",
             {"load_center_mm", "kernel_sigma_mm", "t_ref_mm", "damage_kappa_mm", "mode",
              "amplitude_j_per_mm2"});
  SurrogateParams p;
  const auto it = j.find("load_center_mm");
  if (it == j.end()) fail("evaluator.surrogate.load_center_mm", "missing required value");
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
    fail("evaluator.surrogate.load_center_mm", "expected an array of two numbers");
  p.load_center_mm = {(*it)[0].get<double>(), (*it)[1].get<double>()};
  p.kernel_sigma_mm = get_double(j, "evaluator.surrogate", "kernel_sigma_mm");
  p.t_ref_mm = get_double(j, "evaluator.surrogate", "t_ref_mm");
  p.damage_kappa_mm = get_double(j, "evaluator.surrogate", "damage_kappa_mm");
  p.amplitude_j_per_mm2 = get_double(j, "evaluator.surrogate", "amplitude_j_per_mm2");
  const std::string mode = get_string(j, "evaluator.surrogate", "mode");
  if (mode == "fixed_displacement")
    p.mode = LoadMode::fixed_displacement;
  else if (mode == "fixed_load")
    p.mode = LoadMode::fixed_load;
  else
    fail("evaluator.surrogate.mode", "expected 'fixed_displacement' or 'fixed_load', got '" +
                                         mode + "'");
  return p;
}

EvaluatorConfig parse_evaluator(const json& j) {
  require_object(j, "evaluator");
  check_keys(j, "evaluator", {"type", "surrogate", "external"});
  EvaluatorConfig e;
  const std::string type = get_string(j, "evaluator", "type");
  if (type == "surrogate") {
    e.type = EvaluatorConfig::Type::surrogate;
    if (!j.contains("surrogate")) fail("evaluator.surrogate", "missing required value");
    e.surrogate = parse_surrogate(j.at("surrogate"));
  } else if (type == "external") {
    e.type = EvaluatorConfig::Type::external;
    if (!j.contains("external")) fail("evaluator.external", "missing required value");
    const json& ext = j.at("external");
    require_object(ext, "evaluator.external");
    check_keys(ext, "evaluator.external", {"command_template", "timeout_s"});
    e.external_command_template = get_string(ext, "evaluator.external", "command_template");
    e.external_timeout_s = get_double_or(ext, "evaluator.external", "timeout_s", 60.0);
  } else {
    fail("evaluator.type", "expected 'surrogate' or 'external', got '" + type + "'");
  }
  return e;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source_name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(source_name + ": invalid JSON: " + e.what());
  }
  require_object(doc, "");
  check_keys(doc, "",
             {"schema_version", "geometry", "mesh", "optimization", "periodic", "solver",
              "evaluator", "material", "output"});

  const int version = get_int(doc, "", "schema_version");
  if (version != 1)
    fail("schema_version", "unsupported version " + std::to_string(version) + ", expected 1");

  RunConfig cfg;
  if (!doc.contains("geometry")) fail("geometry", "missing required value");
  cfg.geometry = parse_geometry(doc.at("geometry"));

  if (doc.contains("mesh")) {
    const json& mesh = doc.at("mesh");
    require_object(mesh, "mesh");
    check_keys(mesh, "mesh", {"elems_per_wall_inplane"});
    cfg.elems_per_wall_inplane = get_int_or(mesh, "mesh", "elems_per_wall_inplane", 2);
  }

  if (!doc.contains("optimization")) fail("optimization", "missing required value");
  const json& opt = doc.at("optimization");
  require_object(opt, "optimization");
  check_keys(opt, "optimization",
             {"scheme", "t0_mm", "t_min_mm", "t_max_mm", "target_volume_mm3", "delta_t_max_mm",
              "max_design_iterations", "convergence_tol_mm"});
  const int scheme = get_int(opt, "optimization", "scheme");
  if (scheme != 1 && scheme != 2)
    fail("optimization.scheme", "expected 1 or 2, got " + std::to_string(scheme));
  cfg.scheme = scheme == 1 ? UpdateScheme::energy_density : UpdateScheme::beso_transfer;
  {
    const auto it = opt.find("t0_mm");
    if (it == opt.end()) fail("optimization.t0_mm", "missing required value");
    if (it->is_number()) {
      cfg.t0_mm = {it->get<double>()};
    } else if (it->is_array() && !it->empty()) {
      cfg.t0_mm.clear();
      for (const json& v : *it) {
        if (!v.is_number()) fail("optimization.t0_mm", "expected numbers");
        cfg.t0_mm.push_back(v.get<double>());
      }
    } else {
      fail("optimization.t0_mm", "expected a number or a non-empty array of numbers");
    }
  }
  cfg.t_min_mm = get_double(opt, "optimization", "t_min_mm");
  cfg.t_max_mm = get_double(opt, "optimization", "t_max_mm");
  cfg.target_volume_mm3 = get_double(opt, "optimization", "target_volume_mm3");
  cfg.delta_t_max_mm = get_double(opt, "optimization", "delta_t_max_mm");
  cfg.max_design_iterations = get_int(opt, "optimization", "max_design_iterations");
  cfg.convergence_tol_mm = get_double_or(opt, "optimization", "convergence_tol_mm", 1e-2);

  if (doc.contains("periodic")) {
    const json& per = doc.at("periodic");
    require_object(per, "periodic");
    check_keys(per, "periodic", {"units_x", "units_y"});
    PeriodicUnits units;
    units.units_x = get_int(per, "periodic", "units_x");
    units.units_y = get_int(per, "periodic", "units_y");
    cfg.periodic = units;
  }

  if (doc.contains("solver")) {
    const json& sol = doc.at("solver");
    require_object(sol, "solver");
    check_keys(sol, "solver",
               {"max_iterations", "initial_step", "armijo_c", "backtrack_factor",
                "stagnation_tol", "projection_tol"});
    cfg.solver.max_iterations = get_int_or(sol, "solver", "max_iterations", 500);
    cfg.solver.initial_step = get_double_or(sol, "solver", "initial_step", 1.0);
    cfg.solver.armijo_c = get_double_or(sol, "solver", "armijo_c", 1e-4);
    cfg.solver.backtrack_factor = get_double_or(sol, "solver", "backtrack_factor", 0.5);
    cfg.solver.stagnation_tol = get_double_or(sol, "solver", "stagnation_tol", 1e-8);
    cfg.solver.projection_tol = get_double_or(sol, "solver", "projection_tol", 1e-10);
  }

  if (!doc.contains("evaluator")) fail("evaluator", "missing required value");
  cfg.evaluator = parse_evaluator(doc.at("evaluator"));

  if (doc.contains("material")) {
    const json& mat = doc.at("material");
    require_object(mat, "material");
    check_keys(mat, "material", {"density_kg_mm3"});
    cfg.density_kg_mm3 = get_double(mat, "material", "density_kg_mm3");
  }

  if (doc.contains("output")) {
    const json& out = doc.at("output");
    require_object(out, "output");
    check_keys(out, "output", {"directory"});
    cfg.output_directory = get_string(out, "output", "directory");
  }

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open config file: " + path.string());
  std::stringstream buffer;
  buffer << f.rdbuf();
  return parse_config(buffer.str(), path.string());
}

std::string config_to_json(const RunConfig& config) {
  json doc;
  doc["schema_version"] = 1;
  json& geo = doc["geometry"];
  geo["length_mm"] = config.geometry.length_mm;
  geo["width_mm"] = config.geometry.width_mm;
  geo["height_mm"] = config.geometry.height_mm;
  geo["cells_x"] = config.geometry.cells_x;
  geo["cells_y"] = config.geometry.cells_y;
  geo["layers_z"] = config.geometry.layers_z;
  if (config.geometry.boundary_thickness_mm)
    geo["boundary_thickness_mm"] = *config.geometry.boundary_thickness_mm;
  doc["mesh"]["elems_per_wall_inplane"] = config.elems_per_wall_inplane;
  json& opt = doc["optimization"];
  opt["scheme"] = config.scheme == UpdateScheme::energy_density ? 1 : 2;
  if (config.t0_mm.size() == 1)
    opt["t0_mm"] = config.t0_mm[0];
  else
    opt["t0_mm"] = config.t0_mm;
  opt["t_min_mm"] = config.t_min_mm;
  opt["t_max_mm"] = config.t_max_mm;
  opt["target_volume_mm3"] = config.target_volume_mm3;
  opt["delta_t_max_mm"] = config.delta_t_max_mm;
  opt["max_design_iterations"] = config.max_design_iterations;
  opt["convergence_tol_mm"] = config.convergence_tol_mm;
  if (config.periodic) {
    doc["periodic"]["units_x"] = config.periodic->units_x;
    doc["periodic"]["units_y"] = config.periodic->units_y;
  }
  json& sol = doc["solver"];
  sol["max_iterations"] = config.solver.max_iterations;
  sol["initial_step"] = config.solver.initial_step;
  sol["armijo_c"] = config.solver.armijo_c;
  sol["backtrack_factor"] = config.solver.backtrack_factor;
  sol["stagnation_tol"] = config.solver.stagnation_tol;
  sol["projection_tol"] = config.solver.projection_tol;
  json& ev = doc["evaluator"];
  if (config.evaluator.type == EvaluatorConfig::Type::surrogate) {
    ev["type"] = "surrogate";
    json& s = ev["surrogate"];
    s["load_center_mm"] = {config.evaluator.surrogate.load_center_mm[0],
                           config.evaluator.surrogate.load_center_mm[1]};
    s["kernel_sigma_mm"] = config.evaluator.surrogate.kernel_sigma_mm;
    s["t_ref_mm"] = config.evaluator.surrogate.t_ref_mm;
    s["damage_kappa_mm"] = config.evaluator.surrogate.damage_kappa_mm;
    s["mode"] = config.evaluator.surrogate.mode == LoadMode::fixed_displacement
                    ? "fixed_displacement"
                    : "fixed_load";
    s["amplitude_j_per_mm2"] = config.evaluator.surrogate.amplitude_j_per_mm2;
  } else {
    ev["type"] = "external";
    ev["external"]["command_template"] = config.evaluator.external_command_template;
    ev["external"]["timeout_s"] = config.evaluator.external_timeout_s;
  }
  if (config.density_kg_mm3) doc["material"]["density_kg_mm3"] = *config.density_kg_mm3;
  if (config.output_directory) doc["output"]["directory"] = *config.output_directory;
  return doc.dump(2) + "\n";
}

}  // namespace walltopo
