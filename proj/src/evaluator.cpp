#include "walltopo/evaluator.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "walltopo/errors.hpp"
#include "walltopo/numeric.hpp"

namespace walltopo {

void SurrogateParams::validate() const {
  if (!(kernel_sigma_mm > 0.0))
    throw ValidationError("kernel_sigma_mm must be positive, got " +
                          std::to_string(kernel_sigma_mm));
  if (!(t_ref_mm > 0.0))
    throw ValidationError("t_ref_mm must be positive, got " + std::to_string(t_ref_mm));
  if (!(amplitude_j_per_mm2 > 0.0))
    throw ValidationError("amplitude_j_per_mm2 must be positive, got " +
                          std::to_string(amplitude_j_per_mm2));
  if (!(damage_kappa_mm >= 0.0))
    throw ValidationError("damage_kappa_mm must be non-negative, got " +
                          std::to_string(damage_kappa_mm));
}

EnergyReport evaluate_surrogate(const DesignSpace& ds, const ThicknessField& t,
                                const SurrogateParams& params) {
  params.validate();
  const size_t n = ds.walls.size();
  if (t.values_mm.size() != n || t.alive.size() != n)
    throw ValidationError("thickness field has " + std::to_string(t.values_mm.size()) +
                          " walls, design space has " + std::to_string(n));

  const double sigma2 = params.kernel_sigma_mm * params.kernel_sigma_mm;
  const double radius2 = 9.0 * sigma2;

  EnergyReport report;
  report.wall_energy_j.resize(n);
  report.undamaged_layers.resize(n);
  std::vector<double> damage_terms(n);
  for (size_t j = 0; j < n; ++j) {
    const Wall& w = ds.walls[j];
    const double tj = t.values_mm[j];
    if (tj < 0.0)
      throw ValidationError("wall " + std::to_string(j) + " has negative thickness " +
                            std::to_string(tj));
    const double ddx = w.midpoint_mm[0] - params.load_center_mm[0];
    const double ddy = w.midpoint_mm[1] - params.load_center_mm[1];
    const double d2 = ddx * ddx + ddy * ddy;
    const double phi = std::exp(-d2 / (2.0 * sigma2));
    const double psi = tj / (tj + params.t_ref_mm);
    report.wall_energy_j[j] =
        params.mode == LoadMode::fixed_displacement
            ? params.amplitude_j_per_mm2 * w.length_mm * phi * psi
            : params.amplitude_j_per_mm2 * w.length_mm * phi * (1.0 - psi);
    double delta;
    if (t.alive[j]) {
      if (tj > 0.0)
        delta = std::clamp(params.damage_kappa_mm * phi / tj - 1.0, 0.0, 1.0);
      else
        delta = phi > 0.0 ? 1.0 : 0.0;
    } else {
      delta = d2 <= radius2 ? 1.0 : 0.0;
    }
    report.undamaged_layers[j] = static_cast<int>(std::lround((1.0 - delta) * ds.layers_z));
    damage_terms[j] = w.length_mm * phi * delta;
  }
  report.damage_dissipation_j =
      0.1 * params.amplitude_j_per_mm2 * sum_compensated(damage_terms);
  report.external_work_j =
      sum_compensated(report.wall_energy_j) + report.damage_dissipation_j;
  report.completed = true;
  return report;
}

namespace {

std::string fmt_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

bool parse_long(const std::string& field, long& out) {
  const std::string f = trim(field);
  if (f.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtol(f.c_str(), &end, 10);
  return errno == 0 && end == f.c_str() + f.size();
}

bool parse_double(const std::string& field, double& out) {
  const std::string f = trim(field);
  if (f.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(f.c_str(), &end);
  return errno == 0 && end == f.c_str() + f.size() && std::isfinite(out);
}

}  // namespace

void write_solver_input(const MeshSpec& mesh, const std::filesystem::path& path) {
  if (mesh.sections.empty())
    throw ValidationError("mesh has an empty section table, nothing to write");

  std::map<int, std::vector<int>> elements_by_wall;
  for (const ShellElement& e : mesh.shells) elements_by_wall[e.wall_id].push_back(e.id);

  std::string out;
  out += "*NODE\n";
  for (const MeshNode& node : mesh.nodes)
    out += std::to_string(node.id) + ", " + fmt_g9(node.x) + ", " + fmt_g9(node.y) + ", " +
           fmt_g9(node.z) + "\n";
  out += "*ELEMENT, TYPE=SHELL4\n";
  for (const ShellElement& e : mesh.shells)
    out += std::to_string(e.id) + ", " + std::to_string(e.nodes[0]) + ", " +
           std::to_string(e.nodes[1]) + ", " + std::to_string(e.nodes[2]) + ", " +
           std::to_string(e.nodes[3]) + "\n";
  for (const auto& [wall_id, thickness] : mesh.sections) {
    out += "*SECTION, WALL=" + std::to_string(wall_id) + ", THICKNESS=" + fmt_g9(thickness) +
           "\n";
    const auto it = elements_by_wall.find(wall_id);
    if (it == elements_by_wall.end()) continue;
    const std::vector<int>& ids = it->second;
    for (size_t k = 0; k < ids.size(); k += 16) {
      std::string line;
      for (size_t m = k; m < std::min(ids.size(), k + 16); ++m) {
        if (!line.empty()) line += ", ";
        line += std::to_string(ids[m]);
      }
      out += line + "\n";
    }
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

EnergyReport parse_energy_csv(const std::filesystem::path& path,
                              std::optional<int> expected_walls) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open solver output: " + path.string());
  std::stringstream buffer;
  buffer << f.rdbuf();
  const std::string content = buffer.str();

  std::vector<std::string> lines = split(content, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty())
    throw ValidationError(path.string() + ": missing header line");
  if (trim(lines[0]) != "wall_id,energy,undamaged_layers")
    throw ValidationError(path.string() + ": line 1: expected header "
                          "'wall_id,energy,undamaged_layers'");

  EnergyReport report;
  bool truncated = false;
  bool trailer_seen = false;
  for (size_t idx = 1; idx < lines.size(); ++idx) {
    const int line_no = static_cast<int>(idx) + 1;
    const std::string line = trim(lines[idx]);
    const bool is_last = idx + 1 == lines.size();
    if (line.empty())
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                            ": empty line");
    if (line.rfind("#TOTALS", 0) == 0) {
      if (!is_last)
        throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                              ": #TOTALS trailer must be the last line");
      const std::vector<std::string> fields = split(line, ',');
      double ew = 0.0, dd = 0.0;
      bool completed_flag = true;
      bool ok = fields.size() == 4 && parse_double(fields[1], ew) && parse_double(fields[2], dd);
      if (ok) {
        const std::string flag = trim(fields[3]);
        if (flag == "true" || flag == "1")
          completed_flag = true;
        else if (flag == "false" || flag == "0")
          completed_flag = false;
        else
          ok = false;
      }
      if (!ok) {
        // A mangled trailer is the signature of a run cut off mid-write.
        truncated = true;
        break;
      }
      trailer_seen = true;
      report.external_work_j = ew;
      report.damage_dissipation_j = dd;
      if (!completed_flag) truncated = true;
      break;
    }

    const std::vector<std::string> fields = split(line, ',');
    long id = 0, layers = 0;
    double energy = 0.0;
    const bool ok = fields.size() == 3 && parse_long(fields[0], id) &&
                    parse_double(fields[1], energy) && parse_long(fields[2], layers);
    if (!ok) {
      if (is_last) {
        truncated = true;
        break;
      }
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                            ": malformed row '" + line + "'");
    }
    const long expected_id = static_cast<long>(report.wall_energy_j.size());
    if (id > expected_id)
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                            ": missing wall id " + std::to_string(expected_id));
    if (id < expected_id)
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                            ": duplicate wall id " + std::to_string(id));
    if (energy < 0.0)
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                            ": negative energy for wall " + std::to_string(id));
    if (layers < 0)
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                            ": negative undamaged_layers for wall " + std::to_string(id));
    report.wall_energy_j.push_back(energy);
    report.undamaged_layers.push_back(static_cast<int>(layers));
  }

  if (expected_walls) {
    const int rows = static_cast<int>(report.wall_energy_j.size());
    if (rows > *expected_walls)
      throw ValidationError(path.string() + ": got " + std::to_string(rows) +
                            " wall rows, expected " + std::to_string(*expected_walls));
    if (rows < *expected_walls) {
      truncated = true;
      report.wall_energy_j.resize(*expected_walls, 0.0);
      report.undamaged_layers.resize(*expected_walls, 0);
    }
  }
  (void)trailer_seen;
  report.completed = !truncated;
  return report;
}

EnergyReport run_external(const std::string& command_template,
                          const std::filesystem::path& input_path,
                          const std::filesystem::path& output_path, double timeout_s,
                          std::optional<int> expected_walls) {
  if (command_template.find("{input}") == std::string::npos ||
      command_template.find("{output}") == std::string::npos)
    throw ValidationError("command template must contain {input} and {output} placeholders: '" +
                          command_template + "'");
  std::string cmd = command_template;
  for (const auto& [placeholder, value] :
       {std::pair<std::string, std::string>{"{input}", input_path.string()},
        {"{output}", output_path.string()}}) {
    size_t pos;
    while ((pos = cmd.find(placeholder)) != std::string::npos)
      cmd.replace(pos, placeholder.size(), value);
  }

  std::vector<std::string> args;
  std::istringstream tokens(cmd);
  for (std::string tok; tokens >> tok;) args.push_back(tok);
  if (args.empty()) throw ValidationError("command template expands to an empty command");

  std::vector<char*> argv;
  argv.reserve(args.size() + 1);
  for (std::string& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    execvp(argv[0], argv.data());
    _exit(127);
  }

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(timeout_s));
  int status = 0;
  while (true) {
    const pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw std::runtime_error("waitpid failed: " + std::string(std::strerror(errno)));
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      throw std::runtime_error("external solver timed out after " + std::to_string(timeout_s) +
                               " s: " + cmd);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  const int exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);

  if (!std::filesystem::exists(output_path))
    throw std::runtime_error("external solver produced no output file: " + output_path.string() +
                             " (exit code " + std::to_string(exit_code) + ")");
  EnergyReport report = parse_energy_csv(output_path, expected_walls);
  if (exit_code != 0) report.completed = false;
  return report;
}

SurrogateEvaluator::SurrogateEvaluator(SurrogateParams params) : params_(params) {
  params_.validate();
}

EnergyReport SurrogateEvaluator::evaluate(const DesignSpace& ds, const ThicknessField& t,
                                          int iteration) {
  (void)iteration;
  return evaluate_surrogate(ds, t, params_);
}

ExternalEvaluator::ExternalEvaluator(std::string command_template,
                                     std::filesystem::path work_dir, double timeout_s,
                                     int elems_per_wall_inplane)
    : command_template_(std::move(command_template)),
      work_dir_(std::move(work_dir)),
      timeout_s_(timeout_s),
      elems_per_wall_inplane_(elems_per_wall_inplane) {
  if (!(timeout_s_ > 0.0))
    throw ValidationError("timeout_s must be positive, got " + std::to_string(timeout_s_));
}

EnergyReport ExternalEvaluator::evaluate(const DesignSpace& ds, const ThicknessField& t,
                                         int iteration) {
  if (!mesh_) mesh_ = generate_mesh(ds, elems_per_wall_inplane_);
  apply_thickness(*mesh_, t.values_mm);
  std::filesystem::create_directories(work_dir_);
  const std::filesystem::path in =
      work_dir_ / ("solver_input_iter" + std::to_string(iteration) + ".txt");
  const std::filesystem::path out =
      work_dir_ / ("solver_output_iter" + std::to_string(iteration) + ".csv");
  write_solver_input(*mesh_, in);
  return run_external(command_template_, in, out, timeout_s_, ds.wall_count());
}

}  // namespace walltopo
