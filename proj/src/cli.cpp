#include "walltopo/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "walltopo/config.hpp"
#include "walltopo/driver.hpp"
#include "walltopo/errors.hpp"
#include "walltopo/render.hpp"

namespace walltopo {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunArgs {
  std::string config_path;
  std::string out_dir;
  int max_iterations = 0;
  int scheme = 0;
  unsigned long seed = 0;
  bool quiet = false;
};

struct RenderArgs {
  std::string config_path;
  std::string design_path;
  std::string out_path;
  double stroke_px_per_mm = 4.0;
};

struct ReportArgs {
  std::string history_path;
  bool quiet = false;
};

const char* termination_name(Termination t) {
  return t == Termination::converged ? "converged" : "max_iterations";
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f << text;
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

void cmd_run(const RunArgs& args) {
  RunConfig cfg = load_config(args.config_path);
  if (!args.out_dir.empty()) cfg.output_directory = args.out_dir;
  if (args.max_iterations > 0) cfg.max_design_iterations = args.max_iterations;
  if (args.scheme == 1) cfg.scheme = UpdateScheme::energy_density;
  if (args.scheme == 2) cfg.scheme = UpdateScheme::beso_transfer;

  auto evaluator = make_evaluator(cfg);
  IterationCallback progress;
  if (!args.quiet) {
    progress = [](const IterationRecord& rec) {
      std::printf("iter %-3d objective %.6e  sea %.6g  mwc %.4f  killed %zu  max_dt %.6g%s\n",
                  rec.iteration, rec.solver.objective, rec.metrics.sea_per_volume,
                  rec.metrics.mwc, rec.walls_killed.size(), rec.max_thickness_change_mm,
                  rec.evaluation_completed ? "" : "  [incomplete]");
      std::fflush(stdout);
    };
  }

  const RunHistory history = run(cfg, *evaluator, progress);

  if (cfg.output_directory) {
    const IterationRecord& bs = history.records[history.best_iteration_by_sea];
    const IterationRecord& bd = history.records[history.best_iteration_by_damage];
    json summary;
    summary["terminated_by"] = termination_name(history.terminated_by);
    summary["iterations"] = history.records.size();
    summary["best_iteration_by_sea"] = history.best_iteration_by_sea;
    summary["best_sea_per_volume"] = bs.metrics.sea_per_volume;
    summary["best_iteration_by_damage"] = history.best_iteration_by_damage;
    summary["best_damage_dissipation_j"] = bd.metrics.damage_dissipation_j;
    summary["config"] = json::parse(config_to_json(cfg));
    write_text_file(fs::path(*cfg.output_directory) / "summary.json", summary.dump(2) + "\n");
  }

  if (!args.quiet) {
    std::printf("terminated: %s after %zu iterations\n", termination_name(history.terminated_by),
                history.records.size());
    std::printf("best sea_per_volume %.6g at iteration %d\n",
                history.records[history.best_iteration_by_sea].metrics.sea_per_volume,
                history.best_iteration_by_sea);
    std::printf("best damage_dissipation_j %.6g at iteration %d\n",
                history.records[history.best_iteration_by_damage].metrics.damage_dissipation_j,
                history.best_iteration_by_damage);
    if (cfg.output_directory)
      std::printf("artifacts in %s\n", cfg.output_directory->c_str());
  }
}

void cmd_render(const RenderArgs& args) {
  const RunConfig cfg = load_config(args.config_path);
  const DesignSpace ds = build_design_space(cfg.geometry);
  const std::vector<DesignRow> rows = read_design_csv(args.design_path);
  RenderOptions options;
  options.stroke_px_per_mm = args.stroke_px_per_mm;
  write_text_file(args.out_path, render_svg(ds, rows, cfg.t_min_mm, cfg.t_max_mm, options));
  std::printf("wrote %s\n", args.out_path.c_str());
}

void cmd_report(const ReportArgs& args) {
  fs::path history_file(args.history_path);
  if (fs::is_directory(history_file)) history_file /= "history.jsonl";
  const fs::path dir = history_file.parent_path();

  std::ifstream f(history_file);
  if (!f) throw ValidationError("cannot open history file: " + history_file.string());

  std::vector<IterationRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(iteration_record_from_json(line));
    } catch (const std::exception& e) {
      throw ValidationError(history_file.string() + ": line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  if (records.empty())
    throw ValidationError(history_file.string() + ": no iteration records");

  int best_sea = 0;
  int best_damage = 0;
  for (size_t i = 1; i < records.size(); ++i) {
    if (records[i].metrics.sea_per_volume > records[best_sea].metrics.sea_per_volume)
      best_sea = static_cast<int>(i);
    if (records[i].metrics.damage_dissipation_j <
        records[best_damage].metrics.damage_dissipation_j)
      best_damage = static_cast<int>(i);
  }

  std::string convergence = "unknown";
  const fs::path summary_path = dir / "summary.json";
  if (fs::exists(summary_path)) {
    std::ifstream sf(summary_path);
    try {
      json summary = json::parse(sf);
      if (summary.contains("terminated_by") && summary["terminated_by"].is_string())
        convergence = summary["terminated_by"].get<std::string>();
    } catch (const json::parse_error&) {
      // A broken summary downgrades to "unknown" rather than failing the report.
    }
  }

  std::vector<int> failed;
  for (const IterationRecord& rec : records)
    if (!rec.evaluation_completed) failed.push_back(rec.iteration);

  const fs::path evolution_path = dir / "evolution.csv";
  {
    std::ofstream out(evolution_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + evolution_path.string());
    out << "iteration,sea_per_volume,sea_per_mass,mwc,external_work_j,damage_dissipation_j,"
           "evaluation_completed\n";
    char buf[64];
    const auto put = [&](double v) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf;
    };
    for (const IterationRecord& rec : records) {
      out << rec.iteration << ',';
      put(rec.metrics.sea_per_volume);
      out << ',';
      if (rec.metrics.sea_per_mass) put(*rec.metrics.sea_per_mass);
      out << ',';
      put(rec.metrics.mwc);
      out << ',';
      put(rec.metrics.external_work_j);
      out << ',';
      put(rec.metrics.damage_dissipation_j);
      out << ',' << (rec.evaluation_completed ? 1 : 0) << '\n';
    }
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + evolution_path.string());
  }

  if (!args.quiet) {
    std::printf("iterations: %zu\n", records.size());
    std::printf("best sea_per_volume %.6g at iteration %d\n",
                records[best_sea].metrics.sea_per_volume, records[best_sea].iteration);
    std::printf("best damage_dissipation_j %.6g at iteration %d\n",
                records[best_damage].metrics.damage_dissipation_j,
                records[best_damage].iteration);
    std::printf("convergence: %s\n", convergence.c_str());
    if (failed.empty()) {
      std::printf("failed evaluations: none\n");
    } else {
      std::printf("failed evaluations:");
      for (size_t i = 0; i < failed.size(); ++i)
        std::printf("%s %d", i == 0 ? "" : ",", failed[i]);
      std::printf("\n");
    }
    std::printf("wrote %s\n", evolution_path.string().c_str());
  }
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Wall-thickness optimization for thin-walled extruded lattice panels"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "Execute a design optimization run");
  run_cmd->add_option("--config", run_args.config_path, "Run configuration (JSON)")
      ->required();
  run_cmd->add_option("--out-dir", run_args.out_dir,
                      "Artifact directory (overrides output.directory)");
  run_cmd->add_option("--max-iterations", run_args.max_iterations,
                      "Override the design iteration budget")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--scheme", run_args.scheme, "Override the update scheme")
      ->check(CLI::IsMember({1, 2}));
  run_cmd->add_option("--seed", run_args.seed,
                      "Reserved for stochastic evaluators; the built-in pipeline is "
                      "deterministic");
  run_cmd->add_flag("--quiet", run_args.quiet, "Suppress progress output");

  RenderArgs render_args;
  CLI::App* render_cmd = app.add_subcommand("render", "Draw a design CSV as an SVG plan view");
  render_cmd->add_option("--config", render_args.config_path, "Run configuration (JSON)")
      ->required();
  render_cmd->add_option("--design", render_args.design_path, "Design CSV to draw")->required();
  render_cmd->add_option("--out", render_args.out_path, "Output SVG path")->required();
  render_cmd
      ->add_option("--stroke-scale", render_args.stroke_px_per_mm,
                   "Stroke width in px per mm of thickness")
      ->check(CLI::PositiveNumber);

  ReportArgs report_args;
  CLI::App* report_cmd =
      app.add_subcommand("report", "Summarize a finished run from its history file");
  report_cmd
      ->add_option("--history", report_args.history_path,
                   "history.jsonl file or the directory holding it")
      ->required();
  report_cmd->add_flag("--quiet", report_args.quiet, "Only write evolution.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed())
      cmd_run(run_args);
    else if (render_cmd->parsed())
      cmd_render(render_args);
    else
      cmd_report(report_args);
    return 0;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace walltopo
