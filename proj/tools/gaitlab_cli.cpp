// gaitlab: simulate pose datasets, run the cross-validated grid, re-emit reports.

#include "gaitlab/config.hpp"
#include "gaitlab/error.hpp"
#include "gaitlab/experiment.hpp"
#include "gaitlab/manifest.hpp"
#include "gaitlab/report.hpp"
#include "gaitlab/simulate.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace gaitlab;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string poses;
  std::string results;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string grid_subset;
  bool quiet = false;
};

LabConfig resolve_config(const Options& o) {
  LabConfig config = o.config.empty() ? parse_config("") : load_config(o.config);
  if (o.seed) config.experiment.master_seed = *o.seed;
  return config;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorKind::Io, "cannot create directory '" + dir.string() + "'");
}

int cmd_simulate(const Options& o) {
  const LabConfig config = resolve_config(o);
  const fs::path out(o.out);
  ensure_dir(out);
  const auto topology = build_skeleton(config.skeleton);
  const auto written = simulate_dataset(topology, config.simulation, config.experiment.angle_groups,
                                        config.experiment.videos_per_class, config.experiment.master_seed, out);
  RunManifest m{"simulate", GAITLAB_VERSION, config.experiment.master_seed, config.snapshot(), {}, {{"simulate", out.generic_string()}}, {}};
  std::vector<std::string> files;
  for (const auto& p : written) files.push_back(p.generic_string());
  add_files(m, out, files);
  write_manifest(m, out);
  if (!o.quiet) std::fprintf(stderr, "wrote %zu pose files to %s\n", written.size(), out.string().c_str());
  return 0;
}

int cmd_experiment(const Options& o) {
  LabConfig config = resolve_config(o);
  if (!o.grid_subset.empty()) apply_grid_subset(config.experiment, o.grid_subset);
  const fs::path poses(o.poses), out(o.out);
  verify_manifest(poses);
  ensure_dir(out);
  const auto topology = build_skeleton(config.skeleton);

  ExperimentOptions options;
  options.jobs = o.jobs;
  options.log_dir = out / "logs";
  if (!o.quiet)
    options.progress = [](const FoldResult& r, std::size_t done, std::size_t total) {
      std::fprintf(stderr, "[%zu/%zu] group %s T=%d %dD fold %d auroc %s epochs %d\n", done, total,
                   r.cell.group.label().c_str(), r.cell.timestep, r.cell.dims, r.fold,
                   r.auroc ? format_fixed3(*r.auroc).c_str() : "n/a", r.epochs_run);
    };
  const auto results = run_experiment(config.experiment, topology, poses, options);
  const auto rows = to_rows(results);
  write_results_csv(rows, out / "results.csv");
  std::vector<std::string> files = emit_report(rows, out);
  files.push_back("results.csv");
  for (const auto& entry : fs::directory_iterator(out / "logs"))
    files.push_back((fs::path("logs") / entry.path().filename()).generic_string());

  // The snapshot is taken after the grid subset, so it records what actually ran.
  RunManifest m{"experiment", GAITLAB_VERSION, config.experiment.master_seed, config.snapshot(),
                {{"simulate", poses.generic_string()}}, {{"experiment", out.generic_string()}}, {}};
  add_files(m, out, files);
  write_manifest(m, out);
  if (!o.quiet) std::fprintf(stderr, "wrote %zu fold results to %s\n", rows.size(), (out / "results.csv").string().c_str());
  return 0;
}

int cmd_report(const Options& o) {
  const fs::path results(o.results), out(o.out);
  const fs::path results_dir = results.has_parent_path() ? results.parent_path() : fs::path(".");
  verify_manifest(results_dir);
  const auto rows = read_results_csv(results);
  emit_report(rows, out);
  if (!o.quiet) std::fprintf(stderr, "wrote report for %zu fold results to %s\n", rows.size(), out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic quadruped gait lab: simulation, graph datasets, training and AUROC reports"};
  app.set_version_flag("--version", std::string(GAITLAB_VERSION));
  app.require_subcommand(1);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "Write pose files for every angle group");
  simulate->add_option("--config", o.config, "Config file (key = value)")->check(CLI::ExistingFile);
  simulate->add_option("--out", o.out, "Output directory")->required();
  simulate->add_option("--seed", o.seed, "Override the master seed");

  auto* experiment = app.add_subcommand("experiment", "Train and evaluate the cross-validated grid");
  experiment->add_option("--config", o.config, "Config file (key = value)")->check(CLI::ExistingFile);
  experiment->add_option("--poses", o.poses, "Directory written by simulate")->required();
  experiment->add_option("--out", o.out, "Output directory")->required();
  experiment->add_option("--seed", o.seed, "Override the master seed");
  experiment->add_option("--jobs", o.jobs, "Concurrent grid cells")->check(CLI::PositiveNumber);
  experiment->add_option("--grid-subset", o.grid_subset, "e.g. groups=45-90;timesteps=30;dims=2,3");

  auto* report = app.add_subcommand("report", "Re-emit tables from a results file");
  report->add_option("--results", o.results, "results.csv from experiment")->required();
  report->add_option("--out", o.out, "Output directory")->required();

  for (auto* sub : {simulate, experiment, report}) sub->add_flag("--quiet", o.quiet, "No progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*simulate) return cmd_simulate(o);
    if (*experiment) return cmd_experiment(o);
    return cmd_report(o);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: io: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
  }
  return 1;
}
