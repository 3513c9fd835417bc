#ifndef GAITLAB_REPORT_HPP
#define GAITLAB_REPORT_HPP

#include "gaitlab/experiment.hpp"
#include "gaitlab/metrics.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gaitlab {

/// One line of the results file.
struct ResultRow {
  CellKey cell;
  int fold = 0;
  std::optional<double> auroc;
  int epochs_run = 0;
  int best_epoch = 0;

  auto key() const { return std::tie(cell, fold); }
};

std::vector<ResultRow> to_rows(const std::vector<FoldResult>& results);

/// angle_lo,angle_hi,timestep,overlap,dimensionality,fold,auroc,epochs_run,best_epoch.
/// AUROC is written with 17 significant digits so a re-read reports the
/// same tables; missing cells are "NA".
std::string results_csv(const std::vector<ResultRow>& rows);
void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

/// Parse errors carry the 1-based line number.
std::vector<ResultRow> parse_results_csv(const std::string& text, const std::string& source = "results");
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

/// Per cell: folds with an AUROC, their mean and population std. Cells
/// whose every fold is missing have no aggregate.
struct CellSummary {
  CellKey cell;
  std::optional<Aggregate> summary;
  int folds = 0;
};

std::vector<CellSummary> summarize(const std::vector<ResultRow>& rows);

/// Writes aggregate.csv, report.md (group tables and timestep tables per
/// angle granularity), plot_auroc_by_group.csv and plot_auroc_by_timestep.csv.
/// Returns the written file names. Throws a Validation error ("no results")
/// before touching the directory when `rows` is empty.
std::vector<std::string> emit_report(const std::vector<ResultRow>& rows, const std::filesystem::path& out_dir);

}  // namespace gaitlab

#endif  // GAITLAB_REPORT_HPP
