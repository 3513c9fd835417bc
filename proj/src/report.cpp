#include "gaitlab/report.hpp"

#include "gaitlab/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace gaitlab {

namespace {

constexpr const char* kResultsHeader =
    "angle_lo,angle_hi,timestep,overlap,dimensionality,fold,auroc,epochs_run,best_epoch";
constexpr const char* kMissing = "n/a";

std::string fmt(const char* format, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, x);
  return buf;
}

std::string angle(double x) { return fmt("%g", x); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << text;
  require(static_cast<bool>(out), ErrorKind::Io, "failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

template <typename T>
T parse_field(const std::string& text, const std::string& where, const char* what) {
  T value{};
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  require(!text.empty() && ec == std::errc() && p == text.data() + text.size(), ErrorKind::Parse,
          where + ": " + what + " '" + text + "' is not a valid number");
  return value;
}

std::string cell_text(const std::optional<Aggregate>& a) { return a ? format_mean_std(*a) : kMissing; }

std::optional<Aggregate> pool(const std::vector<ResultRow>& rows, auto&& keep) {
  std::vector<double> values;
  for (const auto& r : rows)
    if (keep(r) && r.auroc) values.push_back(*r.auroc);
  if (values.empty()) return std::nullopt;
  return aggregate(values);
}

std::string dim_label(int dims) { return std::to_string(dims) + "D"; }

}  // namespace

std::vector<ResultRow> to_rows(const std::vector<FoldResult>& results) {
  std::vector<ResultRow> rows;
  for (const auto& r : results) rows.push_back({r.cell, r.fold, r.auroc, r.epochs_run, r.best_epoch});
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) { return a.key() < b.key(); });
  return rows;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows) {
    out += angle(r.cell.group.lo) + "," + angle(r.cell.group.hi) + "," + std::to_string(r.cell.timestep) + "," +
           std::to_string(r.cell.overlap()) + "," + std::to_string(r.cell.dims) + "," + std::to_string(r.fold) +
           "," + (r.auroc ? fmt("%.17g", *r.auroc) : std::string("NA")) + "," + std::to_string(r.epochs_run) + "," +
           std::to_string(r.best_epoch) + "\n";
  }
  return out;
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  write_text(path, results_csv(rows));
}

std::vector<ResultRow> parse_results_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = source + ":" + std::to_string(number);
    if (number == 1) {
      require(line == kResultsHeader, ErrorKind::Parse, where + ": unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    require(f.size() == 9, ErrorKind::Parse,
            where + ": expected 9 fields, found " + std::to_string(f.size()));
    ResultRow r;
    r.cell.group.lo = parse_field<double>(f[0], where, "angle_lo");
    r.cell.group.hi = parse_field<double>(f[1], where, "angle_hi");
    r.cell.timestep = parse_field<int>(f[2], where, "timestep");
    const int overlap = parse_field<int>(f[3], where, "overlap");
    r.cell.dims = parse_field<int>(f[4], where, "dimensionality");
    r.fold = parse_field<int>(f[5], where, "fold");
    if (f[6] != "NA") {
      r.auroc = parse_field<double>(f[6], where, "auroc");
      require(*r.auroc >= 0.0 && *r.auroc <= 1.0, ErrorKind::Parse, where + ": auroc outside [0, 1]");
    }
    r.epochs_run = parse_field<int>(f[7], where, "epochs_run");
    r.best_epoch = parse_field<int>(f[8], where, "best_epoch");
    require(r.cell.group.lo < r.cell.group.hi, ErrorKind::Parse, where + ": angle_lo must be below angle_hi");
    require(r.cell.timestep >= 1 && overlap == r.cell.overlap(), ErrorKind::Parse,
            where + ": overlap must be floor(timestep / 2)");
    require(r.cell.dims == 2 || r.cell.dims == 3, ErrorKind::Parse, where + ": dimensionality must be 2 or 3");
    require(r.fold >= 0 && r.best_epoch >= 0 && r.best_epoch <= r.epochs_run, ErrorKind::Parse,
            where + ": fold and epoch fields are inconsistent");
    rows.push_back(r);
  }
  require(number >= 1, ErrorKind::Parse, source + ":1: missing header");
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) { return a.key() < b.key(); });
  for (std::size_t i = 1; i < rows.size(); ++i)
    require(rows[i - 1].key() != rows[i].key(), ErrorKind::Parse, source + ": duplicate (cell, fold) row");
  return rows;
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  return parse_results_csv(read_text(path), path.string());
}

std::vector<CellSummary> summarize(const std::vector<ResultRow>& rows) {
  std::set<CellKey> cells;
  for (const auto& r : rows) cells.insert(r.cell);
  std::vector<CellSummary> out;
  for (const auto& c : cells) {
    CellSummary s{c, pool(rows, [&](const ResultRow& r) { return r.cell == c; }), 0};
    s.folds = s.summary ? s.summary->count : 0;
    out.push_back(s);
  }
  return out;
}

std::vector<std::string> emit_report(const std::vector<ResultRow>& input, const std::filesystem::path& out_dir) {
  require(!input.empty(), ErrorKind::Validation, "no results");
  auto rows = input;
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) { return a.key() < b.key(); });

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  require(!ec && std::filesystem::is_directory(out_dir), ErrorKind::Io,
          "cannot create output directory '" + out_dir.string() + "'");

  std::set<AngleGroup> groups;
  std::set<int> dims;
  std::set<int, std::greater<>> timesteps;
  std::set<double> widths;
  for (const auto& r : rows) {
    groups.insert(r.cell.group);
    dims.insert(r.cell.dims);
    timesteps.insert(r.cell.timestep);
    widths.insert(r.cell.group.width());
  }

  // aggregate.csv
  std::string agg = "angle_lo,angle_hi,timestep,overlap,dimensionality,folds,mean,std\n";
  for (const auto& s : summarize(rows)) {
    agg += angle(s.cell.group.lo) + "," + angle(s.cell.group.hi) + "," + std::to_string(s.cell.timestep) + "," +
           std::to_string(s.cell.overlap()) + "," + std::to_string(s.cell.dims) + "," + std::to_string(s.folds) +
           "," + (s.summary ? format_fixed3(s.summary->mean) + "," + format_fixed3(s.summary->std) : "NA,NA") +
           "\n";
  }

  // Plot data: AUROC vs group pools every timestep; AUROC vs timestep is per cell.
  std::string by_group = "angle_lo,angle_hi,dimensionality,runs,mean,std\n";
  for (const auto& g : groups) {
    for (int d : dims) {
      const auto a = pool(rows, [&](const ResultRow& r) { return r.cell.group == g && r.cell.dims == d; });
      by_group += angle(g.lo) + "," + angle(g.hi) + "," + std::to_string(d) + "," + std::to_string(a ? a->count : 0) +
                  "," + (a ? format_fixed3(a->mean) + "," + format_fixed3(a->std) : "NA,NA") + "\n";
    }
  }
  std::string by_timestep = "angle_lo,angle_hi,dimensionality,timestep,overlap,folds,mean,std\n";
  for (const auto& g : groups) {
    for (int d : dims) {
      for (int t : timesteps) {
        const auto a =
            pool(rows, [&](const ResultRow& r) { return r.cell.group == g && r.cell.dims == d && r.cell.timestep == t; });
        if (!a && std::none_of(rows.begin(), rows.end(), [&](const ResultRow& r) {
              return r.cell == CellKey{g, t, d};
            }))
          continue;
        by_timestep += angle(g.lo) + "," + angle(g.hi) + "," + std::to_string(d) + "," + std::to_string(t) + "," +
                       std::to_string(t / 2) + "," + std::to_string(a ? a->count : 0) + "," +
                       (a ? format_fixed3(a->mean) + "," + format_fixed3(a->std) : "NA,NA") + "\n";
      }
    }
  }

  // report.md: one section per angle granularity (group width).
  std::string md = "# AUROC report\n";
  for (double w : widths) {
    std::vector<AngleGroup> gs;
    for (const auto& g : groups)
      if (g.width() == w) gs.push_back(g);

    md += "\n## Angle groups of " + angle(w) + " degrees\n\n### Average AUROC across all runs\n\n| Group [deg] |";
    for (const auto& g : gs) md += " " + g.label() + " |";
    md += "\n|---|";
    for (std::size_t i = 0; i < gs.size(); ++i) md += "---|";
    md += "\n";
    for (int d : dims) {
      md += "| " + dim_label(d) + " |";
      for (const auto& g : gs)
        md += " " + cell_text(pool(rows, [&](const ResultRow& r) { return r.cell.group == g && r.cell.dims == d; })) +
              " |";
      md += "\n";
    }

    md += "\n### Average AUROC per timestep and overlap\n\n| Group [deg] | Dims |";
    for (int t : timesteps) md += " T: " + std::to_string(t) + " O: " + std::to_string(t / 2) + " |";
    md += "\n|---|---|";
    for (std::size_t i = 0; i < timesteps.size(); ++i) md += "---|";
    md += "\n";
    for (const auto& g : gs) {
      for (int d : dims) {
        md += "| " + g.label() + " | " + dim_label(d) + " |";
        for (int t : timesteps)
          md += " " +
                cell_text(pool(rows, [&](const ResultRow& r) { return r.cell == CellKey{g, t, d}; })) + " |";
        md += "\n";
      }
    }
  }
  md +=
      "\nValues are mean ± population standard deviation over folds (and over timesteps in the per-group "
      "tables), computed on window-level logits with ties credited 0.5. " +
      std::string(kMissing) + " marks a cell without any fold that had both classes in its test set.\n";

  const std::vector<std::pair<std::string, std::string>> files = {
      {"aggregate.csv", agg},
      {"report.md", md},
      {"plot_auroc_by_group.csv", by_group},
      {"plot_auroc_by_timestep.csv", by_timestep},
  };
  std::vector<std::string> names;
  for (const auto& [name, text] : files) {
    write_text(out_dir / name, text);
    names.push_back(name);
  }
  return names;
}

}  // namespace gaitlab
