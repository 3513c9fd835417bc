// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any fails. Tolerances are fixed here, not taken from flags.
//
//   gaitlab_acceptance --work-dir DIR             CI-scale grid subset
//   gaitlab_acceptance --full-results results.csv  qualitative check on a full run

#include "gaitlab/config.hpp"
#include "gaitlab/dataset.hpp"
#include "gaitlab/experiment.hpp"
#include "gaitlab/geometry.hpp"
#include "gaitlab/metrics.hpp"
#include "gaitlab/optimizer.hpp"
#include "gaitlab/report.hpp"
#include "gaitlab/simulate.hpp"

#include "gradcheck.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

using namespace gaitlab;
namespace fs = std::filesystem;

namespace {

constexpr double kGradientTolerance = 1e-4;
constexpr double kExactTolerance = 1e-12;
constexpr double kFirstStepTolerance = 1e-9;
constexpr double kSideViewFloor = 0.9;
constexpr double kOccludedGap = 0.15;
constexpr double kCiBudgetSeconds = 300.0;
constexpr std::uint64_t kSeed = 2024;

// Grid subset run inside ctest: the side-view group with the affected hip
// in sight, the two shortest windows, both feature types.
const char* kCiSubset = "groups=45-90;timesteps=10,5;dims=2,3";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome gradient() {
  double worst = 0.0;
  std::string detail;
  for (const auto& e : gradcheck::run(40, kSeed)) {
    worst = std::max(worst, e.max_relative_error);
    detail += e.layer + " " + fmt("%.1e", e.max_relative_error) + ", ";
  }
  return {worst < kGradientTolerance, detail + "limit " + fmt("%.0e", kGradientTolerance)};
}

Outcome auroc_oracle() {
  Rng rng(derive_seed(kSeed, "auroc"));
  double worst = 0.0;
  int with_ties = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(199));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = trial % 2 ? rng.uniform() : static_cast<double>(rng.below(8));
      labels[i] = static_cast<int>(rng.below(2));
    }
    labels[0] = 0;
    labels[1] = 1;
    std::set<double> distinct(scores.begin(), scores.end());
    with_ties += distinct.size() < scores.size();
    worst = std::max(worst, std::abs(auroc(scores, labels) - oracle::auroc_pairwise(scores, labels)));
  }
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> l{0, 0, 1, 1};
  const double hand = auroc(s, l);
  return {worst <= kExactTolerance && hand == 0.75,
          "1000 instances (" + std::to_string(with_ties) + " with ties), max diff " + fmt("%.1e", worst) +
              ", hand case " + fmt("%.3f", hand)};
}

Outcome masked_standardization() {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  MaskArray m(3, 1);
  m << true, false, true;
  const auto ex = mask_and_standardize(x, m);
  const bool example = std::abs(ex(0, 0) + 1.0) < kExactTolerance && ex(1, 0) == -1.0 &&
                       std::abs(ex(2, 0) - 1.0) < kExactTolerance;
  const bool all_masked = (mask_and_standardize(x, MaskArray::Constant(3, 1, false)).array() == -1.0).all();

  Rng rng(derive_seed(kSeed, "standardize"));
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(40));
    Eigen::MatrixXd v(n, 1);
    MaskArray vm(n, 1);
    for (int i = 0; i < n; ++i) {
      v(i, 0) = rng.uniform(-5, 5);
      vm(i, 0) = rng.uniform() < 0.6;
    }
    const auto base = mask_and_standardize(v, vm);
    const int at = static_cast<int>(rng.below(n + 1));
    const int extra = 1 + static_cast<int>(rng.below(4));
    Eigen::MatrixXd w(n + extra, 1);
    MaskArray wm(n + extra, 1);
    w.topRows(at) = v.topRows(at);
    wm.topRows(at) = vm.topRows(at);
    for (int i = 0; i < extra; ++i) {
      w(at + i, 0) = rng.uniform(-50, 50);
      wm(at + i, 0) = false;
    }
    w.bottomRows(n - at) = v.bottomRows(n - at);
    wm.bottomRows(n - at) = vm.bottomRows(n - at);
    const auto out = mask_and_standardize(w, wm);
    for (int i = 0; i < n; ++i) {
      const int j = i < at ? i : i + extra;
      if (out(j, 0) != base(i, 0)) ++violations;
      if (!vm(i, 0) && base(i, 0) != -1.0) ++violations;
    }
    for (int i = 0; i < extra; ++i)
      if (out(at + i, 0) != -1.0) ++violations;
  }
  return {example && all_masked && violations == 0,
          std::string("[1, -, 3] -> [") + fmt("%.1f", ex(0, 0)) + ", " + fmt("%.0f", ex(1, 0)) + ", " +
              fmt("%.1f", ex(2, 0)) + "], all-masked " + (all_masked ? "stays -1" : "changed") + ", " +
              std::to_string(violations) + " insertion violations in 1000 series"};
}

Outcome windowing() {
  int mismatches = 0;
  for (int length = 0; length <= 500; ++length)
    for (int t = 1; t <= 50; ++t)
      if (static_cast<int>(window_sequence(length, t).size()) != oracle::window_count(length, t)) ++mismatches;
  const auto w30 = window_sequence(175, 30).size();
  const auto w5 = window_sequence(175, 5).size();
  return {mismatches == 0 && w30 == 10 && w5 == 57 && window_overlap(5) == 2,
          std::to_string(mismatches) + " mismatches over L<=500, T<=50; L=175: T=30 -> " + std::to_string(w30) +
              ", T=5 -> " + std::to_string(w5) + " (overlap " + std::to_string(window_overlap(5)) + ")"};
}

Outcome optimizer() {
  const AdamWConfig cfg;
  Eigen::MatrixXd theta = Eigen::MatrixXd::Ones(1, 1);
  Moments m{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)};
  adamw_update(theta, Eigen::MatrixXd::Ones(1, 1), m, 1, cfg);
  const double first = theta(0, 0);

  Rng rng(derive_seed(kSeed, "adamw"));
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    AdamWConfig c;
    c.learning_rate = rng.uniform(1e-4, 0.05);
    c.weight_decay = rng.uniform(0.0, 0.1);
    Eigen::MatrixXd t = Eigen::MatrixXd::Constant(1, 1, rng.uniform(-2, 2));
    std::vector<double> grads(10);
    for (auto& g : grads) g = rng.uniform(-3, 3);
    const auto expected =
        oracle::adamw_trajectory(t(0, 0), grads, c.learning_rate, c.weight_decay, c.beta1, c.beta2, c.epsilon);
    Moments s{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)};
    for (int k = 0; k < 10; ++k) {
      adamw_update(t, Eigen::MatrixXd::Constant(1, 1, grads[k]), s, k + 1, c);
      worst = std::max(worst, std::abs(t(0, 0) - expected[k]));
    }
  }
  return {std::abs(first - 0.997980) <= kFirstStepTolerance && worst <= kExactTolerance,
          "first step " + fmt("%.9f", first) + ", 100 ten-step trajectories max diff " + fmt("%.1e", worst)};
}

Outcome visibility() {
  Rng rng(derive_seed(kSeed, "visibility"));
  int decided = 0, disagreements = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec3 origin(rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(0, 3));
    const Vec3 target(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1));
    const Sphere s{origin + rng.uniform(0.0, 1.2) * (target - origin) +
                       Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)),
                   rng.uniform(0.05, 1.5)};
    const std::vector<Occluder> occ{{Shape::Sphere, s.center, Vec3(s.radius, 0, 0), Vec3::Zero()}};
    bool near = false;
    const bool expected = oracle::ray_march_visible(origin, target, {s}, 10000, 1e-4, near);
    if (near) continue;
    ++decided;
    disagreements += ray_visible(origin, target, occ, {}) != expected;
  }
  return {disagreements == 0 && decided >= 900,
          std::to_string(disagreements) + " disagreements in " + std::to_string(decided) +
              " scenes outside the tangency band (1000 drawn)"};
}

struct CiRun {
  std::vector<FoldResult> results;
  std::string csv;
  double seconds = 0.0;
};

ExperimentConfig ci_config() {
  LabConfig lab;
  lab.set("angle_groups", "0-45,45-90,90-135,135-180,180-225,225-270,270-315,315-360");
  lab.set("seed", std::to_string(kSeed));
  apply_grid_subset(lab.experiment, kCiSubset);
  return lab.experiment;
}

CiRun run_ci(const fs::path& poses) {
  const auto start = std::chrono::steady_clock::now();
  CiRun run;
  ExperimentOptions options;
  options.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  run.results = run_experiment(ci_config(), build_skeleton(), poses, options);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  run.csv = results_csv(to_rows(run.results));
  return run;
}

Outcome protocol(const CiRun& a, const CiRun& b) {
  std::vector<std::string> videos;
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) {
    videos.push_back("v" + std::to_string(i));
    labels.push_back(i < 15 ? 0 : 1);
  }
  bool balanced = true;
  for (const auto& f : stratified_kfold(videos, labels, 5, fold_split_seed(kSeed))) {
    int pos = 0;
    for (const auto& v : f.test_videos) pos += labels[std::stoi(v.substr(1))];
    balanced = balanced && f.test_videos.size() == 6 && pos == 3;
  }
  int leaks = 0;
  for (const auto& r : a.results) {
    try {
      check_no_leakage(r);
    } catch (const Error&) {
      ++leaks;
    }
  }
  const bool identical = a.csv == b.csv;
  return {balanced && leaks == 0 && identical && !a.results.empty(),
          std::string("30 videos, k=5: ") + (balanced ? "every test fold 3+3" : "unbalanced folds") + ", " +
              std::to_string(leaks) + " leaking folds of " + std::to_string(a.results.size()) +
              ", repeat run " + (identical ? "byte-identical" : "differs")};
}

struct DimMeans {
  double d2 = 0.0, d3 = 0.0;
  int n2 = 0, n3 = 0;
};

// Mean over cells of the per-cell fold mean, by dimensionality.
DimMeans dim_means(const std::vector<ResultRow>& rows) {
  DimMeans m;
  for (const auto& s : summarize(rows)) {
    if (!s.summary) continue;
    (s.cell.dims == 2 ? m.d2 : m.d3) += s.summary->mean;
    ++(s.cell.dims == 2 ? m.n2 : m.n3);
  }
  if (m.n2) m.d2 /= m.n2;
  if (m.n3) m.d3 /= m.n3;
  return m;
}

Outcome qualitative_ci(const CiRun& run) {
  const auto m = dim_means(to_rows(run.results));
  const bool ok = m.n2 > 0 && m.n3 > 0 && m.d3 > m.d2 && run.seconds <= kCiBudgetSeconds;
  return {ok, std::string("CI subset ") + kCiSubset + ": (a) mean 3D " + fmt("%.3f", m.d3) + " vs 2D " +
                  fmt("%.3f", m.d2) + " over " + std::to_string(m.n3 + m.n2) + " cells; " +
                  fmt("%.0f", run.seconds) + " s (budget " + fmt("%.0f", kCiBudgetSeconds) + " s)"};
}

Outcome qualitative_full(const fs::path& results_path) {
  const auto rows = read_results_csv(results_path);
  const auto m = dim_means(rows);
  // Mean 3D AUROC per group, pooled over timesteps and folds.
  std::map<AngleGroup, std::vector<double>> by_group;
  for (const auto& r : rows)
    if (r.cell.dims == 3 && r.auroc) by_group[r.cell.group].push_back(*r.auroc);
  std::map<AngleGroup, double> mean3;
  for (const auto& [g, v] : by_group) mean3[g] = aggregate(v).mean;

  // The affected hip is on the left; 45-90 looks at it from the side.
  const AngleGroup side{45, 90};
  const bool has_side = mean3.contains(side);
  const double side_mean = has_side ? mean3[side] : 0.0;
  double best = 0.0, worst_occluded = 1.0;
  AngleGroup worst_group;
  for (const auto& [g, v] : mean3) {
    best = std::max(best, v);
    if (g.lo >= 180.0 && v < worst_occluded) {
      worst_occluded = v;
      worst_group = g;
    }
  }
  const bool a = m.d3 > m.d2;
  const bool b = has_side && side_mean >= kSideViewFloor;
  const bool c = best - worst_occluded >= kOccludedGap;
  return {a && b && c && mean3.size() == 8,
          std::string("(a) ") + (a ? "ok" : "FAIL") + " 3D " + fmt("%.3f", m.d3) + " vs 2D " + fmt("%.3f", m.d2) +
              "; (b) " + (b ? "ok" : "FAIL") + " 45-90 3D " + fmt("%.3f", side_mean) + " >= " +
              fmt("%.2f", kSideViewFloor) + "; (c) " + (c ? "ok" : "FAIL") + " best " + fmt("%.3f", best) + ", " +
              worst_group.label() + " " + fmt("%.3f", worst_occluded) + " (gap >= " + fmt("%.2f", kOccludedGap) +
              "); " + std::to_string(mean3.size()) + " groups"};
}

void report(const std::string& name, const std::function<Outcome()>& check, int& failures) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s  %-26s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), s);
  std::fflush(stdout);
  failures += !o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gaitlab acceptance checks"};
  fs::path work = fs::temp_directory_path() / "gaitlab_acceptance";
  fs::path full_results;
  app.add_option("--work-dir", work, "Scratch directory for the CI subset");
  app.add_option("--full-results", full_results, "results.csv of a full high-granularity run")
      ->check(CLI::ExistingFile);
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  report("gradient correctness", gradient, failures);
  report("auroc oracle", auroc_oracle, failures);
  report("masked standardization", masked_standardization, failures);
  report("windowing counts", windowing, failures);

  // The CI subset runs twice: once for the qualitative check, once more to
  // compare result bytes.
  std::optional<CiRun> first, second;
  std::string setup_error;
  try {
    fs::remove_all(work);
    const auto poses = work / "poses";
    LabConfig lab;
    lab.set("seed", std::to_string(kSeed));
    simulate_dataset(build_skeleton(), lab.simulation, ci_config().angle_groups, lab.experiment.videos_per_class,
                     kSeed, poses);
    first = run_ci(poses);
    second = run_ci(poses);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  const auto need_runs = [&](auto f) {
    return [&, f]() -> Outcome {
      if (!first || !second) return {false, "grid subset did not run: " + setup_error};
      return f();
    };
  };
  report("protocol integrity", need_runs([&] { return protocol(*first, *second); }), failures);
  if (full_results.empty())
    report("qualitative reproduction", need_runs([&] { return qualitative_ci(*first); }), failures);
  else
    report("qualitative reproduction", [&] { return qualitative_full(full_results); }, failures);
  report("optimizer correctness", optimizer, failures);
  report("visibility raycasting", visibility, failures);

  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
