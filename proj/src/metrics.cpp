#include "gaitlab/metrics.hpp"

#include "gaitlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

namespace gaitlab {

double auroc(std::span<const double> scores, std::span<const int> labels) {
  require(scores.size() == labels.size(), ErrorKind::Metric, "scores and labels differ in length");
  std::size_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] == 0 || labels[i] == 1, ErrorKind::Metric, "labels must be 0 or 1");
    require(std::isfinite(scores[i]), ErrorKind::Metric, "scores must be finite");
    positives += static_cast<std::size_t>(labels[i]);
  }
  const std::size_t negatives = labels.size() - positives;
  require(positives > 0 && negatives > 0, ErrorKind::Metric, "AUROC needs both classes");

  // Midranks: rank sums of the positives are half-integers, so the
  // statistic is exact for any realistic sample size.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) positive_rank_sum += midrank;
    i = j;
  }
  const double np = static_cast<double>(positives);
  const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(negatives));
}

Aggregate aggregate(std::span<const double> values) {
  require(!values.empty(), ErrorKind::Metric, "aggregate of no values");
  // Sorting first makes the result independent of fold order bit for bit.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n), static_cast<int>(sorted.size())};
}

std::string format_fixed3(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  // Avoid "-0.000".
  if (std::string(buf) == "-0.000") return "0.000";
  return buf;
}

std::string format_mean_std(const Aggregate& a) { return format_fixed3(a.mean) + " ± " + format_fixed3(a.std); }

}  // namespace gaitlab
