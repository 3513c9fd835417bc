#ifndef GAITLAB_METRICS_HPP
#define GAITLAB_METRICS_HPP

#include <span>
#include <string>

namespace gaitlab {

/// Mann-Whitney AUROC with ties credited 0.5. Throws a Metric error unless
/// both classes are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // population
  int count = 0;
};

Aggregate aggregate(std::span<const double> values);

/// "0.750 ± 0.250".
std::string format_mean_std(const Aggregate& a);

/// Fixed three-decimal rendering used by every table and CSV.
std::string format_fixed3(double value);

}  // namespace gaitlab

#endif  // GAITLAB_METRICS_HPP
