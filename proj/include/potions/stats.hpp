#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace potions {

class StatsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Discovery times of the runs that finished; censored runs are only counted.
struct EmpiricalDistribution {
  std::vector<double> samples;
  std::size_t censored_count = 0;
};

/// 1-Wasserstein distance between two equal-weight empirical measures,
/// computed as the integral of |F - G| over the line.
double emd_1d(std::span<const double> f, std::span<const double> g);
double emd_1d(const EmpiricalDistribution& f, const EmpiricalDistribution& g);

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;  // linear interpolation between order statistics
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
  std::size_t censored_count = 0;
};

Summary summarize(const EmpiricalDistribution& d);

/// Quantile by linear interpolation on sorted data (p in [0,1]).
double quantile_sorted(std::span<const double> sorted, double p);

}  // namespace potions
