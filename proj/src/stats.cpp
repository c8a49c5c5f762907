#include "potions/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace potions {

double emd_1d(std::span<const double> f, std::span<const double> g) {
  if (f.empty() || g.empty()) throw StatsError("EMD needs two nonempty sample sets");
  std::vector<double> x(f.begin(), f.end());
  std::vector<double> y(g.begin(), g.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());

  // Sweep the merged support; between consecutive breakpoints both CDFs are flat.
  const double wx = 1.0 / static_cast<double>(x.size());
  const double wy = 1.0 / static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(x.front(), y.front());
  double total = 0.0;
  while (i < x.size() || j < y.size()) {
    const double next = j == y.size() || (i < x.size() && x[i] <= y[j]) ? x[i] : y[j];
    const double cdf_gap = std::abs(static_cast<double>(i) * wx - static_cast<double>(j) * wy);
    total += cdf_gap * (next - prev);
    while (i < x.size() && x[i] == next) ++i;
    while (j < y.size() && y[j] == next) ++j;
    prev = next;
  }
  return total;
}

double emd_1d(const EmpiricalDistribution& f, const EmpiricalDistribution& g) {
  return emd_1d(std::span<const double>(f.samples), std::span<const double>(g.samples));
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw StatsError("quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary summarize(const EmpiricalDistribution& d) {
  if (d.samples.empty()) throw StatsError("cannot summarize an empty distribution");
  std::vector<double> s = d.samples;
  std::sort(s.begin(), s.end());
  Summary out;
  out.count = s.size();
  out.censored_count = d.censored_count;
  out.mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  out.median = quantile_sorted(s, 0.5);
  out.q1 = quantile_sorted(s, 0.25);
  out.q3 = quantile_sorted(s, 0.75);
  out.min = s.front();
  out.max = s.back();
  return out;
}

}  // namespace potions
