#include "gridloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gridloc {

ErrorSeries error_series(const std::vector<CellIndex>& estimates,
                         const std::vector<CellIndex>& truth,
                         const GridMap& map) {
  if (estimates.size() != truth.size())
    throw std::invalid_argument("estimate and truth lengths differ");
  ErrorSeries errors;
  errors.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i)
    errors.push_back(
        distance(map.cell_center(estimates[i]), map.cell_center(truth[i])));
  return errors;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

ErrorStats stats(const ErrorSeries& series) {
  if (series.empty()) throw std::invalid_argument("empty error series");
  std::vector<double> sorted(series);
  std::sort(sorted.begin(), sorted.end());

  const auto n = static_cast<double>(series.size());
  double sum = 0.0, sum_sq = 0.0;
  for (double e : sorted) {
    sum += e;
    sum_sq += e * e;
  }
  return {sum / n, std::sqrt(sum_sq / n), quantile_sorted(sorted, 0.80),
          quantile_sorted(sorted, 0.95), series.size()};
}

CdfCurve cdf(const ErrorSeries& series) {
  if (series.empty()) throw std::invalid_argument("empty error series");
  std::vector<double> sorted(series);
  std::sort(sorted.begin(), sorted.end());

  const auto n = static_cast<double>(sorted.size());
  CdfCurve curve;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double fraction = static_cast<double>(i + 1) / n;
    if (!curve.empty() && curve.back().error_m == sorted[i])
      curve.back().fraction = fraction;
    else
      curve.push_back({sorted[i], fraction});
  }
  curve.back().fraction = 1.0;
  return curve;
}

ComparisonReport compare(const std::vector<MethodStats>& runs) {
  if (runs.size() < 2)
    throw std::invalid_argument("comparison needs at least two runs");

  ComparisonReport report;
  for (const auto& a : runs) {
    for (const auto& b : runs) {
      if (&a == &b) continue;
      report.pairs.push_back(
          {a.name, b.name,
           a.stats.rms != 0.0
               ? (a.stats.rms - b.stats.rms) / a.stats.rms * 100.0
               : 0.0,
           a.stats.q95 != 0.0
               ? (a.stats.q95 - b.stats.q95) / a.stats.q95 * 100.0
               : 0.0});
    }
  }

  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return runs[i].stats.rms < runs[j].stats.rms;
  });
  for (std::size_t i : order) report.ranking.push_back(runs[i].name);
  return report;
}

}  // namespace gridloc
