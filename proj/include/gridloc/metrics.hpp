#pragma once

#include <string>
#include <vector>

#include "gridloc/grid.hpp"

namespace gridloc {

// Per-step localization errors in meters.
using ErrorSeries = std::vector<double>;

struct ErrorStats {
  double mean = 0.0;
  double rms = 0.0;
  double q80 = 0.0;
  double q95 = 0.0;
  std::size_t count = 0;
};

struct CdfPoint {
  double error_m = 0.0;
  double fraction = 0.0;
};

// Sorted (error, cumulative fraction) pairs; errors strictly increasing,
// fractions strictly increasing to exactly 1.
using CdfCurve = std::vector<CdfPoint>;

// Euclidean distance between estimate and truth cell centers, one entry per
// step. Throws on length mismatch.
ErrorSeries error_series(const std::vector<CellIndex>& estimates,
                         const std::vector<CellIndex>& truth,
                         const GridMap& map);

// Mean, root mean square, and 80/95% quantiles by linear interpolation
// between closest order statistics (inclusive endpoints). Throws on an
// empty series.
ErrorStats stats(const ErrorSeries& series);

// Empirical CDF; duplicate errors collapse to the highest fraction at that
// value (right-continuous steps). Throws on an empty series.
CdfCurve cdf(const ErrorSeries& series);

struct MethodStats {
  std::string name;
  ErrorStats stats;
};

struct PairwiseDifference {
  std::string a;
  std::string b;
  double rms_reduction_pct = 0.0;  // (a - b) / a * 100 on rms
  double q95_reduction_pct = 0.0;
};

struct ComparisonReport {
  std::vector<PairwiseDifference> pairs;  // every ordered pair a != b
  std::vector<std::string> ranking;        // method names, ascending rms
};

// Throws when fewer than two runs are given.
ComparisonReport compare(const std::vector<MethodStats>& runs);

}  // namespace gridloc
